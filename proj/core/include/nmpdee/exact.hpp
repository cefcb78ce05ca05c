#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "nmpdee/noise.hpp"

namespace nmpdee {

/// Closed-form reference densities.
enum class ExactFamily {
  StationaryDoubleWell,
  OuTransient,
  GbmTimeVarying,
  LinearFbmLognormal,
  FgnOnlyGeneral,
};

const char* to_string(ExactFamily family);

/// Adaptive Gauss–Kronrod integral of fn over [a, b].
double integrate_adaptive(const std::function<double(double)>& fn, double a, double b, double tol = 1e-12);

/// C1 exp{(2 a x^2 - b x^4) / (2 sigma^2)}, normalized on [lo, hi]. Requires b > 0.
class StationaryDoubleWell {
 public:
  StationaryDoubleWell(double a, double b, double sigma, double lo, double hi);
  double operator()(double x) const;
  double normalization() const noexcept { return c1_; }

 private:
  double a_, b_, sigma_;
  double c1_;
};

double stationary_double_well(double x, double a, double b, double sigma, double lo = -3.0, double hi = 3.0);

/// Transient Gaussian of dX = aX dt + sigma dW from X_0 = 0: variance sigma^2 (1 - e^{2at}) / (-2a).
double ou_transient(double x, double t, double a, double sigma);

/// Lognormal density of dX = sqrt(a) t^b X o dW: ln X ~ N(ln x0, a t^{2b+1} / (2b+1)). Zero for x <= 0.
double gbm_time_varying(double x, double t, double a, double b, double x0);

/// Centering of the log-variable in the b = 0 linear FGN solution.
enum class LognormalCentering {
  Printed,    ///< ln(x/x0) - x0 - a t, as the closed form is commonly stated
  DriftOnly,  ///< ln(x/x0) - a t, the pathwise solution x0 exp(a t + c B^H_t)
};

/// (x sqrt(2 pi c^2 t^{2H}))^{-1} exp{-(centered log)^2 / (2 c^2 t^{2H})}. Zero for x <= 0.
double linear_fbm_lognormal(double x, double t, double a, double c, HurstParameter hurst, double x0,
                            LognormalCentering centering = LognormalCentering::DriftOnly);

/// C1 (t^{2H} h(x)^2 / 2)^{-1/2} exp{-xhat(x)^2 / (2 t^{2H})} with xhat(x) = int_{x0}^x dy / h(y),
/// normalized numerically on [lo, hi] per time (cached).
class FgnOnlyExact {
 public:
  /// `inverse_h_antiderivative` G with G' = 1/h; if empty, xhat is computed by quadrature.
  FgnOnlyExact(std::function<double(double)> h, std::function<double(double)> inverse_h_antiderivative,
               HurstParameter hurst, double x0, double lo, double hi);

  /// h(x) = sqrt(1 + sigma x^2), xhat = asinh(sqrt(sigma) x) / sqrt(sigma) (x0 = 0).
  static FgnOnlyExact sqrt_quadratic(double sigma, HurstParameter hurst, double lo, double hi);

  double operator()(double x, double t) const;
  /// Density before normalization (C1 = 1).
  double unnormalized(double x, double t) const;
  double normalization(double t) const;

 private:
  double xhat(double x) const;

  std::function<double(double)> h_;
  std::function<double(double)> antiderivative_;
  HurstParameter hurst_;
  double x0_, lo_, hi_;
  struct Cache {
    std::mutex mutex;
    std::map<double, double> c1;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

double fgn_only_general(double x, double t, const FgnOnlyExact& exact);

}  // namespace nmpdee

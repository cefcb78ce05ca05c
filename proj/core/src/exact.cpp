#include "nmpdee/exact.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "nmpdee/errors.hpp"

namespace nmpdee {

const char* to_string(ExactFamily family) {
  switch (family) {
    case ExactFamily::StationaryDoubleWell: return "STATIONARY_DOUBLE_WELL";
    case ExactFamily::OuTransient: return "OU_TRANSIENT";
    case ExactFamily::GbmTimeVarying: return "GBM_TIME_VARYING";
    case ExactFamily::LinearFbmLognormal: return "LINEAR_FBM_LOGNORMAL";
    case ExactFamily::FgnOnlyGeneral: return "FGN_ONLY_GENERAL";
  }
  return "?";
}

double integrate_adaptive(const std::function<double(double)>& fn, double a, double b, double tol) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(fn, a, b, 20, tol);
}

// --- double well -----------------------------------------------------------

StationaryDoubleWell::StationaryDoubleWell(double a, double b, double sigma, double lo, double hi)
    : a_(a), b_(b), sigma_(sigma), c1_(1.0) {
  if (!(b > 0.0)) throw DomainError("stationary_double_well: b must be positive (normalizable)");
  if (!(sigma > 0.0)) throw DomainError("stationary_double_well: sigma must be positive");
  if (!(lo < hi)) throw DomainError("stationary_double_well: empty truncation domain");
  const double mass = integrate_adaptive([this](double x) { return (*this)(x); }, lo, hi);
  c1_ = 1.0 / mass;
}

double StationaryDoubleWell::operator()(double x) const {
  const double x2 = x * x;
  return c1_ * std::exp((2.0 * a_ * x2 - b_ * x2 * x2) / (2.0 * sigma_ * sigma_));
}

double stationary_double_well(double x, double a, double b, double sigma, double lo, double hi) {
  return StationaryDoubleWell(a, b, sigma, lo, hi)(x);
}

// --- OU --------------------------------------------------------------------

double ou_transient(double x, double t, double a, double sigma) {
  if (!(t > 0.0)) throw DomainError("ou_transient: t must be positive (t = 0 is the delta limit)");
  if (!(a < 0.0)) throw DomainError("ou_transient: a must be negative");
  const double var = sigma * sigma * (-std::expm1(2.0 * a * t)) / (-2.0 * a);
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// --- lognormals ------------------------------------------------------------

double gbm_time_varying(double x, double t, double a, double b, double x0) {
  if (!(t > 0.0)) throw DomainError("gbm_time_varying: t must be positive");
  if (!(x0 > 0.0)) throw DomainError("gbm_time_varying: x0 must be positive");
  if (x <= 0.0) return 0.0;
  const double var = a * std::pow(t, 2.0 * b + 1.0) / (2.0 * b + 1.0);
  const double z = std::log(x) - std::log(x0);
  return std::exp(-0.5 * z * z / var) / (x * std::sqrt(2.0 * std::numbers::pi * var));
}

double linear_fbm_lognormal(double x, double t, double a, double c, HurstParameter hurst, double x0,
                            LognormalCentering centering) {
  if (!(t > 0.0)) throw DomainError("linear_fbm_lognormal: t must be positive");
  if (!(x0 > 0.0)) throw DomainError("linear_fbm_lognormal: x0 must be positive");
  if (x <= 0.0) return 0.0;
  const double var = c * c * std::pow(t, 2.0 * hurst.value());
  double z = std::log(x / x0) - a * t;
  if (centering == LognormalCentering::Printed) z -= x0;
  return std::exp(-0.5 * z * z / var) / (x * std::sqrt(2.0 * std::numbers::pi * var));
}

// --- FGN only --------------------------------------------------------------

FgnOnlyExact::FgnOnlyExact(std::function<double(double)> h, std::function<double(double)> inverse_h_antiderivative,
                           HurstParameter hurst, double x0, double lo, double hi)
    : h_(std::move(h)), antiderivative_(std::move(inverse_h_antiderivative)), hurst_(hurst), x0_(x0), lo_(lo), hi_(hi) {
  if (!(lo < hi)) throw DomainError("fgn_only_general: empty truncation domain");
  constexpr int kProbe = 2001;
  for (int i = 0; i < kProbe; ++i) {
    const double x = lo + (hi - lo) * i / (kProbe - 1.0);
    if (!(h_(x) > 0.0)) {
      throw DomainError("fgn_only_general: h must be positive on the domain (fails at x = " + std::to_string(x) + ")");
    }
  }
}

FgnOnlyExact FgnOnlyExact::sqrt_quadratic(double sigma, HurstParameter hurst, double lo, double hi) {
  if (!(sigma > 0.0)) throw DomainError("sqrt_quadratic: sigma must be positive");
  const double rs = std::sqrt(sigma);
  return FgnOnlyExact([sigma](double x) { return std::sqrt(1.0 + sigma * x * x); },
                      [rs](double x) { return std::asinh(rs * x) / rs; }, hurst, 0.0, lo, hi);
}

double FgnOnlyExact::xhat(double x) const {
  if (antiderivative_) return antiderivative_(x) - antiderivative_(x0_);
  if (x == x0_) return 0.0;
  return integrate_adaptive([this](double y) { return 1.0 / h_(y); }, x0_, x, 1e-13);
}

double FgnOnlyExact::unnormalized(double x, double t) const {
  if (!(t > 0.0)) throw DomainError("fgn_only_general: t must be positive");
  const double t2h = std::pow(t, 2.0 * hurst_.value());
  const double hx = h_(x);
  const double xh = xhat(x);
  return std::exp(-0.5 * xh * xh / t2h) / std::sqrt(0.5 * t2h * hx * hx);
}

double FgnOnlyExact::normalization(double t) const {
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->c1.find(t); it != cache_->c1.end()) return it->second;
  }
  const double mass = integrate_adaptive([&](double x) { return unnormalized(x, t); }, lo_, hi_);
  const double c1 = 1.0 / mass;
  std::lock_guard lock(cache_->mutex);
  cache_->c1.emplace(t, c1);
  return c1;
}

double FgnOnlyExact::operator()(double x, double t) const { return normalization(t) * unnormalized(x, t); }

double fgn_only_general(double x, double t, const FgnOnlyExact& exact) { return exact(x, t); }

}  // namespace nmpdee

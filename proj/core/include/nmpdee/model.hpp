#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "nmpdee/noise.hpp"

namespace nmpdee {

/// Scalar field of (t, x) with analytic first and second x-derivatives.
struct StateField {
  using Fn = std::function<double(double t, double x)>;
  Fn value;
  Fn dx;
  Fn dxx;
  bool autonomous = true;  ///< no explicit t dependence

  double operator()(double t, double x) const { return value(t, x); }

  static StateField zero();
  static StateField constant(double c);
  /// c * x
  static StateField linear(double c);
  /// Polynomial sum_i coeffs[i] x^i.
  static StateField polynomial(std::vector<double> coeffs);
  /// scale(t) * base(x); autonomous only if `scale` is flagged constant.
  static StateField time_scaled(std::function<double(double)> scale, StateField base);
};

/// Closed-form tag for a time coefficient, used to short-circuit the memory integral.
struct TimeClosedForm {
  enum class Kind { Constant, PowerLaw };
  Kind kind = Kind::Constant;
  double c = 0.0;
  double d = 0.0;  ///< exponent for PowerLaw: c * t^d
};

/// Scalar function of t, optionally carrying a closed-form tag.
struct TimeField {
  std::function<double(double)> value;
  std::optional<TimeClosedForm> closed_form;

  double operator()(double t) const { return value(t); }

  static TimeField constant(double c);
  static TimeField power_law(double c, double d);
  static TimeField custom(std::function<double(double)> fn);
};

enum class ModelClass { PureGwn, PureFgn, LinearTv, NonlinearCommutative };

const char* to_string(ModelClass cls);

/// dX = f dt + g o dW + h o dB^H with deterministic X_0 = x0. One bundle feeds
/// both the Monte Carlo integrator and the density-equation builder.
class SdeModel {
 public:
  struct Fields {
    StateField f;
    StateField g;
    StateField h;
  };
  struct LinearCoefficients {
    TimeField a;
    TimeField b;
    TimeField c;
  };

  /// GWN only: dX = f dt + g o dW.
  static SdeModel pure_gwn(StateField f, StateField g, double x0);
  /// FGN only, no drift: dX = h(X) o dB^H.
  static SdeModel pure_fgn(StateField h, HurstParameter hurst, double x0);
  /// dX = A_t X dt + B_t X o dW + C_t X o dB^H.
  static SdeModel linear(TimeField a, TimeField b, TimeField c, HurstParameter hurst, double x0);
  /// Autonomous f, g, h satisfying the commutativity conditions.
  static SdeModel nonlinear_commutative(StateField f, StateField g, StateField h, HurstParameter hurst,
                                        double x0);

  ModelClass model_class() const noexcept { return class_; }
  double x0() const noexcept { return x0_; }
  HurstParameter hurst() const noexcept { return hurst_; }

  /// f, g, h as state fields; for the linear class they are A_t x, B_t x, C_t x.
  const Fields& fields() const noexcept { return fields_; }
  /// Present only for the linear class.
  const LinearCoefficients* linear_coefficients() const noexcept {
    return std::get_if<LinearCoefficients>(&linear_);
  }

  double drift(double t, double x) const { return fields_.f.value(t, x); }
  double gwn_diffusion(double t, double x) const { return fields_.g.value(t, x); }
  double fgn_diffusion(double t, double x) const { return fields_.h.value(t, x); }

 private:
  SdeModel(ModelClass cls, Fields fields, HurstParameter hurst, double x0)
      : class_(cls), fields_(std::move(fields)), hurst_(hurst), x0_(x0) {}

  ModelClass class_;
  Fields fields_;
  std::variant<std::monostate, LinearCoefficients> linear_;
  HurstParameter hurst_;
  double x0_;
};

}  // namespace nmpdee

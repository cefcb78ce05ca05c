#include "nmpdee/model.hpp"

#include <cmath>

#include "nmpdee/errors.hpp"

namespace nmpdee {

StateField StateField::zero() { return constant(0.0); }

StateField StateField::constant(double c) {
  return {[c](double, double) { return c; }, [](double, double) { return 0.0; },
          [](double, double) { return 0.0; }, true};
}

StateField StateField::linear(double c) {
  return {[c](double, double x) { return c * x; }, [c](double, double) { return c; },
          [](double, double) { return 0.0; }, true};
}

StateField StateField::polynomial(std::vector<double> coeffs) {
  auto eval = [](const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  std::vector<double> d1;
  for (std::size_t i = 1; i < coeffs.size(); ++i) d1.push_back(static_cast<double>(i) * coeffs[i]);
  std::vector<double> d2;
  for (std::size_t i = 1; i < d1.size(); ++i) d2.push_back(static_cast<double>(i) * d1[i]);
  return {[eval, coeffs](double, double x) { return eval(coeffs, x); },
          [eval, d1](double, double x) { return eval(d1, x); },
          [eval, d2](double, double x) { return eval(d2, x); }, true};
}

StateField StateField::time_scaled(std::function<double(double)> scale, StateField base) {
  return {[scale, v = base.value](double t, double x) { return scale(t) * v(t, x); },
          [scale, d = base.dx](double t, double x) { return scale(t) * d(t, x); },
          [scale, d = base.dxx](double t, double x) { return scale(t) * d(t, x); }, false};
}

TimeField TimeField::constant(double c) {
  return {[c](double) { return c; }, TimeClosedForm{TimeClosedForm::Kind::Constant, c, 0.0}};
}

TimeField TimeField::power_law(double c, double d) {
  return {[c, d](double t) { return c * std::pow(t, d); }, TimeClosedForm{TimeClosedForm::Kind::PowerLaw, c, d}};
}

TimeField TimeField::custom(std::function<double(double)> fn) { return {std::move(fn), std::nullopt}; }

const char* to_string(ModelClass cls) {
  switch (cls) {
    case ModelClass::PureGwn: return "PURE_GWN";
    case ModelClass::PureFgn: return "PURE_FGN";
    case ModelClass::LinearTv: return "LINEAR_TV";
    case ModelClass::NonlinearCommutative: return "NONLINEAR_COMMUTATIVE";
  }
  return "?";
}

namespace {

void require_complete(const StateField& field, const char* name) {
  if (!field.value || !field.dx || !field.dxx) {
    throw DomainError(std::string("SdeModel: field ") + name + " must supply value, dx and dxx");
  }
}

StateField from_time_coefficient(const TimeField& coeff) {
  if (!coeff.value) throw DomainError("SdeModel: time coefficient has no value function");
  const bool is_constant = coeff.closed_form && coeff.closed_form->kind == TimeClosedForm::Kind::Constant;
  return {[v = coeff.value](double t, double x) { return v(t) * x; },
          [v = coeff.value](double t, double) { return v(t); }, [](double, double) { return 0.0; },
          is_constant};
}

}  // namespace

SdeModel SdeModel::pure_gwn(StateField f, StateField g, double x0) {
  require_complete(f, "f");
  require_complete(g, "g");
  return SdeModel(ModelClass::PureGwn, Fields{std::move(f), std::move(g), StateField::zero()},
                  HurstParameter(0.5), x0);
}

SdeModel SdeModel::pure_fgn(StateField h, HurstParameter hurst, double x0) {
  require_complete(h, "h");
  if (!h.autonomous) throw DomainError("SdeModel: FGN-only models require an autonomous h");
  return SdeModel(ModelClass::PureFgn, Fields{StateField::zero(), StateField::zero(), std::move(h)}, hurst, x0);
}

SdeModel SdeModel::linear(TimeField a, TimeField b, TimeField c, HurstParameter hurst, double x0) {
  Fields fields{from_time_coefficient(a), from_time_coefficient(b), from_time_coefficient(c)};
  SdeModel model(ModelClass::LinearTv, std::move(fields), hurst, x0);
  model.linear_ = LinearCoefficients{std::move(a), std::move(b), std::move(c)};
  return model;
}

SdeModel SdeModel::nonlinear_commutative(StateField f, StateField g, StateField h, HurstParameter hurst,
                                         double x0) {
  require_complete(f, "f");
  require_complete(g, "g");
  require_complete(h, "h");
  if (!f.autonomous || !g.autonomous || !h.autonomous) {
    throw DomainError("SdeModel: nonlinear commutative models must have autonomous f, g, h");
  }
  return SdeModel(ModelClass::NonlinearCommutative, Fields{std::move(f), std::move(g), std::move(h)}, hurst, x0);
}

}  // namespace nmpdee

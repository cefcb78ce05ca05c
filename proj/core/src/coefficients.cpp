#include "nmpdee/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

#include "nmpdee/errors.hpp"
#include "nmpdee/quadrature.hpp"

namespace nmpdee {

const char* to_string(Derivation p) {
  switch (p) {
    case Derivation::FpkStratonovich: return "FPK_STRATONOVICH";
    case Derivation::FgnOnly: return "FGN_ONLY";
    case Derivation::LinearTimeVarying: return "LINEAR_TIME_VARYING";
    case Derivation::Commutative: return "COMMUTATIVE";
  }
  return "?";
}

double phi_kernel(double t, double s, HurstParameter hurst) {
  if (t == s) throw DomainError("phi_kernel: singular at t = s");
  const double h = hurst.value();
  return h * (2.0 * h - 1.0) * std::pow(std::abs(t - s), 2.0 * h - 2.0);
}

double fgn_time_factor(double t, HurstParameter hurst) {
  if (t <= 0.0) return hurst.is_brownian() ? 0.5 : 0.0;
  const double h = hurst.value();
  return h * std::pow(t, 2.0 * h - 1.0);
}

namespace {

// Geometric panels [a + w 2^{-(i+1)}, a + w 2^{-i}] plus the innermost [a, a + w 2^{-levels}].
template <typename Fn>
double graded_integral(const Fn& fn, double a, double b, std::size_t levels, const GaussRule& rule) {
  auto panel = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * fn(mid + half * rule.nodes[q]);
    return half * s;
  };
  double sum = 0.0;
  double hi = b;
  for (std::size_t i = 0; i < levels; ++i) {
    const double lo = a + 0.5 * (hi - a);
    sum += panel(lo, hi);
    hi = lo;
  }
  sum += panel(a, hi);
  return sum;
}

double memory_integral(double t, const std::function<double(double)>& c, HurstParameter hurst,
                       std::size_t levels, const GaussRule& rule) {
  const double h = hurst.value();
  const double expo = 1.0 / (2.0 * h - 1.0);
  // r in [t/2, t]: phi dr = H du with u = (t - r)^{2H-1}.
  const double upper_u = std::pow(0.5 * t, 2.0 * h - 1.0);
  const double near = graded_integral([&](double u) { return c(t - std::pow(u, expo)); }, 0.0, upper_u, levels, rule);
  // r in [0, t/2]: smooth kernel; grading toward r = 0 absorbs r^d behaviour of C.
  const double far = graded_integral(
      [&](double r) { return h * (2.0 * h - 1.0) * std::pow(t - r, 2.0 * h - 2.0) * c(r); }, 0.0, 0.5 * t, levels,
      rule);
  return h * near + far;
}

}  // namespace

double c_hat_quadrature(double t, const TimeField& c, HurstParameter hurst, const MemoryQuadrature& quad) {
  if (!(t > 0.0)) throw DomainError("c_hat: t must be positive");
  if (!c.value) throw DomainError("c_hat: C has no value function");
  if (hurst.is_brownian()) return 0.0;
  const GaussRule coarse = gauss_legendre(quad.points);
  const GaussRule fine = gauss_legendre(2 * quad.points);
  const double i_coarse = memory_integral(t, c.value, hurst, quad.grading_levels, coarse);
  const double i_fine = memory_integral(t, c.value, hurst, quad.grading_levels, fine);
  const double scale = std::max(std::abs(i_fine), std::numeric_limits<double>::min());
  if (std::abs(i_fine - i_coarse) > quad.rel_tol * scale) {
    throw NumericError("c_hat: memory quadrature did not converge at t = " + std::to_string(t));
  }
  return c.value(t) * i_fine;
}

double c_hat(double t, const TimeField& c, HurstParameter hurst, const MemoryQuadrature& quad) {
  if (!(t > 0.0)) throw DomainError("c_hat: t must be positive");
  if (hurst.is_brownian()) return 0.0;
  if (c.closed_form) {
    const double h = hurst.value();
    const TimeClosedForm& form = *c.closed_form;
    if (form.kind == TimeClosedForm::Kind::Constant) {
      return form.c * form.c * h * std::pow(t, 2.0 * h - 1.0);
    }
    const double d = form.d;
    return form.c * form.c * std::pow(t, 2.0 * d + 2.0 * h - 1.0) * h * std::tgamma(2.0 * h) * std::tgamma(1.0 + d) /
           std::tgamma(d + 2.0 * h);
  }
  return c_hat_quadrature(t, c, hurst, quad);
}

CommutativityReport check_commutativity(const SdeModel& model, std::span<const double> grid, double tol, double t) {
  const auto& [f, g, h] = model.fields();
  CommutativityReport report;
  for (double x : grid) {
    const double fv = f.value(t, x), fd = f.dx(t, x);
    const double gv = g.value(t, x), gd = g.dx(t, x);
    const double hv = h.value(t, x), hd = h.dx(t, x);
    const double r = std::max({std::abs(fv * gd - gv * fd), std::abs(gv * hd - hv * gd), std::abs(fv * hd - hv * fd)});
    report.max_residual = std::max(report.max_residual, r);
  }
  report.pass = report.max_residual <= tol;
  return report;
}

namespace {

// Last-t memo for a quadrature-backed Chat; all quadrature points of one stage share t.
struct ChatMemo {
  TimeField c;
  HurstParameter hurst;
  MemoryQuadrature quad;
  std::mutex mutex;
  double t = std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;

  ChatMemo(TimeField c_, HurstParameter h_, MemoryQuadrature q_) : c(std::move(c_)), hurst(h_), quad(q_) {}

  double operator()(double time) {
    if (time <= 0.0) return 0.0;
    if (c.closed_form) return c_hat(time, c, hurst, quad);
    std::lock_guard lock(mutex);
    if (time != t) {
      value = c_hat_quadrature(time, c, hurst, quad);
      t = time;
    }
    return value;
  }
};

PdeeCoefficients from_fields(const StateField& f, const StateField& g, const StateField& h, HurstParameter hurst,
                             Derivation derivation) {
  PdeeCoefficients out;
  out.derivation = derivation;
  out.time_independent = f.autonomous && g.autonomous && h.autonomous && derivation == Derivation::FpkStratonovich;
  auto k = [hurst](double t) { return fgn_time_factor(t, hurst); };
  out.d1 = [=](double x, double t) {
    return f.value(t, x) + 0.5 * g.value(t, x) * g.dx(t, x) + k(t) * h.value(t, x) * h.dx(t, x);
  };
  out.d1_x = [=](double x, double t) {
    const double gd = g.dx(t, x), hd = h.dx(t, x);
    return f.dx(t, x) + 0.5 * (gd * gd + g.value(t, x) * g.dxx(t, x)) + k(t) * (hd * hd + h.value(t, x) * h.dxx(t, x));
  };
  out.d2 = [=](double x, double t) {
    const double gv = g.value(t, x), hv = h.value(t, x);
    return 0.5 * gv * gv + k(t) * hv * hv;
  };
  out.d2_x = [=](double x, double t) {
    return g.value(t, x) * g.dx(t, x) + 2.0 * k(t) * h.value(t, x) * h.dx(t, x);
  };
  out.d2_xx = [=](double x, double t) {
    const double gd = g.dx(t, x), hd = h.dx(t, x);
    return gd * gd + g.value(t, x) * g.dxx(t, x) + 2.0 * k(t) * (hd * hd + h.value(t, x) * h.dxx(t, x));
  };
  return out;
}

}  // namespace

PdeeCoefficients build_pdee(const SdeModel& model, const BuildOptions& options) {
  const auto& [f, g, h] = model.fields();
  switch (model.model_class()) {
    case ModelClass::PureGwn:
      return from_fields(f, g, StateField::zero(), HurstParameter(0.5), Derivation::FpkStratonovich);
    case ModelClass::PureFgn:
      return from_fields(StateField::zero(), StateField::zero(), h, model.hurst(), Derivation::FgnOnly);
    case ModelClass::NonlinearCommutative: {
      std::vector<double> grid(options.commutativity_points);
      const std::size_t n = grid.size();
      for (std::size_t i = 0; i < n; ++i) {
        grid[i] = options.commutativity_a +
                  (options.commutativity_b - options.commutativity_a) * static_cast<double>(i) /
                      static_cast<double>(std::max<std::size_t>(n - 1, 1));
      }
      const CommutativityReport report = check_commutativity(model, grid, options.commutativity_tol);
      if (!report.pass) {
        throw DomainError("build_pdee: model fails the commutativity conditions (max residual " +
                          std::to_string(report.max_residual) + ")");
      }
      return from_fields(f, g, h, model.hurst(), Derivation::Commutative);
    }
    case ModelClass::LinearTv: {
      const auto* lin = model.linear_coefficients();
      auto memo = std::make_shared<ChatMemo>(lin->c, model.hurst(), options.quadrature);
      const TimeField a = lin->a;
      const TimeField b = lin->b;
      // Linear-in-x drift rate and quadratic-in-x diffusion rate.
      auto drift_rate = [=](double t) {
        const double bt = b(t);
        return a(t) + 0.5 * bt * bt + (*memo)(t);
      };
      auto diffusion_rate = [=](double t) {
        const double bt = b(t);
        return 0.5 * bt * bt + (*memo)(t);
      };
      PdeeCoefficients out;
      out.derivation = Derivation::LinearTimeVarying;
      out.d1 = [=](double x, double t) { return drift_rate(t) * x; };
      out.d1_x = [=](double, double t) { return drift_rate(t); };
      out.d2 = [=](double x, double t) { return diffusion_rate(t) * x * x; };
      out.d2_x = [=](double x, double t) { return 2.0 * diffusion_rate(t) * x; };
      out.d2_xx = [=](double, double t) { return 2.0 * diffusion_rate(t); };
      return out;
    }
  }
  throw DomainError("build_pdee: unknown model class");
}

}  // namespace nmpdee

#include "nmpdee/fd.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmpdee/errors.hpp"
#include "nmpdee/parallel.hpp"

namespace nmpdee {

namespace {

struct NodeCoeffs {
  std::vector<double> d1;
  std::vector<double> d2;
  std::vector<double> s1;  // |D2_x - D1|, for the stability bound
};

void evaluate(const PdeeCoefficients& c, std::span<const double> x, double t, NodeCoeffs& out) {
  out.d1.resize(x.size());
  out.d2.resize(x.size());
  out.s1.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.d1[i] = c.d1(x[i], t);
    out.d2[i] = c.d2(x[i], t);
    out.s1[i] = std::abs(c.d2_x(x[i], t) - out.d1[i]);
  }
}

double stable_dt(const NodeCoeffs& c, double dx, const StabilityLimits& limits) {
  const double max_d2 = *std::max_element(c.d2.begin(), c.d2.end(), [](double l, double r) { return std::abs(l) < std::abs(r); });
  const double max_s1 = *std::max_element(c.s1.begin(), c.s1.end());
  double dt = std::numeric_limits<double>::infinity();
  if (max_d2 != 0.0) dt = std::min(dt, limits.c_cfl * dx * dx / std::abs(max_d2));
  if (max_s1 > 0.0) dt = std::min(dt, limits.c_adv * dx / max_s1);
  return dt;
}

}  // namespace

FdRun fd_run(const FdProblem& pb, std::span<const double> record_times) {
  if (pb.intervals < 2) throw DomainError("FdProblem: need at least 2 intervals");
  if (!(pb.a < pb.b)) throw DomainError("FdProblem: requires a < b");
  if (!(pb.dt > 0.0)) throw DomainError("FdProblem: dt must be positive");
  std::vector<double> times(record_times.begin(), record_times.end());
  std::sort(times.begin(), times.end());
  const double eps = 1e-12 * std::max(1.0, pb.t_end);
  for (double r : times) {
    if (r < pb.t0 - eps || r > pb.t_end + eps) {
      throw DomainError(fmt::format("record time {:g} outside [{:g}, {:g}]", r, pb.t0, pb.t_end));
    }
  }

  const double dx = pb.dx();
  const std::vector<double> x = nodes(pb.a, pb.b, pb.intervals);
  const std::size_t n = x.size();
  const ResolvedInitial init = resolve_initial(pb.initial, pb.coefficients, pb.t0, pb.t_end, dx);

  std::vector<double> p(n);
  for (std::size_t i = 1; i + 1 < n; ++i) p[i] = init.density(x[i]);
  std::vector<double> next(n, 0.0);
  std::vector<double> f1(n), f2(n);

  FdRun result;
  result.t_start = init.t_start;
  result.initial_description = init.description;

  NodeCoeffs co;
  const bool cached = pb.coefficients.time_independent;
  if (cached) evaluate(pb.coefficients, x, pb.t0, co);

  auto euler = [&](double t, double h) {
    if (!cached) evaluate(pb.coefficients, x, t, co);
    for (std::size_t i = 0; i < n; ++i) {
      f1[i] = co.d1[i] * p[i];
      f2[i] = co.d2[i] * p[i];
    }
    parallel_for(n - 2, pb.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t i = k + 1;
        const double adv = (f1[i + 1] - f1[i - 1]) / (2.0 * dx);
        const double dif = (f2[i + 1] - 2.0 * f2[i] + f2[i - 1]) / (dx * dx);
        next[i] = p[i] + h * (dif - adv);
      }
    });
    next.front() = 0.0;
    next.back() = 0.0;
    std::swap(p, next);
  };

  auto limit_at = [&](double t) {
    if (cached) return stable_dt(co, dx, pb.limits);
    NodeCoeffs probe;
    evaluate(pb.coefficients, x, t, probe);
    return stable_dt(probe, dx, pb.limits);
  };

  auto snapshot = [&](double time) {
    DensityField f{x, p, time};
    result.trajectory.snapshots.push_back(f);
    double m = 0.0;
    for (double v : p) m += v;
    result.trajectory.mass.push_back(m * dx);
  };

  double t = init.t_start;
  for (double r : times) {
    if (r < t - eps) throw DomainError(fmt::format("record time {:g} precedes the start time {:g}", r, t));
    while (t < r - eps) {
      const double nominal = std::min(pb.dt, r - t);
      const double limit = std::min(limit_at(t), limit_at(t + nominal));
      std::size_t sub = 1;
      if (nominal > limit) {
        if (!pb.auto_substep) {
          throw NumericError(fmt::format(
              "FD step dt = {:g} exceeds the stability limit {:g} at t = {:g}; reduce dt or enable substepping", nominal,
              limit, t));
        }
        sub = static_cast<std::size_t>(std::ceil(nominal / limit));
      }
      const double h = nominal / static_cast<double>(sub);
      for (std::size_t s = 0; s < sub; ++s) {
        euler(t + static_cast<double>(s) * h, h);
        ++result.steps;
      }
      t = (nominal == r - t) ? r : t + nominal;
      if (!std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); })) {
        throw NumericError(fmt::format("FD state became non-finite at t = {:g}", t));
      }
    }
    snapshot(r);
  }
  return result;
}

DensityTrajectory fd_solve(const FdProblem& problem, std::span<const double> record_times) {
  return fd_run(problem, record_times).trajectory;
}

}  // namespace nmpdee

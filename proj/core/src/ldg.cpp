#include "nmpdee/ldg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nmpdee/errors.hpp"
#include "nmpdee/parallel.hpp"

namespace nmpdee {

double Mesh::h() const {
  double m = 0.0;
  for (std::size_t j = 0; j < cells(); ++j) m = std::max(m, width(j));
  return m;
}

std::vector<double> Mesh::centers() const {
  std::vector<double> c(cells());
  for (std::size_t j = 0; j < cells(); ++j) c[j] = center(j);
  return c;
}

Mesh build_mesh(double a, double b, std::size_t n_cells) {
  if (!(a < b)) throw DomainError("build_mesh: requires a < b");
  if (n_cells < 2) throw DomainError("build_mesh: requires at least 2 cells");
  return Mesh{a, b, nodes(a, b, n_cells)};
}

double basis(std::size_t n, double xi) { return std::sqrt(2.0 * n + 1.0) * legendre(n, xi); }

double basis_derivative(std::size_t n, double xi) {
  return std::sqrt(2.0 * n + 1.0) * legendre_derivative(n, xi);
}

// --- DGField -------------------------------------------------------------------

DGField::DGField(Mesh mesh, std::size_t degree) : DGField(std::make_shared<const Mesh>(std::move(mesh)), degree) {}

DGField::DGField(std::shared_ptr<const Mesh> mesh, std::size_t degree)
    : mesh_(std::move(mesh)), degree_(degree), coeffs_(mesh_->cells() * (degree + 1), 0.0) {}

double DGField::cell_value(std::size_t j, double xi) const {
  const auto c = cell(j);
  double v = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) v += c[n] * basis(n, xi);
  return v;
}

double DGField::evaluate(double x) const {
  if (x < mesh_->a || x > mesh_->b) {
    throw DomainError(fmt::format("DGField::evaluate: x = {} outside [{}, {}]", x, mesh_->a, mesh_->b));
  }
  const auto& nd = mesh_->nodes;
  // lower_bound puts an exact node hit in the cell to its left.
  const auto it = std::lower_bound(nd.begin(), nd.end(), x);
  std::size_t j = it == nd.begin() ? 0 : static_cast<std::size_t>(it - nd.begin()) - 1;
  j = std::min(j, mesh_->cells() - 1);
  const double xi = std::clamp(2.0 * (x - mesh_->center(j)) / mesh_->width(j), -1.0, 1.0);
  return cell_value(j, xi);
}

double DGField::mass() const {
  double m = 0.0;
  for (std::size_t j = 0; j < mesh_->cells(); ++j) m += mesh_->width(j) * cell(j)[0];
  return m;
}

DGField project(const std::function<double(double)>& fn, const Mesh& mesh, std::size_t degree, std::size_t points) {
  const std::size_t q = std::max(points, degree + 2);
  const GaussRule rule = gauss_legendre(q);
  DGField field(mesh, degree);
  for (std::size_t j = 0; j < mesh.cells(); ++j) {
    auto c = field.cell(j);
    const double xc = mesh.center(j);
    const double hw = 0.5 * mesh.width(j);
    for (std::size_t i = 0; i < q; ++i) {
      const double f = fn(xc + hw * rule.nodes[i]);
      for (std::size_t n = 0; n <= degree; ++n) c[n] += 0.5 * rule.weights[i] * f * basis(n, rule.nodes[i]);
    }
  }
  return field;
}

// --- initial conditions ------------------------------------------------------

std::string describe(const InitialCondition& initial) {
  return std::visit(
      [](const auto& ic) -> std::string {
        using T = std::decay_t<decltype(ic)>;
        if constexpr (std::is_same_v<T, DeltaInitial>) {
          return fmt::format("delta(x0={:g}, sigma0={:g}, shift_time={})", ic.x0, ic.sigma0, ic.shift_time);
        } else if constexpr (std::is_same_v<T, FunctionInitial>) {
          return "function";
        } else {
          return "warm_start(" + ic.source + ")";
        }
      },
      initial);
}

ResolvedInitial resolve_initial(const InitialCondition& initial, const PdeeCoefficients& coefficients, double t0,
                                double t_end, double h) {
  if (const auto* fn = std::get_if<FunctionInitial>(&initial)) {
    return {t0, fn->density, "function"};
  }
  if (const auto* warm = std::get_if<WarmStartInitial>(&initial)) {
    return {t0, warm->density, fmt::format("warm_start({}, t0={:g})", warm->source, t0)};
  }
  const auto& delta = std::get<DeltaInitial>(initial);
  const double sigma0 = delta.sigma0 > 0.0 ? delta.sigma0 : 2.0 * h;
  double t_start = t0;
  double centre = delta.x0;
  if (delta.shift_time && t_end > t0) {
    // Accumulate 2 int D2(x0, s) ds panel by panel until it reaches sigma0^2.
    const std::size_t panels = 200000;
    const double width = (t_end - t0) / static_cast<double>(panels);
    const double g = 0.5 / std::sqrt(3.0);
    double var = 0.0;
    double drift = 0.0;
    bool reached = false;
    for (std::size_t i = 0; i < panels && !reached; ++i) {
      const double lo = t0 + static_cast<double>(i) * width;
      const double s1 = lo + (0.5 - g) * width;
      const double s2 = lo + (0.5 + g) * width;
      const double dvar = width * (coefficients.d2(delta.x0, s1) + coefficients.d2(delta.x0, s2));
      const double ddrift = 0.5 * width * (coefficients.d1(delta.x0, s1) + coefficients.d1(delta.x0, s2));
      if (var + dvar >= sigma0 * sigma0 && dvar > 0.0) {
        const double frac = (sigma0 * sigma0 - var) / dvar;
        t_start = lo + frac * width;
        drift += frac * ddrift;
        reached = true;
      } else {
        var += dvar;
        drift += ddrift;
      }
    }
    if (reached) centre = delta.x0 + drift;
  }
  auto gaussian = [centre, sigma0](double x) {
    const double z = (x - centre) / sigma0;
    return std::exp(-0.5 * z * z) / (sigma0 * std::sqrt(2.0 * std::numbers::pi));
  };
  return {t_start, gaussian,
          fmt::format("delta(x0={:g}) as gaussian(mean={:.6g}, sigma0={:g}) at t={:.6g}", delta.x0, centre, sigma0,
                      t_start)};
}

StabilityLimits default_limits(std::size_t degree) {
  const double k = static_cast<double>(degree);
  return {0.1 / ((k + 1.0) * (k + 1.0)), 0.2 / (2.0 * k + 1.0)};
}

// --- solver --------------------------------------------------------------------

LdgSolver::LdgSolver(LdgProblem problem)
    : problem_(std::move(problem)), mesh_(std::make_shared<const Mesh>(problem_.mesh)) {
  const std::size_t k = problem_.degree;
  modes_ = k + 1;
  const std::size_t q = problem_.quadrature_points == 0 ? k + 3 : std::max(problem_.quadrature_points, k + 2);
  rule_ = gauss_legendre(q);
  phi_.resize(q * modes_);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t n = 0; n < modes_; ++n) phi_[i * modes_ + n] = basis(n, rule_.nodes[i]);
  }
  stiffness_.assign(modes_ * modes_, 0.0);
  for (std::size_t m = 0; m < modes_; ++m) {
    for (std::size_t n = 0; n < modes_; ++n) {
      double s = 0.0;
      for (std::size_t i = 0; i < q; ++i) {
        s += rule_.weights[i] * phi_[i * modes_ + n] * basis_derivative(m, rule_.nodes[i]);
      }
      stiffness_[m * modes_ + n] = s;
    }
  }
  right_.resize(modes_);
  left_.resize(modes_);
  for (std::size_t n = 0; n < modes_; ++n) {
    right_[n] = basis(n, 1.0);
    left_[n] = basis(n, -1.0);
  }
  const Mesh& mesh = problem_.mesh;
  xq_.resize(mesh.cells() * q);
  for (std::size_t j = 0; j < mesh.cells(); ++j) {
    for (std::size_t i = 0; i < q; ++i) xq_[j * q + i] = mesh.center(j) + 0.5 * mesh.width(j) * rule_.nodes[i];
  }
  const StabilityLimits defaults = default_limits(k);
  if (problem_.limits.c_cfl <= 0.0) problem_.limits.c_cfl = defaults.c_cfl;
  if (problem_.limits.c_adv <= 0.0) problem_.limits.c_adv = defaults.c_adv;
  use_cache_ = problem_.coefficients.time_independent;
  if (use_cache_) evaluate_coefficients(problem_.t0, cached_);
}

void LdgSolver::evaluate_coefficients(double t, Coeffs& out) const {
  const auto& c = problem_.coefficients;
  const std::size_t n = xq_.size();
  out.a.resize(n);
  out.s1.resize(n);
  out.s0.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xq_[i];
    out.a[i] = c.d2(x, t);
    out.s1[i] = c.d2_x(x, t) - c.d1(x, t);
    out.s0[i] = c.d2_xx(x, t) - c.d1_x(x, t);
  }
}

DGField LdgSolver::gradient(const DGField& p) const {
  const Mesh& mesh = problem_.mesh;
  const std::size_t cells = mesh.cells();
  DGField v(mesh_, problem_.degree);
  parallel_for(cells, problem_.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const auto pj = p.cell(j);
      double p_right = 0.0;  // p^_{j+1/2} = p_h(x^-): own right trace, zero at b
      if (j + 1 < cells) {
        for (std::size_t n = 0; n < modes_; ++n) p_right += pj[n] * right_[n];
      }
      double p_left = 0.0;  // p^_{j-1/2}: right trace of cell j-1, zero outside
      if (j > 0) {
        const auto pl = p.cell(j - 1);
        for (std::size_t n = 0; n < modes_; ++n) p_left += pl[n] * right_[n];
      }
      auto vj = v.cell(j);
      const double inv_h = 1.0 / mesh.width(j);
      for (std::size_t m = 0; m < modes_; ++m) {
        double s = 0.0;
        for (std::size_t n = 0; n < modes_; ++n) s += stiffness_[m * modes_ + n] * pj[n];
        vj[m] = inv_h * (-s + p_right * right_[m] - p_left * left_[m]);
      }
    }
  });
  return v;
}

DGField LdgSolver::flux_variable(const DGField& v, double t) const {
  Coeffs local;
  if (!use_cache_) evaluate_coefficients(t, local);
  return project_flux(v, use_cache_ ? cached_ : local);
}

DGField LdgSolver::project_flux(const DGField& v, const Coeffs& co) const {
  const Mesh& mesh = problem_.mesh;
  const std::size_t q = rule_.size();
  DGField w(mesh_, problem_.degree);
  parallel_for(mesh.cells(), problem_.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const auto vj = v.cell(j);
      auto wj = w.cell(j);
      for (std::size_t i = 0; i < q; ++i) {
        double vq = 0.0;
        for (std::size_t n = 0; n < modes_; ++n) vq += vj[n] * phi_[i * modes_ + n];
        const double av = 0.5 * rule_.weights[i] * co.a[j * q + i] * vq;
        for (std::size_t m = 0; m < modes_; ++m) wj[m] += av * phi_[i * modes_ + m];
      }
    }
  });
  return w;
}

const LdgSolver::Coeffs& LdgSolver::coefficients_at(double t, Coeffs& scratch) const {
  if (use_cache_) return cached_;
  evaluate_coefficients(t, scratch);
  return scratch;
}

DGField LdgSolver::rhs(const DGField& p, double t) const {
  Coeffs local;
  return rhs_with(p, coefficients_at(t, local));
}

DGField LdgSolver::rhs_with(const DGField& p, const Coeffs& co) const {
  const Mesh& mesh = problem_.mesh;
  const std::size_t cells = mesh.cells();
  const std::size_t q = rule_.size();

  const DGField v = gradient(p);

  // w_h = L2 projection of D2 v_h, cell by cell.
  const DGField w = project_flux(v, co);

  DGField dp(mesh_, problem_.degree);
  parallel_for(cells, problem_.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const auto pj = p.cell(j);
      const auto vj = v.cell(j);
      const auto wj = w.cell(j);
      double w_left = 0.0;  // w^_{j-1/2} = w_h(x^+): own left trace
      for (std::size_t n = 0; n < modes_; ++n) w_left += wj[n] * left_[n];
      // w^_{j+1/2}: left trace of cell j+1. At b: own right trace minus the
      // penalty (D2 / h) p^-, which enforces p = 0 there.
      double w_right = 0.0;
      if (j + 1 < cells) {
        const auto wr = w.cell(j + 1);
        for (std::size_t n = 0; n < modes_; ++n) w_right += wr[n] * left_[n];
      } else {
        double p_b = 0.0;
        for (std::size_t n = 0; n < modes_; ++n) {
          w_right += wj[n] * right_[n];
          p_b += pj[n] * right_[n];
        }
        w_right -= co.a[j * q + q - 1] / mesh.width(j) * p_b;
      }
      auto out = dp.cell(j);
      for (std::size_t m = 0; m < modes_; ++m) {
        double s = 0.0;
        for (std::size_t n = 0; n < modes_; ++n) s += stiffness_[m * modes_ + n] * wj[n];
        out[m] = -s + w_right * right_[m] - w_left * left_[m];
      }
      // + int psi phi_m dx = (h/2) sum_q w_q psi(x_q) phi_m(xi_q)
      const double hw = 0.5 * mesh.width(j);
      for (std::size_t i = 0; i < q; ++i) {
        double pq = 0.0;
        double vq = 0.0;
        for (std::size_t n = 0; n < modes_; ++n) {
          pq += pj[n] * phi_[i * modes_ + n];
          vq += vj[n] * phi_[i * modes_ + n];
        }
        const double psi = co.s1[j * q + i] * vq + co.s0[j * q + i] * pq;
        const double wpsi = hw * rule_.weights[i] * psi;
        for (std::size_t m = 0; m < modes_; ++m) out[m] += wpsi * phi_[i * modes_ + m];
      }
      const double inv_h = 1.0 / mesh.width(j);
      for (std::size_t m = 0; m < modes_; ++m) out[m] *= inv_h;
    }
  });
  return dp;
}

void LdgSolver::step(DGField& p, double t, double dt) const {
  Coeffs slots[3];
  if (!use_cache_) evaluate_coefficients(t, slots[0]);
  step_reusing(p, t, dt, slots);
}

void LdgSolver::step_reusing(DGField& p, double t, double dt, Coeffs (&slots)[3]) const {
  auto& u = p.coefficients();
  const std::size_t n = u.size();
  const Coeffs& c0 = use_cache_ ? cached_ : slots[0];
  const Coeffs& c1 = use_cache_ ? cached_ : (evaluate_coefficients(t + dt, slots[1]), slots[1]);
  const Coeffs& c2 = use_cache_ ? cached_ : (evaluate_coefficients(t + 0.5 * dt, slots[2]), slots[2]);

  DGField stage = p;
  const DGField k1 = rhs_with(p, c0);
  for (std::size_t i = 0; i < n; ++i) stage.coefficients()[i] = u[i] + dt * k1.coefficients()[i];

  const DGField k2 = rhs_with(stage, c1);
  for (std::size_t i = 0; i < n; ++i) {
    stage.coefficients()[i] = 0.75 * u[i] + 0.25 * (stage.coefficients()[i] + dt * k2.coefficients()[i]);
  }

  const DGField k3 = rhs_with(stage, c2);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = u[i] / 3.0 + 2.0 / 3.0 * (stage.coefficients()[i] + dt * k3.coefficients()[i]);
  }
  if (!use_cache_) std::swap(slots[0], slots[1]);
}

double LdgSolver::stable_dt(double t) const {
  Coeffs local;
  if (!use_cache_) evaluate_coefficients(t, local);
  const Coeffs& co = use_cache_ ? cached_ : local;
  double max_a = 0.0;
  double max_s1 = 0.0;
  for (std::size_t i = 0; i < co.a.size(); ++i) {
    max_a = std::max(max_a, std::abs(co.a[i]));
    max_s1 = std::max(max_s1, std::abs(co.s1[i]));
  }
  const double h = problem_.mesh.h();
  double dt = std::numeric_limits<double>::infinity();
  if (max_a > 0.0) dt = std::min(dt, problem_.limits.c_cfl * h * h / max_a);
  if (max_s1 > 0.0) dt = std::min(dt, problem_.limits.c_adv * h / max_s1);
  return dt;
}

DensityField LdgSolver::sample(const DGField& p, double time) const {
  DensityField f;
  f.time = time;
  const Mesh& mesh = problem_.mesh;
  if (problem_.sample_grid == SampleGrid::Midpoints) {
    f.grid = mesh.centers();
    f.values.resize(f.grid.size());
    for (std::size_t j = 0; j < f.grid.size(); ++j) f.values[j] = p.cell_value(j, 0.0);
    return f;
  }
  f.grid = mesh.nodes;
  f.values.assign(f.grid.size(), 0.0);
  for (std::size_t j = 1; j < f.grid.size(); ++j) f.values[j] = p.cell_value(j - 1, 1.0);
  return f;
}

LdgRun LdgSolver::run(std::span<const double> record_times) const {
  const LdgProblem& pb = problem_;
  if (!(pb.dt > 0.0)) throw DomainError("LdgProblem: dt must be positive");
  if (!(pb.t_end >= pb.t0)) throw DomainError("LdgProblem: t_end must be >= t0");
  std::vector<double> times(record_times.begin(), record_times.end());
  std::sort(times.begin(), times.end());
  const double eps = 1e-12 * std::max(1.0, pb.t_end);
  for (double r : times) {
    if (r < pb.t0 - eps || r > pb.t_end + eps) {
      throw DomainError(fmt::format("record time {:g} outside [{:g}, {:g}]", r, pb.t0, pb.t_end));
    }
  }

  const ResolvedInitial init = resolve_initial(pb.initial, pb.coefficients, pb.t0, pb.t_end, pb.mesh.h());
  LdgRun result{{}, DGField(mesh_, pb.degree), init.t_start, 0, init.description};
  result.final_state.coefficients() = project(init.density, pb.mesh, pb.degree, rule_.size()).coefficients();
  DGField& p = result.final_state;

  double t = init.t_start;
  Coeffs slots[3];
  for (double r : times) {
    if (r < t - eps) {
      throw DomainError(fmt::format("record time {:g} precedes the regularized start time {:g}", r, t));
    }
    while (t < r - eps) {
      const double nominal = std::min(pb.dt, r - t);
      const double limit = std::min(stable_dt(t), stable_dt(t + nominal));
      std::size_t sub = 1;
      if (nominal > limit) {
        if (!pb.auto_substep) {
          throw NumericError(fmt::format(
              "LDG step dt = {:g} exceeds the stability limit {:g} at t = {:g}; reduce dt or enable substepping",
              nominal, limit, t));
        }
        sub = static_cast<std::size_t>(std::ceil(nominal / limit));
      }
      const double h = nominal / static_cast<double>(sub);
      if (!use_cache_) evaluate_coefficients(t, slots[0]);
      for (std::size_t s = 0; s < sub; ++s) {
        step_reusing(p, t + static_cast<double>(s) * h, h, slots);
        ++result.steps;
      }
      t = (nominal == r - t) ? r : t + nominal;
      if (!std::isfinite(p.mass())) throw NumericError(fmt::format("LDG state became non-finite at t = {:g}", t));
    }
    result.trajectory.snapshots.push_back(sample(p, r));
    result.trajectory.mass.push_back(p.mass());
  }
  return result;
}

DensityTrajectory solve(const LdgProblem& problem, std::span<const double> record_times) {
  return LdgSolver(problem).run(record_times).trajectory;
}

}  // namespace nmpdee

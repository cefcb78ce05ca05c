#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nmpdee/coefficients.hpp"
#include "nmpdee/density.hpp"
#include "nmpdee/quadrature.hpp"

namespace nmpdee {

/// Partition a = x_{1/2} < ... < x_{N+1/2} = b of [a, b].
struct Mesh {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> nodes;  ///< N + 1 interface positions

  std::size_t cells() const noexcept { return nodes.size() - 1; }
  double width(std::size_t j) const { return nodes[j + 1] - nodes[j]; }
  double center(std::size_t j) const { return 0.5 * (nodes[j] + nodes[j + 1]); }
  /// Largest cell width.
  double h() const;
  std::vector<double> centers() const;
};

/// Uniform mesh with N >= 2 cells.
Mesh build_mesh(double a, double b, std::size_t n_cells);

/// Orthonormal Legendre basis on a cell: phi_n(xi) = sqrt(2n + 1) P_n(xi), xi in [-1, 1],
/// orthonormal under the cell-average inner product (1/h) int_{I_j} u v dx.
double basis(std::size_t n, double xi);
double basis_derivative(std::size_t n, double xi);  ///< d/dxi

/// Piecewise polynomial of degree k on each cell, stored as modal coefficients.
class DGField {
 public:
  DGField(Mesh mesh, std::size_t degree);
  DGField(std::shared_ptr<const Mesh> mesh, std::size_t degree);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& shared_mesh() const noexcept { return mesh_; }
  std::size_t degree() const noexcept { return degree_; }
  std::size_t modes() const noexcept { return degree_ + 1; }

  std::span<double> cell(std::size_t j) { return std::span<double>(coeffs_).subspan(j * modes(), modes()); }
  std::span<const double> cell(std::size_t j) const {
    return std::span<const double>(coeffs_).subspan(j * modes(), modes());
  }
  std::vector<double>& coefficients() noexcept { return coeffs_; }
  const std::vector<double>& coefficients() const noexcept { return coeffs_; }

  /// Local polynomial of cell j at reference coordinate xi.
  double cell_value(std::size_t j, double xi) const;
  /// Value at x in [a, b]; at an interior node the left trace is returned.
  double evaluate(double x) const;
  /// Exact integral over [a, b].
  double mass() const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::size_t degree_;
  std::vector<double> coeffs_;
};

/// Cell-wise L2 projection with `points` Gauss points per cell (at least k + 2).
DGField project(const std::function<double(double)>& fn, const Mesh& mesh, std::size_t degree,
                std::size_t points = 0);

// --- problem description -----------------------------------------------------

/// Dirac initial law regularized as a Gaussian of width sigma0 (0 selects 2h).
/// With `shift_time`, the Gaussian is placed at the time t_s > t0 where the
/// short-time law from x0 has that width: 2 int_{t0}^{t_s} D2(x0, s) ds = sigma0^2,
/// centred at x0 + int_{t0}^{t_s} D1(x0, s) ds. Without it the Gaussian sits at t0.
struct DeltaInitial {
  double x0 = 0.0;
  double sigma0 = 0.0;
  bool shift_time = true;
};

/// Arbitrary initial density at t0.
struct FunctionInitial {
  std::function<double(double)> density;
};

/// Reference density (exact or Monte Carlo) used to start at t0 > 0.
struct WarmStartInitial {
  std::function<double(double)> density;
  std::string source = "reference";
};

using InitialCondition = std::variant<DeltaInitial, FunctionInitial, WarmStartInitial>;

std::string describe(const InitialCondition& initial);

/// Start time and initial density after resolving the Dirac regularization.
struct ResolvedInitial {
  double t_start = 0.0;
  std::function<double(double)> density;
  std::string description;
};

ResolvedInitial resolve_initial(const InitialCondition& initial, const PdeeCoefficients& coefficients, double t0,
                                double t_end, double h);

/// Stability limits shared by the LDG and FD steppers:
///   dt <= c_cfl h^2 / max D2  and  dt <= c_adv h / max |D2_x - D1|.
/// A zero constant selects the degree-dependent default (see default_limits).
struct StabilityLimits {
  double c_cfl = 0.0;
  double c_adv = 0.0;
};

/// Defaults for SSP-RK3 on the LDG operator of degree k:
/// c_cfl = 0.1 / (k + 1)^2, c_adv = 0.2 / (2k + 1).
StabilityLimits default_limits(std::size_t degree);

/// Where snapshots are sampled.
enum class SampleGrid {
  Nodes,      ///< x_{j+1/2}, j = 0..N, taking the flux value p^ (left trace; 0 at a)
  Midpoints,  ///< cell centers
};

struct LdgProblem {
  PdeeCoefficients coefficients;
  Mesh mesh;
  std::size_t degree = 2;
  double dt = 1e-3;
  double t0 = 0.0;
  double t_end = 1.0;
  InitialCondition initial = DeltaInitial{};
  StabilityLimits limits{};
  /// Split a nominal step that violates the stability limits into equal
  /// substeps instead of failing.
  bool auto_substep = true;
  std::size_t quadrature_points = 0;  ///< 0 selects k + 3
  unsigned threads = 1;
  SampleGrid sample_grid = SampleGrid::Nodes;
};

struct LdgRun {
  DensityTrajectory trajectory;
  DGField final_state;
  double t_start = 0.0;
  std::size_t steps = 0;  ///< SSP-RK3 steps actually taken (after substepping)
  std::string initial_description;
};

/// Semi-discrete LDG operator for p_t = -(D1 p)_x + (D2 p)_xx written as
///   p_t = w_x + psi,  v = p_x,  w = D2 v,
///   psi = (D2_x - D1) v + (D2_xx - D1_x) p,
/// with fluxes p^ = left trace, w^ = right trace in the interior. At both ends
/// p^ = 0; w^ is the interior trace, at b minus the penalty (D2 / h) p_h(b^-).
class LdgSolver {
 public:
  explicit LdgSolver(LdgProblem problem);

  const LdgProblem& problem() const noexcept { return problem_; }

  /// Time derivative of p_h at time t.
  DGField rhs(const DGField& p, double t) const;
  /// Auxiliary variables of the three local stages.
  DGField gradient(const DGField& p) const;                 ///< v_h
  DGField flux_variable(const DGField& v, double t) const;  ///< w_h

  /// One SSP-RK3 step of size dt from time t.
  void step(DGField& p, double t, double dt) const;
  /// Largest dt allowed by the stability limits at time t.
  double stable_dt(double t) const;

  LdgRun run(std::span<const double> record_times) const;

  /// Point values on the problem's sample grid.
  DensityField sample(const DGField& p, double time) const;

 private:
  struct Coeffs {
    std::vector<double> a;   // D2
    std::vector<double> s1;  // D2_x - D1
    std::vector<double> s0;  // D2_xx - D1_x
  };
  void evaluate_coefficients(double t, Coeffs& out) const;
  DGField project_flux(const DGField& v, const Coeffs& co) const;
  DGField rhs_with(const DGField& p, const Coeffs& co) const;
  const Coeffs& coefficients_at(double t, Coeffs& scratch) const;
  /// SSP-RK3 step whose stage coefficients are held in `slots` ([0] at t on
  /// entry, [0] at t + dt on exit).
  void step_reusing(DGField& p, double t, double dt, Coeffs (&slots)[3]) const;

  LdgProblem problem_;
  std::shared_ptr<const Mesh> mesh_;
  GaussRule rule_;
  std::size_t modes_;
  std::vector<double> phi_;        // [q][n]
  std::vector<double> stiffness_;  // [m][n] = int phi_n dphi_m/dxi
  std::vector<double> right_;      // phi_n(+1)
  std::vector<double> left_;       // phi_n(-1)
  std::vector<double> xq_;         // physical quadrature points [j][q]
  Coeffs cached_;
  bool use_cache_ = false;
};

DensityTrajectory solve(const LdgProblem& problem, std::span<const double> record_times);

}  // namespace nmpdee

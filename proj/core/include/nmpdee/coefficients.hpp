#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nmpdee/model.hpp"

namespace nmpdee {

/// Which governing-equation family produced a coefficient set.
enum class Derivation {
  FpkStratonovich,     ///< GWN only: D1 = f + g g'/2, D2 = g^2/2
  FgnOnly,             ///< FGN only: D1 = H t^{2H-1} h h', D2 = H t^{2H-1} h^2
  LinearTimeVarying,   ///< linear: D1 = (A + B^2/2 + Chat) x, D2 = (B^2/2 + Chat) x^2
  Commutative         ///< commutative nonlinear: sum of the GWN and FGN contributions
};

const char* to_string(Derivation p);

/// Drift D1(x, t) and diffusion D2(x, t) of
///   p_t = -(D1 p)_x + (D2 p)_xx
/// with the spatial derivatives the LDG source term needs.
struct PdeeCoefficients {
  using Fn = std::function<double(double x, double t)>;
  Fn d1;
  Fn d1_x;
  Fn d2;
  Fn d2_x;
  Fn d2_xx;
  Derivation derivation = Derivation::FpkStratonovich;
  double t_min = 0.0;
  /// True when no coefficient depends on t; lets solvers cache evaluations.
  bool time_independent = false;
};

/// phi(t, s) = H (2H - 1) |t - s|^{2H - 2}. Singular at t = s.
double phi_kernel(double t, double s, HurstParameter hurst);

struct MemoryQuadrature {
  std::size_t points = 16;          ///< Gauss points per panel (checked against 2x points)
  std::size_t grading_levels = 48;  ///< geometric panels toward each endpoint
  double rel_tol = 1e-8;            ///< max relative gap between the two refinement levels
};

/// Chat_t = C_t * int_0^t phi(t, r) C_r dr.
/// Closed form when `c` carries a tag; otherwise the kernel singularity at
/// r = t is removed by u = (t - r)^{2H-1} and both ends are integrated on
/// geometrically graded Gauss–Legendre panels.
double c_hat(double t, const TimeField& c, HurstParameter hurst, const MemoryQuadrature& quad = {});

/// Same integral by quadrature only, ignoring any closed-form tag.
double c_hat_quadrature(double t, const TimeField& c, HurstParameter hurst, const MemoryQuadrature& quad = {});

/// H t^{2H-1}, the time factor of the FGN channel (0 at t = 0).
double fgn_time_factor(double t, HurstParameter hurst);

struct CommutativityReport {
  double max_residual = 0.0;
  bool pass = true;
};

/// Pairwise residuals |f g' - g f'|, |g h' - h g'|, |f h' - h f'| over `grid` at time t.
CommutativityReport check_commutativity(const SdeModel& model, std::span<const double> grid, double tol,
                                        double t = 0.0);

struct BuildOptions {
  double commutativity_a = -5.0;  ///< domain on which the commutativity residual is checked
  double commutativity_b = 5.0;
  std::size_t commutativity_points = 401;
  double commutativity_tol = 1e-8;
  MemoryQuadrature quadrature{};
};

/// Assembles D1, D2 for the model's family. Throws DomainError carrying the
/// max residual when a nonlinear model fails the commutativity check.
PdeeCoefficients build_pdee(const SdeModel& model, const BuildOptions& options = {});

}  // namespace nmpdee

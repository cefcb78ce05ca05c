#pragma once

#include <span>
#include <string>

#include "nmpdee/coefficients.hpp"
#include "nmpdee/density.hpp"
#include "nmpdee/ldg.hpp"

namespace nmpdee {

/// Central finite differences on the flux products at the nodes
///   dp_i/dt = -[(D1 p)_{i+1} - (D1 p)_{i-1}] / (2 dx) + [(D2 p)_{i+1} - 2 (D2 p)_i + (D2 p)_{i-1}] / dx^2
/// with forward-Euler stepping and zero Dirichlet values at a and b.
struct FdProblem {
  PdeeCoefficients coefficients;
  double a = 0.0;
  double b = 1.0;
  std::size_t intervals = 10;  ///< n_points - 1
  double dt = 1e-3;
  double t0 = 0.0;
  double t_end = 1.0;
  InitialCondition initial = DeltaInitial{};
  StabilityLimits limits{0.4, 0.4};
  bool auto_substep = true;
  unsigned threads = 1;

  double dx() const { return (b - a) / static_cast<double>(intervals); }
};

struct FdRun {
  DensityTrajectory trajectory;
  double t_start = 0.0;
  std::size_t steps = 0;
  std::string initial_description;
};

FdRun fd_run(const FdProblem& problem, std::span<const double> record_times);
DensityTrajectory fd_solve(const FdProblem& problem, std::span<const double> record_times);

}  // namespace nmpdee

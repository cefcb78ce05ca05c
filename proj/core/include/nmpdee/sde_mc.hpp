#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmpdee/density.hpp"
#include "nmpdee/model.hpp"
#include "nmpdee/noise.hpp"

namespace nmpdee {

/// States of every path at the record times, [n_paths x n_times] row-major.
struct StateEnsemble {
  std::vector<double> times;
  std::vector<double> states;
  std::size_t n_paths = 0;

  std::size_t n_times() const noexcept { return times.size(); }
  double at(std::size_t path, std::size_t time_index) const { return states[path * times.size() + time_index]; }
  /// All paths at one record time.
  std::vector<double> column(std::size_t time_index) const;
};

/// Heun predictor-corrector over pre-generated increments:
///   x* = x + f dt + g dW + h dB,
///   x' = x + (f(t,x) + f(t+dt,x*)) dt/2 + (g(t,x) + g(t+dt,x*)) dW/2 + (h(t,x) + h(t+dt,x*)) dB/2.
/// Both ensembles must share dt and n_paths; record times must lie on the grid.
StateEnsemble integrate(const SdeModel& model, const PathEnsemble& gwn, const PathEnsemble& fgn,
                        std::span<const double> record_times, unsigned threads = 1);

struct McOptions {
  double dt = 0.004;
  std::size_t n_paths = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Same scheme, generating each path's noise on the fly so memory stays at
/// O(n_paths x n_times). Path i is identical for any thread count.
StateEnsemble simulate(const SdeModel& model, const McOptions& options, std::span<const double> record_times);

/// Histogram on n_bins equal cells of [a, b], evaluated at the cell centers and
/// scaled so that dx * sum equals the fraction of samples inside [a, b].
/// x = b falls in the last bin.
DensityField estimate_density(std::span<const double> samples, double a, double b, std::size_t n_bins,
                              double time = 0.0);

}  // namespace nmpdee

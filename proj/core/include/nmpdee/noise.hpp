#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace nmpdee {

/// Hurst index H in [1/2, 1). H = 1/2 is the Brownian degenerate case.
class HurstParameter {
 public:
  explicit HurstParameter(double value);
  double value() const noexcept { return value_; }
  bool is_brownian() const noexcept { return value_ == 0.5; }

 private:
  double value_;
};

/// Simulation grid for the noise channels.
struct NoiseSpec {
  HurstParameter hurst{0.5};
  double dt = 0.004;
  std::size_t n_steps = 1;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class NoiseKind { FBM, BM };

// --- noise statistics ------------------------------------------------------

/// Regular part 2H(2H-1)|tau|^{2H-2} of the FGN autocorrelation. The Dirac
/// component 2H|tau|^{2H-1} delta(tau) is not representable pointwise, so
/// tau = 0 is rejected.
double fgn_autocorrelation_regular(double tau, HurstParameter hurst);

/// Power spectral density Gamma(2H+1) sin(H pi) / pi * |omega|^{1-2H}.
double spectral_density(double omega, HurstParameter hurst);

/// E[B^H_t B^H_s] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2 for t, s >= 0.
double fbm_covariance(double t, double s, HurstParameter hurst);

/// Exact autocovariance of FGN increments on a grid of spacing dt at integer lag.
double fgn_grid_autocovariance(std::size_t lag, double dt, HurstParameter hurst);

// --- path synthesis --------------------------------------------------------

enum class SynthesisMethod {
  Auto,       ///< circulant embedding, dense factorization if the embedding is indefinite
  Circulant,  ///< circulant embedding only; error if indefinite
  Dense,      ///< Cholesky factor of the full Toeplitz covariance
};

/// Deterministic per-path noise source. Path i depends only on (seed, i), so
/// rows can be produced in any order and from any number of threads.
class PathGenerator {
 public:
  PathGenerator(const NoiseSpec& spec, NoiseKind kind, SynthesisMethod method = SynthesisMethod::Auto);
  ~PathGenerator();
  PathGenerator(PathGenerator&&) noexcept;
  PathGenerator& operator=(PathGenerator&&) noexcept;
  PathGenerator(const PathGenerator&) = delete;
  PathGenerator& operator=(const PathGenerator&) = delete;

  /// Writes the n_steps increments of path `index` into `out`.
  void fill(std::size_t index, std::span<double> out) const;

  const NoiseSpec& spec() const noexcept { return spec_; }
  NoiseKind kind() const noexcept { return kind_; }
  /// Method actually used after the Auto fallback decision.
  SynthesisMethod method() const noexcept { return method_; }

 private:
  struct Impl;
  NoiseSpec spec_;
  NoiseKind kind_;
  SynthesisMethod method_;
  std::unique_ptr<Impl> impl_;
};

/// Materialized ensemble of increments, [n_paths x n_steps] row-major.
/// Immutable after construction.
class PathEnsemble {
 public:
  PathEnsemble(NoiseSpec spec, NoiseKind kind, std::vector<double> increments);

  const NoiseSpec& spec() const noexcept { return spec_; }
  NoiseKind kind() const noexcept { return kind_; }
  std::span<const double> row(std::size_t path) const;
  std::span<const double> data() const noexcept { return increments_; }

 private:
  NoiseSpec spec_;
  NoiseKind kind_;
  std::vector<double> increments_;
};

PathEnsemble generate_paths(const NoiseSpec& spec, NoiseKind kind, unsigned threads = 1,
                            SynthesisMethod method = SynthesisMethod::Auto);

/// Binary dump: "FPE1", H, dt (f64), n_steps, n_paths, seed (u64), then the
/// increments as row-major little-endian f64.
void write_ensemble(const PathEnsemble& ensemble, const std::filesystem::path& file);
/// The header carries no kind tag; ensembles with H = 1/2 load as BM.
PathEnsemble read_ensemble(const std::filesystem::path& file);

}  // namespace nmpdee

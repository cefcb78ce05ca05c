#include "nmpdee/noise.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include "nmpdee/errors.hpp"
#include "nmpdee/parallel.hpp"

namespace nmpdee {

namespace {

// FFTW planning is not thread-safe; execution on an existing plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kEmbeddingTolerance = 1e-10;

std::mt19937_64 path_engine(std::uint64_t seed, std::size_t index) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32),
                    0x46504531u};
  return std::mt19937_64(seq);
}

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("ensemble file truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

HurstParameter::HurstParameter(double value) : value_(value) {
  if (!(value >= 0.5 && value < 1.0)) {
    throw DomainError("Hurst parameter must satisfy 0.5 <= H < 1, got " + std::to_string(value));
  }
}

void NoiseSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("NoiseSpec: dt must be positive");
  if (n_steps < 1) throw DomainError("NoiseSpec: n_steps must be >= 1");
  if (n_paths < 1) throw DomainError("NoiseSpec: n_paths must be >= 1");
}

double fgn_autocorrelation_regular(double tau, HurstParameter hurst) {
  if (tau == 0.0) {
    throw DomainError("fgn_autocorrelation_regular: tau = 0 is the Dirac component");
  }
  const double h = hurst.value();
  return 2.0 * h * (2.0 * h - 1.0) * std::pow(std::abs(tau), 2.0 * h - 2.0);
}

double spectral_density(double omega, HurstParameter hurst) {
  const double h = hurst.value();
  if (omega == 0.0 && !hurst.is_brownian()) {
    throw DomainError("spectral_density: divergent at omega = 0 for H > 1/2");
  }
  const double amplitude = std::tgamma(2.0 * h + 1.0) * std::sin(h * std::numbers::pi) / std::numbers::pi;
  if (hurst.is_brownian()) return amplitude;
  return amplitude * std::pow(std::abs(omega), 1.0 - 2.0 * h);
}

double fbm_covariance(double t, double s, HurstParameter hurst) {
  if (t < 0.0 || s < 0.0) throw DomainError("fbm_covariance: times must be non-negative");
  const double e = 2.0 * hurst.value();
  // Symmetric by construction: |t-s| and the sum are order-independent.
  return 0.5 * ((std::pow(t, e) + std::pow(s, e)) - std::pow(std::abs(t - s), e));
}

double fgn_grid_autocovariance(std::size_t lag, double dt, HurstParameter hurst) {
  const double e = 2.0 * hurst.value();
  const double l = static_cast<double>(lag);
  const double unit = 0.5 * (std::pow(l + 1.0, e) - 2.0 * std::pow(l, e) + std::pow(std::abs(l - 1.0), e));
  return std::pow(dt, e) * unit;
}

// ---------------------------------------------------------------------------

struct PathGenerator::Impl {
  std::size_t n = 0;
  double scale = 1.0;  // dt^H (FBM) or sqrt(dt) (BM)

  // circulant embedding, m = 2n
  std::size_t m = 0;
  std::vector<double> amplitude;  // per Fourier mode k = 0..n
  fftw_plan plan = nullptr;

  // dense fallback
  Eigen::MatrixXd cholesky;

  ~Impl() {
    if (plan != nullptr) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

PathGenerator::PathGenerator(const NoiseSpec& spec, NoiseKind kind, SynthesisMethod method)
    : spec_(spec), kind_(kind), method_(method), impl_(std::make_unique<Impl>()) {
  spec_.validate();
  const std::size_t n = spec_.n_steps;
  impl_->n = n;
  if (kind_ == NoiseKind::BM) {
    impl_->scale = std::sqrt(spec_.dt);
    method_ = SynthesisMethod::Circulant;  // unused for BM: increments are i.i.d.
    return;
  }
  const HurstParameter hurst = spec_.hurst;
  impl_->scale = std::pow(spec_.dt, hurst.value());

  bool use_dense = method == SynthesisMethod::Dense;
  if (!use_dense) {
    const std::size_t m = 2 * n;
    impl_->m = m;
    // First row of the circulant: gamma(0..n), gamma(n-1..1), unit spacing.
    std::vector<double> row(m);
    for (std::size_t j = 0; j <= n; ++j) row[j] = fgn_grid_autocovariance(j, 1.0, hurst);
    for (std::size_t j = n + 1; j < m; ++j) row[j] = row[m - j];

    std::vector<std::complex<double>> spectrum(n + 1);
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_plan forward = fftw_plan_dft_r2c_1d(static_cast<int>(m), row.data(),
                                               reinterpret_cast<fftw_complex*>(spectrum.data()),
                                               FFTW_ESTIMATE | FFTW_UNALIGNED);
      fftw_execute(forward);
      fftw_destroy_plan(forward);
    }
    double min_eig = 0.0;
    impl_->amplitude.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      double lambda = spectrum[k].real();
      min_eig = std::min(min_eig, lambda);
      if (lambda < 0.0 && lambda >= -kEmbeddingTolerance) lambda = 0.0;
      const double denom = (k == 0 || k == n) ? static_cast<double>(m) : 2.0 * static_cast<double>(m);
      impl_->amplitude[k] = lambda >= 0.0 ? std::sqrt(lambda / denom) : 0.0;
    }
    if (min_eig < -kEmbeddingTolerance) {
      if (method == SynthesisMethod::Circulant) {
        throw NumericError("circulant embedding is not nonnegative definite (min eigenvalue " +
                           std::to_string(min_eig) + ")");
      }
      use_dense = true;
    } else {
      std::vector<std::complex<double>> in(n + 1);
      std::vector<double> out(m);
      std::lock_guard lock(fftw_planner_mutex());
      impl_->plan = fftw_plan_dft_c2r_1d(static_cast<int>(m), reinterpret_cast<fftw_complex*>(in.data()),
                                         out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
      method_ = SynthesisMethod::Circulant;
    }
  }
  if (use_dense) {
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        cov(i, j) = fgn_grid_autocovariance(i > j ? i - j : j - i, 1.0, hurst);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericError("dense covariance factorization failed for n_steps = " + std::to_string(n));
    }
    impl_->cholesky = llt.matrixL();
    method_ = SynthesisMethod::Dense;
  }
}

PathGenerator::~PathGenerator() = default;
PathGenerator::PathGenerator(PathGenerator&&) noexcept = default;
PathGenerator& PathGenerator::operator=(PathGenerator&&) noexcept = default;

void PathGenerator::fill(std::size_t index, std::span<double> out) const {
  const std::size_t n = impl_->n;
  if (out.size() != n) throw std::invalid_argument("PathGenerator::fill: output size must equal n_steps");
  auto engine = path_engine(spec_.seed, index);
  std::normal_distribution<double> normal(0.0, 1.0);

  if (kind_ == NoiseKind::BM) {
    for (double& v : out) v = impl_->scale * normal(engine);
    return;
  }
  if (method_ == SynthesisMethod::Dense) {
    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = normal(engine);
    const Eigen::VectorXd x = impl_->cholesky.triangularView<Eigen::Lower>() * z;
    for (std::size_t i = 0; i < n; ++i) out[i] = impl_->scale * x[i];
    return;
  }
  // Hermitian spectrum so the transform is real; modes 0 and n are real.
  const std::size_t m = impl_->m;
  std::vector<std::complex<double>> w(n + 1);
  w[0] = impl_->amplitude[0] * normal(engine);
  for (std::size_t k = 1; k < n; ++k) {
    const double re = normal(engine);
    const double im = normal(engine);
    w[k] = impl_->amplitude[k] * std::complex<double>(re, im);
  }
  w[n] = impl_->amplitude[n] * normal(engine);
  std::vector<double> x(m);
  fftw_execute_dft_c2r(impl_->plan, reinterpret_cast<fftw_complex*>(w.data()), x.data());
  for (std::size_t i = 0; i < n; ++i) out[i] = impl_->scale * x[i];
}

// ---------------------------------------------------------------------------

PathEnsemble::PathEnsemble(NoiseSpec spec, NoiseKind kind, std::vector<double> increments)
    : spec_(spec), kind_(kind), increments_(std::move(increments)) {
  spec_.validate();
  if (increments_.size() != spec_.n_paths * spec_.n_steps) {
    throw std::invalid_argument("PathEnsemble: increments size does not match n_paths x n_steps");
  }
}

std::span<const double> PathEnsemble::row(std::size_t path) const {
  return std::span<const double>(increments_).subspan(path * spec_.n_steps, spec_.n_steps);
}

PathEnsemble generate_paths(const NoiseSpec& spec, NoiseKind kind, unsigned threads, SynthesisMethod method) {
  const PathGenerator generator(spec, kind, method);
  std::vector<double> data(spec.n_paths * spec.n_steps);
  parallel_for(spec.n_paths, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      generator.fill(p, std::span<double>(data).subspan(p * spec.n_steps, spec.n_steps));
    }
  });
  return PathEnsemble(spec, kind, std::move(data));
}

void write_ensemble(const PathEnsemble& ensemble, const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  const NoiseSpec& s = ensemble.spec();
  os.write("FPE1", 4);
  write_le(os, s.hurst.value());
  write_le(os, s.dt);
  write_le(os, static_cast<std::uint64_t>(s.n_steps));
  write_le(os, static_cast<std::uint64_t>(s.n_paths));
  write_le(os, s.seed);
  for (double v : ensemble.data()) write_le(os, v);
  if (!os) throw std::runtime_error("write failed: " + file.string());
}

PathEnsemble read_ensemble(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "FPE1", 4) != 0) {
    throw std::runtime_error(file.string() + ": not an FPE1 ensemble file");
  }
  NoiseSpec s;
  s.hurst = HurstParameter(read_le<double>(is));
  s.dt = read_le<double>(is);
  s.n_steps = static_cast<std::size_t>(read_le<std::uint64_t>(is));
  s.n_paths = static_cast<std::size_t>(read_le<std::uint64_t>(is));
  s.seed = read_le<std::uint64_t>(is);
  std::vector<double> data(s.n_steps * s.n_paths);
  for (double& v : data) v = read_le<double>(is);
  return PathEnsemble(s, s.hurst.is_brownian() ? NoiseKind::BM : NoiseKind::FBM, std::move(data));
}

}  // namespace nmpdee

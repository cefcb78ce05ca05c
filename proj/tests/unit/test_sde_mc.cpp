#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nmpdee/errors.hpp"
#include "nmpdee/sde_mc.hpp"

using namespace nmpdee;

namespace {

struct Stats {
  double mean = 0.0;
  double var = 0.0;
  double se_mean = 0.0;
  double se_var = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  const double n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - s.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  s.var = m2;
  s.se_mean = std::sqrt(m2 / n);
  s.se_var = std::sqrt((m4 - m2 * m2) / n);
  return s;
}

PathEnsemble zeros(double dt, std::size_t steps, std::size_t paths) {
  NoiseSpec s{HurstParameter(0.5), dt, steps, paths, 0};
  return PathEnsemble(s, NoiseKind::BM, std::vector<double>(steps * paths, 0.0));
}

// Sums consecutive pairs of increments: the same Brownian path on a grid twice as coarse.
PathEnsemble coarsen(const PathEnsemble& fine) {
  const NoiseSpec& f = fine.spec();
  NoiseSpec c = f;
  c.dt = 2.0 * f.dt;
  c.n_steps = f.n_steps / 2;
  std::vector<double> data(c.n_steps * c.n_paths);
  for (std::size_t p = 0; p < c.n_paths; ++p) {
    const auto row = fine.row(p);
    for (std::size_t k = 0; k < c.n_steps; ++k) data[p * c.n_steps + k] = row[2 * k] + row[2 * k + 1];
  }
  return PathEnsemble(c, fine.kind(), std::move(data));
}

}  // namespace

TEST(Heun, DeterministicDecay) {
  const auto model = SdeModel::pure_gwn(StateField::linear(-1.0), StateField::zero(), 2.0);
  const double dt = 0.01;
  const auto w = zeros(dt, 100, 5);
  const std::vector<double> rec{1.0};
  const auto out = integrate(model, w, w, rec);
  for (std::size_t p = 0; p < 5; ++p) EXPECT_NEAR(out.at(p, 0), 2.0 * std::exp(-1.0), dt * dt);
}

TEST(Heun, OuTransientVariance) {
  const auto model = SdeModel::pure_gwn(StateField::linear(-1.0), StateField::constant(1.0), 0.0);
  const std::vector<double> rec{1.0};
  const auto out = simulate(model, McOptions{0.004, 100000, 3, 1}, rec);
  const Stats s = stats(out.column(0));
  EXPECT_NEAR(s.var, 0.5 * (1.0 - std::exp(-2.0)), 3.0 * s.se_var);
  EXPECT_NEAR(s.mean, 0.0, 3.0 * s.se_mean);
}

TEST(Heun, FractionalGeometricLogIsGaussian) {
  const double c = 0.5;
  const auto model = SdeModel::pure_fgn(StateField::linear(c), HurstParameter(0.8), 2.0);
  const std::vector<double> rec{1.0};
  const auto out = simulate(model, McOptions{0.004, 100000, 5, 1}, rec);
  std::vector<double> logs;
  for (double x : out.column(0)) logs.push_back(std::log(x / 2.0));
  const Stats s = stats(logs);
  EXPECT_NEAR(s.mean, 0.0, 3.0 * s.se_mean);
  EXPECT_NEAR(s.var, c * c, 3.0 * s.se_var);
}

TEST(Heun, WeakOrderOnOu) {
  const auto model = SdeModel::pure_gwn(StateField::linear(-1.0), StateField::constant(1.0), 1.0);
  const std::vector<double> rec{1.0};
  NoiseSpec spec{HurstParameter(0.5), 0.025, 40, 20000, 17};
  const auto fine = generate_paths(spec, NoiseKind::BM);
  const auto mid = coarsen(fine);
  const auto coarse = coarsen(mid);
  auto second_moment = [&](const PathEnsemble& w) {
    const auto out = integrate(model, w, w, rec);
    double m = 0.0;
    for (double x : out.column(0)) m += x * x;
    return m / static_cast<double>(out.n_paths);
  };
  const double m1 = second_moment(coarse);
  const double m2 = second_moment(mid);
  const double m3 = second_moment(fine);
  EXPECT_GE(std::abs(m1 - m2), 2.0 * std::abs(m2 - m3));
}

TEST(Heun, MatchesWongZakaiCorrectedEuler) {
  const double sigma = 0.5;
  const auto model = SdeModel::pure_gwn(StateField::zero(), StateField::linear(sigma), 1.0);
  const double dt = 0.004;
  const std::vector<double> rec{1.0};
  NoiseSpec spec{HurstParameter(0.5), dt, 250, 100000, 29};
  const auto w = generate_paths(spec, NoiseKind::BM);
  const auto heun = integrate(model, w, w, rec);

  // Ito-Euler with drift g g' / 2 on independent noise.
  spec.seed = 30;
  const auto w2 = generate_paths(spec, NoiseKind::BM);
  std::vector<double> ito(spec.n_paths);
  for (std::size_t p = 0; p < spec.n_paths; ++p) {
    double x = 1.0;
    for (double dw : w2.row(p)) x += 0.5 * sigma * sigma * x * dt + sigma * x * dw;
    ito[p] = x;
  }
  const Stats a = stats(heun.column(0));
  const Stats b = stats(ito);
  EXPECT_NEAR(a.mean, b.mean, 4.0 * std::hypot(a.se_mean, b.se_mean));
  EXPECT_NEAR(a.var, b.var, 4.0 * std::hypot(a.se_var, b.se_var));
  EXPECT_NEAR(a.mean, std::exp(0.5 * sigma * sigma), 4.0 * a.se_mean);
}

TEST(Heun, StreamingMatchesMaterializedEnsembles) {
  const auto model = SdeModel::pure_gwn(StateField::linear(-0.5), StateField::linear(0.3), 1.5);
  const McOptions opt{0.01, 64, 123, 1};
  const std::vector<double> rec{0.2, 0.5};
  const auto streamed = simulate(model, opt, rec);
  NoiseSpec ws{HurstParameter(0.5), opt.dt, 50, opt.n_paths, opt.seed + 0x9E3779B97F4A7C15ull};
  const auto w = generate_paths(ws, NoiseKind::BM);
  const auto direct = integrate(model, w, w, rec);
  EXPECT_EQ(streamed.states, direct.states);
}

TEST(Heun, ThreadCountInvariant) {
  const double d = 0.5;
  auto cubic = [d](double k) { return StateField::polynomial({0.0, k, 0.0, -k * d}); };
  const auto model = SdeModel::nonlinear_commutative(cubic(-1.0), cubic(0.5), cubic(0.5), HurstParameter(0.8), 0.4);
  const std::vector<double> rec{0.1, 0.5};
  const auto a = simulate(model, McOptions{0.004, 2000, 1, 1}, rec);
  const auto b = simulate(model, McOptions{0.004, 2000, 1, 8}, rec);
  EXPECT_EQ(a.states, b.states);
  const auto c = simulate(model, McOptions{0.004, 2000, 1, 1}, rec);
  EXPECT_EQ(a.states, c.states);
}

TEST(Heun, RejectsBadInputs) {
  const auto model = SdeModel::pure_gwn(StateField::linear(-1.0), StateField::constant(1.0), 0.0);
  const std::vector<double> off_grid{0.015};
  EXPECT_THROW(simulate(model, McOptions{0.01, 10, 0, 1}, off_grid), DomainError);
  const std::vector<double> decreasing{0.5, 0.2};
  EXPECT_THROW(simulate(model, McOptions{0.01, 10, 0, 1}, decreasing), DomainError);

  const auto frac = SdeModel::pure_fgn(StateField::constant(1.0), HurstParameter(0.7), 0.0);
  const auto w = zeros(0.01, 10, 3);
  const std::vector<double> rec{0.1};
  EXPECT_THROW(integrate(frac, w, w, rec), DomainError);
  const std::vector<double> too_late{0.2};
  EXPECT_THROW(integrate(model, w, w, too_late), DomainError);
}

TEST(Heun, BlowUpIsReported) {
  const auto model = SdeModel::pure_gwn(StateField::polynomial({0.0, 0.0, 0.0, 1.0}), StateField::zero(), 10.0);
  const std::vector<double> rec{1.0};
  EXPECT_THROW(simulate(model, McOptions{0.1, 2, 0, 1}, rec), NumericError);
}

TEST(Histogram, GaussianSamples) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01;
  std::vector<double> x(1000000);
  for (double& v : x) v = n01(rng);
  const auto f = estimate_density(x, -6.0, 6.0, 120);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    const double pdf = std::exp(-0.5 * f.grid[i] * f.grid[i]) / std::sqrt(2.0 * std::numbers::pi);
    worst = std::max(worst, std::abs(f.values[i] - pdf));
  }
  EXPECT_LE(worst, 0.01);
  double mass = 0.0;
  for (double v : f.values) mass += v * f.spacing();
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(Histogram, ConstantSamplesFillOneBin) {
  const std::vector<double> x(500, 0.33);
  const auto f = estimate_density(x, 0.0, 1.0, 10);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(f.values[i], i == 3 ? 10.0 : 0.0);
}

TEST(Histogram, EmptyRegionIsZeroAndOutsideSamplesReduceMass) {
  std::vector<double> x{0.1, 0.2, 0.15, 5.0};
  const auto f = estimate_density(x, 0.0, 2.0, 20);
  for (std::size_t i = 3; i < 20; ++i) EXPECT_EQ(f.values[i], 0.0);
  double mass = 0.0;
  for (double v : f.values) mass += v * 0.1;
  EXPECT_NEAR(mass, 0.75, 1e-14);
  EXPECT_THROW(estimate_density(x, 10.0, 12.0, 20), DomainError);
  EXPECT_THROW(estimate_density(x, 0.0, 1.0, 5), DomainError);
}

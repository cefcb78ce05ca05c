#include "nmpdee/sde_mc.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>

#include "nmpdee/errors.hpp"
#include "nmpdee/parallel.hpp"

namespace nmpdee {

namespace {

// Offset separating the GWN substreams from the FGN ones under one user seed.
constexpr std::uint64_t kGwnSeedOffset = 0x9E3779B97F4A7C15ull;

std::vector<std::size_t> record_indices(std::span<const double> record_times, double dt) {
  std::vector<std::size_t> out;
  out.reserve(record_times.size());
  double previous = -1.0;
  for (double r : record_times) {
    if (!(r >= 0.0)) throw DomainError(fmt::format("record time {:g} is negative", r));
    if (!(r > previous)) throw DomainError("record times must be strictly increasing");
    previous = r;
    const double k = std::round(r / dt);
    if (std::abs(k * dt - r) > 1e-9 * std::max(1.0, r)) {
      throw DomainError(fmt::format("record time {:g} is not on the grid of step {:g}", r, dt));
    }
    out.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

void heun_path(const SdeModel& model, double dt, std::span<const double> dw, std::span<const double> db,
               std::span<const std::size_t> record, std::size_t path, double* out) {
  const auto& fl = model.fields();
  double x = model.x0();
  std::size_t next = 0;
  while (next < record.size() && record[next] == 0) out[next++] = x;
  const std::size_t steps = record.empty() ? 0 : record.back();
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    const double t1 = t + dt;
    const double w = dw.empty() ? 0.0 : dw[n];
    const double b = db.empty() ? 0.0 : db[n];
    const double f0 = fl.f.value(t, x);
    const double g0 = fl.g.value(t, x);
    const double h0 = fl.h.value(t, x);
    const double xp = x + f0 * dt + g0 * w + h0 * b;
    x += 0.5 * ((f0 + fl.f.value(t1, xp)) * dt + (g0 + fl.g.value(t1, xp)) * w + (h0 + fl.h.value(t1, xp)) * b);
    if (!std::isfinite(x)) {
      throw NumericError(fmt::format("path {} became non-finite at t = {:g}; reduce dt", path, t1));
    }
    while (next < record.size() && record[next] == n + 1) out[next++] = x;
  }
}

bool uses_gwn(const SdeModel& model) { return model.model_class() != ModelClass::PureFgn; }
bool uses_fgn(const SdeModel& model) { return model.model_class() != ModelClass::PureGwn; }

}  // namespace

std::vector<double> StateEnsemble::column(std::size_t time_index) const {
  std::vector<double> out(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) out[p] = at(p, time_index);
  return out;
}

StateEnsemble integrate(const SdeModel& model, const PathEnsemble& gwn, const PathEnsemble& fgn,
                        std::span<const double> record_times, unsigned threads) {
  const NoiseSpec& sw = gwn.spec();
  const NoiseSpec& sf = fgn.spec();
  if (sw.dt != sf.dt) throw DomainError("integrate: ensembles have different dt");
  if (sw.n_paths != sf.n_paths) throw DomainError("integrate: ensembles have different path counts");
  if (uses_fgn(model) && !model.hurst().is_brownian() && fgn.kind() != NoiseKind::FBM) {
    throw DomainError("integrate: the fractional channel needs an FBM ensemble");
  }
  const auto record = record_indices(record_times, sw.dt);
  const std::size_t steps = record.empty() ? 0 : record.back();
  if (steps > sw.n_steps || steps > sf.n_steps) {
    throw DomainError(fmt::format("integrate: record time {:g} beyond the ensemble horizon", record_times.back()));
  }

  StateEnsemble out;
  out.times.assign(record_times.begin(), record_times.end());
  out.n_paths = sw.n_paths;
  out.states.resize(out.n_paths * out.times.size());
  parallel_for(out.n_paths, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      heun_path(model, sw.dt, gwn.row(p), fgn.row(p), record, p, out.states.data() + p * out.times.size());
    }
  });
  return out;
}

StateEnsemble simulate(const SdeModel& model, const McOptions& options, std::span<const double> record_times) {
  const auto record = record_indices(record_times, options.dt);
  const std::size_t steps = std::max<std::size_t>(1, record.empty() ? 1 : record.back());

  NoiseSpec fspec{model.hurst(), options.dt, steps, options.n_paths, options.seed};
  NoiseSpec wspec{HurstParameter(0.5), options.dt, steps, options.n_paths, options.seed + kGwnSeedOffset};
  fspec.validate();
  const bool want_w = uses_gwn(model);
  const bool want_b = uses_fgn(model);
  const NoiseKind fkind = model.hurst().is_brownian() ? NoiseKind::BM : NoiseKind::FBM;
  std::optional<PathGenerator> wgen, bgen;
  if (want_w) wgen.emplace(wspec, NoiseKind::BM);
  if (want_b) bgen.emplace(fspec, fkind);

  StateEnsemble out;
  out.times.assign(record_times.begin(), record_times.end());
  out.n_paths = options.n_paths;
  out.states.resize(out.n_paths * out.times.size());
  parallel_for(out.n_paths, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> dw(want_w ? steps : 0);
    std::vector<double> db(want_b ? steps : 0);
    for (std::size_t p = begin; p < end; ++p) {
      if (want_w) wgen->fill(p, dw);
      if (want_b) bgen->fill(p, db);
      heun_path(model, options.dt, dw, db, record, p, out.states.data() + p * out.times.size());
    }
  });
  return out;
}

DensityField estimate_density(std::span<const double> samples, double a, double b, std::size_t n_bins,
                              double time) {
  if (n_bins < 10) throw DomainError("estimate_density: need at least 10 bins");
  if (!(a < b)) throw DomainError("estimate_density: requires a < b");
  const double dx = (b - a) / static_cast<double>(n_bins);
  std::vector<double> counts(n_bins, 0.0);
  std::size_t inside = 0;
  for (double x : samples) {
    if (!(x >= a && x <= b)) continue;
    auto j = static_cast<std::size_t>(std::floor((x - a) / dx));
    counts[std::min(j, n_bins - 1)] += 1.0;
    ++inside;
  }
  if (inside == 0) throw DomainError(fmt::format("estimate_density: no sample falls inside [{:g}, {:g}]", a, b));
  const double scale = 1.0 / (static_cast<double>(samples.size()) * dx);
  for (double& c : counts) c *= scale;
  return DensityField{cell_centers(a, b, n_bins), std::move(counts), time};
}

}  // namespace nmpdee

#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <exception>

#include "nmpdee/errors.hpp"
#include "nmpdee/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

int run(const std::string& target, const std::string& out, std::optional<std::uint64_t> seed,
        std::optional<std::size_t> paths, std::optional<unsigned> threads) {
  nmpdee::ExperimentConfig cfg = nmpdee::resolve_config(target);
  if (!out.empty()) cfg.output_dir = out;
  if (seed) cfg.seed = *seed;
  if (paths) cfg.paths = *paths;
  if (threads) cfg.threads = *threads;

  const auto start = std::chrono::steady_clock::now();
  const auto outputs = nmpdee::run_experiment(cfg);
  for (const auto& o : outputs) {
    fmt::print("{}\n", o.directory.string());
    for (const auto& e : o.errors) {
      fmt::print("  {:<5} vs {:<5} t = {:<6g} L2 = {:.4e}  Linf = {:.4e}\n", e.method, e.reference, e.time, e.l2,
                 e.linf);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fmt::print("done in {:.1f} s\n", secs);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density evolution solvers for Langevin equations with fractional and white noise"};
  app.require_subcommand(1);

  std::string target, out;
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  unsigned threads = 1;
  auto* run_cmd = app.add_subcommand("run", "Run a config file or a built-in preset");
  run_cmd->add_option("config", target, "INI file or preset name")->required();
  run_cmd->add_option("--out", out, "Output directory");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Monte Carlo seed");
  auto* paths_opt = run_cmd->add_option("--paths", paths, "Monte Carlo path count")->check(CLI::PositiveNumber);
  auto* threads_opt = run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* list_cmd = app.add_subcommand("list", "List built-in presets");

  std::string preset;
  auto* describe_cmd = app.add_subcommand("describe", "Print a preset's configuration");
  describe_cmd->add_option("preset", preset, "Preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      return run(target, out, *seed_opt ? std::optional(seed) : std::nullopt,
                 *paths_opt ? std::optional(paths) : std::nullopt,
                 *threads_opt ? std::optional(threads) : std::nullopt);
    }
    if (*list_cmd) {
      for (const auto& p : nmpdee::list_presets()) fmt::print("{:<22} {}\n", p.name, p.description);
      return kOk;
    }
    if (*describe_cmd) {
      const auto* p = nmpdee::find_preset(preset);
      if (!p) throw nmpdee::ConfigError("", fmt::format("unknown preset '{}'; see `nmpdee list`", preset));
      fmt::print("# {}\n{}", p->description, nmpdee::to_ini(nmpdee::parse_config(p->ini, p->name)));
      return kOk;
    }
  } catch (const nmpdee::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const nmpdee::NumericError& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kNumericError;
  } catch (const nmpdee::DomainError& e) {
    fmt::print(stderr, "invalid input: {}\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return kOk;
}

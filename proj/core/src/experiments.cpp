#include "nmpdee/experiments.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nmpdee/coefficients.hpp"
#include "nmpdee/errors.hpp"
#include "nmpdee/exact.hpp"
#include "nmpdee/fd.hpp"
#include "nmpdee/ldg.hpp"
#include "nmpdee/sde_mc.hpp"

namespace nmpdee {

namespace pt = boost::property_tree;

const char* to_string(Method m) {
  switch (m) {
    case Method::LDG: return "LDG";
    case Method::FD: return "FD";
    case Method::MC: return "MC";
    case Method::EXACT: return "EXACT";
  }
  return "?";
}

namespace {

struct FamilyInfo {
  const char* name;
  std::vector<std::string> params;
  bool fractional;  ///< uses the hurst key
};

const std::vector<FamilyInfo>& families() {
  static const std::vector<FamilyInfo> list = {
      {"double_well", {"a", "b", "sigma"}, false},      {"gbm_time_varying", {"a", "b"}, false},
      {"linear_fgn", {"a", "b", "c"}, true},            {"linear_tv", {"a", "b", "c", "d"}, true},
      {"nonlinear_fgn", {"a", "b", "c", "d"}, true},    {"fgn_only", {"sigma"}, true},
  };
  return list;
}

const FamilyInfo* find_family(std::string_view name) {
  for (const auto& f : families()) {
    if (name == f.name) return &f;
  }
  return nullptr;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(path, fmt::format("expected a number, got '{}'", text));
}

std::uint64_t parse_unsigned(const std::string& text, const std::string& path) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (trim(text.substr(used)).empty() && text.find('-') == std::string::npos) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(path, fmt::format("expected a non-negative integer, got '{}'", text));
}

std::vector<double> parse_doubles(const std::string& text, const std::string& path) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(item, path));
  return out;
}

Method parse_method(const std::string& text, const std::string& path) {
  std::string upper = text;
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "LDG") return Method::LDG;
  if (upper == "FD") return Method::FD;
  if (upper == "MC") return Method::MC;
  if (upper == "EXACT") return Method::EXACT;
  throw ConfigError(path, fmt::format("unknown solver '{}' (expected LDG, FD, MC or EXACT)", text));
}

// Visits every key of a section, rejecting unknown ones.
class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) tree_ = *child;
  }

  std::optional<std::string> take(const std::string& key) {
    seen_.insert(key);
    if (auto v = tree_.get_optional<std::string>(key)) return trim(*v);
    return std::nullopt;
  }
  std::string path(const std::string& key) const { return name_ + "." + key; }

  void reject_unknown(const std::set<std::string>& extra = {}) const {
    for (const auto& [key, value] : tree_) {
      if (!seen_.count(key) && !extra.count(key)) throw ConfigError(path(key), "unknown key");
    }
  }

  const pt::ptree& tree() const { return tree_; }

 private:
  std::string name_;
  pt::ptree tree_;
  std::set<std::string> seen_;
};

}  // namespace

bool ExperimentConfig::has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

void ExperimentConfig::validate() const {
  const FamilyInfo* fam = find_family(family);
  if (!fam) {
    std::vector<std::string> names;
    for (const auto& f : families()) names.emplace_back(f.name);
    throw ConfigError("model.family", fmt::format("unknown family '{}' (one of {})", family, fmt::join(names, ", ")));
  }
  for (const auto& p : fam->params) {
    if (!params.count(p)) throw ConfigError("model." + p, fmt::format("required by family {}", family));
  }
  for (const auto& [k, v] : params) {
    if (std::find(fam->params.begin(), fam->params.end(), k) == fam->params.end()) {
      throw ConfigError("model." + k, fmt::format("not a parameter of family {}", family));
    }
  }
  try {
    (void)HurstParameter(hurst);
    for (double h : hurst_sweep) (void)HurstParameter(h);
  } catch (const DomainError& e) {
    throw ConfigError("model.hurst", e.what());
  }
  if (!fam->fractional && (hurst != 0.5 || !hurst_sweep.empty())) {
    throw ConfigError("model.hurst", fmt::format("family {} has no fractional channel", family));
  }
  if (centering != "drift_only" && centering != "printed") {
    throw ConfigError("model.centering", "expected drift_only or printed");
  }
  if (methods.empty()) throw ConfigError("solver.methods", "at least one solver is required");
  if (times.empty()) throw ConfigError("output.times", "at least one record time is required");
  if (!std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end()) {
    throw ConfigError("output.times", "record times must be strictly increasing");
  }
  if (times.front() < 0.0) throw ConfigError("output.times", "record times must be non-negative");
  if (!(a < b)) throw ConfigError("grid.a", "requires grid.a < grid.b");
  if (cells < 10) throw ConfigError("grid.cells", "need at least 10 cells");
  if (!(dt > 0.0)) throw ConfigError("solver.dt", "must be positive");
  if (degree > 6) throw ConfigError("solver.degree", "degrees above 6 are not supported");
  if (initial != "delta" && initial != "warm_start") throw ConfigError("solver.initial", "expected delta or warm_start");
  if (initial == "warm_start") {
    if (!(warm_start_time > 0.0)) throw ConfigError("solver.warm_start_time", "must be positive for warm_start");
    if (times.front() < warm_start_time) {
      throw ConfigError("output.times", "record times must not precede solver.warm_start_time");
    }
  }
  if (!(mc_dt > 0.0)) throw ConfigError("mc.dt", "must be positive");
  if (has(Method::MC)) {
    if (paths < 1) throw ConfigError("mc.paths", "must be positive");
    for (double t : times) {
      const double k = std::round(t / mc_dt);
      if (std::abs(k * mc_dt - t) > 1e-9 * std::max(1.0, t)) {
        throw ConfigError("output.times", fmt::format("time {:g} is not a multiple of mc.dt = {:g}", t, mc_dt));
      }
    }
  }
  if (threads < 1) throw ConfigError("threads", "must be positive");
}

ExperimentConfig parse_config(const std::string& text, std::string_view origin) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", fmt::format("{}: line {}: {}", origin, e.line(), e.message()));
  }
  static const std::set<std::string> known = {"experiment", "model", "solver", "mc", "grid", "output", "sweep"};
  for (const auto& [name, child] : root) {
    if (!known.count(name)) throw ConfigError(name, "unknown section");
    if (child.empty() && !child.data().empty()) throw ConfigError(name, "keys must sit inside a section");
  }

  ExperimentConfig cfg;
  {
    Section s(root, "experiment");
    if (auto v = s.take("name")) cfg.name = *v;
    if (auto v = s.take("description")) cfg.description = *v;
    s.reject_unknown();
  }
  {
    Section s(root, "model");
    auto family = s.take("family");
    if (!family) throw ConfigError("model.family", "missing");
    cfg.family = *family;
    if (auto v = s.take("x0")) cfg.x0 = parse_double(*v, s.path("x0"));
    if (auto v = s.take("hurst")) cfg.hurst = parse_double(*v, s.path("hurst"));
    if (auto v = s.take("centering")) cfg.centering = *v;
    for (const auto& [key, value] : s.tree()) {
      if (key == "family" || key == "x0" || key == "hurst" || key == "centering") continue;
      cfg.params[key] = parse_double(trim(value.data()), s.path(key));
    }
  }
  {
    Section s(root, "solver");
    if (auto v = s.take("methods")) {
      for (const auto& m : split_list(*v)) cfg.methods.push_back(parse_method(m, s.path("methods")));
    }
    if (auto v = s.take("degree")) cfg.degree = parse_unsigned(*v, s.path("degree"));
    if (auto v = s.take("dt")) cfg.dt = parse_double(*v, s.path("dt"));
    if (auto v = s.take("initial")) cfg.initial = *v;
    if (auto v = s.take("sigma0")) cfg.sigma0 = parse_double(*v, s.path("sigma0"));
    if (auto v = s.take("warm_start_time")) cfg.warm_start_time = parse_double(*v, s.path("warm_start_time"));
    if (auto v = s.take("c_cfl")) cfg.c_cfl = parse_double(*v, s.path("c_cfl"));
    if (auto v = s.take("c_adv")) cfg.c_adv = parse_double(*v, s.path("c_adv"));
    if (auto v = s.take("fd_c_cfl")) cfg.fd_c_cfl = parse_double(*v, s.path("fd_c_cfl"));
    if (auto v = s.take("threads")) cfg.threads = static_cast<unsigned>(parse_unsigned(*v, s.path("threads")));
    s.reject_unknown();
  }
  {
    Section s(root, "mc");
    if (auto v = s.take("dt")) cfg.mc_dt = parse_double(*v, s.path("dt"));
    if (auto v = s.take("paths")) cfg.paths = parse_unsigned(*v, s.path("paths"));
    if (auto v = s.take("seed")) cfg.seed = parse_unsigned(*v, s.path("seed"));
    s.reject_unknown();
  }
  {
    Section s(root, "grid");
    if (auto v = s.take("a")) cfg.a = parse_double(*v, s.path("a"));
    if (auto v = s.take("b")) cfg.b = parse_double(*v, s.path("b"));
    auto cells = s.take("cells");
    auto dx = s.take("dx");
    if (cells && dx) throw ConfigError("grid.dx", "give either grid.cells or grid.dx, not both");
    if (cells) cfg.cells = parse_unsigned(*cells, s.path("cells"));
    if (dx) {
      const double h = parse_double(*dx, s.path("dx"));
      if (!(h > 0.0)) throw ConfigError("grid.dx", "must be positive");
      cfg.cells = static_cast<std::size_t>(std::llround((cfg.b - cfg.a) / h));
    }
    s.reject_unknown();
  }
  {
    Section s(root, "output");
    if (auto v = s.take("times")) cfg.times = parse_doubles(*v, s.path("times"));
    if (auto v = s.take("dir")) cfg.output_dir = *v;
    s.reject_unknown();
  }
  {
    Section s(root, "sweep");
    if (auto v = s.take("hurst")) cfg.hurst_sweep = parse_doubles(*v, s.path("hurst"));
    s.reject_unknown();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("", fmt::format("cannot open config file {}", file.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.string());
}

std::string to_ini(const ExperimentConfig& c) {
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
  auto doubles = [](const std::vector<double>& v) {
    std::vector<std::string> s;
    for (double x : v) s.push_back(fmt::format("{}", x));
    return fmt::format("{}", fmt::join(s, ", "));
  };
  out += "[experiment]\n";
  line("name", c.name);
  if (!c.description.empty()) line("description", c.description);
  out += "\n[model]\n";
  line("family", c.family);
  for (const auto& [k, v] : c.params) line(k, fmt::format("{}", v));
  line("x0", fmt::format("{}", c.x0));
  line("hurst", fmt::format("{}", c.hurst));
  line("centering", c.centering);
  out += "\n[solver]\n";
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.emplace_back(to_string(m));
  line("methods", fmt::format("{}", fmt::join(methods, ", ")));
  line("degree", c.degree);
  line("dt", fmt::format("{}", c.dt));
  line("initial", c.initial);
  line("sigma0", fmt::format("{}", c.sigma0));
  line("warm_start_time", fmt::format("{}", c.warm_start_time));
  line("c_cfl", fmt::format("{}", c.c_cfl));
  line("c_adv", fmt::format("{}", c.c_adv));
  line("fd_c_cfl", fmt::format("{}", c.fd_c_cfl));
  line("threads", c.threads);
  out += "\n[mc]\n";
  line("dt", fmt::format("{}", c.mc_dt));
  line("paths", c.paths);
  line("seed", c.seed);
  out += "\n[grid]\n";
  line("a", fmt::format("{}", c.a));
  line("b", fmt::format("{}", c.b));
  line("cells", c.cells);
  out += "\n[output]\n";
  line("times", doubles(c.times));
  line("dir", c.output_dir.string());
  if (!c.hurst_sweep.empty()) {
    out += "\n[sweep]\n";
    line("hurst", doubles(c.hurst_sweep));
  }
  return out;
}

// --- presets -------------------------------------------------------------------

const std::vector<PresetInfo>& list_presets() {
  static const std::vector<PresetInfo> presets = {
      {"table1", "double-well FPK, a=b=sigma=1, stationary density at T=30 (LDG, FD, MC vs exact)",
       R"([experiment]
name = table1
[model]
family = double_well
a = 1
b = 1
sigma = 1
x0 = 0
[solver]
methods = LDG, FD, MC, EXACT
dt = 0.001
[grid]
a = -3
b = 3
dx = 0.05
[output]
times = 30
)"},
      {"table2", "Ornstein-Uhlenbeck transient, a=-1, sigma=1 on [-6,6] (LDG, FD vs exact)",
       R"([experiment]
name = table2
[model]
family = double_well
a = -1
b = 0
sigma = 1
x0 = 0
[solver]
methods = LDG, FD, EXACT
dt = 0.001
[grid]
a = -6
b = 6
dx = 0.05
[output]
times = 0.2, 0.5, 1, 10, 30
)"},
      {"table3", "geometric motion with time-varying noise, a=0.02, b=0.3, x0=2 (LDG, FD vs exact)",
       R"([experiment]
name = table3
[model]
family = gbm_time_varying
a = 0.02
b = 0.3
x0 = 2
[solver]
methods = LDG, FD, EXACT
dt = 0.00167
[grid]
a = 0
b = 8
cells = 120
[output]
times = 1, 2, 3, 4, 5
)"},
      {"table4", "linear FGN model with b=0, a=-0.5, c=0.25, H=0.8, warm start at t=0.1 (LDG, FD, MC vs exact)",
       R"([experiment]
name = table4
[model]
family = linear_fgn
a = -0.5
b = 0
c = 0.25
hurst = 0.8
x0 = 2
[solver]
methods = LDG, FD, MC, EXACT
dt = 0.0001
initial = warm_start
warm_start_time = 0.1
[grid]
a = 0
b = 6
dx = 0.1
[output]
times = 0.2, 0.5, 1, 1.5, 2
)"},
      {"example1", "double-well FPK, a=b=sigma=1, transient densities (LDG, MC)",
       R"([experiment]
name = example1
[model]
family = double_well
a = 1
b = 1
sigma = 1
x0 = 0
[solver]
methods = LDG, MC
dt = 0.001
[grid]
a = -3
b = 3
dx = 0.05
[output]
times = 0.2, 0.5, 1, 2, 5
)"},
      {"example1-b0", "double-well equation with b=0 (OU), a=-1, sigma=1 (LDG, MC vs exact)",
       R"([experiment]
name = example1-b0
[model]
family = double_well
a = -1
b = 0
sigma = 1
x0 = 0
[solver]
methods = LDG, MC, EXACT
dt = 0.001
[grid]
a = -6
b = 6
dx = 0.05
[output]
times = 0.2, 0.5, 1, 2
)"},
      {"example2", "geometric motion with time-varying noise, a=0.02, b=0.3 (LDG, MC vs exact)",
       R"([experiment]
name = example2
[model]
family = gbm_time_varying
a = 0.02
b = 0.3
x0 = 2
[solver]
methods = LDG, MC, EXACT
dt = 0.00167
[grid]
a = 0
b = 8
cells = 120
[output]
times = 1, 2, 3
)"},
      {"linear-fgn", "linear model with GWN and FGN, a=-0.5, b=0.25, c=0.25, H=0.8 (LDG, MC)",
       R"([experiment]
name = linear-fgn
[model]
family = linear_fgn
a = -0.5
b = 0.25
c = 0.25
hurst = 0.8
x0 = 2
[solver]
methods = LDG, MC
dt = 0.0005
[grid]
a = 0
b = 6
dx = 0.1
[output]
times = 0.5, 1, 2
)"},
      {"linear-fgn-b0", "linear FGN model with b=0, a=-0.5, c=0.5, H=0.8 (LDG, MC vs exact)",
       R"([experiment]
name = linear-fgn-b0
[model]
family = linear_fgn
a = -0.5
b = 0
c = 0.5
hurst = 0.8
x0 = 2
[solver]
methods = LDG, MC, EXACT
dt = 0.0001
initial = warm_start
warm_start_time = 0.1
[grid]
a = 0
b = 6
dx = 0.05
[output]
times = 0.5, 1, 2
)"},
      {"linear-tv", "time-varying linear model a t, b sqrt(t), c t^d with a=-0.25, b=c=0.25, d=0.8, H=0.8 (LDG, MC)",
       R"([experiment]
name = linear-tv
[model]
family = linear_tv
a = -0.25
b = 0.25
c = 0.25
d = 0.8
hurst = 0.8
x0 = 2
[solver]
methods = LDG, MC
dt = 0.0004
[grid]
a = 0
b = 6
dx = 0.1
[output]
times = 0.5, 1, 2, 3
)"},
      {"fig6", "same model as linear-tv at the figure's times (LDG, MC)",
       R"([experiment]
name = fig6
[model]
family = linear_tv
a = -0.25
b = 0.25
c = 0.25
d = 0.8
hurst = 0.8
x0 = 2
[solver]
methods = LDG, MC
dt = 0.0004
[grid]
a = 0
b = 6
dx = 0.1
[output]
times = 0.5, 1, 1.5, 2
)"},
      {"nonlinear-fgn", "nonlinear commutative model a,b,c (x - d x^3), a=-1, b=c=d=0.5, H=0.8, x0=0.4 (LDG, MC)",
       R"([experiment]
name = nonlinear-fgn
[model]
family = nonlinear_fgn
a = -1
b = 0.5
c = 0.5
d = 0.5
hurst = 0.8
x0 = 0.4
[solver]
methods = LDG, MC
dt = 0.0011
sigma0 = 0.0125
[grid]
a = 0
b = 1.5
dx = 0.025
[output]
times = 0.1, 0.5, 1
)"},
      {"fgn-only", "dX = sqrt(1 + sigma X^2) o dB^H, sigma=0.1, H=0.8 (LDG, MC vs exact)",
       R"([experiment]
name = fgn-only
[model]
family = fgn_only
sigma = 0.1
hurst = 0.8
x0 = 0
[solver]
methods = LDG, MC, EXACT
dt = 0.0006
[grid]
a = -5
b = 5
dx = 0.1
[output]
times = 0.2, 0.5, 1
)"},
      {"hurst-sweep", "fgn-only model at t=0.5 for H in {0.6, 0.7, 0.8, 0.9} (LDG, MC vs exact)",
       R"([experiment]
name = hurst-sweep
[model]
family = fgn_only
sigma = 0.1
hurst = 0.8
x0 = 0
[solver]
methods = LDG, MC, EXACT
dt = 0.0006
[grid]
a = -4
b = 4
dx = 0.1
[output]
times = 0.5
[sweep]
hurst = 0.6, 0.7, 0.8, 0.9
)"},
      {"hurst-sweep-nonlinear", "nonlinear commutative model at t=0.5 for H in {0.6, 0.7, 0.8, 0.9} (LDG, MC)",
       R"([experiment]
name = hurst-sweep-nonlinear
[model]
family = nonlinear_fgn
a = -1
b = 0.5
c = 0.5
d = 0.5
hurst = 0.8
x0 = 0.4
[solver]
methods = LDG, MC
dt = 0.0011
sigma0 = 0.0125
[grid]
a = 0
b = 1.5
dx = 0.025
[output]
times = 0.5
[sweep]
hurst = 0.6, 0.7, 0.8, 0.9
)"},
  };
  return presets;
}

const PresetInfo* find_preset(std::string_view name) {
  for (const auto& p : list_presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

ExperimentConfig resolve_config(const std::string& config_or_preset) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(config_or_preset, ec)) return load_config(config_or_preset);
  if (const PresetInfo* p = find_preset(config_or_preset)) {
    ExperimentConfig cfg = parse_config(p->ini, "preset " + p->name);
    cfg.output_dir = std::filesystem::path("out") / p->name;
    return cfg;
  }
  throw ConfigError("", fmt::format("'{}' is neither a config file nor a preset name", config_or_preset));
}

// --- running ---------------------------------------------------------------------

namespace {

using Density2 = std::function<double(double x, double t)>;

struct Reference {
  Density2 density;
  std::string label;
};

SdeModel build_model(const ExperimentConfig& c, double hurst) {
  const auto& p = c.params;
  const HurstParameter H(hurst);
  if (c.family == "double_well") {
    return SdeModel::pure_gwn(StateField::polynomial({0.0, p.at("a"), 0.0, -p.at("b")}),
                              StateField::constant(p.at("sigma")), c.x0);
  }
  if (c.family == "gbm_time_varying") {
    const double ra = std::sqrt(p.at("a"));
    const double e = p.at("b");
    return SdeModel::pure_gwn(StateField::zero(),
                              StateField::time_scaled([ra, e](double t) { return ra * std::pow(t, e); },
                                                      StateField::linear(1.0)),
                              c.x0);
  }
  if (c.family == "linear_fgn") {
    return SdeModel::linear(TimeField::constant(p.at("a")), TimeField::constant(p.at("b")),
                            TimeField::constant(p.at("c")), H, c.x0);
  }
  if (c.family == "linear_tv") {
    return SdeModel::linear(TimeField::power_law(p.at("a"), 1.0), TimeField::power_law(p.at("b"), 0.5),
                            TimeField::power_law(p.at("c"), p.at("d")), H, c.x0);
  }
  if (c.family == "nonlinear_fgn") {
    const double d = p.at("d");
    auto cubic = [d](double k) { return StateField::polynomial({0.0, k, 0.0, -k * d}); };
    return SdeModel::nonlinear_commutative(cubic(p.at("a")), cubic(p.at("b")), cubic(p.at("c")), H, c.x0);
  }
  if (c.family == "fgn_only") {
    const double s = p.at("sigma");
    StateField h{[s](double, double x) { return std::sqrt(1.0 + s * x * x); },
                 [s](double, double x) { return s * x / std::sqrt(1.0 + s * x * x); },
                 [s](double, double x) { return s / std::pow(1.0 + s * x * x, 1.5); }, true};
    return SdeModel::pure_fgn(std::move(h), H, c.x0);
  }
  throw ConfigError("model.family", "unknown family " + c.family);
}

std::optional<Reference> exact_reference(const ExperimentConfig& c, double hurst) {
  const auto& p = c.params;
  if (c.family == "double_well") {
    if (p.at("b") > 0.0) {
      auto sd = std::make_shared<StationaryDoubleWell>(p.at("a"), p.at("b"), p.at("sigma"), c.a, c.b);
      return Reference{[sd](double x, double) { return (*sd)(x); }, "stationary double-well"};
    }
    if (p.at("b") == 0.0 && p.at("a") < 0.0 && c.x0 == 0.0) {
      const double a = p.at("a");
      const double s = p.at("sigma");
      return Reference{[a, s](double x, double t) { return ou_transient(x, t, a, s); }, "OU transient"};
    }
    return std::nullopt;
  }
  if (c.family == "gbm_time_varying") {
    const double a = p.at("a");
    const double b = p.at("b");
    const double x0 = c.x0;
    return Reference{[a, b, x0](double x, double t) { return gbm_time_varying(x, t, a, b, x0); },
                     "time-varying lognormal"};
  }
  if (c.family == "linear_fgn" && p.at("b") == 0.0) {
    const double a = p.at("a");
    const double cc = p.at("c");
    const double x0 = c.x0;
    const HurstParameter H(hurst);
    const auto centering = c.centering == "printed" ? LognormalCentering::Printed : LognormalCentering::DriftOnly;
    return Reference{[=](double x, double t) { return linear_fbm_lognormal(x, t, a, cc, H, x0, centering); },
                     fmt::format("fBm lognormal ({})", c.centering)};
  }
  if (c.family == "fgn_only" && c.x0 == 0.0) {
    auto ex = std::make_shared<FgnOnlyExact>(FgnOnlyExact::sqrt_quadratic(p.at("sigma"), HurstParameter(hurst), c.a, c.b));
    return Reference{[ex](double x, double t) { return (*ex)(x, t); }, "FGN-only closed form"};
  }
  return std::nullopt;
}

DensityField sample_reference(const Reference& ref, const std::vector<double>& grid, double t) {
  DensityField f{grid, std::vector<double>(grid.size()), t};
  for (std::size_t i = 0; i < grid.size(); ++i) f.values[i] = ref.density(grid[i], t);
  return f;
}

std::string hurst_dirname(double h) { return fmt::format("H{:g}", h); }

RunOutput run_single(const ExperimentConfig& c, double hurst, const std::filesystem::path& dir) {
  using clock = std::chrono::steady_clock;
  RunOutput out;
  out.directory = dir;
  std::filesystem::create_directories(dir);

  const SdeModel model = build_model(c, hurst);
  const PdeeCoefficients coeffs = build_pdee(model);
  const std::optional<Reference> exact = exact_reference(c, hurst);
  if (c.has(Method::EXACT) && !exact) {
    throw ConfigError("solver.methods", fmt::format("no exact solution is available for this {} setup", c.family));
  }
  if (c.initial == "warm_start" && !exact) {
    throw ConfigError("solver.initial", "warm_start needs an exact solution for this model");
  }

  const std::vector<double> grid = nodes(c.a, c.b, c.cells);
  const double t0 = c.initial == "warm_start" ? c.warm_start_time : 0.0;
  InitialCondition initial = DeltaInitial{c.x0, c.sigma0, true};
  if (c.initial == "warm_start") {
    const Reference ref = *exact;
    const double ts = t0;
    initial = WarmStartInitial{[ref, ts](double x) { return ref.density(x, ts); }, "exact"};
  }

  nlohmann::ordered_json meta;
  meta["name"] = c.name;
  meta["family"] = c.family;
  meta["model_class"] = to_string(model.model_class());
  meta["derivation"] = to_string(coeffs.derivation);
  meta["hurst"] = hurst;
  meta["x0"] = c.x0;
  meta["params"] = c.params;
  meta["grid"] = {{"a", c.a}, {"b", c.b}, {"cells", c.cells}, {"dx", c.dx()}, {"evaluation", "nodes"}};
  meta["times"] = c.times;
  meta["config"] = to_ini(c);

  std::map<Method, std::vector<DensityField>> results;
  auto write_fields = [&](Method m, const std::vector<DensityField>& fields) {
    std::string sub = to_string(m);
    std::transform(sub.begin(), sub.end(), sub.begin(), [](unsigned char ch) { return std::tolower(ch); });
    const auto mdir = dir / sub;
    std::filesystem::create_directories(mdir);
    for (const auto& f : fields) {
      const auto file = mdir / density_filename(f.time);
      write_density_csv(f, file);
      out.files.push_back(file);
    }
  };

  for (Method m : c.methods) {
    const auto start = clock::now();
    nlohmann::ordered_json info;
    if (m == Method::LDG) {
      LdgProblem pb{coeffs, build_mesh(c.a, c.b, c.cells), c.degree, c.dt, t0, c.times.back(), initial,
                    StabilityLimits{c.c_cfl, c.c_adv}};
      pb.threads = c.threads;
      LdgSolver solver(pb);
      LdgRun run = solver.run(c.times);
      results[m] = run.trajectory.snapshots;
      info = {{"degree", c.degree},
              {"cells", c.cells},
              {"dt", c.dt},
              {"t0", t0},
              {"t_start", run.t_start},
              {"T", c.times.back()},
              {"steps", run.steps},
              {"time_scheme", "SSP-RK3"},
              {"initial", run.initial_description},
              {"boundary", "p^=0 at both ends, w^ interior with (D2/h) penalty at b"},
              {"c_cfl", solver.problem().limits.c_cfl},
              {"c_adv", solver.problem().limits.c_adv},
              {"sample_grid", "nodes (flux value p^)"},
              {"mass", run.trajectory.mass}};
    } else if (m == Method::FD) {
      FdProblem pb{coeffs, c.a, c.b, c.cells, c.dt, t0, c.times.back(), initial, {c.fd_c_cfl, c.fd_c_cfl}};
      pb.threads = c.threads;
      FdRun run = fd_run(pb, c.times);
      results[m] = run.trajectory.snapshots;
      info = {{"dt", c.dt},
              {"t0", t0},
              {"t_start", run.t_start},
              {"steps", run.steps},
              {"time_scheme", "forward Euler"},
              {"space", "central differences of D1 p and D2 p at nodes"},
              {"boundary", "zero Dirichlet"},
              {"c_cfl", c.fd_c_cfl},
              {"initial", run.initial_description},
              {"mass", run.trajectory.mass}};
    } else if (m == Method::MC) {
      McOptions opt{c.mc_dt, c.paths, c.seed, c.threads};
      const StateEnsemble states = simulate(model, opt, c.times);
      const double dx = c.dx();
      std::vector<DensityField> fields;
      for (std::size_t i = 0; i < states.n_times(); ++i) {
        const auto column = states.column(i);
        fields.push_back(estimate_density(column, c.a - 0.5 * dx, c.b + 0.5 * dx, c.cells + 1, c.times[i]));
      }
      results[m] = std::move(fields);
      info = {{"dt", c.mc_dt},
              {"paths", c.paths},
              {"seed", c.seed},
              {"scheme", "Heun predictor-corrector"},
              {"binning", fmt::format("{} bins of width {:g} centred on the grid nodes", c.cells + 1, dx)}};
    } else {
      std::vector<DensityField> fields;
      for (double t : c.times) fields.push_back(sample_reference(*exact, grid, t));
      results[m] = std::move(fields);
      info = {{"formula", exact->label}};
    }
    info["seconds"] = std::chrono::duration<double>(clock::now() - start).count();
    meta["solvers"][to_string(m)] = info;
    write_fields(m, results[m]);
  }

  // Error table against EXACT (sampled even if not requested) or MC.
  std::vector<DensityField> reference;
  if (exact) {
    out.reference = "EXACT";
    for (double t : c.times) reference.push_back(sample_reference(*exact, grid, t));
  } else if (results.count(Method::MC)) {
    out.reference = "MC";
    reference = results[Method::MC];
  }
  if (!out.reference.empty()) {
    for (Method m : c.methods) {
      if (to_string(m) == out.reference) continue;
      for (std::size_t i = 0; i < c.times.size(); ++i) {
        out.errors.push_back(compare(results[m][i], reference[i], to_string(m), out.reference));
      }
    }
  }
  const auto table = dir / "errors.csv";
  write_error_table(out.errors, table);
  out.files.push_back(table);
  meta["reference"] = out.reference.empty() ? "none" : out.reference;

  const auto meta_file = dir / "metadata.json";
  std::ofstream(meta_file) << meta.dump(2) << '\n';
  out.files.push_back(meta_file);
  return out;
}

}  // namespace

std::vector<RunOutput> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<RunOutput> outputs;
  if (config.hurst_sweep.empty()) {
    outputs.push_back(run_single(config, config.hurst, config.output_dir));
    return outputs;
  }
  for (double h : config.hurst_sweep) {
    outputs.push_back(run_single(config, h, config.output_dir / hurst_dirname(h)));
  }
  return outputs;
}

}  // namespace nmpdee

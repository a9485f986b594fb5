#include "phbhm/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "phbhm/error.hpp"

namespace phbhm {

const char* to_string(SolverMode m) noexcept {
  switch (m) {
    case SolverMode::ED: return "ed";
    case SolverMode::DMRG: return "dmrg";
    case SolverMode::Both: return "both";
  }
  return "unknown";
}

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  fail(ErrorCode::ConfigError, field + ": " + what);
}

// Every key the format knows, per section.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"geometry", {"trap", "n_ions"}},
      {"model",
       {"u_over_t", "sweep", "sweep_values", "pattern", "u_even_ratio", "n_phonons", "n_max", "cutoff",
        "flat_onsite"}},
      {"standing_wave", {"amplitude_F", "lamb_dicke_eta", "delta"}},
      {"solver", {"mode"}},
      {"exactdiag", {"threads"}},
      {"dmrg",
       {"kept_states_m", "max_sweeps", "energy_tol", "seed", "noise", "noise_sweeps", "davidson_tol", "checkpoint"}},
      {"observables", {"i0", "spin_correlator"}},
      {"analysis",
       {"power_law", "exponential", "power_law_window", "exponential_window", "critical_point", "critical_window",
        "luttinger", "luttinger_n0"}},
      {"output", {"directory", "write_matrices"}},
      {"units", {"beta_x", "omega_x"}},
  };
  return s;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Strips trailing "# ..." comments; the ini parser only understands ';' lines.
std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto h = line.find_first_of("#;");
    if (h != std::string::npos) line = line.substr(0, h);
    out << line << '\n';
  }
  return out.str();
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  double real(const std::string& s, const std::string& k, double dflt) const {
    auto v = raw(s, k);
    return v ? to_real(s + "." + k, *v) : dflt;
  }
  int integer(const std::string& s, const std::string& k, int dflt) const {
    auto v = raw(s, k);
    return v ? to_int(s + "." + k, *v) : dflt;
  }
  bool boolean(const std::string& s, const std::string& k, bool dflt) const {
    auto v = raw(s, k);
    if (!v) return dflt;
    if (*v == "true" || *v == "yes" || *v == "on" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "off" || *v == "0") return false;
    config_error(s + "." + k, "expected a boolean, got '" + *v + "'");
  }
  std::vector<double> list(const std::string& s, const std::string& k) const {
    std::vector<double> out;
    auto v = raw(s, k);
    if (!v) return out;
    std::string item;
    std::istringstream in(*v);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) config_error(s + "." + k, "empty list entry");
      out.push_back(to_real(s + "." + k, item));
    }
    if (out.empty()) config_error(s + "." + k, "list is empty");
    return out;
  }
  std::optional<FitWindow> window(const std::string& s, const std::string& k) const {
    auto v = raw(s, k);
    if (!v || *v == "auto") return std::nullopt;
    auto l = list(s, k);
    if (l.size() != 2 || !(l[1] >= l[0])) config_error(s + "." + k, "expected 'lo, hi' with hi >= lo");
    return FitWindow{l[0], l[1]};
  }

  static double to_real(const std::string& field, const std::string& v) {
    try {
      size_t used = 0;
      double x = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      config_error(field, "expected a number, got '" + v + "'");
    }
  }
  static int to_int(const std::string& field, const std::string& v) {
    try {
      size_t used = 0;
      long x = std::stol(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<int>(x);
    } catch (const std::exception&) {
      config_error(field, "expected an integer, got '" + v + "'");
    }
  }

 private:
  const pt::ptree& tree_;
};

}  // namespace

int RunConfig::effective_n_max() const {
  if (n_max > 0) return n_max;
  if (n_ions <= 0) return 1;
  const double mean = static_cast<double>(n_phonons) / n_ions;
  return std::max(1, static_cast<int>(std::ceil(6.0 * mean - 1e-12)));
}

std::vector<double> RunConfig::points() const {
  if (!sweep_values.empty()) return sweep_values;
  return {sweep == SweepParameter::UOverT ? u_over_t : u_even_ratio};
}

void RunConfig::validate() const {
  if (n_ions < 1) config_error("geometry.n_ions", "must be >= 1");
  if (n_phonons < 0) config_error("model.n_phonons", "must be >= 0");
  if (n_max < 0) config_error("model.n_max", "must be >= 1 (or omitted)");
  const int cap = effective_n_max();
  const int need = (n_phonons + n_ions - 1) / n_ions;
  if (static_cast<long>(n_phonons) > static_cast<long>(n_ions) * cap) {
    std::ostringstream os;
    os << "model.n_phonons: sector N_ph=" << n_phonons << " infeasible for N=" << n_ions << ", n_max=" << cap;
    fail(ErrorCode::InfeasibleSector, os.str());
  }
  if (cap < need) config_error("model.n_max", "must be >= ceil(N_ph / N)");
  for (size_t k = 1; k < sweep_values.size(); ++k)
    if (!(sweep_values[k] > sweep_values[k - 1])) config_error("model.sweep_values", "must be strictly increasing");
  if (cutoff && *cutoff < 1) config_error("model.cutoff", "must be >= 1 or 'full'");
  if (pattern != SitePattern::Uniform) {
    for (double p : points()) {
      const double u = sweep == SweepParameter::UOverT ? p : u_over_t;
      const double r = sweep == SweepParameter::UEvenRatio ? p : u_even_ratio;
      if (!(u > 0.0) || !(r > 0.0)) config_error("model.pattern", "two-valued patterns need positive interactions");
    }
    if (pattern == SitePattern::LeftRightSplit && n_ions % 2 != 0)
      config_error("model.pattern", "left_right needs an even number of sites");
  }
  if (sweep == SweepParameter::UEvenRatio && pattern == SitePattern::Uniform)
    config_error("model.sweep", "u_even_ratio sweeps need a two-valued pattern");
  if (standing_wave) {
    if (!beta_x || !omega_x) config_error("standing_wave", "needs units.beta_x and units.omega_x to express U in t");
    if (!sweep_values.empty() && sweep == SweepParameter::UOverT)
      config_error("standing_wave", "cannot be combined with a u_over_t sweep");
  }
  if (beta_x && !(*beta_x > 0.0)) config_error("units.beta_x", "must be positive");
  if (omega_x && !(*omega_x > 0.0)) config_error("units.omega_x", "must be positive");
  if (beta_x.has_value() != omega_x.has_value()) config_error("units", "beta_x and omega_x go together");
  if (i0 < 0 || i0 > n_ions) config_error("observables.i0", "out of range");
  if (spin_correlator && pattern != SitePattern::AlternatingOddEven)
    config_error("observables.spin_correlator", "needs pattern = alternating");
  if (critical != CriticalMode::Off && points().size() < 3)
    config_error("analysis.critical_point", "needs a sweep of at least 3 points");
  if (critical != CriticalMode::Off && sweep != SweepParameter::UOverT)
    config_error("analysis.critical_point", "needs a u_over_t sweep");
  if (critical == CriticalMode::Manual && !critical_window)
    config_error("analysis.critical_window", "required for critical_point = manual");
  if (luttinger && (points().size() < 3 || sweep != SweepParameter::UOverT))
    config_error("analysis.luttinger", "needs a u_over_t sweep of at least 3 points");
  if (luttinger && !fit_power_law) config_error("analysis.luttinger", "needs power_law = true");
  if (critical != CriticalMode::Off && !fit_exponential)
    config_error("analysis.critical_point", "needs exponential = true");
  try {
    dmrg.validate();
  } catch (const Error& e) {
    config_error("dmrg", e.what());
  }
}

RunConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(strip_comments(text));
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::ConfigError, std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    auto it = schema().find(section);
    if (it == schema().end()) {
      if (body.empty()) config_error(section, "key outside any section");
      config_error(section, "unknown section");
    }
    for (const auto& [key, value] : body) {
      (void)value;
      if (!it->second.count(key)) config_error(section + "." + key, "unknown key");
    }
  }

  Reader r(tree);
  RunConfig c;
  c.source_text = text;

  const std::string trap = r.raw("geometry", "trap").value_or("microtrap");
  if (trap == "microtrap")
    c.trap = TrapKind::MicrotrapArray;
  else if (trap == "paul")
    c.trap = TrapKind::PaulTrap;
  else
    config_error("geometry.trap", "expected 'microtrap' or 'paul'");
  if (!r.raw("geometry", "n_ions")) config_error("geometry.n_ions", "required");
  c.n_ions = r.integer("geometry", "n_ions", 0);

  c.u_over_t = r.real("model", "u_over_t", 0.0);
  const std::string sweep = r.raw("model", "sweep").value_or("u_over_t");
  if (sweep == "u_over_t")
    c.sweep = SweepParameter::UOverT;
  else if (sweep == "u_even_ratio")
    c.sweep = SweepParameter::UEvenRatio;
  else
    config_error("model.sweep", "expected 'u_over_t' or 'u_even_ratio'");
  c.sweep_values = r.list("model", "sweep_values");
  const std::string pattern = r.raw("model", "pattern").value_or("uniform");
  if (pattern == "uniform")
    c.pattern = SitePattern::Uniform;
  else if (pattern == "alternating")
    c.pattern = SitePattern::AlternatingOddEven;
  else if (pattern == "left_right")
    c.pattern = SitePattern::LeftRightSplit;
  else
    config_error("model.pattern", "expected 'uniform', 'alternating' or 'left_right'");
  c.u_even_ratio = r.real("model", "u_even_ratio", 2.0);
  if (!r.raw("model", "n_phonons")) config_error("model.n_phonons", "required");
  c.n_phonons = r.integer("model", "n_phonons", 0);
  c.n_max = r.integer("model", "n_max", 0);
  if (r.raw("model", "n_max") && c.n_max < 1) config_error("model.n_max", "must be >= 1");
  if (auto cut = r.raw("model", "cutoff"); cut && *cut != "full") c.cutoff = Reader::to_int("model.cutoff", *cut);
  c.flat_onsite = r.boolean("model", "flat_onsite", false);

  if (tree.get_child_optional("standing_wave")) {
    StandingWaveConfig sw;
    sw.amplitude_F = r.real("standing_wave", "amplitude_F", 0.0);
    sw.lamb_dicke_eta = r.real("standing_wave", "lamb_dicke_eta", 0.0);
    sw.delta = r.integer("standing_wave", "delta", 0);
    if (sw.delta != 0 && sw.delta != 1) config_error("standing_wave.delta", "must be 0 or 1");
    if (sw.lamb_dicke_eta < 0) config_error("standing_wave.lamb_dicke_eta", "must be >= 0");
    if (r.raw("model", "u_over_t")) config_error("model.u_over_t", "conflicts with [standing_wave]");
    c.standing_wave = sw;
  }

  const std::string mode = r.raw("solver", "mode").value_or("dmrg");
  if (mode == "ed")
    c.solver = SolverMode::ED;
  else if (mode == "dmrg")
    c.solver = SolverMode::DMRG;
  else if (mode == "both")
    c.solver = SolverMode::Both;
  else
    config_error("solver.mode", "expected 'ed', 'dmrg' or 'both'");
  c.ed_threads = r.integer("exactdiag", "threads", 0);

  c.dmrg.kept_states_m = r.integer("dmrg", "kept_states_m", c.dmrg.kept_states_m);
  c.dmrg.max_sweeps = r.integer("dmrg", "max_sweeps", c.dmrg.max_sweeps);
  c.dmrg.energy_tol = r.real("dmrg", "energy_tol", c.dmrg.energy_tol);
  c.dmrg.seed = static_cast<std::uint64_t>(r.integer("dmrg", "seed", static_cast<int>(c.dmrg.seed)));
  c.dmrg.noise = r.real("dmrg", "noise", c.dmrg.noise);
  c.dmrg.noise_sweeps = r.integer("dmrg", "noise_sweeps", c.dmrg.noise_sweeps);
  c.dmrg.davidson_tol = r.real("dmrg", "davidson_tol", c.dmrg.davidson_tol);
  c.save_checkpoints = r.boolean("dmrg", "checkpoint", false);

  if (auto v = r.raw("observables", "i0"); v && *v != "auto") c.i0 = Reader::to_int("observables.i0", *v);
  c.spin_correlator = r.boolean("observables", "spin_correlator", c.pattern == SitePattern::AlternatingOddEven);

  c.fit_power_law = r.boolean("analysis", "power_law", true);
  c.fit_exponential = r.boolean("analysis", "exponential", true);
  c.power_law_window = r.window("analysis", "power_law_window");
  c.exponential_window = r.window("analysis", "exponential_window");
  const std::string crit = r.raw("analysis", "critical_point").value_or("off");
  if (crit == "off")
    c.critical = CriticalMode::Off;
  else if (crit == "auto")
    c.critical = CriticalMode::Auto;
  else if (crit == "manual")
    c.critical = CriticalMode::Manual;
  else
    config_error("analysis.critical_point", "expected 'off', 'auto' or 'manual'");
  c.critical_window = r.window("analysis", "critical_window");
  c.luttinger = r.boolean("analysis", "luttinger", false);
  if (auto v = r.raw("analysis", "luttinger_n0"); v && *v != "auto")
    c.luttinger_n0 = Reader::to_real("analysis.luttinger_n0", *v);

  c.output_dir = r.raw("output", "directory").value_or("out");
  c.write_matrices = r.boolean("output", "write_matrices", true);

  if (auto v = r.raw("units", "beta_x")) c.beta_x = Reader::to_real("units.beta_x", *v);
  if (auto v = r.raw("units", "omega_x")) c.omega_x = Reader::to_real("units.omega_x", *v);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace phbhm

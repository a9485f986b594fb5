#include "phbhm/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "phbhm/exact_diag.hpp"
#include "phbhm/geometry.hpp"
#include "phbhm/sector_basis.hpp"

namespace phbhm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string opt12(const std::optional<double>& v) { return v ? fmt12(*v) : std::string(); }

struct PointModel {
  BoseHubbardModel model;
  double u_over_t = 0.0;
  double u_even = 0.0;
  std::vector<std::string> warnings;
};

PointModel make_model(const RunConfig& c, double parameter) {
  PointModel pm;
  const ChainGeometry geo =
      c.trap == TrapKind::PaulTrap ? solve_paul_trap_positions(c.n_ions) : microtrap_positions(c.n_ions);
  double u = c.sweep == SweepParameter::UOverT ? parameter : c.u_over_t;
  double ratio = c.sweep == SweepParameter::UEvenRatio ? parameter : c.u_even_ratio;

  if (c.standing_wave) {
    const HoppingScale hs = hopping_scale(*c.beta_x, *c.omega_x);
    const StandingWaveResult sw = standing_wave_interaction(*c.standing_wave, *c.omega_x);
    u = sw.U / hs.t;
    if (sw.curvature_warning) pm.warnings.push_back("standing wave: eta^2 F is not small against omega_x");
    if (sw.quartic_warning) pm.warnings.push_back("standing wave: F eta^4 is not small against omega_x");
  }
  if (c.beta_x && hopping_scale(*c.beta_x, *c.omega_x).rwa_warning)
    pm.warnings.push_back("units: t / omega_x >= 0.1, rotating-wave approximation is questionable");

  BuildOptions opts;
  opts.cutoff = c.cutoff;
  opts.flat_onsite = c.flat_onsite;
  pm.model = build_model(geo, u, c.n_phonons, c.effective_n_max(), opts);
  pm.u_over_t = u;
  pm.u_even = u;
  if (c.pattern != SitePattern::Uniform) {
    pm.u_even = ratio * u;
    pm.model = apply_site_pattern(pm.model, c.pattern, u, pm.u_even);
  }
  return pm;
}

ObservableReport report_from(const RawMeasurements& raw, const ReportMetadata& meta, std::vector<std::string>& warnings) {
  try {
    return build_report(raw, meta);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DivisionGuard) throw;
    warnings.push_back(std::string("C^aa skipped: ") + e.what());
    ReportOptions opts;
    opts.rescaled_hop = false;
    return build_report(raw, meta, opts);
  }
}

ObservableReport run_ed(const BoseHubbardModel& model, const RunConfig& c, PointOutcome& out) {
  const double dim = sector_dimension_estimate(model.n_sites, model.n_phonons, model.n_max);
  if (dim > static_cast<double>(SectorBasis::kMaxDimension)) {
    std::ostringstream os;
    os << "exact diagonalization refused: sector dimension ~" << fmt12(dim);
    fail(ErrorCode::Refused, os.str(), dim);
  }
  const SectorBasis basis(model.n_sites, model.n_phonons, model.n_max);
  EdOptions opts;
  opts.threads = c.ed_threads;
  const int k = basis.dimension() >= 2 ? 2 : 1;
  const EdResult ed = ed_ground_state(model, basis, k, opts);
  out.energy_ed = ed.pairs[0].energy;
  out.ground_degeneracy = ed.ground_degeneracy;
  if (ed.pairs.size() >= 2) out.gap = ed.pairs[1].energy - ed.pairs[0].energy;

  std::vector<Eigen::VectorXd> manifold;
  for (int g = 0; g < ed.ground_degeneracy; ++g) manifold.push_back(ed.pairs[g].vector);
  ReportMetadata meta;
  meta.model_hash = model.hash();
  meta.solver = "ed";
  meta.near_degenerate = ed.degenerate;
  meta.pattern = model.pattern;
  if (ed.degenerate) {
    std::ostringstream os;
    os << "ground level is " << ed.ground_degeneracy << "-fold degenerate; observables averaged over the manifold";
    out.warnings.push_back(os.str());
  }
  return report_from(measure_exact(basis, manifold), meta, out.warnings);
}

ObservableReport run_dmrg(const BoseHubbardModel& model, const RunConfig& c, PointOutcome& out,
                          const std::string& checkpoint_dir) {
  DmrgConfig cfg = c.dmrg;
  cfg.n_max = model.n_max;
  const DmrgState state = dmrg_ground_state(model, model.n_phonons, cfg);
  out.energy_dmrg = state.energy();
  out.dmrg = state.result();
  out.gap = state.result().gap_estimate;
  if (!checkpoint_dir.empty()) state.save((fs::path(checkpoint_dir) / ("point_" + std::to_string(out.index) + ".ckpt")).string());

  ReportMetadata meta;
  meta.model_hash = model.hash();
  meta.solver = "dmrg";
  meta.converged = state.result().converged;
  meta.near_degenerate = state.result().near_degenerate;
  meta.pattern = model.pattern;
  if (!meta.converged) out.warnings.push_back("dmrg: energy not converged within max_sweeps");
  if (meta.near_degenerate)
    out.warnings.push_back("dmrg: near-degenerate ground state (gap estimate " + fmt12(out.gap.value_or(0)) +
                           "); use the order parameter, not local profiles");
  return report_from(measure_all(state), meta, out.warnings);
}

template <class F>
std::optional<FitResult> try_fit(const char* name, std::vector<std::string>& warnings, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    warnings.push_back(std::string(name) + ": " + e.what());
    return std::nullopt;
  }
}

}  // namespace

double sector_dimension_estimate(int n_sites, int n_phonons, int n_max) {
  std::vector<double> w(n_phonons + 1, 0.0), next(n_phonons + 1);
  w[0] = 1.0;
  for (int k = 0; k < n_sites; ++k) {
    for (int n = 0; n <= n_phonons; ++n) {
      double s = 0.0;
      for (int v = 0; v <= std::min(n, n_max); ++v) s += w[n - v];
      next[n] = s;
    }
    w.swap(next);
  }
  return w[n_phonons];
}

const PointOutcome* RunOutcome::first_failure() const {
  for (const PointOutcome& p : points)
    if (p.error_code) return &p;
  return nullptr;
}

PointOutcome solve_point(const RunConfig& c, int index, const std::string& checkpoint_dir) {
  PointOutcome out;
  out.index = index;
  out.parameter = c.points().at(index);
  try {
    PointModel pm = make_model(c, out.parameter);
    out.u_over_t = pm.u_over_t;
    out.u_even = pm.u_even;
    out.model_hash = pm.model.hash();
    out.onsite_interaction = pm.model.onsite_interaction;
    out.warnings = std::move(pm.warnings);

    std::optional<ObservableReport> ed_report, dmrg_report;
    if (c.solver != SolverMode::DMRG) ed_report = run_ed(pm.model, c, out);
    if (c.solver != SolverMode::ED) dmrg_report = run_dmrg(pm.model, c, out, checkpoint_dir);
    out.solver = to_string(c.solver);
    out.energy = ed_report ? *out.energy_ed : *out.energy_dmrg;
    out.report = ed_report ? std::move(ed_report) : std::move(dmrg_report);
    out.report->metadata.warnings = out.warnings;

    const int n = c.n_ions;
    const int i0 = c.i0 > 0 ? c.i0 : default_reference_site(n);
    if (n >= 3 && out.report->caa.size() > 0) {
      const Series s = separation_series(out.report->caa, i0);
      if (c.fit_power_law)
        out.power_law = try_fit("power_law fit", out.warnings, [&] {
          return fit_power_law(s, c.power_law_window.value_or(default_power_law_window(n)));
        });
      if (c.fit_exponential)
        out.exponential = try_fit("exponential fit", out.warnings, [&] {
          return fit_exponential(s, c.exponential_window.value_or(default_exponential_window(n)));
        });
    }
    if (c.spin_correlator) {
      out.report->spin_corr = spin_correlator(*out.report, i0);
      if (n >= 3)
        out.spin_power_law = try_fit("spin power_law fit", out.warnings, [&] {
          return fit_power_law(separation_series(*out.report->spin_corr, i0),
                               c.power_law_window.value_or(default_power_law_window(n)));
        });
    }
    out.report->metadata.warnings = out.warnings;
  } catch (const Error& e) {
    out.error_code = e.code();
    out.error = e.what();
  } catch (const std::exception& e) {
    out.error_code = ErrorCode::InvalidInput;
    out.error = e.what();
  }
  return out;
}

RunOutcome run_experiment(const RunConfig& c, const RunOptions& options) {
  c.validate();
  const std::string dir = options.output_dir.empty() ? c.output_dir : options.output_dir;
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) fail(ErrorCode::IoError, "output.directory: cannot create " + dir);
  }
  const std::string ckpt = c.save_checkpoints ? dir : std::string();

  const int npts = static_cast<int>(c.points().size());
  RunOutcome outcome;
  outcome.points.resize(npts);
  std::atomic<int> next{0};
  const int workers = std::max(1, std::min(options.workers, npts));
  auto work = [&] {
    for (int k = next++; k < npts; k = next++) {
      outcome.points[k] = solve_point(c, k, ckpt);
      if (options.on_point) options.on_point(outcome.points[k]);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  if (c.critical != CriticalMode::Off) {
    std::vector<double> u, xi;
    for (const PointOutcome& p : outcome.points) {
      if (!p.exponential) continue;
      if (c.critical == CriticalMode::Manual &&
          !(p.u_over_t >= c.critical_window->lo && p.u_over_t <= c.critical_window->hi))
        continue;
      u.push_back(p.u_over_t);
      xi.push_back(p.exponential->value);
    }
    outcome.critical_point = try_fit("critical point", outcome.warnings, [&] {
      return c.critical == CriticalMode::Auto ? extrapolate_critical_point_auto(u, xi)
                                              : extrapolate_critical_point(u, xi);
    });
  }
  if (c.luttinger) {
    std::vector<std::pair<double, double>> ua;
    for (const PointOutcome& p : outcome.points)
      if (p.power_law) ua.emplace_back(p.u_over_t, p.power_law->value);
    const double n0 = c.luttinger_n0 > 0 ? c.luttinger_n0 : static_cast<double>(c.n_phonons) / c.n_ions;
    outcome.luttinger =
        try_fit("luttinger fit", outcome.warnings, [&] { return fit_luttinger_coefficient(ua, n0); });
  }
  if (!dir.empty()) write_reports(c, outcome, dir);
  return outcome;
}

namespace {

json fit_json(const std::optional<FitResult>& f) {
  if (!f) return nullptr;
  return {{"kind", to_string(f->kind)},     {"value", f->value},         {"std_error", f->std_error},
          {"slope", f->slope},              {"intercept", f->intercept}, {"window", {f->window.lo, f->window.hi}},
          {"n_points", f->n_points},        {"r_squared", f->r_squared}, {"residual", f->residual}};
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot write " + path.string());
  os << "i";
  for (int j = 0; j < m.cols(); ++j) os << ",j" << j + 1;
  os << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    os << i + 1;
    for (int j = 0; j < m.cols(); ++j) os << ',' << fmt12(m(i, j));
    os << '\n';
  }
  if (!os) fail(ErrorCode::IoError, "failed writing " + path.string());
}

json point_json(const RunConfig& c, const PointOutcome& p) {
  json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["index"] = p.index;
  j["parameter"] = p.parameter;
  j["sweep"] = c.sweep == SweepParameter::UOverT ? "u_over_t" : "u_even_ratio";
  j["u_over_t"] = p.u_over_t;
  j["u_even"] = p.u_even;
  j["model"] = {{"trap", c.trap == TrapKind::PaulTrap ? "paul" : "microtrap"},
                {"n_sites", c.n_ions},
                {"n_phonons", c.n_phonons},
                {"n_max", c.effective_n_max()},
                {"cutoff", opt_json(c.cutoff)},
                {"pattern", to_string(c.pattern)},
                {"hash", p.model_hash},
                {"onsite_interaction", p.onsite_interaction}};
  j["solver"] = p.solver;
  if (p.error_code) {
    j["error"] = {{"code", to_string(*p.error_code)}, {"message", p.error}};
  } else {
    j["energy"] = p.energy;
    j["energy_ed"] = opt_json(p.energy_ed);
    j["energy_dmrg"] = opt_json(p.energy_dmrg);
    j["gap"] = opt_json(p.gap);
    j["ground_degeneracy"] = p.ground_degeneracy;
    if (p.dmrg) {
      json hist = json::array();
      for (const SweepRecord& r : p.dmrg->history)
        hist.push_back({{"sweep", r.sweep},
                        {"energy", r.energy},
                        {"max_truncation", r.max_truncation},
                        {"noise", r.noise},
                        {"max_kept", r.max_kept},
                        {"seconds", r.seconds}});
      j["dmrg"] = {{"converged", p.dmrg->converged},
                   {"sweeps", p.dmrg->sweeps},
                   {"gap_estimate", p.dmrg->gap_estimate},
                   {"near_degenerate", p.dmrg->near_degenerate},
                   {"center_spectrum", p.dmrg->center_spectrum},
                   {"history", hist}};
    }
    const ObservableReport& r = *p.report;
    j["observables"] = {{"density", r.density},
                        {"fluctuations", r.fluctuations},
                        {"tonks_O", r.tonks_O},
                        {"attractive_O", r.attractive_O},
                        {"spin_corr", opt_json(r.spin_corr)},
                        {"converged", r.metadata.converged},
                        {"near_degenerate", r.metadata.near_degenerate}};
    j["fits"] = {{"power_law", fit_json(p.power_law)},
                 {"exponential", fit_json(p.exponential)},
                 {"spin_power_law", fit_json(p.spin_power_law)}};
  }
  if (c.beta_x) {
    const HoppingScale hs = hopping_scale(*c.beta_x, *c.omega_x);
    j["units"] = {{"t", hs.t}, {"energy_physical", p.error_code ? json(nullptr) : json(p.energy * hs.t)}};
  }
  j["warnings"] = p.warnings;
  j["config"] = c.source_text;
  return j;
}

}  // namespace

void write_reports(const RunConfig& c, const RunOutcome& outcome, const std::string& directory) {
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto open = [&](const fs::path& p) {
    std::ofstream os(p);
    if (!os) fail(ErrorCode::IoError, "cannot write " + p.string());
    return os;
  };

  for (const PointOutcome& p : outcome.points) {
    const std::string k = std::to_string(p.index);
    auto os = open(dir / ("point_" + k + ".json"));
    os << point_json(c, p).dump(2) << '\n';
    if (p.report && c.write_matrices) {
      if (p.report->caa.size() > 0) write_matrix(dir / ("caa_" + k + ".csv"), p.report->caa);
      write_matrix(dir / ("cnn_" + k + ".csv"), p.report->cnn);
    }
  }

  const bool physical = c.beta_x.has_value();
  const double t_phys = physical ? hopping_scale(*c.beta_x, *c.omega_x).t : 0.0;
  auto sum = open(dir / "summary.csv");
  sum << "index,parameter,u_over_t,u_even,solver,energy,energy_ed,energy_dmrg,energy_abs_diff,gap,tonks_O,"
         "attractive_O,alpha,alpha_err,alpha_r2,xi,xi_err,xi_r2,spin_alpha,center_density,center_fluctuation,"
         "converged,near_degenerate,sweeps,energy_physical,n_warnings,error\n";
  for (const PointOutcome& p : outcome.points) {
    sum << p.index << ',' << fmt12(p.parameter) << ',' << fmt12(p.u_over_t) << ',' << fmt12(p.u_even) << ','
        << to_string(c.solver) << ',';
    if (p.error_code) {
      sum << ",,,,,,,,,,,,,,,,,,,," << p.warnings.size() << ',' << to_string(*p.error_code) << '\n';
      continue;
    }
    const ObservableReport& r = *p.report;
    std::optional<double> diff;
    if (p.energy_ed && p.energy_dmrg) diff = std::abs(*p.energy_ed - *p.energy_dmrg);
    const int center = default_reference_site(c.n_ions) - 1;
    const int ci = std::min(center, c.n_ions - 1);
    auto fitv = [](const std::optional<FitResult>& f, double FitResult::*m) {
      return f ? fmt12((*f).*m) : std::string();
    };
    sum << fmt12(p.energy) << ',' << opt12(p.energy_ed) << ',' << opt12(p.energy_dmrg) << ',' << opt12(diff) << ','
        << opt12(p.gap) << ',' << fmt12(r.tonks_O) << ',' << fmt12(r.attractive_O) << ','
        << fitv(p.power_law, &FitResult::value) << ',' << fitv(p.power_law, &FitResult::std_error) << ','
        << fitv(p.power_law, &FitResult::r_squared) << ',' << fitv(p.exponential, &FitResult::value) << ','
        << fitv(p.exponential, &FitResult::std_error) << ',' << fitv(p.exponential, &FitResult::r_squared) << ','
        << fitv(p.spin_power_law, &FitResult::value) << ',' << fmt12(r.density[ci]) << ','
        << fmt12(r.fluctuations[ci]) << ',' << (r.metadata.converged ? 1 : 0) << ','
        << (r.metadata.near_degenerate ? 1 : 0) << ',' << (p.dmrg ? std::to_string(p.dmrg->sweeps) : "") << ','
        << (physical ? fmt12(p.energy * t_phys) : "") << ',' << p.warnings.size() << ",\n";
  }

  json a;
  a["schema_version"] = kSummarySchemaVersion;
  a["critical_point"] = fit_json(outcome.critical_point);
  a["luttinger"] = fit_json(outcome.luttinger);
  a["warnings"] = outcome.warnings;
  open(dir / "analysis.json") << a.dump(2) << '\n';
  open(dir / "config.ini") << c.source_text;
}

std::vector<SolverDiscrepancy> compare_solvers(const RunConfig& config) {
  config.validate();
  if (config.n_ions > kCompareMaxSites) {
    std::ostringstream os;
    os << "compare is limited to N <= " << kCompareMaxSites << "; N=" << config.n_ions
       << " has sector dimension ~" << fmt12(sector_dimension_estimate(config.n_ions, config.n_phonons, config.effective_n_max()));
    fail(ErrorCode::Refused, os.str());
  }
  RunConfig c = config;
  c.solver = SolverMode::ED;
  RunConfig d = config;
  d.solver = SolverMode::DMRG;
  std::vector<SolverDiscrepancy> rows;
  for (int k = 0; k < static_cast<int>(c.points().size()); ++k) {
    const PointOutcome e = solve_point(c, k);
    if (e.error_code) fail(*e.error_code, "ed: " + e.error);
    const PointOutcome m = solve_point(d, k);
    if (m.error_code) fail(*m.error_code, "dmrg: " + m.error);
    SolverDiscrepancy r;
    r.parameter = e.parameter;
    r.energy_ed = e.energy;
    r.energy_dmrg = m.energy;
    r.energy = std::abs(e.energy - m.energy);
    const ObservableReport &a = *e.report, &b = *m.report;
    for (int i = 0; i < a.n_sites(); ++i) r.density = std::max(r.density, std::abs(a.density[i] - b.density[i]));
    r.cnn = (a.cnn - b.cnn).cwiseAbs().maxCoeff();
    if (a.caa.size() > 0 && b.caa.size() > 0) r.caa = (a.caa - b.caa).cwiseAbs().maxCoeff();
    rows.push_back(r);
  }
  return rows;
}

}  // namespace phbhm

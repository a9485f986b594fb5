// Acceptance checks against published and independently derived numbers.
// Usage: acceptance <criterion>   where criterion is 1..10 or 4desk.
// Prints one PASS/FAIL line per criterion; exit status 0 only on PASS.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "phbhm/analysis.hpp"
#include "phbhm/config.hpp"
#include "phbhm/dmrg.hpp"
#include "phbhm/exact_diag.hpp"
#include "phbhm/runner.hpp"
#include "phbhm/sector_basis.hpp"

using namespace phbhm;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (ok ? "  ok   " : "  FAIL ") << what << '\n';
  }
};

std::string num(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const fs::path kConfigs = PHBHM_CONFIG_DIR;
const fs::path kOut = PHBHM_ACCEPTANCE_OUT;

RunOutcome run_config(const std::string& rel) {
  const RunConfig c = load_config((kConfigs / rel).string());
  RunOptions opts;
  opts.output_dir = (kOut / fs::path(rel).stem()).string();
  opts.on_point = [&](const PointOutcome& p) {
    std::fprintf(stderr, "  [%s] point %d (%g): %s\n", rel.c_str(), p.index, p.parameter,
                 p.error_code ? p.error.c_str() : num(p.energy, 12).c_str());
  };
  return run_experiment(c, opts);
}

bool all_ok(Verdict& v, const RunOutcome& out) {
  const PointOutcome* f = out.first_failure();
  v.check(f == nullptr, f ? "solver error at point " + std::to_string(f->index) + ": " + f->error : "all points solved");
  return f == nullptr;
}

// ---------------------------------------------------------------------------

Verdict criterion_1() {
  Verdict v;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int k = 0; k < 12; ++k) {
    const int n = 2 + static_cast<int>(uni(rng) * 4);  // 2..5
    const int nph = 1 + static_cast<int>(uni(rng) * 5);  // 1..5
    const TrapKind trap = k % 2 ? TrapKind::PaulTrap : TrapKind::MicrotrapArray;
    const ChainGeometry geo = trap == TrapKind::PaulTrap ? solve_paul_trap_positions(n) : microtrap_positions(n);
    std::string kind;
    BoseHubbardModel m;
    switch (k % 3) {
      case 0:
        kind = "repulsive";
        m = build_model(geo, 0.5 + 4.5 * uni(rng), nph, 5);
        break;
      case 1:
        kind = "attractive";
        m = build_model(geo, -0.1 - 0.9 * uni(rng), nph, 5);
        break;
      default: {
        kind = "alternating";
        const double u = 1.0 + 9.0 * uni(rng);
        m = apply_site_pattern(build_model(geo, u, nph, 5), SitePattern::AlternatingOddEven, u, u * (0.5 + 2.5 * uni(rng)));
      }
    }
    const SectorBasis basis(n, nph, 5);
    const double e_ed = ed_ground_state(m, basis, 1).pairs[0].energy;
    DmrgConfig cfg;
    cfg.seed = 100 + k;
    const double e_dmrg = dmrg_ground_state(m, nph, cfg).energy();
    const double d = std::abs(e_ed - e_dmrg);
    worst = std::max(worst, d);
    v.check(d <= 1e-8, "model " + std::to_string(k) + " (" + kind + ", " +
                           (trap == TrapKind::PaulTrap ? "paul" : "microtrap") + ", N=" + std::to_string(n) +
                           ", N_ph=" + std::to_string(nph) + "): |dE| = " + num(d, 3));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.check(secs < 120.0, "runtime " + num(secs, 3) + " s < 120 s");
  v.detail << "  max |E_DMRG - E_ED| = " << num(worst, 3) << '\n';
  return v;
}

Verdict criterion_2() {
  Verdict v;
  const RunOutcome out = run_config("paper/noninteracting_micro.ini");
  if (!all_ok(v, out)) return v;
  const PointOutcome& p = out.points[0];
  const RunConfig c = load_config((kConfigs / "paper/noninteracting_micro.ini").string());
  const BoseHubbardModel m = build_model(microtrap_positions(50), 0.0, 50, c.effective_n_max());
  const double oracle_e = 50.0 * oracle::one_particle_lowest(m);
  v.check(std::abs(p.energy - oracle_e) <= 1e-6,
          "E = " + num(p.energy, 13) + " vs N_ph lambda_min = " + num(oracle_e, 13) + " (|dE| = " +
              num(std::abs(p.energy - oracle_e), 3) + ")");
  const Series s = separation_series(p.report->caa, default_reference_site(50));
  const FitWindow w = default_power_law_window(50);
  double dev = 0.0;
  for (size_t k = 0; k < s.r.size(); ++k)
    if (s.r[k] >= w.lo && s.r[k] <= w.hi) dev = std::max(dev, std::abs(s.y[k] - 1.0));
  v.check(dev <= 0.02, "max ||C^aa| - 1| over r in [" + num(w.lo) + ", " + num(w.hi) + "] = " + num(dev, 3));
  return v;
}

Verdict criterion_3() {
  Verdict v;
  const RunOutcome out = run_config("desk/mott_micro_n30.ini");
  if (!all_ok(v, out)) return v;
  const ObservableReport& r = *out.points[0].report;
  // Bulk: the central half of the chain.
  double dn = 0.0, fl = 0.0;
  for (int i = 30 / 4; i < 30 - 30 / 4; ++i) {
    dn = std::max(dn, std::abs(r.density[i] - 1.0));
    fl = std::max(fl, r.fluctuations[i]);
  }
  v.check(dn <= 0.01, "bulk max |n_j - 1| = " + num(dn, 3));
  v.check(fl <= 0.1, "bulk max dn_j = " + num(fl, 3));
  const auto& e = out.points[0].exponential;
  v.check(e && e->r_squared >= 0.98,
          e ? "exponential fit r^2 = " + num(e->r_squared, 4) + " (xi = " + num(e->value, 4) + ")" : "no exponential fit");
  return v;
}

Verdict critical_point(const std::string& cfg, double tol) {
  Verdict v;
  const RunOutcome out = run_config(cfg);
  if (!all_ok(v, out)) return v;
  for (const PointOutcome& p : out.points)
    if (p.exponential)
      v.detail << "  U/t = " << num(p.u_over_t) << ": xi = " << num(p.exponential->value, 4)
               << " (r^2 = " << num(p.exponential->r_squared, 4) << ")\n";
  v.check(out.critical_point.has_value(), "critical point extrapolated");
  if (out.critical_point)
    v.check(std::abs(out.critical_point->value - 1.55) <= tol,
            "U_c/t = " + num(out.critical_point->value, 4) + " +- " + num(out.critical_point->std_error, 2) +
                ", target 1.55 +- " + num(tol, 2));
  return v;
}

Verdict criterion_4() { return critical_point("paper/critical_point_micro.ini", 0.15); }
Verdict criterion_4_desk() { return critical_point("desk/critical_point_micro_n30.ini", 0.25); }

void tonks(Verdict& v, const std::string& cfg, const std::string& name, double alpha0, double alpha_inf) {
  const RunOutcome out = run_config(cfg);
  if (!all_ok(v, out)) return;
  std::vector<double> a;
  for (const PointOutcome& p : out.points) {
    a.push_back(p.power_law ? p.power_law->value : NAN);
    v.detail << "  " << name << " U/t = " << num(p.u_over_t) << ": alpha = " << num(a.back(), 4)
             << ", <O> = " << num(p.report->tonks_O, 4) << '\n';
  }
  v.check(std::abs(a.front() - alpha0) <= 0.05,
          name + " alpha(U/t=" + num(out.points.front().u_over_t) + ") = " + num(a.front(), 4) + ", target " +
              num(alpha0) + " +- 0.05");
  bool rising = true;
  for (size_t k = 1; k < a.size(); ++k) rising = rising && a[k] >= a[k - 1];
  v.check(rising, name + " alpha nondecreasing with U");
  v.check(std::abs(a.back() - alpha_inf) <= 0.05,
          name + " alpha(U/t=" + num(out.points.back().u_over_t) + ") = " + num(a.back(), 4) + " approaching " +
              num(alpha_inf) + " (+- 0.05)");
  v.check(out.points.back().report->tonks_O <= 0.05,
          name + " <O> at largest U = " + num(out.points.back().report->tonks_O, 3) + " <= 0.05");
}

Verdict criterion_5() {
  Verdict v;
  tonks(v, "paper/tonks_micro.ini", "microtraps", 0.54, 0.58);
  tonks(v, "paper/tonks_paul.ini", "paul", 0.48, 0.53);
  return v;
}

Verdict criterion_6() {
  Verdict v;
  const RunOutcome out = run_config("paper/mott_tail_micro.ini");
  if (!all_ok(v, out)) return v;
  const auto& f = out.points[0].power_law;
  v.check(f.has_value(), "long-distance power-law fit");
  if (f)
    v.check(std::abs(f->value - 3.0) <= 0.3, "exponent on r in [" + num(f->window.lo) + ", " + num(f->window.hi) +
                                                 "] = " + num(f->value, 4) + " (r^2 = " + num(f->r_squared, 4) +
                                                 "), target 3.0 +- 0.3");
  return v;
}

void luttinger(Verdict& v, const std::string& cfg, const std::string& name, double target, double tol) {
  const RunOutcome out = run_config(cfg);
  if (!all_ok(v, out)) return;
  for (const PointOutcome& p : out.points)
    v.detail << "  " << name << " U/t = " << num(p.u_over_t) << ": alpha = "
             << (p.power_law ? num(p.power_law->value, 4) : std::string("n/a")) << '\n';
  v.check(out.luttinger.has_value(), name + " Luttinger fit");
  if (out.luttinger)
    v.check(std::abs(out.luttinger->value - target) <= tol,
            name + " A = " + num(out.luttinger->value, 4) + " (r^2 = " + num(out.luttinger->r_squared, 3) +
                "), target " + num(target) + " +- " + num(tol));
}

Verdict criterion_7() {
  Verdict v;
  luttinger(v, "paper/luttinger_micro.ini", "microtraps", 1.68, 0.2);
  luttinger(v, "paper/luttinger_paul.ini", "paul", 0.215, 0.05);
  return v;
}

Verdict criterion_8() {
  Verdict v;
  const RunOutcome out = run_config("paper/attractive_micro.ini");
  if (!all_ok(v, out)) return v;
  // Sweep values ascend from U = -0.5 to 0; walk them in the direction of decreasing U.
  std::vector<const PointOutcome*> pts;
  for (auto it = out.points.rbegin(); it != out.points.rend(); ++it) pts.push_back(&*it);
  const int c = default_reference_site(10) - 1;
  bool o_up = true, n_up = true, f_up = true;
  for (size_t k = 0; k < pts.size(); ++k) {
    const ObservableReport& r = *pts[k]->report;
    v.detail << "  U/t = " << num(pts[k]->u_over_t) << ": <O> = " << num(r.attractive_O, 5) << ", n_c = "
             << num(r.density[c], 5) << ", dn_c = " << num(r.fluctuations[c], 5)
             << ", gap = " << num(pts[k]->gap.value_or(NAN), 3)
             << (r.metadata.near_degenerate ? " [near-degenerate]" : "") << '\n';
    if (k == 0) continue;
    const ObservableReport& q = *pts[k - 1]->report;
    o_up = o_up && r.attractive_O > q.attractive_O;
    n_up = n_up && r.density[c] > q.density[c];
    f_up = f_up && r.fluctuations[c] > q.fluctuations[c];
  }
  v.check(o_up, "attractive <O> strictly increasing as U decreases");
  v.check(n_up, "center-site density increasing as U decreases");
  v.check(f_up, "center-site fluctuations increasing as U decreases");
  v.check(pts.back()->report->metadata.near_degenerate,
          "near-degeneracy flag raised at U/t = " + num(pts.back()->u_over_t));
  return v;
}

Verdict criterion_9() {
  Verdict v;
  // Gap scan on the N = 6 chain.
  const RunOutcome gap = run_config("paper/alternating_gap_n6.ini");
  if (!all_ok(v, gap)) return v;
  size_t best = 0;
  for (size_t k = 0; k < gap.points.size(); ++k)
    if (*gap.points[k].gap < *gap.points[best].gap) best = k;
  const double ratio = gap.points[best].parameter;
  const bool interior = best > 0 && best + 1 < gap.points.size();
  v.check(interior && std::abs(ratio - 2.0) <= 0.1,
          "gap minimum at U_even/U_odd = " + num(ratio, 4) + (interior ? " (interior)" : " (at the grid edge)") +
              ", dE_min = " + num(*gap.points[best].gap, 4));

  // Classical limit t = 0 on N = 4: C(4,2) degenerate ground states.
  BoseHubbardModel m = build_model(microtrap_positions(4), 1.0, 8, 8);
  std::fill(m.hopping.begin(), m.hopping.end(), 0.0);
  std::fill(m.onsite_energy.begin(), m.onsite_energy.end(), 0.0);
  m = apply_site_pattern(m, SitePattern::AlternatingOddEven, 40.0, 80.0);
  const EdResult ed = ed_ground_state(m, SectorBasis(4, 8, 8), 1);
  int within = 0;
  const SectorBasis b(4, 8, 8);
  const EdResult all = ed_ground_state(m, b, 8);
  for (const Eigenpair& p : all.pairs) within += std::abs(p.energy - all.pairs[0].energy) <= 1e-9;
  v.check(ed.ground_degeneracy == 6 && within == 6,
          "t = 0, N = 4 ground manifold dimension " + std::to_string(ed.ground_degeneracy) + " (window count " +
              std::to_string(within) + "), expected 6");

  // Spin-mapped correlator on the N = 50 chain.
  const RunOutcome spin = run_config("paper/alternating_spin_n50.ini");
  if (!all_ok(v, spin)) return v;
  const auto& f = spin.points[0].spin_power_law;
  v.check(f.has_value(), "spin correlator power-law fit");
  if (f)
    v.check(std::abs(f->value - 0.56) <= 0.06,
            "spin exponent = " + num(f->value, 4) + " (r^2 = " + num(f->r_squared, 4) + "), target 0.56 +- 0.06");
  return v;
}

Verdict criterion_10() {
  Verdict v;
  // Hermiticity of the sector Hamiltonian.
  {
    const BoseHubbardModel m = build_model(solve_paul_trap_positions(5), 1.3, 5, 5);
    const SectorBasis b(5, 5, 5);
    const Eigen::MatrixXd h = SectorHamiltonian(m, b).to_dense();
    v.check((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0, "sector Hamiltonian is symmetric");
  }
  // Sum rules on a DMRG state, at every sweep and at convergence.
  {
    const BoseHubbardModel m = build_model(microtrap_positions(12), 2.0, 12, 6);
    DmrgConfig cfg;
    cfg.kept_states_m = 60;
    double worst_sum = 0.0;
    cfg.on_sweep = [&](const SweepRecord&, const DmrgState& s) {
      double tot = 0.0;
      for (double n : s.measure_one_point(OnePoint::Density)) tot += n;
      worst_sum = std::max(worst_sum, std::abs(tot - 12.0));
    };
    const DmrgState st = dmrg_ground_state(m, 12, cfg);
    v.check(worst_sum <= 1e-8, "sum_j n_j = N_ph at every sweep (max dev " + num(worst_sum, 3) + ")");
    const ObservableReport r = build_report(measure_all(st), {});
    double row = 0.0;
    for (int i = 0; i < 12; ++i) row = std::max(row, std::abs(r.cnn.row(i).sum()));
    v.check(row <= 1e-6, "sum_j C^nn_ij = 0 (max " + num(row, 3) + ")");
    v.check((r.caa - r.caa.transpose()).cwiseAbs().maxCoeff() <= 1e-8, "C^aa symmetric");
  }
  // Variational monotonicity without truncation: every sweep energy non-increasing.
  {
    const BoseHubbardModel m = build_model(solve_paul_trap_positions(8), 1.0, 8, 4);
    DmrgConfig cfg;
    cfg.kept_states_m = 1000;
    cfg.noise = 0.0;
    cfg.max_sweeps = 6;
    cfg.energy_tol = 1e-13;
    const DmrgState st = dmrg_ground_state(m, 8, cfg);
    bool mono = true;
    const auto& h = st.result().history;
    for (size_t k = 1; k < h.size(); ++k) mono = mono && h[k].energy <= h[k - 1].energy + 1e-10;
    v.check(mono, "sweep energies non-increasing without truncation (" + std::to_string(h.size()) + " sweeps)");
  }
  // With truncation a sweep may rise only on the scale of the discarded weight.
  {
    const BoseHubbardModel m = build_model(microtrap_positions(16), 1.0, 16, 4);
    DmrgConfig cfg;
    cfg.kept_states_m = 24;
    cfg.energy_tol = 1e-12;
    const DmrgState st = dmrg_ground_state(m, 16, cfg);
    const auto& h = st.result().history;
    bool ok = true;
    for (size_t k = 1; k < h.size(); ++k)
      ok = ok && h[k].energy <= h[k - 1].energy + h[k].max_truncation * std::abs(h[k].energy) + 1e-10;
    v.check(ok, "truncated sweeps rise at most by truncation x |E| (" + std::to_string(h.size()) + " sweeps)");
  }
  // Uniform shift of eps: E -> E + c N_ph.
  {
    BoseHubbardModel m = build_model(microtrap_positions(5), 0.7, 4, 4);
    const SectorBasis b(5, 4, 4);
    const double e0 = ed_ground_state(m, b, 1).pairs[0].energy;
    for (double& e : m.onsite_energy) e += 0.37;
    const double e1 = ed_ground_state(m, b, 1).pairs[0].energy;
    v.check(std::abs(e1 - e0 - 4 * 0.37) <= 1e-10, "uniform eps shift covariance (dev " + num(std::abs(e1 - e0 - 1.48), 3) + ")");
  }
  // Reflection symmetry of a nondegenerate profile.
  {
    const BoseHubbardModel m = build_model(solve_paul_trap_positions(6), 1.0, 6, 4);
    const SectorBasis b(6, 6, 4);
    const EdResult r = ed_ground_state(m, b, 2);
    const RawMeasurements raw = measure_exact(b, r.pairs[0].vector);
    double asym = 0.0;
    for (int i = 0; i < 6; ++i) asym = std::max(asym, std::abs(raw.density[i] - raw.density[5 - i]));
    v.check(!r.degenerate && asym <= 1e-8, "reflection-symmetric density (max asym " + num(asym, 3) + ")");
  }
  // Sector dimensions.
  {
    bool ok = SectorBasis::count(3, 2, 2) == 6 && SectorBasis::count(6, 12, 12) == 6188;
    for (int n = 1; n <= 6; ++n)
      for (int p = 0; p <= 8; ++p)
        for (int cap = 1; cap <= 4; ++cap) ok = ok && SectorBasis::count(n, p, cap) == oracle::brute_count(n, p, cap);
    v.check(ok, "sector dimensions match combinatorial counts");
  }
  // Exact recovery on synthetic fit data.
  {
    Series pl, ex;
    for (int r = 1; r <= 20; ++r) {
      pl.r.push_back(r);
      pl.y.push_back(0.8 * std::pow(r, -0.57));
      ex.r.push_back(r);
      ex.y.push_back(1.3 * std::exp(-r / 3.2));
    }
    const double a = fit_power_law(pl, {2, 12}).value, xi = fit_exponential(ex, {2, 12}).value;
    const double uc = extrapolate_critical_point({2, 2.5, 3}, {1 / 0.45, 1 / 0.95, 1 / 1.45}).value;
    std::vector<std::pair<double, double>> ua;
    for (double u : {0.1, 0.2, 0.4}) ua.emplace_back(u, 0.3 * std::sqrt(u / 2.0));
    const double A = fit_luttinger_coefficient(ua, 2.0).value;
    const double dev = std::max({std::abs(a - 0.57), std::abs(xi - 3.2), std::abs(uc - 1.55), std::abs(A - 0.3)});
    v.check(dev <= 1e-12, "synthetic fits recovered (max dev " + num(dev, 3) + ")");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<Verdict()>> table = {
      {"1", criterion_1}, {"2", criterion_2}, {"3", criterion_3},   {"4", criterion_4},
      {"4desk", criterion_4_desk}, {"5", criterion_5}, {"6", criterion_6}, {"7", criterion_7},
      {"8", criterion_8}, {"9", criterion_9}, {"10", criterion_10},
  };
  if (argc != 2 || !table.count(argv[1])) {
    std::fprintf(stderr, "usage: %s <1..10|4desk>\n", argv[0]);
    return 2;
  }
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = table.at(argv[1])();
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s", v.detail.str().c_str());
  std::printf("criterion %s: %s (%.0f s)\n", argv[1], v.pass ? "PASS" : "FAIL", secs);
  return v.pass ? 0 : 1;
}

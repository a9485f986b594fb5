#include "phbhm/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "phbhm/error.hpp"

namespace phbhm {

const char* to_string(SitePattern p) noexcept {
  switch (p) {
    case SitePattern::Uniform: return "uniform";
    case SitePattern::AlternatingOddEven: return "alternating";
    case SitePattern::LeftRightSplit: return "left_right";
  }
  return "unknown";
}

void BoseHubbardModel::validate() const {
  require(n_sites >= 1, "model needs at least one site");
  require(hopping.size() == static_cast<size_t>(n_sites) * n_sites, "hopping matrix has wrong size");
  require(onsite_energy.size() == static_cast<size_t>(n_sites), "onsite_energy has wrong size");
  require(onsite_interaction.size() == static_cast<size_t>(n_sites), "onsite_interaction has wrong size");
  require(n_max >= 1, "n_max must be >= 1");
  require(n_phonons >= 0, "n_phonons must be >= 0");
  for (int i = 0; i < n_sites; ++i) {
    require(t(i, i) == 0.0, "hopping diagonal must be zero");
    for (int j = 0; j < n_sites; ++j) {
      require(t(i, j) == t(j, i), "hopping must be symmetric");
      require(t(i, j) >= 0.0 && std::isfinite(t(i, j)), "hopping must be finite and nonnegative");
    }
    require(std::isfinite(onsite_energy[i]) && std::isfinite(onsite_interaction[i]),
            "onsite coefficients must be finite");
  }
  if (static_cast<long>(n_phonons) > static_cast<long>(n_sites) * n_max) {
    std::ostringstream os;
    os << "n_phonons " << n_phonons << " exceeds n_sites * n_max = " << n_sites * n_max;
    fail(ErrorCode::InfeasibleSector, os.str());
  }
}

std::uint64_t BoseHubbardModel::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t k = 0; k < len; ++k) {
      h ^= p[k];
      h *= 1099511628211ull;
    }
  };
  mix(&n_sites, sizeof n_sites);
  mix(&n_max, sizeof n_max);
  mix(&n_phonons, sizeof n_phonons);
  mix(hopping.data(), hopping.size() * sizeof(double));
  mix(onsite_energy.data(), onsite_energy.size() * sizeof(double));
  mix(onsite_interaction.data(), onsite_interaction.size() * sizeof(double));
  return h;
}

BoseHubbardModel build_model(const ChainGeometry& geometry, double u_over_t, int n_phonons, int n_max,
                             const BuildOptions& options) {
  const int n = geometry.size();
  require(n >= 1, "geometry has no ions");
  require(n_max >= 1, "n_max must be >= 1");
  require(n_phonons >= 0, "n_phonons must be >= 0");
  require(std::isfinite(u_over_t), "u_over_t must be finite");
  for (int i = 1; i < n; ++i)
    require(geometry.positions[i] > geometry.positions[i - 1], "positions must be strictly increasing");
  if (options.cutoff) require(*options.cutoff >= 1, "hopping cutoff must be >= 1");

  BoseHubbardModel m;
  m.n_sites = n;
  m.n_max = n_max;
  m.n_phonons = n_phonons;
  m.hopping_range_cutoff = options.cutoff;
  m.trap = geometry.kind;
  m.hopping.assign(static_cast<size_t>(n) * n, 0.0);
  m.onsite_energy.assign(n, 0.0);
  m.onsite_interaction.assign(n, u_over_t);

  const double d0 = geometry.min_spacing;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (options.cutoff && j - i > *options.cutoff) continue;
      double r = d0 / std::abs(geometry.positions[j] - geometry.positions[i]);
      m.t(i, j) = m.t(j, i) = r * r * r;
    }
  if (!options.flat_onsite)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += m.t(i, j);
      m.onsite_energy[i] = -s;
    }
  m.validate();
  return m;
}

BoseHubbardModel apply_site_pattern(const BoseHubbardModel& model, SitePattern pattern, double u_odd,
                                    double u_even) {
  model.validate();
  BoseHubbardModel out = model;
  out.pattern = pattern;
  const int n = model.n_sites;
  switch (pattern) {
    case SitePattern::Uniform:
      std::fill(out.onsite_interaction.begin(), out.onsite_interaction.end(), u_odd);
      break;
    case SitePattern::AlternatingOddEven:
      require(u_odd > 0.0 && u_even > 0.0, "alternating pattern expects positive interactions");
      for (int i = 0; i < n; ++i) out.onsite_interaction[i] = ((i + 1) % 2 == 1) ? u_odd : u_even;
      break;
    case SitePattern::LeftRightSplit:
      require(u_odd > 0.0 && u_even > 0.0, "left/right pattern expects positive interactions");
      require(n % 2 == 0, "left/right split needs an even number of sites");
      for (int i = 0; i < n; ++i) out.onsite_interaction[i] = (i < n / 2) ? u_odd : u_even;
      break;
  }
  return out;
}

StandingWaveResult standing_wave_interaction(const StandingWaveConfig& sw, double omega_x) {
  require(sw.delta == 0 || sw.delta == 1, "delta must be 0 or 1");
  require(sw.lamb_dicke_eta >= 0.0, "Lamb-Dicke parameter must be nonnegative");
  require(omega_x > 0.0, "omega_x must be positive");
  const double sign = sw.delta == 0 ? 1.0 : -1.0;
  const double eta2 = sw.lamb_dicke_eta * sw.lamb_dicke_eta;
  const double radicand = omega_x * (omega_x - sign * 4.0 * eta2 * sw.amplitude_F);
  if (radicand <= 0.0) fail(ErrorCode::TrapDestabilized, "standing wave destabilizes the radial trap", radicand);

  StandingWaveResult r;
  r.U = 2.0 * sign * sw.amplitude_F * eta2 * eta2;
  r.shifted_omega_x = std::sqrt(radicand);
  r.curvature_warning = std::abs(eta2 * sw.amplitude_F) >= 0.1 * omega_x;
  r.quartic_warning = std::abs(sw.amplitude_F * eta2 * eta2) >= 0.1 * omega_x;
  return r;
}

}  // namespace phbhm

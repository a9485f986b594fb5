#include <gtest/gtest.h>

#include "phbhm/config.hpp"
#include "phbhm/error.hpp"

using namespace phbhm;

namespace {

const char* kBase = R"(
[geometry]
trap = microtrap
n_ions = 4

[model]
u_over_t = 2.0
n_phonons = 4
)";

ErrorCode code_of(const std::string& text) {
  try {
    parse_config_text(text).validate();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidInput;  // sentinel: nothing thrown
}

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text).validate();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, MinimalDefaults) {
  const RunConfig c = parse_config_text(kBase);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.trap, TrapKind::MicrotrapArray);
  EXPECT_EQ(c.n_ions, 4);
  EXPECT_EQ(c.n_phonons, 4);
  EXPECT_EQ(c.effective_n_max(), 6);  // ceil(6 * 1)
  EXPECT_EQ(c.solver, SolverMode::DMRG);
  EXPECT_EQ(c.dmrg.kept_states_m, 100);
  EXPECT_EQ(c.dmrg.max_sweeps, 12);
  EXPECT_DOUBLE_EQ(c.dmrg.energy_tol, 1e-9);
  ASSERT_EQ(c.points().size(), 1u);
  EXPECT_DOUBLE_EQ(c.points()[0], 2.0);
}

TEST(Config, DefaultNmaxRoundsUp) {
  RunConfig c = parse_config_text(kBase);
  c.n_phonons = 5;  // <n> = 1.25 -> 7.5 -> 8
  EXPECT_EQ(c.effective_n_max(), 8);
}

TEST(Config, FullSectionsParse) {
  const RunConfig c = parse_config_text(R"(
# comment line
[geometry]
trap = paul
n_ions = 6
[model]
sweep = u_over_t
sweep_values = 0.5, 1.0, 2.5   ; trailing comment
n_phonons = 12
n_max = 5
cutoff = 2
flat_onsite = true
[solver]
mode = both
[exactdiag]
threads = 2
[dmrg]
kept_states_m = 64
max_sweeps = 8
energy_tol = 1e-10
seed = 11
noise = 0
noise_sweeps = 0
davidson_tol = 1e-10
[observables]
i0 = 3
[analysis]
power_law_window = 1, 3
exponential_window = auto
critical_point = auto
luttinger = true
luttinger_n0 = 2
[output]
directory = somewhere
write_matrices = false
[units]
beta_x = 0.02
omega_x = 1.0
)");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.trap, TrapKind::PaulTrap);
  EXPECT_EQ(c.points(), (std::vector<double>{0.5, 1.0, 2.5}));
  ASSERT_TRUE(c.cutoff.has_value());
  EXPECT_EQ(*c.cutoff, 2);
  EXPECT_TRUE(c.flat_onsite);
  EXPECT_EQ(c.solver, SolverMode::Both);
  EXPECT_EQ(c.ed_threads, 2);
  EXPECT_EQ(c.dmrg.kept_states_m, 64);
  EXPECT_EQ(c.dmrg.seed, 11u);
  EXPECT_EQ(c.i0, 3);
  ASSERT_TRUE(c.power_law_window.has_value());
  EXPECT_DOUBLE_EQ(c.power_law_window->hi, 3.0);
  EXPECT_FALSE(c.exponential_window.has_value());
  EXPECT_EQ(c.critical, CriticalMode::Auto);
  EXPECT_DOUBLE_EQ(c.luttinger_n0, 2.0);
  EXPECT_EQ(c.output_dir, "somewhere");
  EXPECT_FALSE(c.write_matrices);
  EXPECT_DOUBLE_EQ(*c.beta_x, 0.02);
}

TEST(Config, UnknownKeyIsAnErrorNamingIt) {
  const std::string text = std::string(kBase) + "n_phonon = 3\n";
  EXPECT_EQ(code_of(text), ErrorCode::ConfigError);
  EXPECT_NE(message_of(text).find("model.n_phonon"), std::string::npos);
}

TEST(Config, UnknownSectionIsAnError) {
  const std::string text = std::string(kBase) + "[plots]\nstyle = x\n";
  EXPECT_EQ(code_of(text), ErrorCode::ConfigError);
  EXPECT_NE(message_of(text).find("plots"), std::string::npos);
}

TEST(Config, BadValuesNameTheField) {
  auto with = [](const std::string& extra) { return std::string(kBase) + extra; };
  EXPECT_NE(message_of(with("[dmrg]\nkept_states_m = many\n")).find("dmrg.kept_states_m"), std::string::npos);
  EXPECT_NE(message_of(with("[solver]\nmode = qmc\n")).find("solver.mode"), std::string::npos);
  EXPECT_NE(message_of(with("[dmrg]\nmax_sweeps = 0\n")).find("dmrg"), std::string::npos);
  EXPECT_EQ(code_of(std::string(R"(
[geometry]
n_ions = 3
[model]
n_phonons = 3
sweep_values = 1, 3, 2
)")),
            ErrorCode::ConfigError);
}

TEST(Config, MissingRequiredFields) {
  EXPECT_NE(message_of("[model]\nn_phonons = 2\n").find("geometry.n_ions"), std::string::npos);
  EXPECT_NE(message_of("[geometry]\nn_ions = 2\n").find("model.n_phonons"), std::string::npos);
}

TEST(Config, InfeasibleSectorRejected) {
  const std::string text = R"(
[geometry]
n_ions = 3
[model]
n_phonons = 10
n_max = 3
)";
  EXPECT_EQ(code_of(text), ErrorCode::InfeasibleSector);
}

TEST(Config, PatternConstraints) {
  const std::string spin = std::string(kBase) + "[observables]\nspin_correlator = true\n";
  EXPECT_EQ(code_of(spin), ErrorCode::ConfigError);
  const std::string ratio = R"(
[geometry]
n_ions = 4
[model]
u_over_t = 40
pattern = alternating
sweep = u_even_ratio
sweep_values = 1.5, 2.0, 2.5
n_phonons = 8
)";
  const RunConfig c = parse_config_text(ratio);
  EXPECT_NO_THROW(c.validate());
  EXPECT_TRUE(c.spin_correlator);  // default on for the alternating pattern
  EXPECT_EQ(code_of(std::string(kBase) + "[analysis]\ncritical_point = auto\n"), ErrorCode::ConfigError);
}

TEST(Config, StandingWaveNeedsUnits) {
  const std::string text = R"(
[geometry]
n_ions = 4
[model]
n_phonons = 4
[standing_wave]
amplitude_F = 1.0
lamb_dicke_eta = 0.1
delta = 0
)";
  EXPECT_EQ(code_of(text), ErrorCode::ConfigError);
  EXPECT_NO_THROW(parse_config_text(text + "[units]\nbeta_x = 0.02\nomega_x = 1.0\n").validate());
}

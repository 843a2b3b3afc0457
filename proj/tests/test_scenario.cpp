#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "slidesim/scenario.hpp"
#include "slidesim/scenario_io.hpp"

using namespace slidesim;

namespace {

bool same_or_both_nan(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

ScenarioConfig quiet_planar(double duration = 7.0) {
  ScenarioConfig cfg = default_planar_scenario();
  cfg.uncertainty = UncertaintySource::none;
  cfg.noise.relative_sigma = 0.0;
  cfg.sim.duration = duration;
  return cfg;
}

}  // namespace

TEST_CASE("trapezoid profile covers the stroke") {
  const TrapezoidProfile trap(0.5, 0.5, 1.0);
  CHECK(trap.t_cruise > 0.0);
  const auto end = trap.eval(trap.total_time() + 1.0);
  CHECK(std::abs(end[0] - 1.0) < 1e-12);
  CHECK(end[1] == 0.0);

  // High acceleration with a low cruise cap still degenerates correctly.
  const TrapezoidProfile tri(2.5, 10.0, 1.0);
  CHECK(tri.t_cruise == 0.0);
  CHECK(std::abs(tri.eval(tri.total_time())[0] - 1.0) < 1e-9);

  const TrapezoidProfile zero(0.5, 0.5, 0.0);
  CHECK(zero.total_time() == 0.0);
  CHECK(zero.eval(1.0)[0] == 0.0);
}

TEST_CASE("clean scenario (a): slides the stroke with no tip-overs") {
  const ScenarioConfig cfg = quiet_planar(8.0);
  const RunResult r = run_scenario(cfg);
  REQUIRE(!r.unstable);
  CHECK(r.metrics.tipover_events == 0);
  CHECK(std::isfinite(r.metrics.recovery_time));
  // The stroke completes: final x near 1 m.
  CHECK(std::abs(r.planar_rows.back().state.x - 1.0) < 0.05);
  // Push settles near the commanded 15 N split across both wheels.
  const auto& last = r.planar_rows.back();
  CHECK(std::abs(last.f_n[0] + last.f_n[1] - 15.0) < 0.8);
}

TEST_CASE("closed-loop recovery from a 20 degree contact angle") {
  ScenarioConfig cfg = quiet_planar(8.0);
  cfg.refs.a_max = 2.5;
  cfg.refs.push_force = 7.5;
  cfg.contact_angle_deg = 20.0;
  const RunResult r = run_scenario(cfg);
  REQUIRE(!r.unstable);
  REQUIRE(std::isfinite(r.metrics.recovery_time));
  CHECK(r.metrics.recovery_time < 5.0);
}

TEST_CASE("zero-stroke configuration is an approach-only run") {
  ScenarioConfig cfg = quiet_planar(4.0);
  cfg.refs.stroke = 0.0;
  const RunResult r = run_scenario(cfg);
  REQUIRE(!r.planar_rows.empty());
  CHECK(std::isfinite(r.metrics.first_contact_time));
  CHECK(r.metrics.max_abs_en_sliding >= 0.0);
  CHECK(std::abs(r.planar_rows.back().state.x) < 0.05);
}

TEST_CASE("determinism: identical config and seed give byte-identical outputs") {
  ScenarioConfig cfg = default_planar_scenario();
  cfg.sim.duration = 5.0;
  const RunResult a = run_scenario(cfg);
  const RunResult b = run_scenario(cfg);
  CHECK(planar_state_csv(a) == planar_state_csv(b));
  CHECK(planar_controller_csv(a) == planar_controller_csv(b));
  CHECK(summary_to_json(a).dump() == summary_to_json(b).dump());
}

TEST_CASE("metrics recomputed from the emitted CSV match exactly") {
  ScenarioConfig cfg = default_planar_scenario();
  cfg.sim.duration = 6.0;
  const RunResult r = run_scenario(cfg);
  std::istringstream in(planar_state_csv(r));
  const csv::Table table = csv::read_table(in);
  const SummaryMetrics m = metrics_from_state_csv(table, false, r.unstable, 0.0);
  CHECK(m.tipover_events == r.metrics.tipover_events);
  CHECK(m.tipover_events_sliding == r.metrics.tipover_events_sliding);
  CHECK(m.tipover_duration == r.metrics.tipover_duration);
  CHECK(m.max_abs_en_sliding == r.metrics.max_abs_en_sliding);
  CHECK(m.peak_abs_en == r.metrics.peak_abs_en);
  CHECK(same_or_both_nan(m.first_contact_time, r.metrics.first_contact_time));
  CHECK(same_or_both_nan(m.recovery_time, r.metrics.recovery_time));
  CHECK(same_or_both_nan(m.min_alpha, r.metrics.min_alpha));
}

TEST_CASE("config JSON round trip preserves the scenario") {
  ScenarioConfig cfg = default_planar_scenario();
  cfg.refs.push_force = 7.5;
  cfg.refs.a_max = 2.5;
  cfg.contact_angle_deg = 10.0;
  cfg.noise.relative_sigma = 0.07;
  cfg.gains.k_n = 0.4;
  const json j = scenario_config_to_json(cfg);
  const ScenarioConfig back = scenario_config_from_json(j);
  CHECK(back.plant == cfg.plant);
  CHECK(back.controller == cfg.controller);
  CHECK(back.refs.push_force == cfg.refs.push_force);
  CHECK(back.refs.a_max == cfg.refs.a_max);
  CHECK(back.contact_angle_deg == cfg.contact_angle_deg);
  CHECK(back.noise.relative_sigma == cfg.noise.relative_sigma);
  CHECK(back.gains.k_n == cfg.gains.k_n);
  CHECK(back.uncertainty == cfg.uncertainty);
  CHECK(back.sim.layout.r_d == cfg.sim.layout.r_d);
}

TEST_CASE("plant mode and layout must agree") {
  ScenarioConfig cfg = default_planar_scenario();
  cfg.sim.layout = WheelLayout::three_wheel();
  CHECK_THROWS_AS(run_scenario(cfg), std::invalid_argument);
}

TEST_CASE("spatial aligned approach reaches immediate full contact") {
  ScenarioConfig cfg = default_spatial_scenario();
  cfg.uncertainty = UncertaintySource::none;
  cfg.noise.relative_sigma = 0.0;
  cfg.sim.duration = 6.0;
  cfg.refs.stroke = 0.3;
  const RunResult r = run_scenario(cfg);
  REQUIRE(!r.unstable);
  CHECK(r.metrics.tipover_events == 0);
  REQUIRE(std::isfinite(r.metrics.recovery_time));
  CHECK(r.metrics.recovery_time < 0.5);
  // Pre-noise plane errors stay tiny for an aligned push.
  CHECK(r.metrics.peak_abs_en < 1.0);
  // The plane-error identity holds exactly on every sample.
  for (const auto& row : r.spatial_rows)
    CHECK(std::abs(row.e_n[0] + row.e_n[1] + row.e_n[2]) < 1e-12);
}

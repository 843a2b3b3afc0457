// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria cover formula-level properties of the stability
// measure, static-equilibrium behaviour of the contact plant, the validation
// scenario outcomes with the bundled synthetic uncertainties, and
// end-to-end determinism.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "force_angle_oracle.hpp"
#include "slidesim/bundled.hpp"
#include "slidesim/scenario.hpp"
#include "slidesim/scenario_io.hpp"

using namespace slidesim;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

Vec3 random_vec(std::uint64_t seed, std::uint64_t k, double s) {
  return Vec3{rng::gaussian(seed, 1, k), rng::gaussian(seed, 2, k), rng::gaussian(seed, 3, k)} *
         s;
}

WheelLayout random_layout(std::uint64_t k) {
  const double r_d = 0.03 + 0.25 * rng::to_unit(rng::mix(7, 1, k));
  const double h = 0.05 + 0.9 * rng::to_unit(rng::mix(7, 2, k));
  const double phase = 2.0 * kPi * rng::to_unit(rng::mix(7, 3, k));
  return WheelLayout::three_wheel(r_d, h, 0.015, phase);
}

// --------------------------------------------------------------------------

Check criterion_oracle_equivalence() {
  Check c;
  int used = 0;
  for (std::uint64_t k = 0; used < 1000 && k < 4000; ++k) {
    const WheelLayout layout = random_layout(k);
    const NetTipoverWrench w{random_vec(95, k, 12.0), random_vec(96, k, 2.0)};
    if (norm(w.f_r) < 1e-2) continue;
    const StabilityReport r = stability_measure(w, support_pattern(layout));
    if (r.indeterminate) continue;
    const double expected =
        oracle::alpha_of(oracle::points_of(layout), {w.f_r.x, w.f_r.y, w.f_r.z},
                         {w.m_r.x, w.m_r.y, w.m_r.z});
    c.require(std::abs(r.alpha - expected) <= 1e-9 * std::max(std::abs(expected), 1e-3),
              "alpha mismatch vs oracle at sample " + std::to_string(k));
    ++used;
  }
  c.require(used == 1000, "insufficient valid samples");
  return c;
}

Check criterion_homogeneity_rotation() {
  Check c;
  int used = 0;
  for (std::uint64_t k = 0; used < 1000 && k < 4000; ++k) {
    const WheelLayout layout = random_layout(k + 5000);
    const auto pts = layout.tip_contact_points();
    const NetTipoverWrench w{random_vec(70, k, 10.0), random_vec(71, k, 1.0)};
    if (norm(w.f_r) < 1e-2) continue;
    const TipoverAxes axes = support_pattern(layout);
    const StabilityReport r1 = stability_measure(w, axes);
    if (r1.indeterminate) continue;

    // Positive homogeneity of degree one.
    const double scale = 0.1 + 4.0 * rng::to_unit(rng::mix(72, 0, k));
    const StabilityReport r2 = stability_measure({w.f_r * scale, w.m_r * scale}, axes);
    c.require(std::abs(r2.alpha - scale * r1.alpha) <=
                  1e-10 * std::max(1.0, std::abs(scale * r1.alpha)),
              "homogeneity violated at sample " + std::to_string(k));
    c.require(r1.argmin_axis == r2.argmin_axis, "argmin changed under scaling");

    // Common-rotation invariance.
    const Quat rot = Quat::from_rotation_vector(random_vec(82, k, 2.0));
    std::vector<Vec3> rotated;
    for (const Vec3& p : pts) rotated.push_back(rot.rotate(p));
    const StabilityReport r3 = stability_measure(
        {rot.rotate(w.f_r), rot.rotate(w.m_r)},
        support_pattern_from_points(rotated, layout.mode));
    for (size_t i = 0; i < 3; ++i)
      c.require(std::abs(r1.axes[i].theta - r3.axes[i].theta) < 1e-10,
                "theta changed under common rotation");
    c.require(std::abs(r1.alpha - r3.alpha) < 1e-10 * std::max(1.0, std::abs(r1.alpha)),
              "alpha changed under common rotation");
    ++used;
  }
  c.require(used == 1000, "insufficient valid samples");
  return c;
}

Check criterion_symmetric_push() {
  Check c;
  const WheelLayout layout = WheelLayout::three_wheel(0.084, 0.3);
  const StabilityReport r =
      stability_measure({{0, 0, -15.0}, {}}, support_pattern(layout));
  const double expected = std::atan(0.042 / 0.3);
  c.require(!r.indeterminate, "report indeterminate");
  for (const auto& ax : r.axes) {
    c.require(std::abs(ax.theta - expected) <= 1e-9,
              "theta deviates from atan(0.042/0.3)");
    c.require(ax.sigma == 1, "sigma not +1 under centered push");
  }
  return c;
}

Check criterion_guidelines_trend() {
  Check c;
  const WrenchTrace trace = bundled_wrench_trace();
  const WheelLayout layout = WheelLayout::three_wheel(0.084, 0.3);
  const std::array<double, 3> r_scales{1.0, 2.0, 5.0};
  const std::array<double, 3> h_scales{1.0, 0.5, 0.2};
  const double one = 1.0;
  const auto r_sweep = geometry_sweep(trace, layout, r_scales, std::span{&one, 1});
  c.require(r_sweep[0].min_alpha <= r_sweep[1].min_alpha &&
                r_sweep[1].min_alpha <= r_sweep[2].min_alpha,
            "min alpha not nondecreasing in r_d");
  const auto h_sweep = geometry_sweep(trace, layout, std::span{&one, 1}, h_scales);
  c.require(h_sweep[0].min_alpha <= h_sweep[1].min_alpha &&
                h_sweep[1].min_alpha <= h_sweep[2].min_alpha,
            "min alpha not nondecreasing in 1/h");
  return c;
}

Check criterion_static_contact() {
  Check c;
  SimConfig cfg;
  cfg.layout = WheelLayout::two_wheel(0.084, 0.3);
  PlanarState s;
  s.z = cfg.layout.h;
  // 12 s sim covers the slow lateral-drift mode (time constant 4 s).
  auto settle = [&](const PlanarWrench& w) {
    PlanarStepResult r{s, {}};
    for (int i = 0; i < 12000; ++i) r = step_planar(r.state, w, cfg);
    return r;
  };
  const auto push = settle({0.0, -15.0, 0.0});
  c.require(std::abs(push.contact.f_n[0] - 7.5) < 0.075 &&
                std::abs(push.contact.f_n[1] - 7.5) < 0.075,
            "equal-split static normal forces off by more than 1%");
  const double tau = 0.1;  // stays in the linear regime of the static oracle
  const auto twisted = settle({0.0, -15.0, tau});
  const double e_n = twisted.contact.f_n[0] - twisted.contact.f_n[1];
  const double expected = -tau / cfg.layout.r_d;  // static rotational balance
  c.require(std::abs(e_n - expected) < 0.02 * std::abs(expected),
            "torque-induced force difference off by more than 2%");
  return c;
}

Check criterion_matrix() {
  Check c;
  const auto cells = run_matrix();
  for (const auto& cell : cells) {
    const SummaryMetrics& m = cell.result.metrics;
    const double push = cell.config.refs.push_force;
    if (cell.approach == "normal_force") {
      c.require(m.tipover_events_sliding == 0 && !m.unstable,
                std::string("normal_force tip-over in scenario (") + cell.scenario + ")");
      c.require(m.max_abs_en_sliding < 0.2 * push,
                std::string("normal_force |e_n| exceeds 20% of f_d in (") + cell.scenario +
                    "): " + std::to_string(m.max_abs_en_sliding));
    } else if (cell.approach == "enlarged") {
      if (cell.scenario == 'a' || cell.scenario == 'b')
        c.require(!m.tipped_over(), std::string("enlarged baseline tipped in (") +
                                        cell.scenario + ")");
      else
        c.require(m.tipped_over(), std::string("enlarged baseline did not tip in (") +
                                       cell.scenario + ")");
    } else {
      c.require(m.tipped_over(), std::string("plain baseline did not tip in (") +
                                     cell.scenario + ")");
    }
  }
  return c;
}

Check criterion_recovery() {
  Check c;
  const auto results = run_recovery({0.0, 10.0, 20.0});
  double prev_peak = -1.0;
  for (size_t i = 0; i < results.size(); ++i) {
    const SummaryMetrics& m = results[i].metrics;
    c.require(!m.unstable, "recovery run unstable");
    c.require(std::isfinite(m.recovery_time) && m.recovery_time < 5.0,
              "no sustained full contact within 5 s at angle index " + std::to_string(i));
    c.require(m.peak_abs_en > prev_peak,
              "initial-impact |e_n| peak not monotone in the contact angle");
    prev_peak = m.peak_abs_en;
  }
  return c;
}

Check criterion_three_wheel() {
  Check c;
  const RunResult r = run_three_wheel(-5.0, 15.0);
  const SummaryMetrics& m = r.metrics;
  c.require(!m.unstable, "three-wheel run unstable");
  c.require(std::isfinite(m.recovery_time), "no sustained full contact");
  c.require(std::isfinite(m.convergence_time),
            "plane errors never converged below the threshold");
  for (const auto& row : r.spatial_rows)
    c.require(std::abs(row.e_n[0] + row.e_n[1] + row.e_n[2]) <= 1e-12,
              "plane-error identity violated");
  return c;
}

Check criterion_controller_laws() {
  Check c;
  Gains g;
  // Motion/force laws: linearity and exact arithmetic on random inputs.
  for (std::uint64_t k = 0; k < 500; ++k) {
    const double ep = rng::gaussian(1, 0, k), ed = rng::gaussian(1, 1, k);
    const double ef = rng::gaussian(1, 2, k), xi = rng::gaussian(1, 3, k);
    const double xdd = rng::gaussian(1, 4, k), fd = rng::gaussian(1, 5, k) * 10.0;
    const auto [fx, fz] = motion_force_wrench(ep, ed, ef, xi, xdd, fd, 4.0, g);
    c.require(std::abs(fx - (4.0 * xdd - g.k_p * ep - g.k_d * ed)) <= 1e-12,
              "motion law mismatch");
    c.require(std::abs(fz - (fd - g.k_f * ef - g.k_i * xi)) <= 1e-12, "force law mismatch");
    // tau1 antisymmetry and zero at nominal.
    const double a = std::abs(rng::gaussian(2, 0, k)) * 10.0;
    const double b = std::abs(rng::gaussian(2, 1, k)) * 10.0;
    c.require(std::abs(normal_force_torque_planar(a, b, 0.5) +
                       normal_force_torque_planar(b, a, 0.5)) <= 1e-12,
              "tau1 antisymmetry violated");
    c.require(normal_force_torque_planar(a, a, 0.5) == 0.0, "tau1 not zero at nominal");
  }
  // tau2 combination law against an explicit sum, plus the zero-sum identity.
  const WheelLayout layout = WheelLayout::three_wheel();
  const auto n = plane_normals(layout);
  for (std::uint64_t k = 0; k < 500; ++k) {
    const double f1 = std::abs(rng::gaussian(3, 0, k)) * 10.0;
    const double f2 = std::abs(rng::gaussian(3, 1, k)) * 10.0;
    const double f3 = std::abs(rng::gaussian(3, 2, k)) * 10.0;
    const auto e = plane_errors_3w(f1, f2, f3);
    c.require(std::abs(e[0] + e[1] + e[2]) <= 1e-12, "plane errors do not sum to zero");
    const Vec3 tau = normal_force_torque_3w(e, n, {0.5, 0.5, 0.5});
    const Vec3 manual = n[0] * (0.5 * e[0]) + n[1] * (0.5 * e[1]) + n[2] * (0.5 * e[2]);
    c.require(norm(tau - manual) <= 1e-12, "tau2 combination mismatch");
    c.require(std::abs(tau.z) <= 1e-12, "tau2 has a z component");
  }
  // Classifier on the exhaustive grid over {0, dF/2, dF, 2 dF}^2.
  const double dF = 0.5;
  const double levels[] = {0.0, dF / 2.0, dF, 2.0 * dF};
  for (double f1 : levels)
    for (double f2 : levels) {
      const int code = classify_contact(std::array{f1, f2}, dF, WheelMode::two_wheel);
      const bool c1 = f1 >= dF, c2 = f2 >= dF;
      const int expected = c1 && c2 ? 0 : c1 ? -1 : c2 ? +1 : -2;
      c.require(code == expected, "classifier grid mismatch");
    }
  return c;
}

Check criterion_determinism() {
  Check c;
  ScenarioConfig cfg = default_planar_scenario();
  cfg.sim.duration = 6.0;
  cfg.plots = true;
  const RunResult a = run_scenario(cfg);
  const RunResult b = run_scenario(cfg);
  c.require(planar_state_csv(a) == planar_state_csv(b), "state CSV differs");
  c.require(planar_controller_csv(a) == planar_controller_csv(b), "controller CSV differs");
  c.require(summary_to_json(a).dump(2) == summary_to_json(b).dump(2), "summary differs");
  c.require(scenario_config_to_json(a.config).dump(2) ==
                scenario_config_to_json(b.config).dump(2),
            "config echo differs");
  ScenarioConfig sp = default_spatial_scenario();
  sp.sim.duration = 4.0;
  const RunResult sa = run_scenario(sp);
  const RunResult sb = run_scenario(sp);
  c.require(spatial_state_csv(sa) == spatial_state_csv(sb), "spatial state CSV differs");
  return c;
}

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  std::function<Check()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "force-angle oracle equivalence (1000 samples, 1e-9 rel)", 5.0,
       criterion_oracle_equivalence},
      {2, "homogeneity and rotation invariance (1000 samples, 1e-10)", 5.0,
       criterion_homogeneity_rotation},
      {3, "symmetric-push geometry: theta = atan(0.042/0.3) +- 1e-9", 5.0,
       criterion_symmetric_push},
      {4, "guidelines trend on the bundled trace (r_d and h scalings)", 10.0,
       criterion_guidelines_trend},
      {5, "static contact: equal split within 1%, torque shift within 2%", 10.0,
       criterion_static_contact},
      {6, "scenario matrix: normal-force clean, enlarged a/b, baseline tips", 60.0,
       criterion_matrix},
      {7, "recovery at 0/10/20 deg within 5 s, monotone impact peaks", 30.0,
       criterion_recovery},
      {8, "three-wheel convergence and plane-error identity", 30.0,
       criterion_three_wheel},
      {9, "controller unit laws and classifier grid", 5.0, criterion_controller_laws},
      {10, "determinism: byte-identical re-runs", 30.0, criterion_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criterion.run();
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > criterion.time_limit_s) {
      check.ok = false;
      if (check.detail.empty())
        check.detail = "runtime " + std::to_string(seconds) + " s exceeds limit";
    }
    std::printf("[%s] criterion %2d: %s (%.2f s)%s%s\n", check.ok ? "PASS" : "FAIL",
                criterion.id, criterion.name, seconds, check.ok ? "" : " -- ",
                check.ok ? "" : check.detail.c_str());
    if (!check.ok) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

#pragma once

// Batch scenario definition, execution and metrics: the approach -> contact
// -> sliding protocol with injected uncertainties and sensor noise.
//
// Protocol per run: the vehicle starts standoff meters above the surface
// (optionally tilted by the configured contact angles), descends along -z_B
// under full-pose control, and once full-contact has held for settle_hold
// seconds slides a trapezoidal stroke along x. Phase transitions are driven
// by the plant's true contact state (the experiment script); controllers
// only ever see the noisy wheel sensors.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "slidesim/bundled.hpp"
#include "slidesim/contact.hpp"
#include "slidesim/control.hpp"
#include "slidesim/force_angle.hpp"
#include "slidesim/trace_io.hpp"
#include "slidesim/uncertainty.hpp"

namespace slidesim {

// ---------------------------------------------------------------------------
// Configuration

enum class PlantMode { planar, spatial };
enum class UncertaintySource { none, bundled, file, synthetic };
enum class ForceEstimateSource { plant_with_error, momentum_observer };

struct ReferenceParams {
  double push_force = 15.0;      // N, magnitude; applied along -z_B
  double a_max = 0.5;            // m/s^2 peak sliding acceleration
  double v_max = 0.4;            // m/s cruise velocity
  double stroke = 1.0;           // m
  double approach_speed = 0.06;  // m/s descent
  double standoff = 0.2;         // m initial tip height above the surface
  double settle_hold = 1.0;      // s of full contact before sliding starts
};

struct ScenarioConfig {
  PlantMode plant = PlantMode::planar;
  ControllerMode controller = ControllerMode::normal_force;
  SimConfig sim;
  ReferenceParams refs;
  Gains gains;
  ControlLimits limits;
  double contact_angle_deg = 0.0;  // planar delta-beta
  double tilt_x_deg = 0.0;         // spatial approach tilt about x_B
  double tilt_y_deg = 0.0;         // spatial approach tilt about y_B
  UncertaintySource uncertainty = UncertaintySource::none;
  std::string uncertainty_file;
  SynthesisParams synthesis = bundled_synthesis_params();
  std::uint64_t uncertainty_seed = kBundledUncertaintySeed;
  NoiseModel noise{0.10, 1};
  // One-pole acquisition filter on the noisy wheel-force readings (rad/s);
  // 0 disables it. Smooths the multiplicative sensor noise before it enters
  // the torque law.
  double sensor_bandwidth = 40.0;
  ForceEstimateSource force_estimate = ForceEstimateSource::plant_with_error;
  double observer_gain = 20.0;  // momentum observer K_I when selected
  // Bandwidth (rad/s) of the emulated wrench estimator used by
  // plant_with_error: the interaction-force feedback is a band-limited
  // quantity like the momentum observer's output, not the instantaneous
  // contact force. 0 disables the filter.
  double f_est_bandwidth = 20.0;
  // Fraction of the injected z-force uncertainty that also corrupts the
  // force estimate. The actuation injection is the dominant error source;
  // the estimator sees only a residual share of it, otherwise the force
  // loop would be blind to exactly the disturbance it exists to reject.
  double estimation_error_scale = 0.2;
  bool log_alpha = true;
  bool plots = false;

  void validate() const {
    sim.validate();
    gains.validate();
    limits.validate();
    noise.validate();
    if (refs.push_force <= 0.0 || refs.a_max <= 0.0 || refs.v_max <= 0.0 ||
        refs.stroke < 0.0 || refs.approach_speed <= 0.0 || refs.standoff <= 0.0)
      throw std::invalid_argument("ScenarioConfig: invalid reference parameters");
  }

  /// Resolves the uncertainty trace, resampled to the control rate.
  std::optional<UncertaintyTrace> load_uncertainty() const {
    switch (uncertainty) {
      case UncertaintySource::none:
        return std::nullopt;
      case UncertaintySource::bundled:
        return resample(bundled_uncertainty_trace(), sim.control_dt);
      case UncertaintySource::synthetic:
        return resample(synthesize(kBundledTraceDuration, kBundledTraceDt, synthesis,
                                   uncertainty_seed),
                        sim.control_dt);
      case UncertaintySource::file:
        return resample(read_uncertainty_trace_file(uncertainty_file,
                                                    TraceProvenance::measured),
                        sim.control_dt);
    }
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Sliding trajectory

/// Trapezoidal velocity profile over a fixed stroke; degenerates to a
/// triangular profile when the cruise velocity is not reached.
struct TrapezoidProfile {
  double accel = 0.5;
  double v_peak = 0.5;
  double t_acc = 1.0;
  double t_cruise = 0.0;
  double stroke = 1.0;

  TrapezoidProfile(double a_max, double v_max, double stroke_m) {
    accel = a_max;
    stroke = stroke_m;
    if (stroke_m <= 0.0) {
      v_peak = t_acc = t_cruise = 0.0;
      return;
    }
    const double d_acc_full = 0.5 * v_max * v_max / a_max;
    if (2.0 * d_acc_full >= stroke_m) {
      t_acc = std::sqrt(stroke_m / a_max);
      v_peak = a_max * t_acc;
      t_cruise = 0.0;
    } else {
      v_peak = v_max;
      t_acc = v_max / a_max;
      t_cruise = (stroke_m - 2.0 * d_acc_full) / v_max;
    }
  }

  double total_time() const { return 2.0 * t_acc + t_cruise; }

  /// Position, velocity, acceleration at profile time t (clamped).
  std::array<double, 3> eval(double t) const {
    if (stroke <= 0.0 || t <= 0.0) return {0.0, 0.0, 0.0};
    if (t < t_acc) return {0.5 * accel * t * t, accel * t, accel};
    const double d_acc = 0.5 * accel * t_acc * t_acc;
    if (t < t_acc + t_cruise)
      return {d_acc + v_peak * (t - t_acc), v_peak, 0.0};
    const double td = t - t_acc - t_cruise;
    if (td < t_acc) {
      return {d_acc + v_peak * t_cruise + v_peak * td - 0.5 * accel * td * td,
              v_peak - accel * td, -accel};
    }
    return {stroke, 0.0, 0.0};
  }
};

// ---------------------------------------------------------------------------
// Run records

enum class Phase { approach = 0, settle = 1, sliding = 2, hold = 3 };

struct PlanarLogRow {
  double t = 0.0;
  PlanarState state;
  std::array<double, 2> f_n{};        // plant truth (spring + damper)
  std::array<double, 2> f_n_sensed{};  // pre-noise pad reading (elastic part)
  int code = -2;                       // plant truth
  std::array<double, 2> f_n_meas{};    // controller's noisy, filtered view
  int code_meas = -2;
  // e_n is the pre-noise sensed force difference, the quantity the
  // validation metrics track; e_p/e_d/e_f echo the controller's errors.
  double e_p = 0.0, e_d = 0.0, e_f = 0.0, e_n = 0.0;
  PlanarWrench cmd, applied;
  std::array<bool, 3> saturated{};
  bool gated = false;
  int phase = 0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
};

struct SpatialLogRow {
  double t = 0.0;
  SpatialState state;
  std::array<double, 3> f_n{};
  std::array<double, 3> f_n_sensed{};
  int code = -2;
  std::array<double, 3> f_n_meas{};
  int code_meas = -2;
  std::array<double, 3> e_n{};  // pre-noise plane errors from the sensed forces
  std::array<double, 3> e_n_meas{};
  double e_px = 0.0, e_dx = 0.0, e_py = 0.0, e_dy = 0.0;
  double e_f = 0.0;
  SpatialWrench cmd, applied;
  std::array<bool, 6> saturated{};
  bool gated = false;
  int phase = 0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
};

struct SummaryMetrics {
  int tipover_events = 0;          // transitions into tip-over after first contact
  int tipover_events_sliding = 0;  // transitions during the sliding phase
  double tipover_duration = 0.0;   // s in tip-over after first contact
  double max_abs_en_sliding = 0.0; // from the pre-noise sensed forces
  double peak_abs_en = 0.0;        // whole run
  double peak_abs_en_initial = 0.0;  // within the window after first contact
  double first_contact_time = std::numeric_limits<double>::quiet_NaN();
  double recovery_time = std::numeric_limits<double>::quiet_NaN();
  double sliding_start_time = std::numeric_limits<double>::quiet_NaN();
  double convergence_time = std::numeric_limits<double>::quiet_NaN();  // three-wheel
  double min_alpha = std::numeric_limits<double>::quiet_NaN();
  bool unstable = false;

  bool tipped_over() const { return tipover_events > 0 || unstable; }
};

struct RunResult {
  ScenarioConfig config;
  std::vector<PlanarLogRow> planar_rows;
  std::vector<SpatialLogRow> spatial_rows;
  SummaryMetrics metrics;
  bool unstable = false;
  std::string divergence_reason;
};

// ---------------------------------------------------------------------------
// Metrics
//
// Computed from plain series so they can be recomputed from emitted CSVs;
// the run loop and the consistency tests share this code path.

struct MetricsInput {
  std::vector<double> t;
  std::vector<int> code;                // plant truth
  std::vector<double> e_n_max_abs;      // per-sample max |e_n_i| (sensed)
  std::vector<double> e_n_true_max_abs;  // plant-truth |e_n|, for impact peaks
  std::vector<int> phase;
  std::vector<double> alpha;            // may be NaN per sample
  bool unstable = false;
  double hold_window = 1.0;             // s of full contact that counts as recovered
  double convergence_threshold = 0.0;   // N; 0 disables the convergence metric
  double convergence_window = 0.5;      // s
  // Minimum dwell for a tip-over excursion to count as an event; shorter
  // blips are classifier flicker at contact transitions, not tip-overs.
  // The same dwell merges sub-dwell contact losses when evaluating
  // sustained full-contact windows.
  double min_event_dwell = 0.05;        // s
  double initial_peak_window = 1.0;     // s after first contact
};

inline SummaryMetrics compute_metrics(const MetricsInput& in) {
  SummaryMetrics m;
  m.unstable = in.unstable;
  const size_t n = in.t.size();
  if (n == 0) return m;
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  (void)nan;

  // First contact.
  size_t first_contact = n;
  for (size_t i = 0; i < n; ++i) {
    if (!code_is_free_flight(in.code[i])) {
      first_contact = i;
      m.first_contact_time = in.t[i];
      break;
    }
  }

  // Tip-over events and durations (after first contact). An excursion must
  // persist for min_event_dwell to count as an event; an excursion that
  // reaches the end of the series (e.g. a truncated unstable run) counts
  // regardless.
  const double dt = n > 1 ? in.t[1] - in.t[0] : 0.0;
  bool prev_tip = false;
  size_t event_start = 0;
  auto close_event = [&](size_t end_index, bool truncated) {
    const double dwell = static_cast<double>(end_index - event_start) * dt;
    if (dwell >= in.min_event_dwell || truncated) {
      ++m.tipover_events;
      if (in.phase[event_start] == static_cast<int>(Phase::sliding))
        ++m.tipover_events_sliding;
    }
  };
  for (size_t i = first_contact; i < n; ++i) {
    const bool tip = code_is_tipover(in.code[i]);
    if (tip && !prev_tip) event_start = i;
    if (!tip && prev_tip) close_event(i, false);
    if (tip) m.tipover_duration += dt;
    prev_tip = tip;
  }
  if (prev_tip) close_event(n, in.unstable);

  // Peak |e_n| over the run, during sliding, and around the initial impact.
  for (size_t i = 0; i < n; ++i) {
    m.peak_abs_en = std::max(m.peak_abs_en, in.e_n_max_abs[i]);
    if (in.phase[i] == static_cast<int>(Phase::sliding))
      m.max_abs_en_sliding = std::max(m.max_abs_en_sliding, in.e_n_max_abs[i]);
    if (first_contact < n && in.t[i] >= m.first_contact_time &&
        in.t[i] <= m.first_contact_time + in.initial_peak_window) {
      const double impact = in.e_n_true_max_abs.empty() ? in.e_n_max_abs[i]
                                                        : in.e_n_true_max_abs[i];
      m.peak_abs_en_initial = std::max(m.peak_abs_en_initial, impact);
    }
  }

  // Debounced full-contact flags: contact losses shorter than the dwell are
  // classifier flicker and do not break a hold window.
  std::vector<bool> holding(n, false);
  {
    const size_t dwell_samples =
        dt > 0.0 ? static_cast<size_t>(in.min_event_dwell / dt + 0.5) : 1;
    size_t i = 0;
    while (i < n) {
      if (code_is_full_contact(in.code[i])) {
        holding[i] = true;
        ++i;
        continue;
      }
      size_t j = i;
      while (j < n && !code_is_full_contact(in.code[j])) ++j;
      const bool interior = i > 0 && j < n;
      if (interior && j - i < dwell_samples)
        for (size_t k = i; k < j; ++k) holding[k] = true;
      i = j;
    }
  }

  // Recovery: first debounced window of full contact lasting hold_window,
  // reported as the window start relative to first contact.
  if (first_contact < n) {
    double window_start = -1.0;
    for (size_t i = first_contact; i < n; ++i) {
      if (holding[i]) {
        if (window_start < 0.0) window_start = in.t[i];
        if (in.t[i] - window_start >= in.hold_window) {
          m.recovery_time = window_start - m.first_contact_time;
          break;
        }
      } else {
        window_start = -1.0;
      }
    }
  }

  // Sliding phase start.
  for (size_t i = 0; i < n; ++i) {
    if (in.phase[i] == static_cast<int>(Phase::sliding)) {
      m.sliding_start_time = in.t[i];
      break;
    }
  }

  // Convergence: first time max|e_n_i| stays under the threshold for the
  // convergence window (evaluated after first contact).
  if (in.convergence_threshold > 0.0 && first_contact < n) {
    double window_start = -1.0;
    for (size_t i = first_contact; i < n; ++i) {
      if (in.e_n_max_abs[i] < in.convergence_threshold) {
        if (window_start < 0.0) window_start = in.t[i];
        if (in.t[i] - window_start >= in.convergence_window) {
          m.convergence_time = window_start - m.first_contact_time;
          break;
        }
      } else {
        window_start = -1.0;
      }
    }
  }

  // Minimum alpha over valid samples.
  double min_alpha = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i)
    if (!std::isnan(in.alpha[i])) min_alpha = std::min(min_alpha, in.alpha[i]);
  if (std::isfinite(min_alpha)) m.min_alpha = min_alpha;
  return m;
}

// ---------------------------------------------------------------------------
// Scenario runner

namespace detail {

struct PhaseTracker {
  Phase phase = Phase::approach;
  bool contacted = false;
  double first_contact_t = 0.0;
  double full_contact_since = -1.0;
  double slide_clock = 0.0;
  double slide_origin_x = 0.0;

  void observe(double t, int true_code, double x, const ReferenceParams& refs,
               double profile_total) {
    if (!contacted && !code_is_free_flight(true_code)) {
      contacted = true;
      first_contact_t = t;
      slide_origin_x = x;
      phase = Phase::settle;
    }
    if (phase == Phase::settle) {
      if (code_is_full_contact(true_code)) {
        if (full_contact_since < 0.0) full_contact_since = t;
        if (t - full_contact_since >= refs.settle_hold) {
          phase = Phase::sliding;
          slide_origin_x = x;
        }
      } else {
        full_contact_since = -1.0;
      }
    } else if (phase == Phase::sliding && slide_clock >= profile_total) {
      phase = Phase::hold;
    }
  }
};

/// Divergence guard thresholds for the scripted scenarios.
inline const char* out_of_envelope(double z, double tilt, double speed) {
  if (!(std::abs(z) < 5.0)) return "position out of envelope";
  if (!(std::abs(tilt) < 1.2)) return "attitude out of envelope";
  if (!(speed < 30.0)) return "velocity out of envelope";
  return nullptr;
}

}  // namespace detail

inline RunResult run_scenario(const ScenarioConfig& cfg_in) {
  ScenarioConfig cfg = cfg_in;
  cfg.sim.layout = cfg_in.sim.layout;  // layout arrives already scaled by callers
  cfg.validate();
  if ((cfg.plant == PlantMode::planar) !=
      (cfg.sim.layout.mode == WheelMode::two_wheel))
    throw std::invalid_argument("run_scenario: plant mode and wheel layout disagree");

  const std::optional<UncertaintyTrace> unc = cfg.load_uncertainty();
  const double delta_f = cfg.sim.contact.contact_margin;
  const double f_d = -cfg.refs.push_force;  // push acts along -z_B
  const TrapezoidProfile profile(cfg.refs.a_max, cfg.refs.v_max, cfg.refs.stroke);
  const int substeps = cfg.sim.control_substeps();
  const int control_steps =
      static_cast<int>(cfg.sim.duration / cfg.sim.control_dt + 0.5);
  // Baseline push depth: position offset that makes the full-pose controller
  // exert the commanded push on the surface.
  const double z_contact = cfg.sim.layout.h;
  const double z_push_target = z_contact - cfg.refs.push_force / cfg.gains.baseline_kp_lin;

  ControllerConfig ctrl;
  ctrl.mode = cfg.controller;
  ctrl.gains = cfg.gains;
  ctrl.limits = cfg.limits;
  ctrl.delta_f = delta_f;
  ctrl.control_dt = cfg.sim.control_dt;
  ctrl.inertia = cfg.sim.inertia;

  RunResult result;
  result.config = cfg;
  ControllerState cs;
  detail::PhaseTracker tracker;

  const TipoverAxes axes = support_pattern(cfg.sim.layout);

  if (cfg.plant == PlantMode::planar) {
    PlanarState state;
    state.z = z_contact + cfg.refs.standoff;
    state.beta = deg_to_rad(cfg.contact_angle_deg);
    std::optional<MomentumObserverPlanar> observer;
    if (cfg.force_estimate == ForceEstimateSource::momentum_observer)
      observer.emplace(cfg.sim.inertia, cfg.observer_gain, state);
    double f_est_filtered = 0.0;
    std::array<double, 2> f_n_filtered{};
    bool filter_primed = false;
    PlanarWrench last_applied{};
    try {
      for (int k = 0; k < control_steps; ++k) {
        const double t = k * cfg.sim.control_dt;
        const ContactReport truth =
            contact_forces(state, cfg.sim.layout, cfg.sim.surface, cfg.sim.contact);
        tracker.observe(t, truth.beta_code, state.x, cfg.refs, profile.total_time());

        const UncertaintySample u =
            unc ? unc->sample_at(t) : UncertaintySample{};

        // Controller inputs.
        PlanarControlInput in;
        in.state = state;
        const std::array<double, 2> f_n_true{truth.f_n[0], truth.f_n[1]};
        const std::array<double, 2> f_n_sensed{truth.f_n_sensed[0], truth.f_n_sensed[1]};
        in.f_n_meas = sensor_noise(f_n_sensed, cfg.noise, static_cast<std::uint64_t>(k));
        if (cfg.sensor_bandwidth > 0.0) {
          const double a = std::exp(-cfg.sensor_bandwidth * cfg.sim.control_dt);
          if (!filter_primed) {
            f_n_filtered = in.f_n_meas;
            filter_primed = true;
          }
          for (size_t i = 0; i < 2; ++i) {
            f_n_filtered[i] = a * f_n_filtered[i] + (1.0 - a) * in.f_n_meas[i];
            in.f_n_meas[i] = std::max(0.0, f_n_filtered[i]);
          }
        }
        // Interaction force the body applies to the surface along z_B,
        // corrupted by the injected estimation error.
        const double f_int = -truth.body_wrench.force.z;
        if (cfg.force_estimate == ForceEstimateSource::momentum_observer && observer) {
          in.f_est = -observer->estimate().fz;
        } else {
          const double raw = f_int - cfg.estimation_error_scale * u.force.z;
          if (cfg.f_est_bandwidth > 0.0) {
            const double a = std::exp(-cfg.f_est_bandwidth * cfg.sim.control_dt);
            f_est_filtered = a * f_est_filtered + (1.0 - a) * raw;
            in.f_est = f_est_filtered;
          } else {
            in.f_est = raw;
          }
        }

        PlanarReferences refs;
        refs.f_d = f_d;
        refs.pose_beta = tracker.contacted ? 0.0 : deg_to_rad(cfg.contact_angle_deg);
        refs.pose_x = tracker.contacted ? state.x : 0.0;
        const double z_ref = std::max(z_push_target,
                                      z_contact + cfg.refs.standoff -
                                          cfg.refs.approach_speed * t);
        refs.pose_z = z_ref;
        if (tracker.phase == Phase::sliding || tracker.phase == Phase::hold) {
          const double clock = tracker.phase == Phase::sliding
                                   ? tracker.slide_clock
                                   : profile.total_time();
          const auto [xd, vd, ad] = profile.eval(clock);
          refs.x_d = tracker.slide_origin_x + xd;
          refs.x_d_dot = vd;
          refs.x_d_ddot = ad;
          if (cfg.controller == ControllerMode::baseline) {
            refs.pose_x = refs.x_d;
            refs.pose_z = z_push_target;
          }
        } else {
          refs.x_d = tracker.slide_origin_x;
          refs.x_d_dot = 0.0;
          refs.x_d_ddot = 0.0;
          if (cfg.controller == ControllerMode::baseline && tracker.contacted) {
            refs.pose_x = 0.0;
            refs.pose_z = z_push_target;
          }
        }
        in.refs = refs;

        const PlanarControlOutput out = control_step_planar(in, ctrl, cs);
        const PlanarWrench applied = unc ? inject(out.wrench, u) : out.wrench;
        last_applied = applied;

        PlanarLogRow row;
        row.t = t;
        row.state = state;
        row.f_n = f_n_true;
        row.f_n_sensed = f_n_sensed;
        row.code = truth.beta_code;
        row.f_n_meas = in.f_n_meas;
        row.code_meas = out.beta_code;
        row.e_p = out.e_p;
        row.e_d = out.e_d;
        row.e_f = out.e_f;
        row.e_n = f_n_sensed[0] - f_n_sensed[1];
        row.cmd = out.wrench;
        row.applied = applied;
        row.saturated = out.saturated;
        row.gated = out.gated;
        row.phase = static_cast<int>(tracker.phase);
        if (cfg.log_alpha) {
          const StabilityReport sr = stability_measure(
              net_tipover_wrench({applied.fx, 0.0, applied.fz}, {0.0, applied.tau, 0.0}),
              axes);
          if (!sr.indeterminate) row.alpha = sr.alpha;
        }
        result.planar_rows.push_back(row);

        // Advance the sliding clock unless the controller froze references.
        if (tracker.phase == Phase::sliding && !out.gated)
          tracker.slide_clock += cfg.sim.control_dt;

        for (int s = 0; s < substeps; ++s) {
          const auto step = step_planar(state, applied, cfg.sim);
          state = step.state;
        }
        if (observer) observer->update(state, applied, cfg.sim.control_dt);
        if (const char* reason = detail::out_of_envelope(
                state.z, state.beta, std::hypot(state.vx, state.vz)))
          throw divergence_error(reason);
      }
    } catch (const divergence_error& e) {
      result.unstable = true;
      result.divergence_reason = e.what();
    }
    (void)last_applied;

    MetricsInput mi;
    for (const auto& row : result.planar_rows) {
      mi.t.push_back(row.t);
      mi.code.push_back(row.code);
      mi.e_n_max_abs.push_back(std::abs(row.e_n));
      mi.e_n_true_max_abs.push_back(std::abs(row.f_n[0] - row.f_n[1]));
      mi.phase.push_back(row.phase);
      mi.alpha.push_back(row.alpha);
    }
    mi.unstable = result.unstable;
    result.metrics = compute_metrics(mi);
  } else {
    SpatialState state;
    state.position = {0.0, 0.0, z_contact + cfg.refs.standoff};
    state.orientation = Quat::from_rotation_vector(
        {deg_to_rad(cfg.tilt_x_deg), deg_to_rad(cfg.tilt_y_deg), 0.0});
    std::optional<MomentumObserverSpatial> observer;
    if (cfg.force_estimate == ForceEstimateSource::momentum_observer)
      observer.emplace(cfg.sim.inertia, cfg.observer_gain, state);
    double f_est_filtered = 0.0;
    std::array<double, 3> f_n_filtered{};
    bool filter_primed = false;
    try {
      for (int k = 0; k < control_steps; ++k) {
        const double t = k * cfg.sim.control_dt;
        const ContactReport truth =
            contact_forces(state, cfg.sim.layout, cfg.sim.surface, cfg.sim.contact);
        tracker.observe(t, truth.beta_code, state.position.x, cfg.refs,
                        profile.total_time());

        const UncertaintySample u =
            unc ? unc->sample_at(t) : UncertaintySample{};

        SpatialControlInput in;
        in.state = state;
        const std::array<double, 3> f_n_true{truth.f_n[0], truth.f_n[1], truth.f_n[2]};
        const std::array<double, 3> f_n_sensed{truth.f_n_sensed[0], truth.f_n_sensed[1],
                                               truth.f_n_sensed[2]};
        in.f_n_meas = sensor_noise(f_n_sensed, cfg.noise, static_cast<std::uint64_t>(k));
        if (cfg.sensor_bandwidth > 0.0) {
          const double a = std::exp(-cfg.sensor_bandwidth * cfg.sim.control_dt);
          if (!filter_primed) {
            f_n_filtered = in.f_n_meas;
            filter_primed = true;
          }
          for (size_t i = 0; i < 3; ++i) {
            f_n_filtered[i] = a * f_n_filtered[i] + (1.0 - a) * in.f_n_meas[i];
            in.f_n_meas[i] = std::max(0.0, f_n_filtered[i]);
          }
        }
        const double f_int = -truth.body_wrench.force.z;
        if (cfg.force_estimate == ForceEstimateSource::momentum_observer && observer) {
          in.f_est = -observer->estimate().force.z;
        } else {
          const double raw = f_int - cfg.estimation_error_scale * u.force.z;
          if (cfg.f_est_bandwidth > 0.0) {
            const double a = std::exp(-cfg.f_est_bandwidth * cfg.sim.control_dt);
            f_est_filtered = a * f_est_filtered + (1.0 - a) * raw;
            in.f_est = f_est_filtered;
          } else {
            in.f_est = raw;
          }
        }

        SpatialReferences refs;
        refs.f_d = f_d;
        refs.yaw_d = 0.0;
        refs.pose_orientation =
            tracker.contacted
                ? Quat{}
                : Quat::from_rotation_vector(
                      {deg_to_rad(cfg.tilt_x_deg), deg_to_rad(cfg.tilt_y_deg), 0.0});
        const double z_ref = std::max(z_push_target,
                                      z_contact + cfg.refs.standoff -
                                          cfg.refs.approach_speed * t);
        refs.pose_position = {tracker.contacted ? state.position.x : 0.0,
                              tracker.contacted ? state.position.y : 0.0, z_ref};
        if (tracker.phase == Phase::sliding || tracker.phase == Phase::hold) {
          const double clock = tracker.phase == Phase::sliding
                                   ? tracker.slide_clock
                                   : profile.total_time();
          const auto [xd, vd, ad] = profile.eval(clock);
          refs.x_d = tracker.slide_origin_x + xd;
          refs.x_d_dot = vd;
          refs.x_d_ddot = ad;
          if (cfg.controller == ControllerMode::baseline) {
            refs.pose_position.x = refs.x_d;
            refs.pose_position.z = z_push_target;
          }
        } else {
          refs.x_d = tracker.slide_origin_x;
          refs.y_d = 0.0;
          if (cfg.controller == ControllerMode::baseline && tracker.contacted) {
            refs.pose_position = {0.0, 0.0, z_push_target};
          }
        }
        in.refs = refs;

        const SpatialControlOutput out =
            control_step_spatial(in, ctrl, cfg.sim.layout, cs);
        const SpatialWrench applied = unc ? inject(out.wrench, u) : out.wrench;

        SpatialLogRow row;
        row.t = t;
        row.state = state;
        row.f_n = f_n_true;
        row.f_n_sensed = f_n_sensed;
        row.code = truth.beta_code;
        row.f_n_meas = in.f_n_meas;
        row.code_meas = out.beta_code;
        row.e_n = plane_errors_3w(f_n_sensed[0], f_n_sensed[1], f_n_sensed[2]);
        row.e_n_meas = out.e_n;
        row.e_px = out.e_px;
        row.e_dx = out.e_dx;
        row.e_py = out.e_py;
        row.e_dy = out.e_dy;
        row.e_f = out.e_f;
        row.cmd = out.wrench;
        row.applied = applied;
        row.saturated = out.saturated;
        row.gated = out.gated;
        row.phase = static_cast<int>(tracker.phase);
        if (cfg.log_alpha) {
          const StabilityReport sr =
              stability_measure(net_tipover_wrench(applied.force, applied.torque), axes);
          if (!sr.indeterminate) row.alpha = sr.alpha;
        }
        result.spatial_rows.push_back(row);

        if (tracker.phase == Phase::sliding && !out.gated)
          tracker.slide_clock += cfg.sim.control_dt;

        for (int s = 0; s < substeps; ++s) {
          const auto step = step_spatial(state, applied, cfg.sim);
          state = step.state;
        }
        if (observer) observer->update(state, applied, cfg.sim.control_dt);
        const double tilt = norm(state.orientation.to_rotation_vector());
        if (const char* reason = detail::out_of_envelope(state.position.z, tilt,
                                                         norm(state.linear_velocity)))
          throw divergence_error(reason);
      }
    } catch (const divergence_error& e) {
      result.unstable = true;
      result.divergence_reason = e.what();
    }

    MetricsInput mi;
    for (const auto& row : result.spatial_rows) {
      mi.t.push_back(row.t);
      mi.code.push_back(row.code);
      mi.e_n_max_abs.push_back(std::max({std::abs(row.e_n[0]), std::abs(row.e_n[1]),
                                         std::abs(row.e_n[2])}));
      const auto et = plane_errors_3w(row.f_n[0], row.f_n[1], row.f_n[2]);
      mi.e_n_true_max_abs.push_back(
          std::max({std::abs(et[0]), std::abs(et[1]), std::abs(et[2])}));
      mi.phase.push_back(row.phase);
      mi.alpha.push_back(row.alpha);
    }
    mi.unstable = result.unstable;
    mi.convergence_threshold = 0.05 * cfg.refs.push_force;
    result.metrics = compute_metrics(mi);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Batch drivers

/// The four validation scenarios: scaled sliding acceleration and push.
struct ScenarioScales {
  char label = 'a';
  double a_scale = 1.0;
  double f_scale = 1.0;
};

inline std::array<ScenarioScales, 4> scenario_table() {
  return {{{'a', 1.0, 1.0}, {'b', 5.0, 1.0}, {'c', 1.0, 0.5}, {'d', 5.0, 0.5}}};
}

/// Default planar scenario configuration shared by the batch drivers.
inline ScenarioConfig default_planar_scenario() {
  ScenarioConfig cfg;
  cfg.plant = PlantMode::planar;
  cfg.sim.layout = WheelLayout::two_wheel(0.084, 0.3);
  cfg.sim.duration = 9.0;
  cfg.uncertainty = UncertaintySource::bundled;
  cfg.noise = {0.10, 1};
  return cfg;
}

inline ScenarioConfig default_spatial_scenario() {
  ScenarioConfig cfg;
  cfg.plant = PlantMode::spatial;
  cfg.sim.layout = WheelLayout::three_wheel(0.084, 0.3);
  cfg.sim.duration = 9.0;
  cfg.uncertainty = UncertaintySource::bundled;
  cfg.noise = {0.10, 1};
  return cfg;
}

struct MatrixCell {
  char scenario = 'a';
  std::string approach;  // "baseline", "enlarged", "normal_force"
  ScenarioConfig config;
  RunResult result;
};

/// Runs the 4 x 3 grid: scenarios (a)-(d) against {baseline, enlarged-2r_d
/// baseline, normal-force}. Per-cell failures are recorded; the grid always
/// completes.
inline std::vector<MatrixCell> run_matrix(const ScenarioConfig& base_in = default_planar_scenario()) {
  std::vector<MatrixCell> cells;
  for (const ScenarioScales& sc : scenario_table()) {
    for (const char* approach : {"baseline", "enlarged", "normal_force"}) {
      MatrixCell cell;
      cell.scenario = sc.label;
      cell.approach = approach;
      ScenarioConfig cfg = base_in;
      cfg.refs.a_max = base_in.refs.a_max * sc.a_scale;
      cfg.refs.push_force = base_in.refs.push_force * sc.f_scale;
      cfg.controller = cell.approach == "normal_force" ? ControllerMode::normal_force
                                                       : ControllerMode::baseline;
      if (cell.approach == "enlarged") cfg.sim.layout = cfg.sim.layout.scaled(2.0, 1.0);
      cell.config = cfg;
      cell.result = run_scenario(cfg);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

/// Tip-over recovery runs at the given contact angles (degrees) under the
/// scenario-(d) parameters.
inline std::vector<RunResult> run_recovery(const std::vector<double>& angles_deg,
                                           const ScenarioConfig& base_in = default_planar_scenario()) {
  std::vector<RunResult> results;
  for (double angle : angles_deg) {
    if (std::abs(angle) >= 45.0)
      throw std::invalid_argument("run_recovery: |contact angle| must be below 45 degrees");
    ScenarioConfig cfg = base_in;
    cfg.controller = ControllerMode::normal_force;
    cfg.refs.a_max = base_in.refs.a_max * 5.0;
    cfg.refs.push_force = base_in.refs.push_force * 0.5;
    cfg.contact_angle_deg = angle;
    results.push_back(run_scenario(cfg));
  }
  return results;
}

/// Three-wheel validation run: tilted approach under scenario-(d) parameters
/// with uncertainties on all six axes.
inline RunResult run_three_wheel(double tilt_y_deg = -5.0, double tilt_x_deg = 15.0,
                                 const ScenarioConfig& base_in = default_spatial_scenario()) {
  ScenarioConfig cfg = base_in;
  cfg.plant = PlantMode::spatial;
  cfg.controller = ControllerMode::normal_force;
  cfg.refs.a_max = base_in.refs.a_max * 5.0;
  cfg.refs.push_force = base_in.refs.push_force * 0.5;
  cfg.tilt_x_deg = tilt_x_deg;
  cfg.tilt_y_deg = tilt_y_deg;
  return run_scenario(cfg);
}

}  // namespace slidesim

#pragma once

// Scenario configuration files (JSON), run artifact emission (CSV series,
// machine-readable summary, optional SVG plots) and metric recomputation
// from emitted files. Every emitted byte is a deterministic function of the
// configuration and seed; no timestamps are written.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slidesim/scenario.hpp"

namespace slidesim {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config <-> JSON

namespace detail {

inline Vec3 vec3_from_json(const json& j, const Vec3& fallback) {
  if (j.is_null()) return fallback;
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline AxisShape axis_shape_from_json(const json& j) {
  AxisShape s;
  s.stddev = j.value("std", 0.0);
  s.corr_time = j.value("corr_time", 1.0);
  s.drift_stddev = j.value("drift_std", 0.0);
  s.drift_corr_time = j.value("drift_corr_time", 10.0);
  return s;
}

inline json axis_shape_to_json(const AxisShape& s) {
  return json{{"std", s.stddev},
              {"corr_time", s.corr_time},
              {"drift_std", s.drift_stddev},
              {"drift_corr_time", s.drift_corr_time}};
}

}  // namespace detail

inline ScenarioConfig scenario_config_from_json(const json& j) {
  ScenarioConfig cfg;
  const std::string plant = j.value("plant", "planar");
  if (plant == "planar")
    cfg.plant = PlantMode::planar;
  else if (plant == "spatial")
    cfg.plant = PlantMode::spatial;
  else
    throw std::invalid_argument("config: plant must be 'planar' or 'spatial'");
  const std::string controller = j.value("controller", "normal_force");
  if (controller == "baseline")
    cfg.controller = ControllerMode::baseline;
  else if (controller == "normal_force")
    cfg.controller = ControllerMode::normal_force;
  else
    throw std::invalid_argument("config: controller must be 'baseline' or 'normal_force'");

  if (j.contains("sim")) {
    const json& s = j.at("sim");
    cfg.sim.physics_dt = s.value("physics_dt", cfg.sim.physics_dt);
    cfg.sim.control_dt = s.value("control_dt", cfg.sim.control_dt);
    cfg.sim.duration = s.value("duration", cfg.sim.duration);
    cfg.sim.rng_seed = s.value("seed", cfg.sim.rng_seed);
    cfg.sim.gravity_enabled = s.value("gravity_enabled", cfg.sim.gravity_enabled);
    if (s.contains("inertia")) {
      const json& i = s.at("inertia");
      cfg.sim.inertia.mass = i.value("mass", cfg.sim.inertia.mass);
      cfg.sim.inertia.planar_inertia =
          i.value("planar_inertia", cfg.sim.inertia.planar_inertia);
      if (i.contains("spatial_inertia_diag")) {
        const Vec3 d = detail::vec3_from_json(i.at("spatial_inertia_diag"), {0.1, 0.1, 0.15});
        cfg.sim.inertia.spatial_inertia = Mat3::diagonal(d.x, d.y, d.z);
      }
    }
    if (s.contains("contact")) {
      const json& c = s.at("contact");
      cfg.sim.contact.stiffness = c.value("stiffness", cfg.sim.contact.stiffness);
      cfg.sim.contact.damping = c.value("damping", cfg.sim.contact.damping);
      cfg.sim.contact.rolling_resistance =
          c.value("rolling_resistance", cfg.sim.contact.rolling_resistance);
      cfg.sim.contact.contact_margin = c.value("delta_f", cfg.sim.contact.contact_margin);
    }
    if (s.contains("surface")) {
      const json& sf = s.at("surface");
      cfg.sim.surface.point_on_plane = detail::vec3_from_json(
          sf.value("point", json()), cfg.sim.surface.point_on_plane);
      cfg.sim.surface.normal =
          detail::vec3_from_json(sf.value("normal", json()), cfg.sim.surface.normal);
    }
  }

  // Layout: built from the plant mode unless given explicitly, then scaled.
  double r_d = 0.084, h = 0.3, wheel_radius = 0.015, r_scale = 1.0, h_scale = 1.0;
  if (j.contains("layout")) {
    const json& l = j.at("layout");
    r_d = l.value("r_d", r_d);
    h = l.value("h", h);
    wheel_radius = l.value("wheel_radius", wheel_radius);
    r_scale = l.value("r_scale", 1.0);
    h_scale = l.value("h_scale", 1.0);
  }
  cfg.sim.layout = cfg.plant == PlantMode::planar
                       ? WheelLayout::two_wheel(r_d, h, wheel_radius)
                       : WheelLayout::three_wheel(r_d, h, wheel_radius);
  cfg.sim.layout = cfg.sim.layout.scaled(r_scale, h_scale);

  if (j.contains("references")) {
    const json& r = j.at("references");
    cfg.refs.push_force = r.value("push_force", cfg.refs.push_force);
    cfg.refs.a_max = r.value("a_max", cfg.refs.a_max);
    cfg.refs.v_max = r.value("v_max", cfg.refs.v_max);
    cfg.refs.stroke = r.value("stroke", cfg.refs.stroke);
    cfg.refs.approach_speed = r.value("approach_speed", cfg.refs.approach_speed);
    cfg.refs.standoff = r.value("standoff", cfg.refs.standoff);
    cfg.refs.settle_hold = r.value("settle_hold", cfg.refs.settle_hold);
  }

  if (j.contains("gains")) {
    const json& g = j.at("gains");
    cfg.gains.k_p = g.value("k_p", cfg.gains.k_p);
    cfg.gains.k_d = g.value("k_d", cfg.gains.k_d);
    cfg.gains.k_f = g.value("k_f", cfg.gains.k_f);
    cfg.gains.k_i = g.value("k_i", cfg.gains.k_i);
    cfg.gains.k_n = g.value("k_n", cfg.gains.k_n);
    if (g.contains("k_n3")) {
      const json& kn = g.at("k_n3");
      cfg.gains.k_n3 = {kn.at(0).get<double>(), kn.at(1).get<double>(),
                        kn.at(2).get<double>()};
    } else {
      cfg.gains.k_n3 = {cfg.gains.k_n, cfg.gains.k_n, cfg.gains.k_n};
    }
    cfg.gains.baseline_kp_lin = g.value("baseline_kp_lin", cfg.gains.baseline_kp_lin);
    cfg.gains.baseline_kd_lin = g.value("baseline_kd_lin", cfg.gains.baseline_kd_lin);
    cfg.gains.baseline_kp_att = g.value("baseline_kp_att", cfg.gains.baseline_kp_att);
    cfg.gains.baseline_kd_att = g.value("baseline_kd_att", cfg.gains.baseline_kd_att);
    cfg.gains.k_att = g.value("k_att", cfg.gains.k_att);
    cfg.gains.k_att_d = g.value("k_att_d", cfg.gains.k_att_d);
    cfg.gains.integrator_limit = g.value("integrator_limit", cfg.gains.integrator_limit);
  }

  if (j.contains("limits")) {
    cfg.limits.force = j.at("limits").value("force", cfg.limits.force);
    cfg.limits.torque = j.at("limits").value("torque", cfg.limits.torque);
  }

  cfg.contact_angle_deg = j.value("contact_angle_deg", 0.0);
  cfg.tilt_x_deg = j.value("tilt_x_deg", 0.0);
  cfg.tilt_y_deg = j.value("tilt_y_deg", 0.0);

  if (j.contains("uncertainty")) {
    const json& u = j.at("uncertainty");
    const std::string source = u.value("source", "none");
    if (source == "none")
      cfg.uncertainty = UncertaintySource::none;
    else if (source == "bundled")
      cfg.uncertainty = UncertaintySource::bundled;
    else if (source == "file")
      cfg.uncertainty = UncertaintySource::file;
    else if (source == "synthetic")
      cfg.uncertainty = UncertaintySource::synthetic;
    else
      throw std::invalid_argument("config: unknown uncertainty source '" + source + "'");
    cfg.uncertainty_file = u.value("path", "");
    cfg.uncertainty_seed = u.value("seed", cfg.uncertainty_seed);
    if (u.contains("params")) {
      const json& p = u.at("params");
      cfg.synthesis.com_offset_coupling =
          p.value("com_offset_coupling", cfg.synthesis.com_offset_coupling);
      for (int i = 0; i < 3; ++i) {
        if (p.contains("force"))
          cfg.synthesis.force[static_cast<size_t>(i)] =
              detail::axis_shape_from_json(p.at("force").at(i));
        if (p.contains("torque"))
          cfg.synthesis.torque[static_cast<size_t>(i)] =
              detail::axis_shape_from_json(p.at("torque").at(i));
      }
    }
  }

  if (j.contains("noise")) {
    cfg.noise.relative_sigma = j.at("noise").value("relative_sigma", cfg.noise.relative_sigma);
    cfg.noise.rng_seed = j.at("noise").value("seed", cfg.noise.rng_seed);
    cfg.sensor_bandwidth = j.at("noise").value("sensor_bandwidth", cfg.sensor_bandwidth);
  }

  const std::string fe = j.value("force_estimate", "plant_with_error");
  if (fe == "plant_with_error")
    cfg.force_estimate = ForceEstimateSource::plant_with_error;
  else if (fe == "momentum_observer")
    cfg.force_estimate = ForceEstimateSource::momentum_observer;
  else
    throw std::invalid_argument("config: unknown force_estimate '" + fe + "'");
  cfg.observer_gain = j.value("observer_gain", cfg.observer_gain);
  cfg.f_est_bandwidth = j.value("f_est_bandwidth", cfg.f_est_bandwidth);
  cfg.estimation_error_scale = j.value("estimation_error_scale", cfg.estimation_error_scale);
  cfg.log_alpha = j.value("log_alpha", cfg.log_alpha);
  cfg.plots = j.value("plots", cfg.plots);
  return cfg;
}

inline json scenario_config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["plant"] = cfg.plant == PlantMode::planar ? "planar" : "spatial";
  j["controller"] =
      cfg.controller == ControllerMode::baseline ? "baseline" : "normal_force";
  j["sim"] = json{{"physics_dt", cfg.sim.physics_dt},
                  {"control_dt", cfg.sim.control_dt},
                  {"duration", cfg.sim.duration},
                  {"seed", cfg.sim.rng_seed},
                  {"gravity_enabled", cfg.sim.gravity_enabled},
                  {"inertia",
                   json{{"mass", cfg.sim.inertia.mass},
                        {"planar_inertia", cfg.sim.inertia.planar_inertia},
                        {"spatial_inertia_diag",
                         json::array({cfg.sim.inertia.spatial_inertia.a[0][0],
                                      cfg.sim.inertia.spatial_inertia.a[1][1],
                                      cfg.sim.inertia.spatial_inertia.a[2][2]})}}},
                  {"contact",
                   json{{"stiffness", cfg.sim.contact.stiffness},
                        {"damping", cfg.sim.contact.damping},
                        {"rolling_resistance", cfg.sim.contact.rolling_resistance},
                        {"delta_f", cfg.sim.contact.contact_margin}}},
                  {"surface", json{{"point", detail::vec3_to_json(cfg.sim.surface.point_on_plane)},
                                   {"normal", detail::vec3_to_json(cfg.sim.surface.normal)}}}};
  j["layout"] = json{{"mode", cfg.sim.layout.mode == WheelMode::two_wheel ? "two_wheel"
                                                                          : "three_wheel"},
                     {"r_d", cfg.sim.layout.r_d},
                     {"h", cfg.sim.layout.h},
                     {"wheel_radius", cfg.sim.layout.wheel_radius}};
  j["references"] = json{{"push_force", cfg.refs.push_force},
                         {"a_max", cfg.refs.a_max},
                         {"v_max", cfg.refs.v_max},
                         {"stroke", cfg.refs.stroke},
                         {"approach_speed", cfg.refs.approach_speed},
                         {"standoff", cfg.refs.standoff},
                         {"settle_hold", cfg.refs.settle_hold}};
  j["gains"] = json{{"k_p", cfg.gains.k_p},
                    {"k_d", cfg.gains.k_d},
                    {"k_f", cfg.gains.k_f},
                    {"k_i", cfg.gains.k_i},
                    {"k_n", cfg.gains.k_n},
                    {"k_n3", json::array({cfg.gains.k_n3[0], cfg.gains.k_n3[1],
                                          cfg.gains.k_n3[2]})},
                    {"baseline_kp_lin", cfg.gains.baseline_kp_lin},
                    {"baseline_kd_lin", cfg.gains.baseline_kd_lin},
                    {"baseline_kp_att", cfg.gains.baseline_kp_att},
                    {"baseline_kd_att", cfg.gains.baseline_kd_att},
                    {"k_att", cfg.gains.k_att},
                    {"k_att_d", cfg.gains.k_att_d},
                    {"integrator_limit", cfg.gains.integrator_limit}};
  j["limits"] = json{{"force", cfg.limits.force}, {"torque", cfg.limits.torque}};
  j["contact_angle_deg"] = cfg.contact_angle_deg;
  j["tilt_x_deg"] = cfg.tilt_x_deg;
  j["tilt_y_deg"] = cfg.tilt_y_deg;
  const char* source = "none";
  switch (cfg.uncertainty) {
    case UncertaintySource::none: source = "none"; break;
    case UncertaintySource::bundled: source = "bundled"; break;
    case UncertaintySource::file: source = "file"; break;
    case UncertaintySource::synthetic: source = "synthetic"; break;
  }
  json params;
  params["com_offset_coupling"] = cfg.synthesis.com_offset_coupling;
  params["force"] = json::array();
  params["torque"] = json::array();
  for (int i = 0; i < 3; ++i) {
    params["force"].push_back(detail::axis_shape_to_json(cfg.synthesis.force[static_cast<size_t>(i)]));
    params["torque"].push_back(detail::axis_shape_to_json(cfg.synthesis.torque[static_cast<size_t>(i)]));
  }
  j["uncertainty"] = json{{"source", source},
                          {"path", cfg.uncertainty_file},
                          {"seed", cfg.uncertainty_seed},
                          {"params", params}};
  j["noise"] = json{{"relative_sigma", cfg.noise.relative_sigma},
                    {"seed", cfg.noise.rng_seed},
                    {"sensor_bandwidth", cfg.sensor_bandwidth}};
  j["force_estimate"] = cfg.force_estimate == ForceEstimateSource::plant_with_error
                            ? "plant_with_error"
                            : "momentum_observer";
  j["observer_gain"] = cfg.observer_gain;
  j["f_est_bandwidth"] = cfg.f_est_bandwidth;
  j["estimation_error_scale"] = cfg.estimation_error_scale;
  j["log_alpha"] = cfg.log_alpha;
  j["plots"] = cfg.plots;
  return j;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  json j;
  in >> j;
  return scenario_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Run series -> CSV

inline std::string planar_state_csv(const RunResult& r) {
  csv::Writer w({"t", "x", "z", "beta", "fn1", "fn2", "beta_code", "vx", "vz", "beta_dot",
                 "fn1_sens", "fn2_sens", "fn1_meas", "fn2_meas", "beta_code_meas", "phase",
                 "alpha"});
  for (const auto& row : r.planar_rows)
    w.add_row({row.t, row.state.x, row.state.z, row.state.beta, row.f_n[0], row.f_n[1],
               static_cast<double>(row.code), row.state.vx, row.state.vz, row.state.beta_dot,
               row.f_n_sensed[0], row.f_n_sensed[1], row.f_n_meas[0], row.f_n_meas[1],
               static_cast<double>(row.code_meas), static_cast<double>(row.phase), row.alpha});
  return w.to_string();
}

inline std::string planar_controller_csv(const RunResult& r) {
  csv::Writer w({"t", "e_p", "e_d", "e_f", "e_n", "fx_cmd", "fz_cmd", "tau_cmd",
                 "fx_applied", "fz_applied", "tau_applied", "sat_fx", "sat_fz", "sat_tau",
                 "gated"});
  for (const auto& row : r.planar_rows)
    w.add_row({row.t, row.e_p, row.e_d, row.e_f, row.f_n_meas[0] - row.f_n_meas[1],
               row.cmd.fx, row.cmd.fz, row.cmd.tau, row.applied.fx, row.applied.fz,
               row.applied.tau, static_cast<double>(row.saturated[0]),
               static_cast<double>(row.saturated[1]), static_cast<double>(row.saturated[2]),
               static_cast<double>(row.gated)});
  return w.to_string();
}

inline std::string spatial_state_csv(const RunResult& r) {
  csv::Writer w({"t",   "x",   "y",   "z",   "qw",       "qx",       "qy",
                 "qz",  "fn1", "fn2", "fn3", "beta_code", "vx",       "vy",
                 "vz",  "wx",  "wy",  "wz",  "fn1_sens", "fn2_sens", "fn3_sens",
                 "fn1_meas", "fn2_meas", "fn3_meas",
                 "beta_code_meas", "phase", "alpha"});
  for (const auto& row : r.spatial_rows)
    w.add_row({row.t,
               row.state.position.x,
               row.state.position.y,
               row.state.position.z,
               row.state.orientation.w,
               row.state.orientation.x,
               row.state.orientation.y,
               row.state.orientation.z,
               row.f_n[0],
               row.f_n[1],
               row.f_n[2],
               static_cast<double>(row.code),
               row.state.linear_velocity.x,
               row.state.linear_velocity.y,
               row.state.linear_velocity.z,
               row.state.angular_velocity.x,
               row.state.angular_velocity.y,
               row.state.angular_velocity.z,
               row.f_n_sensed[0],
               row.f_n_sensed[1],
               row.f_n_sensed[2],
               row.f_n_meas[0],
               row.f_n_meas[1],
               row.f_n_meas[2],
               static_cast<double>(row.code_meas),
               static_cast<double>(row.phase),
               row.alpha});
  return w.to_string();
}

inline std::string spatial_controller_csv(const RunResult& r) {
  csv::Writer w({"t",        "e_px",     "e_dx",     "e_py",      "e_dy",      "e_f",
                 "e_n1",     "e_n2",     "e_n3",     "fx_cmd",    "fy_cmd",    "fz_cmd",
                 "taux_cmd", "tauy_cmd", "tauz_cmd", "sat_fx",    "sat_fy",    "sat_fz",
                 "sat_taux", "sat_tauy", "sat_tauz", "gated"});
  for (const auto& row : r.spatial_rows)
    w.add_row({row.t, row.e_px, row.e_dx, row.e_py, row.e_dy, row.e_f, row.e_n_meas[0], row.e_n_meas[1],
               row.e_n_meas[2], row.cmd.force.x, row.cmd.force.y, row.cmd.force.z,
               row.cmd.torque.x, row.cmd.torque.y, row.cmd.torque.z,
               static_cast<double>(row.saturated[0]), static_cast<double>(row.saturated[1]),
               static_cast<double>(row.saturated[2]), static_cast<double>(row.saturated[3]),
               static_cast<double>(row.saturated[4]), static_cast<double>(row.saturated[5]),
               static_cast<double>(row.gated)});
  return w.to_string();
}

// ---------------------------------------------------------------------------
// Metrics from an emitted state CSV (consistency checks & external tooling)

inline SummaryMetrics metrics_from_state_csv(const csv::Table& table, bool spatial,
                                             bool unstable, double convergence_threshold) {
  MetricsInput mi;
  const int t = table.require_column("t");
  const int code = table.require_column("beta_code");
  const int phase = table.require_column("phase");
  const int alpha = table.require_column("alpha");
  const int fn1 = table.require_column("fn1_sens");
  const int fn2 = table.require_column("fn2_sens");
  const int fn3 = spatial ? table.require_column("fn3_sens") : -1;
  const int tn1 = table.require_column("fn1");
  const int tn2 = table.require_column("fn2");
  const int tn3 = spatial ? table.require_column("fn3") : -1;
  for (const auto& row : table.rows) {
    mi.t.push_back(row[static_cast<size_t>(t)]);
    mi.code.push_back(static_cast<int>(row[static_cast<size_t>(code)]));
    mi.phase.push_back(static_cast<int>(row[static_cast<size_t>(phase)]));
    mi.alpha.push_back(row[static_cast<size_t>(alpha)]);
    const double f1 = row[static_cast<size_t>(fn1)];
    const double f2 = row[static_cast<size_t>(fn2)];
    const double t1 = row[static_cast<size_t>(tn1)];
    const double t2 = row[static_cast<size_t>(tn2)];
    if (spatial) {
      const double f3 = row[static_cast<size_t>(fn3)];
      const auto e = plane_errors_3w(f1, f2, f3);
      mi.e_n_max_abs.push_back(
          std::max({std::abs(e[0]), std::abs(e[1]), std::abs(e[2])}));
      const double t3 = row[static_cast<size_t>(tn3)];
      const auto et = plane_errors_3w(t1, t2, t3);
      mi.e_n_true_max_abs.push_back(
          std::max({std::abs(et[0]), std::abs(et[1]), std::abs(et[2])}));
    } else {
      mi.e_n_max_abs.push_back(std::abs(f1 - f2));
      mi.e_n_true_max_abs.push_back(std::abs(t1 - t2));
    }
  }
  mi.unstable = unstable;
  mi.convergence_threshold = convergence_threshold;
  return compute_metrics(mi);
}

// ---------------------------------------------------------------------------
// Summary JSON

inline json metrics_to_json(const SummaryMetrics& m) {
  return json{{"tipover_events", m.tipover_events},
              {"tipover_events_sliding", m.tipover_events_sliding},
              {"tipover_duration", m.tipover_duration},
              {"max_abs_en_sliding", m.max_abs_en_sliding},
              {"peak_abs_en", m.peak_abs_en},
              {"peak_abs_en_initial", m.peak_abs_en_initial},
              {"first_contact_time", m.first_contact_time},
              {"recovery_time", m.recovery_time},
              {"sliding_start_time", m.sliding_start_time},
              {"convergence_time", m.convergence_time},
              {"min_alpha", m.min_alpha},
              {"unstable", m.unstable}};
}

inline json summary_to_json(const RunResult& r) {
  json j;
  j["plant"] = r.config.plant == PlantMode::planar ? "planar" : "spatial";
  j["controller"] =
      r.config.controller == ControllerMode::baseline ? "baseline" : "normal_force";
  j["push_force"] = r.config.refs.push_force;
  j["a_max"] = r.config.refs.a_max;
  j["contact_angle_deg"] = r.config.contact_angle_deg;
  j["rows"] = r.config.plant == PlantMode::planar ? r.planar_rows.size()
                                                  : r.spatial_rows.size();
  j["unstable"] = r.unstable;
  j["divergence_reason"] = r.divergence_reason;
  // Convergence threshold recorded for the three-wheel metric: 5% of the
  // commanded push magnitude, held for 0.5 s.
  j["convergence_threshold"] =
      r.config.plant == PlantMode::spatial ? 0.05 * r.config.refs.push_force : 0.0;
  j["metrics"] = metrics_to_json(r.metrics);
  return j;
}

// ---------------------------------------------------------------------------
// Minimal SVG line plots

namespace detail {

inline std::string svg_polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                                double x0, double x1, double y0, double y1, int w, int h,
                                const char* color) {
  std::string out = "<polyline fill=\"none\" stroke=\"";
  out += color;
  out += "\" stroke-width=\"1\" points=\"";
  const double xr = x1 > x0 ? x1 - x0 : 1.0;
  const double yr = y1 > y0 ? y1 - y0 : 1.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (std::isnan(ys[i])) continue;
    const double px = (xs[i] - x0) / xr * (w - 60) + 50;
    const double py = h - 30 - (ys[i] - y0) / yr * (h - 50);
    out += csv::format_double(std::round(px * 100.0) / 100.0);
    out += ',';
    out += csv::format_double(std::round(py * 100.0) / 100.0);
    out += ' ';
  }
  out += "\"/>\n";
  return out;
}

}  // namespace detail

/// Writes a simple deterministic SVG line plot of one or more series over a
/// shared time axis.
inline std::string svg_plot(const std::vector<double>& t,
                            const std::vector<std::pair<std::string, std::vector<double>>>& series,
                            const std::string& title) {
  const int w = 860, h = 320;
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();
  for (const auto& [name, ys] : series)
    for (double v : ys)
      if (!std::isnan(v)) {
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
      }
  if (!std::isfinite(y0)) {
    y0 = 0.0;
    y1 = 1.0;
  }
  if (y0 == y1) {
    y0 -= 1.0;
    y1 += 1.0;
  }
  const double x0 = t.empty() ? 0.0 : t.front();
  const double x1 = t.empty() ? 1.0 : t.back();
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(w) + "\" height=\"" + std::to_string(h) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"50\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" + title +
         "</text>\n";
  out += "<line x1=\"50\" y1=\"" + std::to_string(h - 30) + "\" x2=\"" + std::to_string(w - 10) +
         "\" y2=\"" + std::to_string(h - 30) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"50\" y1=\"20\" x2=\"50\" y2=\"" + std::to_string(h - 30) +
         "\" stroke=\"black\"/>\n";
  out += "<text x=\"8\" y=\"" + std::to_string(h - 28) +
         "\" font-family=\"sans-serif\" font-size=\"10\">" + csv::format_double(y0) +
         "</text>\n";
  out += "<text x=\"8\" y=\"30\" font-family=\"sans-serif\" font-size=\"10\">" +
         csv::format_double(y1) + "</text>\n";
  int ci = 0;
  for (const auto& [name, ys] : series) {
    const char* color = palette[ci % 4];
    out += detail::svg_polyline(t, ys, x0, x1, y0, y1, w, h, color);
    out += "<text x=\"" + std::to_string(60 + 120 * ci) +
           "\" y=\"32\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" +
           name + "</text>\n";
    ++ci;
  }
  out += "</svg>\n";
  return out;
}

// ---------------------------------------------------------------------------
// Artifact emission

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write '" + path.string() + "'");
  out << text;
}

/// Writes state.csv, controller.csv, summary.json and config.json (plus SVG
/// plots when enabled) into dir. Returns the list of files written.
inline std::vector<std::string> emit_outputs(const RunResult& r,
                                             const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  const bool planar = r.config.plant == PlantMode::planar;
  write_text_file(dir / "state.csv", planar ? planar_state_csv(r) : spatial_state_csv(r));
  files.push_back("state.csv");
  write_text_file(dir / "controller.csv",
                  planar ? planar_controller_csv(r) : spatial_controller_csv(r));
  files.push_back("controller.csv");
  write_text_file(dir / "summary.json", summary_to_json(r).dump(2) + "\n");
  files.push_back("summary.json");
  write_text_file(dir / "config.json", scenario_config_to_json(r.config).dump(2) + "\n");
  files.push_back("config.json");
  if (r.config.plots) {
    std::vector<double> t;
    std::vector<double> code;
    std::vector<double> alpha;
    std::vector<std::pair<std::string, std::vector<double>>> en_series;
    if (planar) {
      std::vector<double> en;
      for (const auto& row : r.planar_rows) {
        t.push_back(row.t);
        en.push_back(row.e_n);
        code.push_back(row.code);
        alpha.push_back(row.alpha);
      }
      en_series.emplace_back("e_n", std::move(en));
    } else {
      std::array<std::vector<double>, 3> en;
      for (const auto& row : r.spatial_rows) {
        t.push_back(row.t);
        for (int i = 0; i < 3; ++i) en[static_cast<size_t>(i)].push_back(row.e_n[static_cast<size_t>(i)]);
        code.push_back(row.code);
        alpha.push_back(row.alpha);
      }
      en_series.emplace_back("e_n1", std::move(en[0]));
      en_series.emplace_back("e_n2", std::move(en[1]));
      en_series.emplace_back("e_n3", std::move(en[2]));
    }
    write_text_file(dir / "e_n.svg", svg_plot(t, en_series, "force difference error [N]"));
    files.push_back("e_n.svg");
    write_text_file(dir / "beta_code.svg",
                    svg_plot(t, {{"beta_code", code}}, "contact condition code"));
    files.push_back("beta_code.svg");
    write_text_file(dir / "alpha.svg",
                    svg_plot(t, {{"alpha", alpha}}, "force-angle stability measure"));
    files.push_back("alpha.svg");
  }
  return files;
}

/// Emits the matrix grid: one subdirectory per cell plus a comparison table.
inline void emit_matrix(const std::vector<MatrixCell>& cells,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::Writer table({"scenario", "approach_id", "tipover_events", "tipover_events_sliding",
                     "tipover_duration", "max_abs_en_sliding", "recovery_time", "min_alpha",
                     "unstable"});
  json summary = json::array();
  for (const auto& cell : cells) {
    const std::string name = std::string(1, cell.scenario) + "_" + cell.approach;
    emit_outputs(cell.result, dir / name);
    const SummaryMetrics& m = cell.result.metrics;
    const double approach_id =
        cell.approach == "baseline" ? 0.0 : cell.approach == "enlarged" ? 1.0 : 2.0;
    table.add_row({static_cast<double>(cell.scenario - 'a'), approach_id,
                   static_cast<double>(m.tipover_events),
                   static_cast<double>(m.tipover_events_sliding), m.tipover_duration,
                   m.max_abs_en_sliding, m.recovery_time, m.min_alpha,
                   static_cast<double>(m.unstable)});
    json cell_json;
    cell_json["scenario"] = std::string(1, cell.scenario);
    cell_json["approach"] = cell.approach;
    cell_json["metrics"] = metrics_to_json(m);
    cell_json["unstable"] = cell.result.unstable;
    summary.push_back(cell_json);
  }
  write_text_file(dir / "matrix_summary.csv", table.to_string());
  write_text_file(dir / "matrix_summary.json", summary.dump(2) + "\n");
}

}  // namespace slidesim

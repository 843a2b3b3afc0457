#pragma once

// Contact classification, reference gating, the normal-force hybrid
// motion/force controller (planar and three-wheel), the baseline full-pose
// PD stand-in, and wrench saturation.
//
// Control laws (body frame, clockwise-positive planar torque):
//   f_x   = m_B xdd_d - k_p e_p - k_d e_d
//   f_z   = f_d - k_f e_f - k_I int(e_f)
//   tau_1 = k_n (f_n1 - f_n2)
// with e_p = x - x_d, e_d = xdot - xd_dot measured along the surface
// tangent, and e_f = f_est - f_d where f_est is the estimated interaction
// force the body applies to the surface along z_B (pushing is negative, so
// a 15 N push has f_d = -15). The final command is w_B = w_n + C_S v_S.
//
// Three-wheel torque: each support-polygon side is treated as a planar
// two-wheel subsystem; tau_2 = k_n1 e_n1 n1 + k_n2 e_n2 n2 + k_n3 e_n3 n3
// with e_n1 = f_n3 - f_n2, e_n2 = f_n1 - f_n3, e_n3 = f_n2 - f_n1 and the
// in-plane unit normals n_i of planes S23, S31, S12. Yaw does not affect
// tip-over and is handled by an attitude PD about z_B.

#include <array>
#include <cmath>
#include <span>

#include "slidesim/contact.hpp"
#include "slidesim/geometry.hpp"

namespace slidesim {

// ---------------------------------------------------------------------------
// Types

enum class ControllerMode { baseline, normal_force };

struct Gains {
  // Hybrid motion/force control. k_f stays well below unity so the sampled
  // force loop through the stiff contact keeps its margin; the integrator
  // carries the steady-state push.
  double k_p = 25.0;
  double k_d = 10.0;
  double k_f = 0.3;
  double k_i = 4.0;
  // Normal-force torque gain(s); k_n3 is used by the three-wheel law.
  double k_n = 0.5;
  std::array<double, 3> k_n3{0.5, 0.5, 0.5};
  // Baseline full-pose PD (also used for the approach phase).
  double baseline_kp_lin = 150.0;
  double baseline_kd_lin = 35.0;
  double baseline_kp_att = 5.0;
  double baseline_kd_att = 1.5;
  // Yaw attitude stand-in gain for the spatial normal-force mode.
  double k_att = 2.0;
  double k_att_d = 0.5;
  // Anti-windup: |k_i * integral| is clamped to this bound (N).
  double integrator_limit = 10.0;

  void validate() const {
    const double all[] = {k_p,  k_d,  k_f,  k_i,  k_n,   k_n3[0], k_n3[1],
                          k_n3[2], baseline_kp_lin, baseline_kd_lin, baseline_kp_att,
                          baseline_kd_att, k_att, k_att_d, integrator_limit};
    for (double g : all)
      if (!(g > 0.0)) throw std::invalid_argument("Gains: gains must be positive");
  }
};

struct ControlLimits {
  double force = 1e9;   // N, per component
  double torque = 5.0;  // N*m, per component

  void validate() const {
    if (force <= 0.0 || torque <= 0.0)
      throw std::invalid_argument("ControlLimits: limits must be positive");
  }
};

/// Sliding references along the surface tangent plus the push-force
/// reference and the full-pose references used in free flight.
struct PlanarReferences {
  double x_d = 0.0;
  double x_d_dot = 0.0;
  double x_d_ddot = 0.0;
  double f_d = 0.0;  // N along z_B; pushing toward the surface is negative
  double pose_x = 0.0;
  double pose_z = 0.0;
  double pose_beta = 0.0;
};

struct SpatialReferences {
  double x_d = 0.0, x_d_dot = 0.0, x_d_ddot = 0.0;
  double y_d = 0.0, y_d_dot = 0.0, y_d_ddot = 0.0;
  double f_d = 0.0;
  double yaw_d = 0.0;
  Vec3 pose_position;
  Quat pose_orientation;
};

/// Per-instance controller memory.
struct ControllerState {
  double force_integral = 0.0;  // integral of e_f
  bool gate_active = false;
  double frozen_x = 0.0;
  double frozen_y = 0.0;
  int last_code = -2;
};

// ---------------------------------------------------------------------------
// Elementary laws

/// Contact classifier; same rule the plant report uses (see contact.hpp).
using slidesim::classify_contact;

/// Zeroes the sliding references while a tip-over is in progress, freezing
/// x_d at the position where the tip-over was first seen. Free flight and
/// full-contact pass the references through (and release the freeze).
inline PlanarReferences gate_references(int beta_code, const PlanarReferences& refs,
                                        double current_x, ControllerState& cs) {
  if (code_is_tipover(beta_code)) {
    if (!cs.gate_active) {
      cs.gate_active = true;
      cs.frozen_x = current_x;
    }
    PlanarReferences gated = refs;
    gated.x_d = cs.frozen_x;
    gated.x_d_dot = 0.0;
    gated.x_d_ddot = 0.0;
    return gated;
  }
  cs.gate_active = false;
  return refs;
}

inline SpatialReferences gate_references(int beta_code, const SpatialReferences& refs,
                                         const Vec3& current_position, ControllerState& cs) {
  if (code_is_tipover(beta_code)) {
    if (!cs.gate_active) {
      cs.gate_active = true;
      cs.frozen_x = current_position.x;
      cs.frozen_y = current_position.y;
    }
    SpatialReferences gated = refs;
    gated.x_d = cs.frozen_x;
    gated.x_d_dot = 0.0;
    gated.x_d_ddot = 0.0;
    gated.y_d = cs.frozen_y;
    gated.y_d_dot = 0.0;
    gated.y_d_ddot = 0.0;
    return gated;
  }
  cs.gate_active = false;
  return refs;
}

/// The two feedback laws of the hybrid motion/force controller.
inline std::pair<double, double> motion_force_wrench(double e_p, double e_d, double e_f,
                                                     double e_f_integral, double xdd_d,
                                                     double f_d, double mass,
                                                     const Gains& g) {
  const double f_x = mass * xdd_d - g.k_p * e_p - g.k_d * e_d;
  const double f_z = f_d - g.k_f * e_f - g.k_i * e_f_integral;
  return {f_x, f_z};
}

/// tau_1 = k_n (f_n1 - f_n2), clockwise positive.
inline double normal_force_torque_planar(double f_n1, double f_n2, double k_n) {
  if (!(k_n > 0.0)) throw std::invalid_argument("normal_force_torque: k_n must be positive");
  return k_n * (f_n1 - f_n2);
}

/// Force difference errors of planes S23, S31, S12. Sums to zero identically.
inline constexpr std::array<double, 3> plane_errors_3w(double f_n1, double f_n2, double f_n3) {
  return {f_n3 - f_n2, f_n1 - f_n3, f_n2 - f_n1};
}

/// In-plane unit normals n1, n2, n3 of planes S23, S31, S12 for a
/// three-wheel layout: n_i is the positive torque direction of the side's
/// two-wheel subsystem, computed as unit(p_right - p_left) x z_B with
/// (left, right) = (2,3), (3,1), (1,2). All three are parallel to the
/// (x_B, y_B) plane.
inline std::array<Vec3, 3> plane_normals(const WheelLayout& layout) {
  if (layout.mode != WheelMode::three_wheel)
    throw std::invalid_argument("plane_normals: three-wheel layout required");
  const auto p = layout.tip_contact_points();
  const Vec3 z_b{0.0, 0.0, 1.0};
  const auto edge_normal = [&](int left, int right) {
    return cross(normalized(p[static_cast<size_t>(right)] - p[static_cast<size_t>(left)]), z_b);
  };
  return {edge_normal(1, 2), edge_normal(2, 0), edge_normal(0, 1)};
}

/// tau_2 = sum of k_ni * e_ni * n_i. The z_B component is zero by
/// construction when the normals are in-plane. Throws on non-unit normals.
inline Vec3 normal_force_torque_3w(const std::array<double, 3>& errors,
                                   const std::array<Vec3, 3>& normals,
                                   const std::array<double, 3>& gains) {
  Vec3 tau{};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(norm(normals[static_cast<size_t>(i)]) - 1.0) > 1e-9)
      throw std::invalid_argument("normal_force_torque_3w: normals must be unit vectors");
    if (!(gains[static_cast<size_t>(i)] > 0.0))
      throw std::invalid_argument("normal_force_torque_3w: gains must be positive");
    tau += normals[static_cast<size_t>(i)] *
           (gains[static_cast<size_t>(i)] * errors[static_cast<size_t>(i)]);
  }
  return tau;
}

// ---------------------------------------------------------------------------
// Baseline full-pose stand-in (PD on pose, damping on twist)

// Linear PD on the pose error and twist, emitted directly as the body
// wrench (small-attitude stand-in: no attitude-dependent force mapping, so
// the law is exactly linear and odd in the error/twist).

inline PlanarWrench baseline_fullpose_wrench(const PlanarState& s, const PlanarReferences& r,
                                             const Gains& g) {
  const double fx = -g.baseline_kp_lin * (s.x - r.pose_x) - g.baseline_kd_lin * s.vx;
  const double fz = -g.baseline_kp_lin * (s.z - r.pose_z) - g.baseline_kd_lin * s.vz;
  const double tau =
      -g.baseline_kp_att * (s.beta - r.pose_beta) - g.baseline_kd_att * s.beta_dot;
  return {fx, fz, tau};
}

inline SpatialWrench baseline_fullpose_wrench(const SpatialState& s, const SpatialReferences& r,
                                              const Gains& g) {
  const Vec3 force = (s.position - r.pose_position) * -g.baseline_kp_lin -
                     s.linear_velocity * g.baseline_kd_lin;
  const Vec3 rot_err = (r.pose_orientation.conjugate() * s.orientation).to_rotation_vector();
  const Vec3 tau = rot_err * -g.baseline_kp_att - s.angular_velocity * g.baseline_kd_att;
  return {force, tau};
}

// ---------------------------------------------------------------------------
// Saturation

inline PlanarWrench saturate(const PlanarWrench& w, const ControlLimits& lim,
                             std::array<bool, 3>* flags = nullptr) {
  lim.validate();
  const auto clamp1 = [](double v, double b, bool& flag) {
    if (v > b) {
      flag = true;
      return b;
    }
    if (v < -b) {
      flag = true;
      return -b;
    }
    flag = false;
    return v;
  };
  std::array<bool, 3> local{};
  PlanarWrench out;
  out.fx = clamp1(w.fx, lim.force, local[0]);
  out.fz = clamp1(w.fz, lim.force, local[1]);
  out.tau = clamp1(w.tau, lim.torque, local[2]);
  if (flags) *flags = local;
  return out;
}

inline SpatialWrench saturate(const SpatialWrench& w, const ControlLimits& lim,
                              std::array<bool, 6>* flags = nullptr) {
  lim.validate();
  const auto clamp1 = [](double v, double b, bool& flag) {
    flag = v > b || v < -b;
    return std::clamp(v, -b, b);
  };
  std::array<bool, 6> local{};
  SpatialWrench out;
  out.force.x = clamp1(w.force.x, lim.force, local[0]);
  out.force.y = clamp1(w.force.y, lim.force, local[1]);
  out.force.z = clamp1(w.force.z, lim.force, local[2]);
  out.torque.x = clamp1(w.torque.x, lim.torque, local[3]);
  out.torque.y = clamp1(w.torque.y, lim.torque, local[4]);
  out.torque.z = clamp1(w.torque.z, lim.torque, local[5]);
  if (flags) *flags = local;
  return out;
}

// ---------------------------------------------------------------------------
// Full control step

struct ControllerConfig {
  ControllerMode mode = ControllerMode::normal_force;
  Gains gains;
  ControlLimits limits;
  double delta_f = 0.5;    // N, contact margin fed to the classifier
  double control_dt = 1e-2;
  InertiaParams inertia;
};

struct PlanarControlInput {
  PlanarState state;
  std::array<double, 2> f_n_meas{};  // measured (noisy) normal forces
  double f_est = 0.0;  // estimated interaction force along z_B (signed)
  PlanarReferences refs;
};

struct PlanarControlOutput {
  PlanarWrench wrench;
  int beta_code = -2;  // classifier output on the measured forces
  bool gated = false;
  std::array<bool, 3> saturated{};
  double e_p = 0.0, e_d = 0.0, e_f = 0.0, e_n = 0.0, tau1 = 0.0;
};

namespace detail {

inline void update_force_integral(double e_f, const ControllerConfig& cfg, ControllerState& cs) {
  cs.force_integral += e_f * cfg.control_dt;
  const double bound = cfg.gains.integrator_limit / cfg.gains.k_i;
  cs.force_integral = std::clamp(cs.force_integral, -bound, bound);
}

}  // namespace detail

/// One control step of the planar controller. In normal_force mode the
/// composition is classify -> gate -> motion/force -> normal-force torque ->
/// Coriolis compensation -> saturate; free flight falls back to the
/// full-pose law. baseline mode applies the full-pose PD regardless of the
/// measured forces.
inline PlanarControlOutput control_step_planar(const PlanarControlInput& in,
                                               const ControllerConfig& cfg,
                                               ControllerState& cs) {
  PlanarControlOutput out;
  out.beta_code = classify_contact(in.f_n_meas, cfg.delta_f, WheelMode::two_wheel);
  cs.last_code = out.beta_code;

  if (cfg.mode == ControllerMode::baseline) {
    out.wrench = saturate(baseline_fullpose_wrench(in.state, in.refs, cfg.gains), cfg.limits,
                          &out.saturated);
    return out;
  }

  if (code_is_free_flight(out.beta_code)) {
    // Full-pose control toward the approach references. The force
    // integrator bleeds off slowly: brief contact losses keep their push
    // authority, while a long free-flight approach starts clean.
    cs.force_integral *= std::exp(-cfg.control_dt / 2.0);
    cs.gate_active = false;
    out.wrench = saturate(baseline_fullpose_wrench(in.state, in.refs, cfg.gains), cfg.limits,
                          &out.saturated);
    return out;
  }

  const PlanarReferences refs = gate_references(out.beta_code, in.refs, in.state.x, cs);
  out.gated = cs.gate_active;
  out.e_p = in.state.x - refs.x_d;
  out.e_d = in.state.vx - refs.x_d_dot;
  out.e_f = in.f_est - refs.f_d;
  detail::update_force_integral(out.e_f, cfg, cs);
  const auto [f_x, f_z] =
      motion_force_wrench(out.e_p, out.e_d, out.e_f, cs.force_integral, refs.x_d_ddot,
                          refs.f_d, cfg.inertia.mass, cfg.gains);
  out.e_n = in.f_n_meas[0] - in.f_n_meas[1];
  out.tau1 = normal_force_torque_planar(in.f_n_meas[0], in.f_n_meas[1], cfg.gains.k_n);

  // Coriolis compensation C_S v_S in body coordinates.
  const auto [vbx, vbz] = planar_work_to_body(in.state.beta, in.state.vx, in.state.vz);
  const double m = cfg.inertia.mass;
  const PlanarWrench coriolis{m * in.state.beta_dot * vbz, -m * in.state.beta_dot * vbx, 0.0};

  const PlanarWrench w_n{f_x, f_z, out.tau1};
  out.wrench = saturate(w_n + coriolis, cfg.limits, &out.saturated);
  return out;
}

struct SpatialControlInput {
  SpatialState state;
  std::array<double, 3> f_n_meas{};
  double f_est = 0.0;
  SpatialReferences refs;
};

struct SpatialControlOutput {
  SpatialWrench wrench;
  int beta_code = -2;
  bool gated = false;
  std::array<bool, 6> saturated{};
  double e_px = 0.0, e_dx = 0.0, e_py = 0.0, e_dy = 0.0, e_f = 0.0;
  std::array<double, 3> e_n{};
  Vec3 tau2;
};

/// Yaw of the body x-axis in the work frame.
inline double yaw_of(const Quat& q) {
  const Vec3 xb = q.rotate({1.0, 0.0, 0.0});
  return std::atan2(xb.y, xb.x);
}

/// Spatial control step: motion laws along x_B and y_B, force law along
/// z_B, tau_2 about x_B/y_B from the three plane errors, yaw attitude PD
/// about z_B, Coriolis/gyroscopic compensation, saturation.
inline SpatialControlOutput control_step_spatial(const SpatialControlInput& in,
                                                 const ControllerConfig& cfg,
                                                 const WheelLayout& layout,
                                                 ControllerState& cs) {
  SpatialControlOutput out;
  out.beta_code = classify_contact(in.f_n_meas, cfg.delta_f, WheelMode::three_wheel);
  cs.last_code = out.beta_code;

  if (cfg.mode == ControllerMode::baseline) {
    out.wrench = saturate(baseline_fullpose_wrench(in.state, in.refs, cfg.gains), cfg.limits,
                          &out.saturated);
    return out;
  }
  if (code_is_free_flight(out.beta_code)) {
    cs.force_integral *= std::exp(-cfg.control_dt / 2.0);
    cs.gate_active = false;
    out.wrench = saturate(baseline_fullpose_wrench(in.state, in.refs, cfg.gains), cfg.limits,
                          &out.saturated);
    return out;
  }

  const SpatialReferences refs =
      gate_references(out.beta_code, in.refs, in.state.position, cs);
  out.gated = cs.gate_active;
  out.e_px = in.state.position.x - refs.x_d;
  out.e_dx = in.state.linear_velocity.x - refs.x_d_dot;
  out.e_py = in.state.position.y - refs.y_d;
  out.e_dy = in.state.linear_velocity.y - refs.y_d_dot;
  out.e_f = in.f_est - refs.f_d;
  detail::update_force_integral(out.e_f, cfg, cs);
  const auto [f_x, f_z] = motion_force_wrench(out.e_px, out.e_dx, out.e_f, cs.force_integral,
                                              refs.x_d_ddot, refs.f_d, cfg.inertia.mass,
                                              cfg.gains);
  const double f_y = cfg.inertia.mass * refs.y_d_ddot - cfg.gains.k_p * out.e_py -
                     cfg.gains.k_d * out.e_dy;

  out.e_n = plane_errors_3w(in.f_n_meas[0], in.f_n_meas[1], in.f_n_meas[2]);
  out.tau2 = normal_force_torque_3w(out.e_n, plane_normals(layout), cfg.gains.k_n3);

  const double yaw_err = yaw_of(in.state.orientation) - refs.yaw_d;
  const double tau_yaw =
      -cfg.gains.k_att * yaw_err - cfg.gains.k_att_d * in.state.angular_velocity.z;

  // Coriolis/gyroscopic compensation C_S v_S.
  const Vec3 v_body = in.state.orientation.rotate_back(in.state.linear_velocity);
  const Vec3 coriolis_f = cross(in.state.angular_velocity, v_body) * cfg.inertia.mass;
  const Vec3 coriolis_tau = cross(in.state.angular_velocity,
                                  cfg.inertia.spatial_inertia * in.state.angular_velocity);

  SpatialWrench w_n{{f_x, f_y, f_z}, {out.tau2.x, out.tau2.y, tau_yaw}};
  out.wrench = saturate(w_n + SpatialWrench{coriolis_f, coriolis_tau}, cfg.limits,
                        &out.saturated);
  return out;
}

}  // namespace slidesim

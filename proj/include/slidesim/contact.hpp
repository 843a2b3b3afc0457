#pragma once

// Fixed-step rigid-body plants with penalty (spring-damper) wheel contact.
//
// Contact model per wheel: the contact sphere of radius wheel_radius around
// the wheel center touches the plane when the sphere's deepest point crosses
// it. Penetration depth d = max(0, -gap) produces a unilateral normal force
//   f_n = max(0, k_c d + c_c d_dot),
// plus a viscous tangential rolling-resistance force -mu_roll * v_t on the
// contact point. Gravity is disabled by default (the platform's low-level
// loop compensates it); a config flag enables it for sensitivity studies.
//
// Integration: semi-implicit Euler at physics_dt (velocities first, then
// poses). The spatial gyroscopic term uses a midpoint evaluation, which keeps
// free-tumbling energy drift well below 0.1% over 10 s at 1 ms steps.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "slidesim/geometry.hpp"

namespace slidesim {

// ---------------------------------------------------------------------------
// Configuration types

/// Flat work surface. The normal points from the surface toward the vehicle.
struct SurfaceModel {
  Vec3 point_on_plane{0.0, 0.0, 0.0};
  Vec3 normal{0.0, 0.0, 1.0};
  double contact_angle_offset = 0.0;  // rad; initial tip misalignment used by scenarios

  void validate() const {
    if (std::abs(norm(normal) - 1.0) > 1e-9)
      throw std::invalid_argument("SurfaceModel: normal must be unit length");
  }
};

struct ContactParams {
  // Penalty-contact defaults: steady penetration stays under 1 mm at a 15 N
  // push, and the damper keeps the 100 Hz normal-force torque loop free of
  // sampling-rate limit cycles (the damper force difference acts as rate
  // feedback through the wheel sensors).
  double stiffness = 8.0e3;        // N/m
  double damping = 1000.0;         // N*s/m
  double rolling_resistance = 0.5; // N*s/m per wheel, viscous tangential
  // Load-proportional (regularized Coulomb) tangential friction. Small
  // enough to keep passive sliding nearly free, but it dissipates pivot
  // energy in proportion to impact loads, which is what lets saturated
  // recovery rotations settle instead of slamming wheel to wheel.
  double coulomb_mu = 0.07;
  double slip_reg_velocity = 0.05; // m/s; below this the friction is viscous
  double contact_margin = 0.5;     // N; delta_F of the stability criterion

  void validate() const {
    if (stiffness <= 0.0 || damping < 0.0 || rolling_resistance < 0.0 ||
        coulomb_mu < 0.0 || slip_reg_velocity <= 0.0 || contact_margin <= 0.0)
      throw std::invalid_argument("ContactParams: invalid parameter signs");
  }
};

/// Per-wheel contact outcome plus the resultant wrench on the body.
/// f_n carries the full (spring + damper) normal force the plant applies;
/// f_n_sensed carries the elastic component only, which is what the wheel
/// pressure pads read (pad compression) and what the controller sees after
/// noise corruption.
struct ContactReport {
  std::vector<double> f_n;            // N, one per wheel, always >= 0
  std::vector<double> f_n_sensed;     // N, elastic component per wheel
  int beta_code = -2;                 // contact-conditions code from true forces
  SpatialWrench body_wrench;          // body-frame resultant about the CoM
  std::vector<Vec3> wheel_force_work; // work-frame force on the body per wheel
  std::vector<Vec3> contact_points;   // work-frame contact points used
};

struct SimConfig {
  double physics_dt = 1e-3;  // s
  double control_dt = 1e-2;  // s; must be an integer multiple of physics_dt
  double duration = 8.0;     // s
  InertiaParams inertia;
  WheelLayout layout = WheelLayout::two_wheel();
  SurfaceModel surface;
  ContactParams contact;
  std::uint64_t rng_seed = 1;
  bool gravity_enabled = false;
  double gravity = 9.81;  // m/s^2, along -z work frame when enabled

  int control_substeps() const {
    const double ratio = control_dt / physics_dt;
    const int n = static_cast<int>(ratio + 0.5);
    if (n < 1 || std::abs(ratio - n) > 1e-9)
      throw std::invalid_argument("SimConfig: control_dt must be an integer multiple of physics_dt");
    return n;
  }

  void validate() const {
    if (physics_dt <= 0.0 || duration <= 0.0)
      throw std::invalid_argument("SimConfig: dt and duration must be positive");
    (void)control_substeps();
    inertia.validate();
    surface.validate();
    contact.validate();
  }
};

/// Raised when the divergence guard trips (non-finite state or derivatives).
class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Contact classification (shared rule; the controllers module re-exports it)

/// Discrete contact code from per-wheel normal forces and the margin delta_F.
/// Planar: -2 free flight, -1 only wheel 1, +1 only wheel 2, 0 full-contact.
/// Three-wheel: 0 full-contact, -2 free flight, otherwise the positive
/// bitmask of wheels in contact (bit i-1 set when wheel i holds >= delta_F).
inline int classify_contact(std::span<const double> f_n, double delta_f, WheelMode mode) {
  for (double f : f_n)
    if (f < 0.0) throw std::invalid_argument("classify_contact: negative normal force");
  if (mode == WheelMode::two_wheel) {
    if (f_n.size() != 2) throw std::invalid_argument("classify_contact: expected two wheels");
    const bool c1 = f_n[0] >= delta_f;
    const bool c2 = f_n[1] >= delta_f;
    if (c1 && c2) return 0;
    if (c1) return -1;
    if (c2) return +1;
    return -2;
  }
  if (f_n.size() != 3) throw std::invalid_argument("classify_contact: expected three wheels");
  int mask = 0;
  for (size_t i = 0; i < 3; ++i)
    if (f_n[i] >= delta_f) mask |= 1 << i;
  if (mask == 0b111) return 0;
  if (mask == 0) return -2;
  return mask;  // tip-over: 1..6 identifies the wheels still in contact
}

inline bool code_is_full_contact(int code) { return code == 0; }
inline bool code_is_free_flight(int code) { return code == -2; }
inline bool code_is_tipover(int code) { return code != 0 && code != -2; }

// ---------------------------------------------------------------------------
// Contact forces

namespace detail {

struct WheelKinematics {
  Vec3 contact_point;  // work frame
  Vec3 velocity;       // work frame velocity of the contact point
};

inline ContactReport contact_from_kinematics(std::span<const WheelKinematics> wheels,
                                             const SurfaceModel& surface,
                                             const ContactParams& params, WheelMode mode) {
  ContactReport report;
  report.f_n.reserve(wheels.size());
  report.wheel_force_work.reserve(wheels.size());
  report.contact_points.reserve(wheels.size());
  const Vec3& n = surface.normal;
  for (const auto& w : wheels) {
    const double gap = dot(w.contact_point - surface.point_on_plane, n);
    double f_n = 0.0;
    double f_sensed = 0.0;
    Vec3 force{};
    if (gap < 0.0) {
      const double depth = -gap;
      const double depth_rate = -dot(w.velocity, n);
      f_n = std::max(0.0, params.stiffness * depth + params.damping * depth_rate);
      f_sensed = params.stiffness * depth;
      const Vec3 v_t = reject_from(w.velocity, n);
      const double slip = norm(v_t);
      const double coulomb = params.coulomb_mu * f_n / (slip + params.slip_reg_velocity);
      force = n * f_n - v_t * (params.rolling_resistance + coulomb);
    }
    report.f_n.push_back(f_n);
    report.f_n_sensed.push_back(f_sensed);
    report.wheel_force_work.push_back(force);
    report.contact_points.push_back(w.contact_point);
  }
  report.beta_code = classify_contact(report.f_n, params.contact_margin, mode);
  return report;
}

}  // namespace detail

/// Contact forces for the spatial plant. The contact point of each wheel is
/// the deepest point of its contact sphere along the surface normal.
inline ContactReport contact_forces(const SpatialState& state, const WheelLayout& layout,
                                    const SurfaceModel& surface, const ContactParams& params) {
  std::vector<detail::WheelKinematics> wheels;
  wheels.reserve(layout.wheel_positions.size());
  const Vec3 omega_work = state.orientation.rotate(state.angular_velocity);
  for (const Vec3& center_body : layout.wheel_positions) {
    const Vec3 center_work = state.orientation.rotate(center_body) + state.position;
    const Vec3 cp = center_work - surface.normal * layout.wheel_radius;
    const Vec3 v = state.linear_velocity + cross(omega_work, cp - state.position);
    wheels.push_back({cp, v});
  }
  ContactReport report =
      detail::contact_from_kinematics(wheels, surface, params, layout.mode);
  Vec3 f_work{}, tau_work{};
  for (size_t i = 0; i < wheels.size(); ++i) {
    f_work += report.wheel_force_work[i];
    tau_work += cross(wheels[i].contact_point - state.position, report.wheel_force_work[i]);
  }
  report.body_wrench.force = state.orientation.rotate_back(f_work);
  report.body_wrench.torque = state.orientation.rotate_back(tau_work);
  return report;
}

/// Contact forces for the planar plant (the y = 0 slice of the spatial
/// model). The body wrench torque is reported about +y, i.e. clockwise
/// positive, in torque.y; force.x/force.z are the body-frame components.
inline ContactReport contact_forces(const PlanarState& state, const WheelLayout& layout,
                                    const SurfaceModel& surface, const ContactParams& params) {
  std::vector<detail::WheelKinematics> wheels;
  wheels.reserve(layout.wheel_positions.size());
  for (const Vec3& center_body : layout.wheel_positions) {
    const auto [cx, cz] = planar_body_to_work(state.beta, center_body.x, center_body.z);
    const Vec3 center_work{state.x + cx, 0.0, state.z + cz};
    const Vec3 cp = center_work - surface.normal * layout.wheel_radius;
    // omega = beta_dot about +y  =>  v = v_com + omega x r
    const Vec3 r = cp - Vec3{state.x, 0.0, state.z};
    const Vec3 v = Vec3{state.vx, 0.0, state.vz} + cross(Vec3{0.0, state.beta_dot, 0.0}, r);
    wheels.push_back({cp, v});
  }
  ContactReport report =
      detail::contact_from_kinematics(wheels, surface, params, layout.mode);
  Vec3 f_work{}, tau_work{};
  for (size_t i = 0; i < wheels.size(); ++i) {
    f_work += report.wheel_force_work[i];
    tau_work += cross(wheels[i].contact_point - Vec3{state.x, 0.0, state.z},
                      report.wheel_force_work[i]);
  }
  const auto [fbx, fbz] = planar_work_to_body(state.beta, f_work.x, f_work.z);
  report.body_wrench.force = {fbx, 0.0, fbz};
  report.body_wrench.torque = {0.0, tau_work.y, 0.0};
  return report;
}

// ---------------------------------------------------------------------------
// Plant stepping

namespace detail {

inline void guard_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw divergence_error(std::string("simulation diverged: ") + what);
}

inline void guard_finite(const Vec3& v, const char* what) {
  if (!is_finite(v)) throw divergence_error(std::string("simulation diverged: ") + what);
}

}  // namespace detail

struct PlanarStepResult {
  PlanarState state;
  ContactReport contact;
};

/// One semi-implicit Euler step of the planar plant under a held body wrench.
/// The returned contact report is the one evaluated at the pre-step state
/// (the forces that produced this step).
inline PlanarStepResult step_planar(const PlanarState& state, const PlanarWrench& w_applied,
                                    const SimConfig& cfg) {
  ContactReport contact = contact_forces(state, cfg.layout, cfg.surface, cfg.contact);
  const double m = cfg.inertia.mass;
  const double inertia = cfg.inertia.planar_inertia;
  // Applied body force to work frame.
  const auto [fwx, fwz] = planar_body_to_work(state.beta, w_applied.fx, w_applied.fz);
  const auto [cwx, cwz] =
      planar_body_to_work(state.beta, contact.body_wrench.force.x, contact.body_wrench.force.z);
  double ax = (fwx + cwx) / m;
  double az = (fwz + cwz) / m;
  if (cfg.gravity_enabled) az -= cfg.gravity;
  const double beta_ddot = (w_applied.tau + contact.body_wrench.torque.y) / inertia;
  detail::guard_finite(ax, "planar linear acceleration");
  detail::guard_finite(az, "planar linear acceleration");
  detail::guard_finite(beta_ddot, "planar angular acceleration");

  PlanarState next = state;
  const double dt = cfg.physics_dt;
  next.vx += dt * ax;
  next.vz += dt * az;
  next.beta_dot += dt * beta_ddot;
  next.x += dt * next.vx;
  next.z += dt * next.vz;
  next.beta += dt * next.beta_dot;
  return {next, std::move(contact)};
}

struct SpatialStepResult {
  SpatialState state;
  ContactReport contact;
};

/// One semi-implicit Euler step of the spatial plant. Linear dynamics are
/// integrated in the work frame; angular dynamics in the body frame with a
/// midpoint evaluation of the gyroscopic term. The quaternion is advanced by
/// the exponential map and renormalized.
inline SpatialStepResult step_spatial(const SpatialState& state, const SpatialWrench& w_applied,
                                      const SimConfig& cfg) {
  ContactReport contact = contact_forces(state, cfg.layout, cfg.surface, cfg.contact);
  const double m = cfg.inertia.mass;
  const Mat3& J = cfg.inertia.spatial_inertia;

  Vec3 f_work = state.orientation.rotate(w_applied.force + contact.body_wrench.force);
  if (cfg.gravity_enabled) f_work.z -= m * cfg.gravity;
  const Vec3 accel = f_work / m;

  const Vec3 tau_body = w_applied.torque + contact.body_wrench.torque;
  const auto omega_dot = [&](const Vec3& omega) {
    return solve_spd(J, tau_body - cross(omega, J * omega));
  };
  const double dt = cfg.physics_dt;
  const Vec3 omega_mid = state.angular_velocity + omega_dot(state.angular_velocity) * (0.5 * dt);
  const Vec3 alpha = omega_dot(omega_mid);
  detail::guard_finite(accel, "spatial linear acceleration");
  detail::guard_finite(alpha, "spatial angular acceleration");

  SpatialState next = state;
  next.linear_velocity += accel * dt;
  next.angular_velocity += alpha * dt;
  next.position += next.linear_velocity * dt;
  next.orientation = state.orientation.integrated(next.angular_velocity, dt);
  return {next, std::move(contact)};
}

// ---------------------------------------------------------------------------
// Momentum-based external wrench observer
//
// First-order residual observer on linear (work-frame) and angular
// (body-frame) momentum:
//   r(t) = K_I * ( p(t) - p(0) - integral of (w_applied + w_gyro + r) dt ).
// For a constant external wrench the estimate converges with time constant
// 1/K_I. Estimates are reported in the body frame.

class MomentumObserverSpatial {
 public:
  MomentumObserverSpatial(const InertiaParams& inertia, double gain, const SpatialState& initial)
      : inertia_(inertia), gain_(gain), prev_(initial) {
    if (gain <= 0.0) throw std::invalid_argument("MomentumObserver: gain must be positive");
    p0_lin_ = initial.linear_velocity * inertia_.mass;
    p0_ang_ = inertia_.spatial_inertia * initial.angular_velocity;
  }

  /// Advances the observer by dt given the state reached and the applied
  /// wrench held over the interval. The wrench is integrated with the
  /// pre-step orientation and angular velocity, consistent with a
  /// semi-implicit plant.
  void update(const SpatialState& state, const SpatialWrench& w_applied, double dt) {
    const Vec3 f_applied_work = prev_.orientation.rotate(w_applied.force);
    integral_lin_ += (f_applied_work + residual_lin_work_) * dt;
    const Vec3 p_lin = state.linear_velocity * inertia_.mass;
    residual_lin_work_ = (p_lin - p0_lin_ - integral_lin_) * gain_;

    const Vec3 gyro = cross(prev_.angular_velocity,
                            inertia_.spatial_inertia * prev_.angular_velocity);
    integral_ang_ += (w_applied.torque - gyro + residual_ang_) * dt;
    const Vec3 p_ang = inertia_.spatial_inertia * state.angular_velocity;
    residual_ang_ = (p_ang - p0_ang_ - integral_ang_) * gain_;
    prev_ = state;
  }

  /// Current external wrench estimate in the body frame.
  SpatialWrench estimate() const {
    return {prev_.orientation.rotate_back(residual_lin_work_), residual_ang_};
  }

 private:
  InertiaParams inertia_;
  double gain_;
  SpatialState prev_;
  Vec3 p0_lin_, p0_ang_;
  Vec3 integral_lin_, integral_ang_;
  Vec3 residual_lin_work_, residual_ang_;
};

/// Planar counterpart; estimates (f_x, f_z, tau) in the body frame.
class MomentumObserverPlanar {
 public:
  MomentumObserverPlanar(const InertiaParams& inertia, double gain, const PlanarState& initial)
      : inertia_(inertia), gain_(gain), prev_beta_(initial.beta) {
    if (gain <= 0.0) throw std::invalid_argument("MomentumObserver: gain must be positive");
    p0_ = {inertia_.mass * initial.vx, inertia_.mass * initial.vz,
           inertia_.planar_inertia * initial.beta_dot};
  }

  void update(const PlanarState& state, const PlanarWrench& w_applied, double dt) {
    const auto [fwx, fwz] = planar_body_to_work(prev_beta_, w_applied.fx, w_applied.fz);
    integral_[0] += (fwx + residual_[0]) * dt;
    integral_[1] += (fwz + residual_[1]) * dt;
    integral_[2] += (w_applied.tau + residual_[2]) * dt;
    const std::array<double, 3> p{inertia_.mass * state.vx, inertia_.mass * state.vz,
                                  inertia_.planar_inertia * state.beta_dot};
    for (int i = 0; i < 3; ++i) residual_[i] = gain_ * (p[i] - p0_[i] - integral_[i]);
    prev_beta_ = state.beta;
  }

  PlanarWrench estimate() const {
    const auto [fbx, fbz] = planar_work_to_body(prev_beta_, residual_[0], residual_[1]);
    return {fbx, fbz, residual_[2]};
  }

 private:
  InertiaParams inertia_;
  double gain_;
  double prev_beta_ = 0.0;
  std::array<double, 3> p0_{};
  std::array<double, 3> integral_{};
  std::array<double, 3> residual_{};
};

}  // namespace slidesim

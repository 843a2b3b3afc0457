#pragma once

// Core geometric types and frame conventions shared by the whole library.
//
// Conventions (fixed repo-wide):
//  - Work frame: x tangent to the surface (slide direction), z up. The flat
//    work surface is the plane z = 0 with unit normal +z unless configured
//    otherwise.
//  - Body frame: attached to the CoM. At identity orientation the body axes
//    coincide with the work axes. The end-effector tip plane sits at
//    z = -h in the body frame, so pushing against the surface acts along
//    -z_B and approach motion is along -z_B.
//  - Planar angles (beta) and planar torques are positive clockwise in the
//    (x, z) plane, which equals a right-handed rotation about +y.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace slidesim {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// Vec3

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3& o) const = default;
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline constexpr double norm_sq(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm_sq(v)); }

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Unit vector of v. Throws std::domain_error for the zero vector, where the
/// operator is undefined.
inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (n == 0.0) throw std::domain_error("normalized: zero vector has no direction");
  return v / n;
}

/// Component of v along the unit direction u.
inline constexpr Vec3 project_onto(const Vec3& v, const Vec3& u) { return u * dot(v, u); }

/// Component of v perpendicular to the unit direction u.
inline constexpr Vec3 reject_from(const Vec3& v, const Vec3& u) {
  return v - project_onto(v, u);
}

// ---------------------------------------------------------------------------
// Mat3 — the handful of 3x3 operations the formulas need.

struct Mat3 {
  // Row-major.
  std::array<std::array<double, 3>, 3> a{};

  static constexpr Mat3 identity() {
    Mat3 m;
    m.a = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    return m;
  }

  static constexpr Mat3 diagonal(double d0, double d1, double d2) {
    Mat3 m;
    m.a = {{{d0, 0, 0}, {0, d1, 0}, {0, 0, d2}}};
    return m;
  }

  constexpr Vec3 operator*(const Vec3& v) const {
    return {a[0][0] * v.x + a[0][1] * v.y + a[0][2] * v.z,
            a[1][0] * v.x + a[1][1] * v.y + a[1][2] * v.z,
            a[2][0] * v.x + a[2][1] * v.y + a[2][2] * v.z};
  }

  constexpr Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += a[i][k] * o.a[k][j];
        r.a[i][j] = s;
      }
    return r;
  }

  constexpr Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.a[i][j] = a[j][i];
    return r;
  }
};

/// Solves M x = b for a symmetric positive definite M (used for inertia).
inline Vec3 solve_spd(const Mat3& m, const Vec3& b) {
  // Plain Gaussian elimination on a 3x3; no pivoting needed for SPD inputs.
  double A[3][4] = {{m.a[0][0], m.a[0][1], m.a[0][2], b.x},
                    {m.a[1][0], m.a[1][1], m.a[1][2], b.y},
                    {m.a[2][0], m.a[2][1], m.a[2][2], b.z}};
  for (int c = 0; c < 3; ++c) {
    const double p = A[c][c];
    for (int r = c + 1; r < 3; ++r) {
      const double f = A[r][c] / p;
      for (int k = c; k < 4; ++k) A[r][k] -= f * A[c][k];
    }
  }
  Vec3 x;
  x.z = A[2][3] / A[2][2];
  x.y = (A[1][3] - A[1][2] * x.z) / A[1][1];
  x.x = (A[0][3] - A[0][1] * x.y - A[0][2] * x.z) / A[0][0];
  return x;
}

// ---------------------------------------------------------------------------
// Quaternion (unit, body-to-work rotation)

struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static Quat from_axis_angle(const Vec3& axis, double angle) {
    const Vec3 u = slidesim::normalized(axis);
    const double h = 0.5 * angle;
    const double s = std::sin(h);
    return {std::cos(h), u.x * s, u.y * s, u.z * s};
  }

  /// Exponential map of a rotation vector (axis * angle).
  static Quat from_rotation_vector(const Vec3& r) {
    const double angle = slidesim::norm(r);
    if (angle < 1e-12) {
      // Second-order small-angle expansion keeps the result unit to 1e-24.
      return Quat{1.0 - 0.125 * angle * angle, 0.5 * r.x, 0.5 * r.y, 0.5 * r.z}.normalized();
    }
    return from_axis_angle(r, angle);
  }

  constexpr Quat conjugate() const { return {w, -x, -y, -z}; }

  constexpr Quat operator*(const Quat& q) const {
    return {w * q.w - x * q.x - y * q.y - z * q.z, w * q.x + x * q.w + y * q.z - z * q.y,
            w * q.y - x * q.z + y * q.w + z * q.x, w * q.z + x * q.y - y * q.x + z * q.w};
  }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quat normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }

  /// Rotates a body-frame vector into the work frame.
  constexpr Vec3 rotate(const Vec3& v) const {
    // v' = v + 2 q_v x (q_v x v + w v)
    const Vec3 qv{x, y, z};
    const Vec3 t = cross(qv, Vec3{qv.y * v.z - qv.z * v.y + w * v.x,
                                  qv.z * v.x - qv.x * v.z + w * v.y,
                                  qv.x * v.y - qv.y * v.x + w * v.z});
    return {v.x + 2.0 * t.x, v.y + 2.0 * t.y, v.z + 2.0 * t.z};
  }

  /// Rotates a work-frame vector into the body frame.
  constexpr Vec3 rotate_back(const Vec3& v) const { return conjugate().rotate(v); }

  Mat3 to_matrix() const {
    Mat3 m;
    m.a = {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
            {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
            {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
    return m;
  }

  /// Rotation vector of this quaternion (inverse of from_rotation_vector).
  Vec3 to_rotation_vector() const {
    Quat q = *this;
    if (q.w < 0.0) q = {-q.w, -q.x, -q.y, -q.z};
    const double vn = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
    if (vn < 1e-12) return {2.0 * q.x, 2.0 * q.y, 2.0 * q.z};
    const double angle = 2.0 * std::atan2(vn, q.w);
    return Vec3{q.x, q.y, q.z} * (angle / vn);
  }

  /// One step of body-frame angular velocity integration via the exponential
  /// map, renormalized. Keeps orthonormality within 1e-9 over long runs.
  Quat integrated(const Vec3& omega_body, double dt) const {
    return ((*this) * from_rotation_vector(omega_body * dt)).normalized();
  }
};

// ---------------------------------------------------------------------------
// Wrenches and states

/// Planar actuation/contact wrench in the body frame. tau is positive
/// clockwise in the (x_B, z_B) plane.
struct PlanarWrench {
  double fx = 0.0;   // N, along x_B
  double fz = 0.0;   // N, along z_B
  double tau = 0.0;  // N*m, clockwise positive

  constexpr PlanarWrench operator+(const PlanarWrench& o) const {
    return {fx + o.fx, fz + o.fz, tau + o.tau};
  }
  constexpr PlanarWrench operator-(const PlanarWrench& o) const {
    return {fx - o.fx, fz - o.fz, tau - o.tau};
  }
};

/// Spatial wrench in the body frame.
struct SpatialWrench {
  Vec3 force;   // N
  Vec3 torque;  // N*m

  constexpr SpatialWrench operator+(const SpatialWrench& o) const {
    return {force + o.force, torque + o.torque};
  }
  constexpr SpatialWrench operator-(const SpatialWrench& o) const {
    return {force - o.force, torque - o.torque};
  }
};

/// Planar rigid-body state. beta is stored continuously (no wrapping) and is
/// positive clockwise; x runs along the surface tangent and z is the CoM
/// height above the surface.
struct PlanarState {
  double x = 0.0;
  double z = 0.0;
  double beta = 0.0;
  double vx = 0.0;
  double vz = 0.0;
  double beta_dot = 0.0;
};

/// Body-to-work planar rotation of a (x, z) pair for clockwise-positive beta.
inline std::array<double, 2> planar_body_to_work(double beta, double bx, double bz) {
  const double c = std::cos(beta), s = std::sin(beta);
  return {c * bx + s * bz, -s * bx + c * bz};
}

inline std::array<double, 2> planar_work_to_body(double beta, double wx, double wz) {
  const double c = std::cos(beta), s = std::sin(beta);
  return {c * wx - s * wz, s * wx + c * wz};
}

/// Spatial rigid-body state. Linear velocity is in the work frame; angular
/// velocity is in the body frame.
struct SpatialState {
  Vec3 position;
  Quat orientation;  // body w.r.t. work frame
  Vec3 linear_velocity;
  Vec3 angular_velocity;  // body frame
};

// ---------------------------------------------------------------------------
// Wheel layout

enum class WheelMode { two_wheel, three_wheel };

/// Contact-point geometry of the end-effector tip.
///
/// wheel_positions holds the wheel centers in the body frame. All wheels
/// share the z-component -h + wheel_radius, so the nominal contact points
/// (wheel center minus the radius along z_B) lie exactly on the tip plane
/// z = -h. Three-wheel numbering follows the right-hand rule about the
/// interaction direction (the -z_B axis pointing at the surface), so the
/// candidate-angle sign convention reports +1 for resultants inside the
/// support pattern. The two-wheel layout puts wheel 1 at -r_d and wheel 2
/// at +r_d along x_B, which matches beta > 0 pressing wheel 2.
struct WheelLayout {
  WheelMode mode = WheelMode::two_wheel;
  double r_d = 0.084;         // m; circumradius (three-wheel) or half-spacing (two-wheel)
  double h = 0.3;             // m; CoM-to-tip offset along z_B
  double wheel_radius = 0.015;  // m
  std::vector<Vec3> wheel_positions;

  static WheelLayout two_wheel(double r_w = 0.084, double h = 0.3, double wheel_radius = 0.015) {
    validate(r_w, h);
    WheelLayout l;
    l.mode = WheelMode::two_wheel;
    l.r_d = r_w;
    l.h = h;
    l.wheel_radius = wheel_radius;
    const double zc = -h + wheel_radius;
    l.wheel_positions = {{-r_w, 0.0, zc}, {r_w, 0.0, zc}};
    return l;
  }

  /// phase is the in-plane angle of wheel 1; wheels 2 and 3 follow at +120
  /// and +240 degrees.
  static WheelLayout three_wheel(double r_d = 0.084, double h = 0.3,
                                 double wheel_radius = 0.015, double phase = kPi / 2.0) {
    validate(r_d, h);
    WheelLayout l;
    l.mode = WheelMode::three_wheel;
    l.r_d = r_d;
    l.h = h;
    l.wheel_radius = wheel_radius;
    const double zc = -h + wheel_radius;
    for (int i = 0; i < 3; ++i) {
      const double a = phase - 2.0 * kPi * i / 3.0;
      l.wheel_positions.push_back({r_d * std::cos(a), r_d * std::sin(a), zc});
    }
    return l;
  }

  int wheel_count() const { return static_cast<int>(wheel_positions.size()); }

  /// Nominal contact points on the tip plane (body frame, z = -h). These are
  /// the p_i the stability geometry is built from.
  std::vector<Vec3> tip_contact_points() const {
    std::vector<Vec3> pts;
    pts.reserve(wheel_positions.size());
    for (const Vec3& c : wheel_positions) pts.push_back({c.x, c.y, c.z - wheel_radius});
    return pts;
  }

  /// Copy with r_d and h scaled; wheel_radius is kept.
  WheelLayout scaled(double r_scale, double h_scale) const {
    if (r_scale <= 0.0 || h_scale <= 0.0)
      throw std::invalid_argument("WheelLayout::scaled: scale factors must be positive");
    if (mode == WheelMode::two_wheel) return two_wheel(r_d * r_scale, h * h_scale, wheel_radius);
    // Recover the phase of wheel 1 so scaling preserves orientation.
    const double phase = std::atan2(wheel_positions[0].y, wheel_positions[0].x);
    return three_wheel(r_d * r_scale, h * h_scale, wheel_radius, phase);
  }

 private:
  static void validate(double r, double h) {
    if (r <= 0.0 || h <= 0.0)
      throw std::invalid_argument("WheelLayout: r_d and h must be positive");
  }
};

/// Mass and rotational inertia. The planar model uses the scalar inertia;
/// the spatial model uses the 3x3 body-frame tensor. Defaults are library
/// choices (the platform's mass properties are configuration, not constants).
struct InertiaParams {
  double mass = 4.0;                                        // kg
  double planar_inertia = 0.1;                              // kg*m^2
  Mat3 spatial_inertia = Mat3::diagonal(0.1, 0.1, 0.15);    // kg*m^2

  void validate() const {
    if (mass <= 0.0) throw std::invalid_argument("InertiaParams: mass must be positive");
    if (planar_inertia <= 0.0)
      throw std::invalid_argument("InertiaParams: planar inertia must be positive");
  }
};

// ---------------------------------------------------------------------------
// Operations

/// Torque at the CoM given a force/torque measurement at a sensor mounted at
/// -p_ft from the CoM: tau_com = tau_meas + F_meas x p_ft, where p_ft is the
/// vector from the sensor mounting point to the CoM in the body frame.
inline Vec3 ft_to_com_torque(const Vec3& f_meas, const Vec3& tau_meas, const Vec3& p_ft) {
  return tau_meas + cross(f_meas, p_ft);
}

/// Default FT-sensor mounting offset along z_B (meters).
inline constexpr double kDefaultFtOffset = 0.12;
inline constexpr Vec3 default_ft_to_com_vector() { return {0.0, 0.0, -kDefaultFtOffset}; }

/// Work-frame positions of the wheel contact points (the tip-plane points
/// rigidly attached to the body), in wheel order. Commutes exactly with rigid
/// transforms of the state.
inline std::vector<Vec3> wheel_contact_points(const WheelLayout& layout,
                                              const SpatialState& state) {
  std::vector<Vec3> out;
  out.reserve(layout.wheel_positions.size());
  for (const Vec3& p : layout.tip_contact_points())
    out.push_back(state.orientation.rotate(p) + state.position);
  return out;
}

inline std::vector<Vec3> wheel_contact_points(const WheelLayout& layout,
                                              const PlanarState& state) {
  std::vector<Vec3> out;
  out.reserve(layout.wheel_positions.size());
  for (const Vec3& p : layout.tip_contact_points()) {
    const auto [wx, wz] = planar_body_to_work(state.beta, p.x, p.z);
    out.push_back({state.x + wx, p.y, state.z + wz});
  }
  return out;
}

}  // namespace slidesim

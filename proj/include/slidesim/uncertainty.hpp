#pragma once

// Identification, synthesis, resampling, and injection of systematic
// force/torque uncertainties plus wheel-sensor noise.
//
// All stochastic values are pure functions of (seed, stream, index), so any
// scenario re-run with the same seed reproduces every sample exactly.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "slidesim/geometry.hpp"

namespace slidesim {

// ---------------------------------------------------------------------------
// Deterministic random primitives

namespace rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ (0x6a09e667f3bcc909ULL + stream)) ^ index);
}

/// Uniform in [0, 1) from 64 bits.
inline constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Standard normal draw, a pure function of (seed, stream, index).
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = to_unit(mix(seed, stream, 2 * index));
  const double u2 = to_unit(mix(seed, stream, 2 * index + 1));
  // Box-Muller; 1-u1 keeps the log argument strictly positive.
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace rng

// ---------------------------------------------------------------------------
// Types

enum class TraceProvenance { measured, synthetic };

struct UncertaintySample {
  Vec3 force;   // N
  Vec3 torque;  // N*m
};

/// Time series of systematic force/torque uncertainties at the CoM.
struct UncertaintyTrace {
  std::vector<double> time;
  std::vector<Vec3> force;
  std::vector<Vec3> torque;
  TraceProvenance provenance = TraceProvenance::synthetic;

  size_t size() const { return time.size(); }
  bool empty() const { return time.empty(); }

  UncertaintySample at(size_t i) const { return {force.at(i), torque.at(i)}; }

  /// Zero-order-hold lookup: the sample at the largest time <= t; queries
  /// before the start return the first sample, past the end the last.
  UncertaintySample sample_at(double t) const {
    if (empty()) throw std::runtime_error("UncertaintyTrace: empty trace");
    size_t lo = 0, hi = time.size();
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (time[mid] <= t)
        lo = mid;
      else
        hi = mid;
    }
    return at(lo);
  }

  void validate() const {
    if (force.size() != time.size() || torque.size() != time.size())
      throw std::invalid_argument("UncertaintyTrace: series lengths differ");
    for (size_t i = 1; i < time.size(); ++i)
      if (!(time[i] > time[i - 1]))
        throw std::invalid_argument("UncertaintyTrace: timestamps must be strictly increasing");
  }
};

/// Multiplicative Gaussian wheel-sensor noise: f -> max(0, f (1 + sigma xi)).
struct NoiseModel {
  double relative_sigma = 0.10;
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (relative_sigma < 0.0)
      throw std::invalid_argument("NoiseModel: relative_sigma must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// Identification

/// One identified uncertainty sample: F_unc = F_meas - F_est and
/// tau_unc = tau_meas^CoM - tau_est, with the measured torque first moved to
/// the CoM through the sensor offset p_ft.
inline UncertaintySample identify(const Vec3& f_meas, const Vec3& tau_meas, const Vec3& f_est,
                                  const Vec3& tau_est,
                                  const Vec3& p_ft = default_ft_to_com_vector()) {
  return {f_meas - f_est, ft_to_com_torque(f_meas, tau_meas, p_ft) - tau_est};
}

// ---------------------------------------------------------------------------
// Synthesis

/// Shape of one synthesized axis: a band-limited (first-order-filtered)
/// random walk with stationary standard deviation `stddev` and correlation
/// time `corr_time`, plus an optional slow drift component of the same form.
struct AxisShape {
  double stddev = 0.0;       // stationary std of the fast component
  double corr_time = 1.0;    // s
  double drift_stddev = 0.0; // stationary std of the slow component
  double drift_corr_time = 10.0;  // s
};

struct SynthesisParams {
  std::array<AxisShape, 3> force;   // x, y, z
  std::array<AxisShape, 3> torque;  // x, y, z
  // CoM-offset coupling (meters): thrust-generation error along z produces
  // a proportional torque error about x through the offset lever arm, on
  // top of the independent torque component.
  double com_offset_coupling = 0.0;
};

namespace detail {

/// Discrete Ornstein-Uhlenbeck recursion started from its stationary
/// distribution; exact stationary std equal to shape.stddev.
inline std::vector<double> synth_axis(size_t n, double dt, double stddev, double corr_time,
                                      std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> out(n, 0.0);
  if (n == 0 || stddev <= 0.0) return out;
  const double a = std::exp(-dt / corr_time);
  const double b = stddev * std::sqrt(1.0 - a * a);
  double x = stddev * rng::gaussian(seed, stream, 0);
  out[0] = x;
  for (size_t k = 1; k < n; ++k) {
    x = a * x + b * rng::gaussian(seed, stream, k);
    out[k] = x;
  }
  return out;
}

}  // namespace detail

/// Synthesizes an uncertainty trace; deterministic per seed.
inline UncertaintyTrace synthesize(double duration, double dt, const SynthesisParams& params,
                                   std::uint64_t rng_seed) {
  if (duration <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("synthesize: duration and dt must be positive");
  const size_t n = static_cast<size_t>(duration / dt + 0.5) + 1;
  UncertaintyTrace trace;
  trace.provenance = TraceProvenance::synthetic;
  trace.time.resize(n);
  for (size_t k = 0; k < n; ++k) trace.time[k] = static_cast<double>(k) * dt;
  std::array<std::vector<double>, 6> axes;
  for (int i = 0; i < 6; ++i) {
    const AxisShape& shape = i < 3 ? params.force[static_cast<size_t>(i)]
                                   : params.torque[static_cast<size_t>(i - 3)];
    auto fast = detail::synth_axis(n, dt, shape.stddev, shape.corr_time, rng_seed,
                                   static_cast<std::uint64_t>(2 * i));
    const auto slow = detail::synth_axis(n, dt, shape.drift_stddev, shape.drift_corr_time,
                                         rng_seed, static_cast<std::uint64_t>(2 * i + 1));
    for (size_t k = 0; k < n; ++k) fast[k] += slow[k];
    axes[static_cast<size_t>(i)] = std::move(fast);
  }
  trace.force.resize(n);
  trace.torque.resize(n);
  for (size_t k = 0; k < n; ++k) {
    trace.force[k] = {axes[0][k], axes[1][k], axes[2][k]};
    trace.torque[k] = {axes[3][k] + params.com_offset_coupling * axes[2][k], axes[4][k],
                       axes[5][k]};
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Resampling

/// Zero-order hold onto the uniform grid spanning the trace: grid points
/// t0 + k dt up to the first point at or past the last source time. Queries
/// beyond the trace end hold the last sample.
inline UncertaintyTrace resample(const UncertaintyTrace& trace, double dt_target) {
  if (trace.empty()) throw std::invalid_argument("resample: empty trace");
  if (dt_target <= 0.0) throw std::invalid_argument("resample: dt must be positive");
  trace.validate();
  const double t0 = trace.time.front();
  const double span = trace.time.back() - t0;
  size_t n = static_cast<size_t>(std::ceil(span / dt_target - 1e-12)) + 1;
  UncertaintyTrace out;
  out.provenance = trace.provenance;
  out.time.reserve(n);
  out.force.reserve(n);
  out.torque.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * dt_target;
    const UncertaintySample s = trace.sample_at(t + 1e-12);
    out.time.push_back(t);
    out.force.push_back(s.force);
    out.torque.push_back(s.torque);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Injection
//
// The simulated actuation wrench subtracts the identified uncertainty:
// planar runs use the x and z force selectors and the x torque selector,
//   f_x^sim  = f_x  - [1 0 0] F_unc,
//   f_z^sim  = f_z  - [0 0 1] F_unc,
//   tau^sim  = tau  - [1 0 0] tau_unc;
// spatial runs subtract all six components.

inline constexpr PlanarWrench inject(const PlanarWrench& w, const UncertaintySample& s) {
  return {w.fx - s.force.x, w.fz - s.force.z, w.tau - s.torque.x};
}

inline constexpr SpatialWrench inject(const SpatialWrench& w, const UncertaintySample& s) {
  return {w.force - s.force, w.torque - s.torque};
}

// ---------------------------------------------------------------------------
// Sensor noise

/// Magnitude-proportional Gaussian corruption of the wheel normal-force
/// readings, clamped at zero. Pure in (model.rng_seed, step_index, wheel).
template <size_t N>
inline std::array<double, N> sensor_noise(const std::array<double, N>& f_n,
                                          const NoiseModel& model, std::uint64_t step_index) {
  model.validate();
  std::array<double, N> out{};
  for (size_t i = 0; i < N; ++i) {
    if (f_n[i] < 0.0) throw std::invalid_argument("sensor_noise: negative normal force");
    const double xi = rng::gaussian(model.rng_seed, 100 + i, step_index);
    out[i] = std::max(0.0, f_n[i] * (1.0 + model.relative_sigma * xi));
  }
  return out;
}

}  // namespace slidesim

#pragma once

// Pinned generators for the synthetic data bundled with the repository.
//
// The uncertainty trace stands in for unavailable FT recordings: the z force
// error carries a slow drift plus band-limited noise with excursions
// comparable to the commanded push, lateral force errors are a few newtons,
// and torque errors stay below roughly half a newton-meter. The wrench trace
// models a push-and-slide flight: a 10-15 N push with lateral force bursts
// from sliding accelerations and small torque wander. Both are deterministic
// functions of the parameters below; data/*.csv are their frozen outputs.

#include "slidesim/force_angle.hpp"
#include "slidesim/uncertainty.hpp"

namespace slidesim {

inline constexpr std::uint64_t kBundledUncertaintySeed = 71;
inline constexpr double kBundledTraceDuration = 60.0;
inline constexpr double kBundledTraceDt = 0.01;

inline SynthesisParams bundled_synthesis_params() {
  SynthesisParams p;
  p.force[0] = {1.2, 0.8, 0.5, 12.0};   // lateral x
  p.force[1] = {1.0, 0.8, 0.4, 12.0};   // lateral y
  p.force[2] = {2.0, 1.2, 3.1, 14.0};   // push axis: noise + slow drift
  p.torque[0] = {0.09, 1.0, 0.02, 15.0};
  p.torque[1] = {0.05, 1.0, 0.02, 15.0};
  p.torque[2] = {0.03, 1.0, 0.01, 15.0};
  p.com_offset_coupling = 0.035;
  return p;
}

inline UncertaintyTrace bundled_uncertainty_trace() {
  return synthesize(kBundledTraceDuration, kBundledTraceDt, bundled_synthesis_params(),
                    kBundledUncertaintySeed);
}

/// Synthetic push-and-slide actuation wrench trace used by the analyze and
/// sweep examples. Sliding acceleration bursts raise the lateral forces
/// while the push stays between 10 and 15 N.
inline WrenchTrace bundled_wrench_trace() {
  WrenchTrace trace;
  const double dt = kBundledTraceDt;
  const size_t n = static_cast<size_t>(kBundledTraceDuration / dt + 0.5) + 1;
  SynthesisParams wander;
  wander.force[0] = {0.6, 0.6, 0.0, 10.0};
  wander.force[1] = {0.6, 0.6, 0.0, 10.0};
  wander.force[2] = {0.8, 1.0, 0.0, 10.0};
  wander.torque[0] = {0.08, 0.8, 0.0, 10.0};
  wander.torque[1] = {0.08, 0.8, 0.0, 10.0};
  wander.torque[2] = {0.02, 0.8, 0.0, 10.0};
  const UncertaintyTrace noise =
      synthesize(kBundledTraceDuration, dt, wander, kBundledUncertaintySeed + 5);
  for (size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    // Sliding bursts: windows of high lateral acceleration.
    const double burst = 0.5 * (1.0 + std::tanh(3.0 * std::sin(2.0 * kPi * t / 15.0) - 1.2));
    const double ax = 5.5 * burst * std::sin(2.0 * kPi * t / 3.0);
    const double ay = 3.5 * burst * std::cos(2.0 * kPi * t / 4.1);
    const double push = -12.5 + 2.0 * std::sin(2.0 * kPi * t / 9.0);
    trace.time.push_back(t);
    trace.f_a.push_back(Vec3{ax, ay, push} + noise.force[k]);
    trace.tau_a.push_back(Vec3{0.25 * burst * std::sin(2.0 * kPi * t / 5.3),
                               0.2 * burst * std::cos(2.0 * kPi * t / 6.1), 0.0} +
                          noise.torque[k]);
  }
  return trace;
}

}  // namespace slidesim

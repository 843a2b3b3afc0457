#pragma once

// Force-angle tip-over stability measure.
//
// The support pattern is built from the wheel contact points p_i (body
// frame, relative to the CoM). Tip-over axes join adjacent contact points,
//   a_i = p_{i+1} - p_i          (indices wrap),
// and each axis has a normal through the CoM,
//   l_i = (I - a^ a^T) p_{i+1},
// i.e. the perpendicular foot vector from the CoM onto the axis line.
//
// For a net wrench (f_r, m_r) acting at the CoM, the per-axis resultant is
//   f_i  = (I - a^ a^T) f_r,
//   m_i  = (a^ a^T) m_r,
//   f_mi = (l^_i x m_i) / ||l_i||,
//   f_i* = f_i + f_mi,
// and the candidate angle is theta_i = sigma_i * acos(f^_i* . l^_i) with
// sigma_i = +1 iff (f^_i* x l^_i) . a^_i > 0. The measure is
//   alpha = min_i theta_i * ||d_i|| * ||f_i*||,
//   d_i   = -l_i + (l_i . f^_i*) f^_i*.
// alpha < 0 means a tip-over is in progress; alpha = 0 is the critical case.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "slidesim/geometry.hpp"

namespace slidesim {

// ---------------------------------------------------------------------------
// Types

/// Tip-over axes and their CoM normals, one per support-polygon side. For a
/// two-wheel layout the single geometric axis is represented by the closed
/// pair (a1, a2 = -a1) so that the axes always form a closed polygon.
struct TipoverAxes {
  std::vector<Vec3> a;  // axis vectors
  std::vector<Vec3> l;  // normals through the CoM
  WheelMode mode = WheelMode::three_wheel;

  int count() const { return static_cast<int>(a.size()); }
};

/// Forces and torques at the CoM that participate in tip-over instability.
struct NetTipoverWrench {
  Vec3 f_r;  // N
  Vec3 m_r;  // N*m
};

/// Per-axis candidate angle data plus the scalar measure.
struct StabilityReport {
  struct Axis {
    Vec3 f_star;          // resultant force vector
    double theta = 0.0;   // rad, signed
    int sigma = +1;
    Vec3 d;               // minimum-length vector from the axis to f_star
    bool indeterminate = false;  // ||f_i*|| = 0: no stability information
  };
  std::vector<Axis> axes;
  double alpha = 0.0;      // rad*m*N
  int argmin_axis = 0;     // index into axes
  bool indeterminate = false;  // some axis carried no information
};

/// Time series of actuation wrenches (body frame) with an optional per-sample
/// gravity column. A zero gravity series reproduces the simplified system
/// where gravity is compensated by the low-level loop.
struct WrenchTrace {
  std::vector<double> time;
  std::vector<Vec3> f_a;
  std::vector<Vec3> tau_a;
  std::vector<Vec3> gravity_body;  // empty means all zeros

  size_t size() const { return time.size(); }

  void validate() const {
    if (f_a.size() != time.size() || tau_a.size() != time.size())
      throw std::invalid_argument("WrenchTrace: series lengths differ");
    if (!gravity_body.empty() && gravity_body.size() != time.size())
      throw std::invalid_argument("WrenchTrace: gravity series length differs");
    for (size_t i = 1; i < time.size(); ++i)
      if (!(time[i] > time[i - 1]))
        throw std::invalid_argument("WrenchTrace: timestamps must be strictly increasing");
  }
};

// ---------------------------------------------------------------------------
// Support pattern

/// Builds the tip-over axes from explicit contact points (relative to the
/// CoM). Points must be pairwise distinct.
inline TipoverAxes support_pattern_from_points(std::span<const Vec3> points,
                                               WheelMode mode) {
  const size_t n = points.size();
  if (n < 2) throw std::invalid_argument("support_pattern: need at least two contact points");
  TipoverAxes axes;
  axes.mode = mode;
  for (size_t i = 0; i < n; ++i) {
    const Vec3& p = points[i];
    const Vec3& p_next = points[(i + 1) % n];
    const Vec3 a = p_next - p;
    if (norm_sq(a) == 0.0)
      throw std::invalid_argument("support_pattern: coincident wheel positions");
    const Vec3 a_hat = normalized(a);
    axes.a.push_back(a);
    axes.l.push_back(reject_from(p_next, a_hat));
  }
  return axes;
}

/// Support pattern of a wheel layout, using the nominal tip-plane contact
/// points.
inline TipoverAxes support_pattern(const WheelLayout& layout) {
  const auto pts = layout.tip_contact_points();
  return support_pattern_from_points(pts, layout.mode);
}

// ---------------------------------------------------------------------------
// Measure

/// f_r = f_a - g_body, m_r = tau_a. Contact forces do not participate.
inline constexpr NetTipoverWrench net_tipover_wrench(const Vec3& f_a, const Vec3& tau_a,
                                                     const Vec3& g_body = {}) {
  return {f_a - g_body, tau_a};
}

/// Components of the net wrench that act about axis i.
inline std::pair<Vec3, Vec3> axis_components(const NetTipoverWrench& w,
                                             const TipoverAxes& axes, int i) {
  const Vec3 a_hat = normalized(axes.a.at(static_cast<size_t>(i)));
  return {reject_from(w.f_r, a_hat), project_onto(w.m_r, a_hat)};
}

/// Member of the force couple replacing the axis torque, acting at the CoM.
inline Vec3 force_couple_member(const Vec3& m_i, const Vec3& l_i) {
  const double l_norm = norm(l_i);
  if (l_norm == 0.0)
    throw std::domain_error("force_couple_member: degenerate geometry (l_i = 0)");
  return cross(l_i / l_norm, m_i) / l_norm;
}

/// Candidate angle and its sign for one axis. Throws std::domain_error when
/// the resultant force vanishes (the angle carries no information there).
inline std::pair<double, int> candidate_angle(const Vec3& f_i_star, const Vec3& l_i,
                                              const Vec3& a_i) {
  const Vec3 f_hat = normalized(f_i_star);  // throws on zero resultant
  const Vec3 l_hat = normalized(l_i);
  const Vec3 a_hat = normalized(a_i);
  const int sigma = dot(cross(f_hat, l_hat), a_hat) > 0.0 ? +1 : -1;
  const double c = std::clamp(dot(f_hat, l_hat), -1.0, 1.0);
  return {sigma * std::acos(c), sigma};
}

/// Full per-axis evaluation and the scalar measure alpha. Axes whose
/// resultant force vanishes are flagged indeterminate and skipped by the
/// minimum; if no axis carries information the report itself is flagged.
/// For two-wheel layouts alpha is the axis-1 product (documented
/// specialization: the mirrored second axis always carries the negated
/// angle, so no minimum is taken).
inline StabilityReport stability_measure(const NetTipoverWrench& w, const TipoverAxes& axes) {
  StabilityReport report;
  report.axes.resize(static_cast<size_t>(axes.count()));
  bool have_min = false;
  for (int i = 0; i < axes.count(); ++i) {
    auto& out = report.axes[static_cast<size_t>(i)];
    const auto [f_i, m_i] = axis_components(w, axes, i);
    const Vec3& l_i = axes.l[static_cast<size_t>(i)];
    const Vec3 f_star = f_i + force_couple_member(m_i, l_i);
    out.f_star = f_star;
    if (norm_sq(f_star) == 0.0) {
      out.indeterminate = true;
      report.indeterminate = true;
      continue;
    }
    const auto [theta, sigma] = candidate_angle(f_star, l_i, axes.a[static_cast<size_t>(i)]);
    out.theta = theta;
    out.sigma = sigma;
    const Vec3 f_hat = normalized(f_star);
    out.d = -l_i + project_onto(l_i, f_hat);
    const double product = theta * norm(out.d) * norm(f_star);
    const bool use_axis = axes.mode == WheelMode::three_wheel ? true : i == 0;
    if (use_axis && (!have_min || product < report.alpha)) {
      report.alpha = product;
      report.argmin_axis = i;
      have_min = true;
    }
  }
  if (!have_min) report.indeterminate = true;
  return report;
}

// ---------------------------------------------------------------------------
// Trace analysis

/// [t_start, t_end] of one contiguous run of alpha < 0 samples.
struct TipoverWindow {
  double t_start = 0.0;
  double t_end = 0.0;
};

struct TraceAnalysis {
  std::vector<double> time;
  // One report per sample; nullopt where the measure was indeterminate.
  std::vector<std::optional<StabilityReport>> reports;
  std::vector<TipoverWindow> windows;

  double min_alpha() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : reports)
      if (r && !r->indeterminate) m = std::min(m, r->alpha);
    return m;
  }
};

/// Per-sample stability reports plus merged alpha < 0 windows. Strict
/// alpha < 0 with no hysteresis; indeterminate samples become gaps.
inline TraceAnalysis analyze_trace(const WrenchTrace& trace, const WheelLayout& layout) {
  trace.validate();
  const TipoverAxes axes = support_pattern(layout);
  TraceAnalysis out;
  out.time = trace.time;
  out.reports.reserve(trace.size());
  bool in_window = false;
  double window_start = 0.0;
  double last_negative_t = 0.0;
  for (size_t k = 0; k < trace.size(); ++k) {
    const Vec3 g = trace.gravity_body.empty() ? Vec3{} : trace.gravity_body[k];
    const NetTipoverWrench w = net_tipover_wrench(trace.f_a[k], trace.tau_a[k], g);
    StabilityReport r = stability_measure(w, axes);
    const bool valid = !r.indeterminate;
    const bool negative = valid && r.alpha < 0.0;
    if (negative) {
      if (!in_window) {
        in_window = true;
        window_start = trace.time[k];
      }
      last_negative_t = trace.time[k];
    } else if (in_window) {
      out.windows.push_back({window_start, last_negative_t});
      in_window = false;
    }
    if (valid)
      out.reports.emplace_back(std::move(r));
    else
      out.reports.emplace_back(std::nullopt);
  }
  if (in_window) out.windows.push_back({window_start, last_negative_t});
  return out;
}

// ---------------------------------------------------------------------------
// Geometry sweep (hardware-design guidelines)

struct SweepEntry {
  double r_scale = 1.0;
  double h_scale = 1.0;
  std::vector<double> alpha;  // NaN where indeterminate
  double min_alpha = 0.0;
};

/// Evaluates alpha over the trace for every (r_scale, h_scale) combination.
/// The (1, 1) cell reproduces analyze_trace exactly.
inline std::vector<SweepEntry> geometry_sweep(const WrenchTrace& trace,
                                              const WheelLayout& layout,
                                              std::span<const double> r_scales,
                                              std::span<const double> h_scales) {
  for (double s : r_scales)
    if (s <= 0.0) throw std::invalid_argument("geometry_sweep: scales must be positive");
  for (double s : h_scales)
    if (s <= 0.0) throw std::invalid_argument("geometry_sweep: scales must be positive");
  std::vector<SweepEntry> table;
  for (double rs : r_scales) {
    for (double hs : h_scales) {
      const TraceAnalysis analysis = analyze_trace(trace, layout.scaled(rs, hs));
      SweepEntry entry;
      entry.r_scale = rs;
      entry.h_scale = hs;
      entry.alpha.reserve(analysis.reports.size());
      for (const auto& r : analysis.reports)
        entry.alpha.push_back(r ? r->alpha : std::nan(""));
      entry.min_alpha = analysis.min_alpha();
      table.push_back(std::move(entry));
    }
  }
  return table;
}

}  // namespace slidesim

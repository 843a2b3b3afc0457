#pragma once

// CSV schemas for trace files.
//
//   wrench trace:      t,fax,fay,faz,tax,tay,taz[,gx,gy,gz]
//   uncertainty trace: t,fux,fuy,fuz,tux,tuy,tuz
//   identify input:    t,fmx,fmy,fmz,tmx,tmy,tmz,fex,fey,fez,tex,tey,tez
//   stability report:  t,theta1,theta2,theta3,alpha,argmin_axis
//   tip-over windows:  t_start,t_end

#include <string>

#include "slidesim/csv.hpp"
#include "slidesim/force_angle.hpp"
#include "slidesim/uncertainty.hpp"

namespace slidesim {

inline WrenchTrace read_wrench_trace(const csv::Table& table) {
  WrenchTrace trace;
  const int t = table.require_column("t");
  const int fx = table.require_column("fax");
  const int fy = table.require_column("fay");
  const int fz = table.require_column("faz");
  const int tx = table.require_column("tax");
  const int ty = table.require_column("tay");
  const int tz = table.require_column("taz");
  const int gx = table.column("gx");
  const int gy = table.column("gy");
  const int gz = table.column("gz");
  const bool has_gravity = gx >= 0 && gy >= 0 && gz >= 0;
  for (const auto& row : table.rows) {
    trace.time.push_back(row[static_cast<size_t>(t)]);
    trace.f_a.push_back({row[static_cast<size_t>(fx)], row[static_cast<size_t>(fy)],
                         row[static_cast<size_t>(fz)]});
    trace.tau_a.push_back({row[static_cast<size_t>(tx)], row[static_cast<size_t>(ty)],
                           row[static_cast<size_t>(tz)]});
    if (has_gravity)
      trace.gravity_body.push_back({row[static_cast<size_t>(gx)], row[static_cast<size_t>(gy)],
                                    row[static_cast<size_t>(gz)]});
  }
  trace.validate();
  return trace;
}

inline WrenchTrace read_wrench_trace_file(const std::string& path) {
  return read_wrench_trace(csv::read_table_file(path));
}

inline std::string wrench_trace_to_csv(const WrenchTrace& trace) {
  const bool has_gravity = !trace.gravity_body.empty();
  std::vector<std::string> header{"t", "fax", "fay", "faz", "tax", "tay", "taz"};
  if (has_gravity) {
    header.insert(header.end(), {"gx", "gy", "gz"});
  }
  csv::Writer w(header);
  for (size_t i = 0; i < trace.size(); ++i) {
    std::vector<double> row{trace.time[i],  trace.f_a[i].x,   trace.f_a[i].y,
                            trace.f_a[i].z, trace.tau_a[i].x, trace.tau_a[i].y,
                            trace.tau_a[i].z};
    if (has_gravity) {
      row.push_back(trace.gravity_body[i].x);
      row.push_back(trace.gravity_body[i].y);
      row.push_back(trace.gravity_body[i].z);
    }
    w.add_row(row);
  }
  return w.to_string();
}

inline UncertaintyTrace read_uncertainty_trace(const csv::Table& table,
                                               TraceProvenance provenance) {
  UncertaintyTrace trace;
  trace.provenance = provenance;
  const int t = table.require_column("t");
  const int fx = table.require_column("fux");
  const int fy = table.require_column("fuy");
  const int fz = table.require_column("fuz");
  const int tx = table.require_column("tux");
  const int ty = table.require_column("tuy");
  const int tz = table.require_column("tuz");
  for (const auto& row : table.rows) {
    trace.time.push_back(row[static_cast<size_t>(t)]);
    trace.force.push_back({row[static_cast<size_t>(fx)], row[static_cast<size_t>(fy)],
                           row[static_cast<size_t>(fz)]});
    trace.torque.push_back({row[static_cast<size_t>(tx)], row[static_cast<size_t>(ty)],
                            row[static_cast<size_t>(tz)]});
  }
  trace.validate();
  return trace;
}

inline UncertaintyTrace read_uncertainty_trace_file(const std::string& path,
                                                    TraceProvenance provenance) {
  return read_uncertainty_trace(csv::read_table_file(path), provenance);
}

inline std::string uncertainty_trace_to_csv(const UncertaintyTrace& trace) {
  csv::Writer w({"t", "fux", "fuy", "fuz", "tux", "tuy", "tuz"});
  for (size_t i = 0; i < trace.size(); ++i)
    w.add_row({trace.time[i], trace.force[i].x, trace.force[i].y, trace.force[i].z,
               trace.torque[i].x, trace.torque[i].y, trace.torque[i].z});
  return w.to_string();
}

/// Runs the uncertainty identification over a measured/estimated wrench
/// table and returns the resulting trace (provenance: measured).
inline UncertaintyTrace identify_from_table(const csv::Table& table,
                                            const Vec3& p_ft = default_ft_to_com_vector()) {
  UncertaintyTrace trace;
  trace.provenance = TraceProvenance::measured;
  const int t = table.require_column("t");
  const auto col = [&](const char* name) { return table.require_column(name); };
  const int fm[3] = {col("fmx"), col("fmy"), col("fmz")};
  const int tm[3] = {col("tmx"), col("tmy"), col("tmz")};
  const int fe[3] = {col("fex"), col("fey"), col("fez")};
  const int te[3] = {col("tex"), col("tey"), col("tez")};
  const auto vec = [](const std::vector<double>& row, const int* idx) {
    return Vec3{row[static_cast<size_t>(idx[0])], row[static_cast<size_t>(idx[1])],
                row[static_cast<size_t>(idx[2])]};
  };
  for (const auto& row : table.rows) {
    const UncertaintySample s =
        identify(vec(row, fm), vec(row, tm), vec(row, fe), vec(row, te), p_ft);
    trace.time.push_back(row[static_cast<size_t>(t)]);
    trace.force.push_back(s.force);
    trace.torque.push_back(s.torque);
  }
  trace.validate();
  return trace;
}

/// Stability report series and tip-over windows in their CSV forms.
inline std::string trace_analysis_to_csv(const TraceAnalysis& analysis) {
  csv::Writer w({"t", "theta1", "theta2", "theta3", "alpha", "argmin_axis"});
  for (size_t i = 0; i < analysis.time.size(); ++i) {
    const auto& r = analysis.reports[i];
    std::array<double, 3> theta{std::nan(""), std::nan(""), std::nan("")};
    double alpha = std::nan("");
    double argmin = 0.0;
    if (r) {
      for (size_t k = 0; k < r->axes.size() && k < 3; ++k)
        theta[k] = r->axes[k].indeterminate ? std::nan("") : r->axes[k].theta;
      alpha = r->alpha;
      argmin = static_cast<double>(r->argmin_axis + 1);  // 1-based axis number
    }
    w.add_row({analysis.time[i], theta[0], theta[1], theta[2], alpha, argmin});
  }
  return w.to_string();
}

inline std::string tipover_windows_to_csv(const TraceAnalysis& analysis) {
  csv::Writer w({"t_start", "t_end"});
  for (const auto& win : analysis.windows) w.add_row({win.t_start, win.t_end});
  return w.to_string();
}

}  // namespace slidesim

// Batch CLI for the passive-sliding tip-over simulator and the force-angle
// analysis tools.
//
// Exit codes: 0 success, 1 usage, 2 configuration error, 3 I/O error,
// 4 divergence (the run was flagged unstable; outputs are still written).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slidesim/bundled.hpp"
#include "slidesim/scenario_io.hpp"
#include "slidesim/trace_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitDivergence = 4;

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("SLIDESIM_OUT_DIR")) return env;
  return "out";
}

std::filesystem::path resolve_out(const std::string& flag, const char* leaf) {
  if (!flag.empty()) return flag;
  return default_out_dir() / leaf;
}

int run_simulate(const std::string& config_path, const std::string& out, bool plots) {
  slidesim::ScenarioConfig cfg = slidesim::load_scenario_config(config_path);
  if (plots) cfg.plots = true;
  const slidesim::RunResult result = slidesim::run_scenario(cfg);
  const auto dir = resolve_out(out, "simulate");
  slidesim::emit_outputs(result, dir);
  std::cout << "wrote " << dir.string() << (result.unstable ? " (unstable)" : "") << "\n";
  return result.unstable ? kExitDivergence : kExitOk;
}

int run_matrix_cmd(const std::string& base_config, const std::string& out) {
  slidesim::ScenarioConfig base = base_config.empty()
                                      ? slidesim::default_planar_scenario()
                                      : slidesim::load_scenario_config(base_config);
  const auto cells = slidesim::run_matrix(base);
  const auto dir = resolve_out(out, "matrix");
  slidesim::emit_matrix(cells, dir);
  std::cout << "wrote " << dir.string() << "\n";
  for (const auto& cell : cells)
    std::cout << "  (" << cell.scenario << ", " << cell.approach << "): "
              << (cell.result.metrics.tipped_over() ? "tip-over" : "clean") << "\n";
  return kExitOk;
}

int run_recover_cmd(const std::string& config_path, const std::vector<double>& angles,
                    const std::string& out) {
  const slidesim::ScenarioConfig base = slidesim::load_scenario_config(config_path);
  const auto results = slidesim::run_recovery(angles, base);
  const auto dir = resolve_out(out, "recover");
  std::filesystem::create_directories(dir);
  slidesim::csv::Writer table({"angle_deg", "first_contact_time", "recovery_time",
                               "peak_abs_en_initial", "tipover_events", "unstable"});
  for (size_t i = 0; i < results.size(); ++i) {
    const auto& m = results[i].metrics;
    slidesim::emit_outputs(results[i],
                           dir / ("angle_" + slidesim::csv::format_double(angles[i])));
    table.add_row({angles[i], m.first_contact_time, m.recovery_time, m.peak_abs_en_initial,
                   static_cast<double>(m.tipover_events),
                   static_cast<double>(m.unstable)});
  }
  table.write_file((dir / "recovery_summary.csv").string());
  std::cout << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int run_analyze(const std::string& trace_path, const std::string& layout_config,
                const std::string& out) {
  const slidesim::WrenchTrace trace = slidesim::read_wrench_trace_file(trace_path);
  const slidesim::ScenarioConfig cfg = slidesim::load_scenario_config(layout_config);
  const slidesim::TraceAnalysis analysis =
      slidesim::analyze_trace(trace, cfg.sim.layout);
  const auto dir = resolve_out(out, "analyze");
  std::filesystem::create_directories(dir);
  slidesim::write_text_file(dir / "report.csv", slidesim::trace_analysis_to_csv(analysis));
  slidesim::write_text_file(dir / "windows.csv",
                            slidesim::tipover_windows_to_csv(analysis));
  std::cout << "wrote " << dir.string() << " (" << analysis.windows.size()
            << " tip-over windows, min alpha " << analysis.min_alpha() << ")\n";
  return kExitOk;
}

int run_sweep(const std::string& trace_path, const std::string& layout_config,
              std::vector<double> r_scales, std::vector<double> h_scales,
              const std::string& out) {
  const slidesim::WrenchTrace trace = slidesim::read_wrench_trace_file(trace_path);
  const slidesim::ScenarioConfig cfg =
      layout_config.empty() ? slidesim::default_spatial_scenario()
                            : slidesim::load_scenario_config(layout_config);
  if (r_scales.empty()) r_scales = {1.0, 2.0, 5.0};
  if (h_scales.empty()) h_scales = {1.0, 0.5, 0.2};
  const auto table = slidesim::geometry_sweep(trace, cfg.sim.layout, r_scales, h_scales);
  const auto dir = resolve_out(out, "sweep");
  std::filesystem::create_directories(dir);

  slidesim::csv::Writer summary({"r_scale", "h_scale", "min_alpha"});
  for (const auto& entry : table)
    summary.add_row({entry.r_scale, entry.h_scale, entry.min_alpha});
  summary.write_file((dir / "sweep_summary.csv").string());

  std::vector<std::string> header{"t"};
  for (const auto& entry : table)
    header.push_back("alpha_r" + slidesim::csv::format_double(entry.r_scale) + "_h" +
                     slidesim::csv::format_double(entry.h_scale));
  slidesim::csv::Writer series(header);
  for (size_t i = 0; i < trace.size(); ++i) {
    std::vector<double> row{trace.time[i]};
    for (const auto& entry : table) row.push_back(entry.alpha[i]);
    series.add_row(row);
  }
  series.write_file((dir / "sweep_alpha.csv").string());
  std::cout << "wrote " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive-sliding tip-over simulator and stability analysis"};
  app.require_subcommand(1);

  std::string config_path, out_dir, trace_path, layout_config, base_config;
  std::vector<double> angles{0.0, 10.0, 20.0};
  std::vector<double> r_scales, h_scales;
  bool plots = false;

  auto* simulate = app.add_subcommand("simulate", "Run one scenario from a config file");
  simulate->add_option("config", config_path, "Scenario config (JSON)")->required();
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_flag("--plots", plots, "Also write SVG plots");

  auto* matrix = app.add_subcommand("matrix", "Run the 4x3 validation scenario grid");
  matrix->add_option("--config", base_config, "Base scenario config (JSON)");
  matrix->add_option("--out", out_dir, "Output directory");

  auto* recover = app.add_subcommand("recover", "Tip-over recovery runs at contact angles");
  recover->add_option("--angles", angles, "Contact angles in degrees")->delimiter(',');
  recover->add_option("config", config_path, "Scenario config (JSON)")->required();
  recover->add_option("--out", out_dir, "Output directory");

  auto* analyze = app.add_subcommand("analyze", "Force-angle stability measure of a trace");
  analyze->add_option("trace", trace_path, "Wrench trace CSV")->required();
  analyze->add_option("--layout", layout_config, "Config providing the wheel layout")
      ->required();
  analyze->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Geometry sweep of the stability measure");
  sweep->add_option("trace", trace_path, "Wrench trace CSV")->required();
  sweep->add_option("--rd", r_scales, "r_d scale factors")->delimiter(',');
  sweep->add_option("--h", h_scales, "h scale factors")->delimiter(',');
  sweep->add_option("--layout", layout_config, "Config providing the wheel layout");
  sweep->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(config_path, out_dir, plots);
    if (matrix->parsed()) return run_matrix_cmd(base_config, out_dir);
    if (recover->parsed()) return run_recover_cmd(config_path, angles, out_dir);
    if (analyze->parsed()) return run_analyze(trace_path, layout_config, out_dir);
    if (sweep->parsed()) return run_sweep(trace_path, layout_config, r_scales, h_scales, out_dir);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const slidesim::divergence_error& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "photon_shaper/config.hpp"
#include "photon_shaper/forward_solver.hpp"
#include "photon_shaper/inverse_designer.hpp"
#include "photon_shaper/observables.hpp"

#ifndef PHOTON_SHAPER_VERSION
#define PHOTON_SHAPER_VERSION "0.0.0"
#endif

namespace photon {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = PHOTON_SHAPER_VERSION;

struct PumpPeak {
  double t = 0.0;
  double value = 0.0;
};

struct RunSummary {
  double eta_T = 0.0;
  double peak_abs_phi = 0.0;
  double norm_drift = 0.0;
  double wall_time_s = 0.0;
  // inverse runs only
  std::optional<double> l2_error;
  std::optional<double> phase_max;
  std::vector<PumpPeak> pump_peaks;
};

namespace detail {

inline json params_json(const SystemParams& p) {
  return json{{"rabi_R", p.rabi_R},
              {"delta_k", p.delta_k},
              {"delta_p", p.delta_p},
              {"gamma_rad_ratio", p.gamma_rad_ratio},
              {"gamma_total", p.gamma_total}};
}

inline json pulse_json(const PulseSpec& s) {
  return json{{"family", std::string(to_string(s.family))},
              {"label", s.label()},
              {"amplitude", s.amplitude},
              {"centers", s.centers},
              {"widths", s.widths},
              {"ramp", s.ramp},
              {"depth", s.depth},
              {"period", s.period}};
}

// Local maxima above 1% of the global one, in time order.
inline std::vector<PumpPeak> local_maxima(const Envelope& e) {
  std::vector<PumpPeak> out;
  const double floor = 1e-2 * e.peak();
  for (std::size_t j = 1; j + 1 < e.size(); ++j) {
    if (e[j] > floor && e[j] > e[j - 1] && e[j] >= e[j + 1]) out.push_back({e.grid().time(j), e[j]});
  }
  return out;
}

inline double norm_drift(const AmplitudeTrajectory& traj) {
  double drift = 0.0;
  for (std::size_t j = 0; j < traj.grid.n; ++j) drift = std::max(drift, std::abs(traj.norm(j) - 1.0));
  return drift;
}

}  // namespace detail

/// Executes one fully resolved configuration and, unless `out_dir` is empty,
/// writes its artifacts there: manifest.json, trajectory.csv, wavepacket.csv
/// (unless nothing was emitted), pump.csv, coupling.csv, spectrum.csv when
/// requested, and for inverse runs design_report.json, design.csv, target.csv.
inline RunSummary run_config(const RunConfig& cfg, RunMode mode, const std::filesystem::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const TimeGrid grid = cfg.grid();
  require_refined(grid, cfg.force_coarse);
  const SystemParams& p = cfg.params;
  const SolverOptions solver{cfg.force_coarse};
  const Envelope g = cfg.coupling.render(grid);

  if (mode == RunMode::inverse && !cfg.inverse()) {
    fail(ErrorKind::config, "inverse mode needs [target] and [inverse] sections");
  }
  if ((mode == RunMode::forward || mode == RunMode::spectrum) && !cfg.pump) {
    fail(ErrorKind::config, std::string(to_string(mode)) + " mode needs a [pump] section");
  }

  RunSummary summary;
  std::optional<DesignTarget> target;
  std::optional<PumpDesign> design;
  Envelope pump;
  if (cfg.inverse()) {
    target = make_target(*cfg.target, grid, cfg.eta_target);
    design = pump_from_target(*target, p, g, cfg.design);
    pump = design->pump;
  } else {
    pump = cfg.pump->render(grid);
  }

  const AmplitudeTrajectory traj =
      cfg.solver == "volterra" ? solve_volterra(p, pump, g, grid, solver) : solve_ode(p, pump, g, grid, solver);
  summary.eta_T = efficiency_at(traj, p, grid.t_end);
  summary.norm_drift = detail::norm_drift(traj);

  std::optional<WavePacket> wp;
  if (summary.eta_T > 0.0) {
    wp = wavepacket(traj, p, grid.t_end);
    for (const auto& v : wp->phi) summary.peak_abs_phi = std::max(summary.peak_abs_phi, std::abs(v));
  }

  std::vector<std::string> files;
  const bool write = !out_dir.empty();
  auto emit = [&](const std::string& name, const std::string& content) {
    if (!write) return;
    write_file_atomic(out_dir / name, content);
    files.push_back(name);
  };
  if (write) {
    emit("trajectory.csv", trajectory_to_csv(traj, cfg.output.stride));
    if (wp) emit("wavepacket.csv", wavepacket_to_csv(*wp, cfg.output.stride));
    emit("pump.csv", envelope_to_csv(pump));
    emit("coupling.csv", envelope_to_csv(g));
  }
  if (write && (cfg.output.spectrum || mode == RunMode::spectrum)) {
    const auto deltas = uniform_delta_grid(p.delta_k, cfg.output.delta_half_span, cfg.output.delta_points);
    emit("spectrum.csv", spectrum_to_csv(spectrum(traj, p, grid.t_end, deltas)));
  }

  if (design) {
    const auto achieved = wp ? abs_values(wp->phi) : std::vector<double>(grid.n, 0.0);
    summary.l2_error = wp ? normalized_l2_distance(achieved, abs_values(target->shape), grid.dt) : 1.0;
    summary.phase_max = design->phase_max;
    summary.pump_peaks = detail::local_maxima(pump);
  }
  if (design && write) {
    CsvWriter tcsv("tau,abs_phi");
    for (std::size_t j = 0; j < grid.n; ++j) tcsv.row(grid.time(j), std::abs(target->shape[j]));
    emit("target.csv", tcsv.str());
    CsvWriter dcsv("t,omega_p,re_f,im_f,radicand");
    for (std::size_t j = 0; j < grid.n; ++j) {
      dcsv.row(grid.time(j), pump[j], design->f[j].real(), design->f[j].imag(), design->radicand[j]);
    }
    emit("design.csv", dcsv.str());

    json peaks = json::array();
    for (const auto& pk : summary.pump_peaks) peaks.push_back(json{{"t", pk.t}, {"value", pk.value}});
    double min_radicand = 1.0;
    for (std::size_t j = 0; j < design->cutoff_index; ++j) min_radicand = std::min(min_radicand, design->radicand[j]);
    json report{{"params", detail::params_json(p)},
                {"target_spec", detail::pulse_json(*cfg.target)},
                {"eta_target", cfg.eta_target},
                {"achieved_eta", summary.eta_T},
                {"l2_error", *summary.l2_error},
                {"phase_max", design->phase_max},
                {"non_real_pump", design->non_real_pump},
                {"cutoff_time", grid.time(std::min(design->cutoff_index, grid.n - 1))},
                {"min_radicand", min_radicand},
                {"pump_peaks", peaks}};
    if (summary.pump_peaks.size() >= 2) {
      report["peak2_over_peak1"] = summary.pump_peaks[1].value / summary.pump_peaks[0].value;
    }
    emit("design_report.json", report.dump(2) + "\n");
  }

  summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json s{{"eta_T", summary.eta_T}, {"peak_abs_phi", summary.peak_abs_phi}, {"norm_drift", summary.norm_drift}};
  if (wp) s["identity_residual"] = wp->identity_residual;
  if (summary.l2_error) s["l2_error"] = *summary.l2_error;
  if (summary.phase_max) s["phase_max"] = *summary.phase_max;
  const RunMode recorded = cfg.inverse() ? RunMode::inverse : (mode == RunMode::spectrum ? mode : RunMode::forward);
  json manifest{{"library", "photon_shaper"},
                {"version", kVersion},
                {"mode", std::string(to_string(recorded))},
                {"config", canonical_ini(cfg)},
                {"grid", json{{"t_end", grid.t_end}, {"dt", grid.dt}, {"n", grid.n}}},
                {"wall_time_s", summary.wall_time_s},
                {"summary", s},
                {"files", files}};
  if (write) write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------------------

/// Worker count for sweeps: PHOTON_SHAPER_THREADS if set, otherwise the
/// hardware concurrency.
inline std::size_t sweep_threads(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PHOTON_SHAPER_THREADS")) {
    double v = 0.0;
    try {
      v = parse_double(env);
    } catch (const Error&) {
      fail(ErrorKind::config, "PHOTON_SHAPER_THREADS must be a positive integer");
    }
    if (!(v >= 1.0) || v != std::floor(v)) fail(ErrorKind::config, "PHOTON_SHAPER_THREADS must be a positive integer");
    n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

template <typename Job>
void parallel_for(std::size_t count, Job&& job) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) job(i);
  };
  const std::size_t threads = sweep_threads(count);
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
}

struct SweepRow {
  ExpandedRun run;
  std::optional<RunSummary> summary;
  std::string error_kind;
  std::string error;
};

namespace detail {

inline std::string csv_text(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

// Executes the expansions, writing per-run artifacts under out_dir/<name> when
// `artifacts` is set. Failures stay per row.
inline std::vector<SweepRow> run_expanded(const RunConfig& cfg, const std::filesystem::path& out_dir, bool artifacts) {
  auto runs = expand(cfg);
  std::vector<SweepRow> rows(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) rows[i].run = std::move(runs[i]);
  parallel_for(rows.size(), [&](std::size_t i) {
    auto& row = rows[i];
    try {
      resolve_expanded(row.run);
      const auto dir = artifacts ? out_dir / row.run.name : std::filesystem::path();
      const RunMode mode = row.run.config.inverse() ? RunMode::inverse : RunMode::forward;
      row.summary = run_config(row.run.config, mode, dir);
    } catch (const Error& err) {
      row.error_kind = std::string(to_string(err.kind()));
      row.error = err.what();
    } catch (const std::exception& err) {
      row.error_kind = "internal";
      row.error = err.what();
    }
  });
  return rows;
}

inline std::string summary_csv(const RunConfig& cfg, const std::vector<SweepRow>& rows, bool with_name) {
  std::string header = with_name ? "run," : "";
  if (!cfg.variants.empty()) header += "variant,";
  for (const auto& axis : cfg.sweep) header += axis.key + ",";
  header += "eta_T,peak_abs_phi,l2_error,status,error";
  std::string out = header + "\n";
  for (const auto& row : rows) {
    std::string line = with_name ? row.run.name + "," : "";
    if (!cfg.variants.empty()) line += row.run.variant + ",";
    for (const auto& [key, value] : row.run.assignments) line += csv_text(value) + ",";
    if (row.summary) {
      line += format_double(row.summary->eta_T) + "," + format_double(row.summary->peak_abs_phi) + ",";
      line += (row.summary->l2_error ? format_double(*row.summary->l2_error) : std::string()) + ",ok,";
    } else {
      line += ",,,error," + csv_text(row.error_kind + ": " + row.error);
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace detail

/// One row per expanded run in sweep.csv; wall times go to sweep_timing.csv so
/// the aggregate stays byte-identical across repeats.
inline std::vector<SweepRow> run_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.sweep.empty()) fail(ErrorKind::config, "sweep mode needs a non-empty [sweep] section");
  auto rows = detail::run_expanded(cfg, out_dir, false);
  write_file_atomic(out_dir / "sweep.csv", detail::summary_csv(cfg, rows, false));
  CsvWriter timing("run,wall_time_s");
  for (const auto& row : rows) timing.row(row.run.name, row.summary ? row.summary->wall_time_s : 0.0);
  write_file_atomic(out_dir / "sweep_timing.csv", timing.str());
  return rows;
}

/// Figure reproduction: every variant x sweep expansion gets its own artifact
/// directory, plus summary.csv and a top-level manifest.json.
inline std::vector<SweepRow> run_figure(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.figure_id.empty()) fail(ErrorKind::config, "figure mode needs [figure] id");
  const auto t0 = std::chrono::steady_clock::now();
  auto rows = detail::run_expanded(cfg, out_dir, true);
  write_file_atomic(out_dir / "summary.csv", detail::summary_csv(cfg, rows, true));
  json runs = json::array();
  for (const auto& row : rows) {
    json r{{"name", row.run.name}, {"variant", row.run.variant}};
    json assign = json::object();
    for (const auto& [k, v] : row.run.assignments) assign[k] = v;
    r["assignments"] = assign;
    if (row.summary) {
      r["eta_T"] = row.summary->eta_T;
      r["peak_abs_phi"] = row.summary->peak_abs_phi;
    } else {
      r["error"] = json{{"kind", row.error_kind}, {"message", row.error}};
    }
    runs.push_back(std::move(r));
  }
  json manifest{{"library", "photon_shaper"},
                {"version", kVersion},
                {"mode", "figure"},
                {"figure", cfg.figure_id},
                {"config", cfg.doc.to_text()},
                {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                {"runs", runs}};
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return rows;
}

/// Exit status for an error kind: 2 configuration, 3 numerics or feasibility,
/// 4 capacity.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::parameter:
    case ErrorKind::io: return 2;
    case ErrorKind::capacity: return 4;
    default: return 3;
  }
}

inline std::string error_json(ErrorKind kind, const std::string& message) {
  return json{{"error", json{{"kind", std::string(to_string(kind))}, {"message", message}, {"exit_code", exit_code(kind)}}}}
      .dump();
}

}  // namespace photon

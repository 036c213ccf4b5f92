#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "photon_shaper/config.hpp"
#include "photon_shaper/experiments.hpp"

#ifndef PHOTON_SHAPER_PRESET_DIR
#define PHOTON_SHAPER_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using namespace photon;

namespace {

// "fig3" names the bundled preset when no such file exists.
fs::path locate_config(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  if (std::find(kFigureIds.begin(), kFigureIds.end(), arg) != kFigureIds.end()) {
    return fs::path(PHOTON_SHAPER_PRESET_DIR) / (arg + ".ini");
  }
  return arg;
}

int report(ErrorKind kind, const std::string& message) {
  std::cerr << error_json(kind, message) << '\n';
  return exit_code(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon emission and pump design for a Lambda emitter in a lossy cavity"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = "photon_out";
  std::optional<double> dt;
  bool force_coarse = false;

  for (const char* name : {"forward", "inverse", "spectrum", "sweep", "figure"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI config, run manifest, or figure id (fig2..fig8)")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--dt", dt, "override [grid] dt");
    sub->add_flag("--force-coarse", force_coarse, "accept dt above 0.01");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorKind::config, e.what());
  }

  const RunMode mode = *parse_run_mode(app.get_subcommands().front()->get_name());
  try {
    ConfigOverrides overrides;
    overrides.dt = dt;
    overrides.force_coarse = force_coarse;
    const RunConfig cfg = parse_config(locate_config(config_path), overrides);
    const fs::path out(out_dir);

    switch (mode) {
      case RunMode::forward:
      case RunMode::inverse:
      case RunMode::spectrum: {
        if (!cfg.sweep.empty() || !cfg.variants.empty()) {
          fail(ErrorKind::config, "config defines [sweep] or variants; use the sweep or figure mode");
        }
        const auto s = run_config(cfg, mode, out);
        std::cout << "eta_T = " << format_double(s.eta_T) << "\npeak_abs_phi = " << format_double(s.peak_abs_phi)
                  << '\n';
        if (s.l2_error) std::cout << "l2_error = " << format_double(*s.l2_error) << '\n';
        return 0;
      }
      case RunMode::sweep: {
        const auto rows = run_sweep(cfg, out);
        std::size_t failed = 0;
        for (const auto& r : rows) failed += r.summary ? 0 : 1;
        std::cout << rows.size() << " runs, " << failed << " failed -> " << (out / "sweep.csv").string() << '\n';
        return 0;
      }
      case RunMode::figure: {
        const auto rows = run_figure(cfg, out);
        for (const auto& r : rows) {
          if (r.summary) {
            std::cout << r.run.name << "  eta_T = " << format_double(r.summary->eta_T) << '\n';
          } else {
            std::cout << r.run.name << "  error: " << r.error << '\n';
          }
        }
        for (const auto& r : rows) {
          if (!r.summary) return exit_code(ErrorKind::design_infeasible);
        }
        return 0;
      }
    }
  } catch (const Error& e) {
    return report(e.kind(), e.what());
  } catch (const std::exception& e) {
    return report(ErrorKind::io, e.what());
  }
  return 0;
}

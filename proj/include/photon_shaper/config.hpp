#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "photon_shaper/core_model.hpp"
#include "photon_shaper/csv.hpp"
#include "photon_shaper/errors.hpp"
#include "photon_shaper/inverse_designer.hpp"
#include "photon_shaper/pulse_library.hpp"

namespace photon {

// ---------------------------------------------------------------------------
// Flat INI documents: "[section]" headers, "key = value" lines, full-line
// comments starting with '#' or ';'.

struct IniEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct IniSection {
  std::string name;
  int line = 0;
  std::vector<IniEntry> entries;

  const IniEntry* find(std::string_view key) const {
    for (const auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }
};

struct IniDocument {
  std::string source;                // file name used in messages
  std::filesystem::path base_dir;    // relative file references resolve here
  std::vector<IniSection> sections;

  const IniSection* find(std::string_view name) const {
    for (const auto& s : sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }

  IniSection& get_or_add(const std::string& name) {
    for (auto& s : sections) {
      if (s.name == name) return s;
    }
    sections.push_back(IniSection{name, 0, {}});
    return sections.back();
  }

  std::string to_text() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < sections.size(); ++i) {
      if (i) out << '\n';
      out << '[' << sections[i].name << "]\n";
      for (const auto& e : sections[i].entries) out << e.key << " = " << e.value << '\n';
    }
    return out.str();
  }
};

[[noreturn]] inline void config_fail(const std::string& source, int line, const std::string& msg) {
  std::string where = source.empty() ? std::string("config") : source;
  if (line > 0) where += ":" + std::to_string(line);
  fail(ErrorKind::config, where + ": " + msg);
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace detail

inline IniDocument parse_ini(const std::string& text, const std::string& source = {}) {
  IniDocument doc;
  doc.source = source;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  IniSection* current = nullptr;
  std::set<std::string> seen_sections;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_fail(source, lineno, "malformed section header '" + line + "'");
      std::string name = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) config_fail(source, lineno, "empty section name");
      if (!seen_sections.insert(name).second) config_fail(source, lineno, "duplicate section [" + name + "]");
      doc.sections.push_back(IniSection{name, lineno, {}});
      current = &doc.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_fail(source, lineno, "expected 'key = value', got '" + line + "'");
    if (!current) config_fail(source, lineno, "key outside of any section");
    std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) config_fail(source, lineno, "missing key before '='");
    if (current->find(key)) config_fail(source, lineno, "duplicate key '" + key + "' in [" + current->name + "]");
    current->entries.push_back(IniEntry{key, value, lineno});
  }
  return doc;
}

// ---------------------------------------------------------------------------

enum class RunMode { forward, inverse, spectrum, sweep, figure };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::forward: return "forward";
    case RunMode::inverse: return "inverse";
    case RunMode::spectrum: return "spectrum";
    case RunMode::sweep: return "sweep";
    case RunMode::figure: return "figure";
  }
  return "?";
}

inline std::optional<RunMode> parse_run_mode(std::string_view s) {
  for (auto m : {RunMode::forward, RunMode::inverse, RunMode::spectrum, RunMode::sweep, RunMode::figure}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

inline constexpr std::array<std::string_view, 6> kFigureIds = {"fig2", "fig3", "fig4", "fig5", "fig7", "fig8"};

/// Pump or coupling: either a named family or a two-column CSV file.
struct EnvelopeSource {
  std::optional<PulseSpec> spec;
  std::filesystem::path file;

  Envelope render(const TimeGrid& grid) const {
    if (spec) return render_pulse(*spec, grid);
    return resample(envelope_from_csv(read_file(file), file.filename().string()), grid);
  }
};

struct OutputOptions {
  bool spectrum = false;
  double delta_half_span = 25.0;
  std::size_t delta_points = 4001;
  std::size_t stride = 1;  // row thinning for trajectory.csv / wavepacket.csv
};

struct SweepAxis {
  std::string key;  // "section.key"
  std::vector<std::string> values;
  int line = 0;
};

struct Variant {
  std::string name;
  std::vector<IniEntry> overrides;  // keys are "section.key"
};

struct RunConfig {
  IniDocument doc;  // resolved document (paths absolute, overrides applied)
  SystemParams params;
  double t_end = 0.0;
  double dt = 1e-3;
  std::optional<EnvelopeSource> pump;
  EnvelopeSource coupling;
  std::optional<PulseSpec> target;
  double eta_target = 0.0;
  DesignOptions design;
  std::string solver = "ode";
  bool force_coarse = false;
  OutputOptions output;
  std::vector<SweepAxis> sweep;
  std::vector<Variant> variants;
  std::string figure_id;

  bool inverse() const { return target.has_value(); }
  TimeGrid grid() const { return make_grid(t_end, dt); }
};

namespace detail {

struct SectionSchema {
  std::string_view name;
  std::vector<std::string_view> keys;
};

inline const std::vector<SectionSchema>& schema() {
  static const std::vector<SectionSchema> s = {
      {"params", {"rabi_R", "delta_k", "delta_p", "gamma_rad_ratio"}},
      {"grid", {"t_end", "dt"}},
      {"pump", {"family", "amplitude", "centers", "widths", "ramp", "depth", "period", "file"}},
      {"coupling", {"family", "amplitude", "centers", "widths", "ramp", "depth", "period", "file"}},
      {"target", {"family", "centers", "widths", "ramp"}},
      {"inverse", {"eta_target", "g_min", "cutoff_fraction", "phase_tolerance"}},
      {"solver", {"method", "force_coarse"}},
      {"output", {"spectrum", "delta_half_span", "delta_points", "stride"}},
      {"figure", {"id"}},
  };
  return s;
}

inline const SectionSchema* find_schema(std::string_view name) {
  for (const auto& s : schema()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

inline bool is_known_key(std::string_view section, std::string_view key) {
  const auto* s = find_schema(section);
  return s && std::find(s->keys.begin(), s->keys.end(), key) != s->keys.end();
}

// "section.key" addressable by sweeps and variants.
inline std::pair<std::string, std::string> split_dotted(const std::string& source, const IniEntry& e) {
  const auto dot = e.key.find('.');
  if (dot == std::string::npos) config_fail(source, e.line, "expected 'section.key', got '" + e.key + "'");
  std::string section = e.key.substr(0, dot), key = e.key.substr(dot + 1);
  if (section == "figure" || !is_known_key(section, key)) {
    config_fail(source, e.line, "unknown key '" + e.key + "'");
  }
  return {section, key};
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto f : split_fields(value)) {
    auto t = trim(f);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

class SectionReader {
 public:
  SectionReader(const std::string& source, const IniSection& s) : source_(source), s_(s) {}

  bool has(std::string_view key) const { return s_.find(key) != nullptr; }
  int line_of(std::string_view key) const {
    const auto* e = s_.find(key);
    return e ? e->line : s_.line;
  }

  double number(std::string_view key, double fallback) const {
    const auto* e = s_.find(key);
    if (!e) return fallback;
    try {
      return parse_double(e->value);
    } catch (const Error&) {
      config_fail(source_, e->line, std::string(key) + ": not a number: '" + e->value + "'");
    }
  }

  std::vector<double> numbers(std::string_view key, std::vector<double> fallback) const {
    const auto* e = s_.find(key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(e->value)) {
      try {
        out.push_back(parse_double(item));
      } catch (const Error&) {
        config_fail(source_, e->line, std::string(key) + ": not a number: '" + item + "'");
      }
    }
    if (out.empty()) config_fail(source_, e->line, std::string(key) + ": empty list");
    return out;
  }

  std::string text(std::string_view key, std::string fallback) const {
    const auto* e = s_.find(key);
    return e ? e->value : fallback;
  }

  bool boolean(std::string_view key, bool fallback) const {
    const auto* e = s_.find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
    if (e->value == "false" || e->value == "no" || e->value == "0") return false;
    config_fail(source_, e->line, std::string(key) + ": expected true or false, got '" + e->value + "'");
  }

  std::size_t count(std::string_view key, std::size_t fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
      config_fail(source_, line_of(key), std::string(key) + " must be a positive integer");
    }
    return static_cast<std::size_t>(v);
  }

  // Re-throws a module validation error against the most relevant line.
  [[noreturn]] void rethrow(const Error& err) const {
    const std::string msg = err.what();
    int line = s_.line;
    for (const auto& e : s_.entries) {
      if (msg.find(e.key) != std::string::npos) {
        line = e.line;
        break;
      }
    }
    config_fail(source_, line, "[" + s_.name + "] " + msg);
  }

  const IniSection& section() const { return s_; }

 private:
  const std::string& source_;
  const IniSection& s_;
};

inline PulseSpec read_pulse(const std::string& source, const SectionReader& r, bool with_amplitude) {
  const auto* fam = r.section().find("family");
  if (!fam) config_fail(source, r.section().line, "[" + r.section().name + "] needs 'family' or 'file'");
  PulseSpec spec;
  const auto family = parse_pulse_family(fam->value);
  if (!family) {
    std::string known;
    for (auto f : {PulseFamily::gaussian, PulseFamily::sin2, PulseFamily::double_gaussian, PulseFamily::flattop,
                   PulseFamily::constant, PulseFamily::oscillating}) {
      known += (known.empty() ? "" : ", ") + std::string(to_string(f));
    }
    config_fail(source, fam->line, "unknown pulse family '" + fam->value + "' (expected one of " + known + ")");
  }
  spec.family = *family;
  spec.amplitude = with_amplitude ? r.number("amplitude", 1.0) : 1.0;
  spec.centers = r.numbers("centers", spec.centers);
  spec.widths = r.numbers("widths", spec.widths);
  spec.ramp = r.number("ramp", spec.ramp);
  spec.depth = r.number("depth", spec.depth);
  spec.period = r.number("period", spec.period);
  return spec;
}

inline EnvelopeSource read_envelope(const std::string& source, const IniSection& s,
                                    const std::filesystem::path& base_dir, const TimeGrid& grid) {
  SectionReader r(source, s);
  EnvelopeSource out;
  if (const auto* f = s.find("file")) {
    if (s.entries.size() > 1) config_fail(source, f->line, "[" + s.name + "] 'file' excludes the family keys");
    std::filesystem::path p(f->value);
    if (p.is_relative()) p = base_dir / p;
    p = p.lexically_normal();
    if (!std::filesystem::is_regular_file(p)) config_fail(source, f->line, "file not found: " + p.string());
    out.file = p;
    try {
      out.render(grid);
    } catch (const Error& err) {
      config_fail(source, f->line, p.string() + ": " + err.what());
    }
    return out;
  }
  out.spec = read_pulse(source, r, true);
  try {
    detail::check_pulse(*out.spec, grid);
  } catch (const Error& err) {
    r.rethrow(err);
  }
  return out;
}

}  // namespace detail

/// Turns a document into a validated RunConfig. File references are resolved
/// against `doc.base_dir` and rewritten as absolute paths in `cfg.doc`.
inline RunConfig resolve_config(IniDocument doc) {
  using detail::SectionReader;
  const std::filesystem::path base_dir = doc.base_dir.empty() ? std::filesystem::current_path() : doc.base_dir;
  const std::string& src = doc.source;
  RunConfig cfg;

  for (const auto& s : doc.sections) {
    if (s.name == "sweep") continue;
    if (s.name.rfind("variant.", 0) == 0) {
      if (s.name.size() == 8) config_fail(src, s.line, "variant needs a name");
      Variant v{s.name.substr(8), {}};
      for (const auto& e : s.entries) {
        detail::split_dotted(src, e);
        v.overrides.push_back(e);
      }
      cfg.variants.push_back(std::move(v));
      continue;
    }
    const auto* schema = detail::find_schema(s.name);
    if (!schema) config_fail(src, s.line, "unknown section [" + s.name + "]");
    for (const auto& e : s.entries) {
      if (!detail::is_known_key(s.name, e.key)) {
        config_fail(src, e.line, "unknown key '" + e.key + "' in [" + s.name + "]");
      }
    }
  }

  if (const auto* s = doc.find("params")) {
    SectionReader r(src, *s);
    cfg.params.rabi_R = r.number("rabi_R", 0.0);
    cfg.params.delta_k = r.number("delta_k", 0.0);
    cfg.params.delta_p = r.number("delta_p", 0.0);
    cfg.params.gamma_rad_ratio = r.number("gamma_rad_ratio", 0.9);
    try {
      validate_params(cfg.params);
    } catch (const Error& err) {
      r.rethrow(err);
    }
  }

  const auto* grid_sec = doc.find("grid");
  if (!grid_sec || !grid_sec->find("t_end")) config_fail(src, grid_sec ? grid_sec->line : 0, "[grid] t_end is required");
  TimeGrid grid;
  {
    SectionReader r(src, *grid_sec);
    cfg.t_end = r.number("t_end", 0.0);
    cfg.dt = r.number("dt", 1e-3);
    try {
      grid = cfg.grid();
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::capacity) throw;
      r.rethrow(err);
    }
  }

  if (const auto* s = doc.find("solver")) {
    SectionReader r(src, *s);
    cfg.solver = r.text("method", "ode");
    if (cfg.solver != "ode" && cfg.solver != "volterra") {
      config_fail(src, r.line_of("method"), "method must be 'ode' or 'volterra'");
    }
    cfg.force_coarse = r.boolean("force_coarse", false);
  }

  if (const auto* s = doc.find("pump")) cfg.pump = detail::read_envelope(src, *s, base_dir, grid);
  if (const auto* s = doc.find("coupling")) {
    cfg.coupling = detail::read_envelope(src, *s, base_dir, grid);
  } else {
    PulseSpec one;
    one.family = PulseFamily::constant;
    cfg.coupling.spec = one;
  }

  const auto* target_sec = doc.find("target");
  const auto* inverse_sec = doc.find("inverse");
  if (target_sec || inverse_sec) {
    if (!target_sec) config_fail(src, inverse_sec->line, "[inverse] requires a [target] section");
    if (!inverse_sec || !inverse_sec->find("eta_target")) {
      config_fail(src, target_sec->line, "[target] requires [inverse] eta_target");
    }
    if (cfg.pump) config_fail(src, doc.find("pump")->line, "[pump] is designed in inverse runs and must be omitted");
    SectionReader tr(src, *target_sec);
    cfg.target = detail::read_pulse(src, tr, false);
    try {
      detail::check_pulse(*cfg.target, grid);
    } catch (const Error& err) {
      tr.rethrow(err);
    }
    SectionReader ir(src, *inverse_sec);
    cfg.eta_target = ir.number("eta_target", 0.0);
    cfg.design.g_min = ir.number("g_min", cfg.design.g_min);
    cfg.design.cutoff_fraction = ir.number("cutoff_fraction", cfg.design.cutoff_fraction);
    cfg.design.phase_tolerance = ir.number("phase_tolerance", cfg.design.phase_tolerance);
    if (!(cfg.eta_target > 0.0) || cfg.eta_target > cfg.params.gamma_rad_ratio) {
      config_fail(src, ir.line_of("eta_target"), "eta_target must lie in (0, gamma_rad_ratio]");
    }
    if (!(cfg.design.g_min > 0.0)) config_fail(src, ir.line_of("g_min"), "g_min must be > 0");
    if (!(cfg.design.cutoff_fraction > 0.0 && cfg.design.cutoff_fraction < 1.0)) {
      config_fail(src, ir.line_of("cutoff_fraction"), "cutoff_fraction must lie in (0, 1)");
    }
    if (!(cfg.design.phase_tolerance > 0.0)) {
      config_fail(src, ir.line_of("phase_tolerance"), "phase_tolerance must be > 0");
    }
  }

  if (const auto* s = doc.find("output")) {
    SectionReader r(src, *s);
    cfg.output.spectrum = r.boolean("spectrum", false);
    cfg.output.delta_half_span = r.number("delta_half_span", cfg.output.delta_half_span);
    cfg.output.delta_points = r.count("delta_points", cfg.output.delta_points);
    cfg.output.stride = r.count("stride", 1);
    if (!(cfg.output.delta_half_span >= 20.0)) {
      config_fail(src, r.line_of("delta_half_span"), "delta_half_span must be >= 20 (linewidths)");
    }
    if (cfg.output.delta_points < 2) config_fail(src, r.line_of("delta_points"), "delta_points must be >= 2");
  }

  if (const auto* s = doc.find("figure")) {
    SectionReader r(src, *s);
    cfg.figure_id = r.text("id", "");
    if (std::find(kFigureIds.begin(), kFigureIds.end(), cfg.figure_id) == kFigureIds.end()) {
      config_fail(src, r.line_of("id"), "unknown figure id '" + cfg.figure_id + "'");
    }
  }

  if (const auto* s = doc.find("sweep")) {
    for (const auto& e : s->entries) {
      detail::split_dotted(src, e);
      SweepAxis axis{e.key, detail::split_list(e.value), e.line};
      if (axis.values.empty()) config_fail(src, e.line, "sweep over '" + e.key + "' has no values");
      cfg.sweep.push_back(std::move(axis));
    }
  }

  // Absolute file paths keep the resolved document self-contained.
  for (const char* name : {"pump", "coupling"}) {
    for (auto& s : doc.sections) {
      if (s.name != name) continue;
      for (auto& e : s.entries) {
        if (e.key == "file") e.value = (name == std::string("pump") ? cfg.pump->file : cfg.coupling.file).string();
      }
    }
  }
  cfg.doc = std::move(doc);
  return cfg;
}

namespace detail {

inline std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

inline void write_pulse(std::ostream& out, const PulseSpec& spec, bool with_amplitude) {
  out << "family = " << to_string(spec.family) << '\n';
  if (with_amplitude) out << "amplitude = " << format_double(spec.amplitude) << '\n';
  switch (spec.family) {
    case PulseFamily::constant: break;
    case PulseFamily::oscillating:
      out << "depth = " << format_double(spec.depth) << "\nperiod = " << format_double(spec.period) << '\n';
      break;
    default:
      out << "centers = " << join_numbers(spec.centers) << "\nwidths = " << join_numbers(spec.widths) << '\n';
      if (spec.family == PulseFamily::flattop) out << "ramp = " << format_double(spec.ramp) << '\n';
  }
}

inline void write_envelope(std::ostream& out, const EnvelopeSource& e) {
  if (e.spec) {
    write_pulse(out, *e.spec, true);
  } else {
    out << "file = " << e.file.string() << '\n';
  }
}

}  // namespace detail

/// Every setting of a single run, defaults included, as an INI document that
/// parses back to the same configuration.
inline std::string canonical_ini(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[params]\nrabi_R = " << format_double(cfg.params.rabi_R) << "\ndelta_k = " << format_double(cfg.params.delta_k)
      << "\ndelta_p = " << format_double(cfg.params.delta_p)
      << "\ngamma_rad_ratio = " << format_double(cfg.params.gamma_rad_ratio) << '\n';
  out << "\n[grid]\nt_end = " << format_double(cfg.t_end) << "\ndt = " << format_double(cfg.dt) << '\n';
  if (cfg.pump) {
    out << "\n[pump]\n";
    detail::write_envelope(out, *cfg.pump);
  }
  out << "\n[coupling]\n";
  detail::write_envelope(out, cfg.coupling);
  if (cfg.target) {
    out << "\n[target]\n";
    detail::write_pulse(out, *cfg.target, false);
    out << "\n[inverse]\neta_target = " << format_double(cfg.eta_target) << "\ng_min = " << format_double(cfg.design.g_min)
        << "\ncutoff_fraction = " << format_double(cfg.design.cutoff_fraction)
        << "\nphase_tolerance = " << format_double(cfg.design.phase_tolerance) << '\n';
  }
  out << "\n[solver]\nmethod = " << cfg.solver << "\nforce_coarse = " << (cfg.force_coarse ? "true" : "false") << '\n';
  out << "\n[output]\nspectrum = " << (cfg.output.spectrum ? "true" : "false")
      << "\ndelta_half_span = " << format_double(cfg.output.delta_half_span) << "\ndelta_points = " << cfg.output.delta_points
      << "\nstride = " << cfg.output.stride << '\n';
  return out.str();
}

/// Command-line overrides applied before validation.
struct ConfigOverrides {
  std::optional<double> dt;
  bool force_coarse = false;
};

inline void apply_overrides(IniDocument& doc, const ConfigOverrides& o) {
  auto set = [&](const std::string& section, const std::string& key, const std::string& value) {
    auto& s = doc.get_or_add(section);
    for (auto& e : s.entries) {
      if (e.key == key) {
        e.value = value;
        return;
      }
    }
    s.entries.push_back(IniEntry{key, value, 0});
  };
  if (o.dt) set("grid", "dt", format_double(*o.dt));
  if (o.force_coarse) set("solver", "force_coarse", "true");
}

inline RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                                   const std::string& source = {}, const ConfigOverrides& overrides = {}) {
  IniDocument doc = parse_ini(text, source);
  doc.base_dir = base_dir;
  apply_overrides(doc, overrides);
  return resolve_config(std::move(doc));
}

inline RunConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {}) {
  if (!std::filesystem::is_regular_file(path)) config_fail(path.string(), 0, "config file not found");
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& err) {
    config_fail(path.string(), 0, err.what());
  }
  // A run manifest carries its own resolved configuration.
  if (path.extension() == ".json") {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("config") || !j["config"].is_string()) {
      config_fail(path.string(), 0, "not a run manifest (no 'config' string)");
    }
    text = j["config"].get<std::string>();
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  return parse_config_text(text, base, path.string(), overrides);
}

// ---------------------------------------------------------------------------
// Sweep and variant expansion.

struct ExpandedRun {
  std::string name;     // directory-safe identifier
  std::string variant;  // empty without variants
  std::vector<std::pair<std::string, std::string>> assignments;  // swept key -> value
  RunConfig config;
};

namespace detail {

inline void set_dotted(IniDocument& doc, const std::string& dotted, const std::string& value, int line) {
  const auto dot = dotted.find('.');
  const std::string section = dotted.substr(0, dot), key = dotted.substr(dot + 1);
  auto& s = doc.get_or_add(section);
  if (s.line == 0) s.line = line;
  for (auto& e : s.entries) {
    if (e.key == key) {
      e.value = value;
      e.line = line;
      return;
    }
  }
  s.entries.push_back(IniEntry{key, value, line});
}

// Numbers compare numerically, anything else as text.
inline bool value_less(const std::string& a, const std::string& b) {
  try {
    return parse_double(a) < parse_double(b);
  } catch (const Error&) {
    return a < b;
  }
}

inline std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' || c == '=')) c = '_';
  }
  return s;
}

}  // namespace detail

/// Variants x Cartesian product of the sweep axes. Within a variant, rows are
/// ordered lexicographically by the swept values (axes in file order).
/// Resolution errors of an individual expansion are deferred to run time so a
/// sweep can record them per row; `cfg` must already be valid itself.
inline std::vector<ExpandedRun> expand(const RunConfig& cfg) {
  IniDocument base = cfg.doc;
  std::erase_if(base.sections, [](const IniSection& s) {
    return s.name == "sweep" || s.name == "figure" || s.name.rfind("variant.", 0) == 0;
  });

  std::vector<std::vector<std::string>> combos = {{}};
  for (const auto& axis : cfg.sweep) {
    auto values = axis.values;
    std::stable_sort(values.begin(), values.end(), detail::value_less);
    std::vector<std::vector<std::string>> next;
    for (const auto& c : combos) {
      for (const auto& v : values) {
        auto row = c;
        row.push_back(v);
        next.push_back(std::move(row));
      }
    }
    combos = std::move(next);
  }

  std::vector<Variant> variants = cfg.variants;
  if (variants.empty()) variants.push_back(Variant{});

  std::vector<ExpandedRun> out;
  for (const auto& v : variants) {
    for (const auto& combo : combos) {
      IniDocument doc = base;
      ExpandedRun run;
      run.variant = v.name;
      for (const auto& o : v.overrides) detail::set_dotted(doc, o.key, o.value, o.line);
      std::string label = v.name;
      for (std::size_t i = 0; i < combo.size(); ++i) {
        detail::set_dotted(doc, cfg.sweep[i].key, combo[i], cfg.sweep[i].line);
        run.assignments.emplace_back(cfg.sweep[i].key, combo[i]);
        label += (label.empty() ? "" : "_") + cfg.sweep[i].key + "=" + combo[i];
      }
      char prefix[16];
      std::snprintf(prefix, sizeof(prefix), "%03zu", out.size());
      run.name = std::string(prefix) + (label.empty() ? "" : "_" + detail::sanitize(label));
      run.config.doc = std::move(doc);
      out.push_back(std::move(run));
    }
  }
  return out;
}

/// Validates one expansion (throws a config error naming the offending line).
inline void resolve_expanded(ExpandedRun& run) {
  run.config = resolve_config(std::move(run.config.doc));
}

}  // namespace photon

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rtoa/core.hpp"
#include "rtoa/detector.hpp"
#include "rtoa/propagator.hpp"
#include "rtoa/wavepacket.hpp"

namespace rtoa {

inline constexpr const char *kVersion = "1.0.0";

/// Flat `key = value` text with `[section]` headers; `#` starts a comment.
/// Keys are stored as "section.key". Later assignments override earlier ones.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream &in, const std::string &origin = "<config>") {
    ConfigFile cfg;
    cfg.merge(in, origin);
    return cfg;
  }

  static ConfigFile parse_string(const std::string &text, const std::string &origin = "<config>") {
    std::istringstream in(text);
    return parse(in, origin);
  }

  static ConfigFile load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path);
    return parse(in, path);
  }

  void merge(std::istream &in, const std::string &origin = "<config>") {
    std::string line, section;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string s = trim(line);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw Error(ErrorCode::Io, where(origin, lineno) + "unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::Io, where(origin, lineno) + "expected key = value");
      const std::string key = trim(s.substr(0, eq));
      if (key.empty()) throw Error(ErrorCode::Io, where(origin, lineno) + "empty key");
      values_[section.empty() ? key : section + "." + key] = trim(s.substr(eq + 1));
    }
  }

  void merge(const ConfigFile &other) {
    for (const auto &[k, v] : other.values_) values_[k] = v;
  }

  void set(const std::string &key, const std::string &value) { values_[key] = value; }
  bool has(const std::string &key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string> &entries() const { return values_; }

  std::optional<std::string> get(const std::string &key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string get_string(const std::string &key, const std::string &fallback) const {
    return get(key).value_or(fallback);
  }

  double get_double(const std::string &key, double fallback) const {
    const auto v = get(key);
    return v ? to_double(*v, key) : fallback;
  }

  std::uint64_t get_uint(const std::string &key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
      throw Error(ErrorCode::Io, "config key " + key + ": expected a non-negative integer, got '" + *v + "'");
    return out;
  }

  std::vector<double> get_list(const std::string &key, const std::vector<double> &fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    for (std::string item; std::getline(ss, item, ',');) {
      const std::string t = trim(item);
      if (!t.empty()) out.push_back(to_double(t, key));
    }
    return out;
  }

  /// Serialization in canonical form (sorted keys, grouped by section).
  std::string str() const {
    std::ostringstream out;
    std::string current = "\x01";
    for (const auto &[k, v] : values_) {
      const auto dot = k.find('.');
      const std::string section = dot == std::string::npos ? "" : k.substr(0, dot);
      const std::string key = dot == std::string::npos ? k : k.substr(dot + 1);
      if (section != current) {
        if (current != "\x01") out << '\n';
        if (!section.empty()) out << '[' << section << "]\n";
        current = section;
      }
      out << key << " = " << v << '\n';
    }
    return out.str();
  }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  static std::string where(const std::string &origin, int lineno) {
    return origin + ":" + std::to_string(lineno) + ": ";
  }

  static double to_double(const std::string &s, const std::string &key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw Error(ErrorCode::Io, "config key " + key + ": expected a number, got '" + s + "'");
    return out;
  }

  std::map<std::string, std::string> values_;
};

/// Fully resolved parameters of one CLI run.
struct RunConfig {
  PacketSpec packet;
  WindowDetector detector;
  EvolutionConfig evolution;
  bool auto_tau_max = true;

  // Scans: p0 values with their step sizes (one step for all, or one per p0).
  std::vector<double> scan_p0{0.75};
  std::vector<double> scan_dtau{0.001};
  std::vector<double> scan_height{1e-5};
  std::vector<double> velocities{0.0, 0.5, 0.9};
  std::vector<double> kappas{0.0, 1.0};
  double richardson_lambda = 1.5;

  // initial-state surface
  double surface_t_min = -1.0, surface_t_max = 1.0;
  double surface_x_min = -2.0, surface_x_max = 1.0;
  std::uint64_t surface_nt = 41, surface_nx = 301;

  // pdp
  std::uint64_t trajectories = 10000;
  double pdp_height = 5e-3;
  double pdp_width = 1.0;

  std::uint64_t seed = 1;
  unsigned threads = 0;

  /// Step size for scan entry i.
  double dtau_for(std::size_t i) const {
    if (scan_dtau.empty()) return evolution.dtau;
    return scan_dtau.size() == 1 ? scan_dtau.front() : scan_dtau.at(i);
  }

  void validate() const {
    packet.validate();
    detector.validate();
    evolution.validate();
    if (scan_p0.empty()) throw Error(ErrorCode::InvalidArgument, "scan.p0 must not be empty");
    if (scan_dtau.size() > 1 && scan_dtau.size() != scan_p0.size())
      throw Error(ErrorCode::InvalidArgument, "scan.dtau must hold one value or one per scan.p0 entry");
    for (double d : scan_dtau)
      if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "scan.dtau entries must be positive");
    for (double p : scan_p0) PacketSpec{p, packet.eta, packet.x0, packet.t0}.validate();
    for (double w : scan_height)
      if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "scan.height entries must be >= 0");
    for (double v : velocities) require_subluminal(v);
    for (double k : kappas)
      if (!(k >= 0.0)) throw Error(ErrorCode::InvalidArgument, "scan.kappa entries must be >= 0");
    if (!(richardson_lambda > 1.0)) throw Error(ErrorCode::InvalidArgument, "scan.richardson_lambda must exceed 1");
    if (!(surface_t_max > surface_t_min) || !(surface_x_max > surface_x_min) || surface_nt < 2 || surface_nx < 2)
      throw Error(ErrorCode::InvalidArgument, "initial_state surface window is empty");
    if (trajectories == 0) throw Error(ErrorCode::InvalidArgument, "pdp.trajectories must be positive");
    WindowDetector{pdp_height, pdp_width, detector.edge, detector.position}.validate();
  }
};

inline RunConfig resolve(const ConfigFile &c) {
  RunConfig r;
  r.packet.p0 = c.get_double("packet.p0", r.packet.p0);
  r.packet.eta = c.get_double("packet.eta", r.packet.eta);
  r.packet.x0 = c.get_double("packet.x0", r.packet.x0);
  r.packet.t0 = c.get_double("packet.t0", r.packet.t0);

  r.detector.height = c.get_double("detector.height", r.detector.height);
  r.detector.width = c.get_double("detector.width", r.detector.width);
  r.detector.edge = c.get_double("detector.edge", r.detector.edge);
  r.detector.position = c.get_double("detector.position", r.detector.position);

  r.evolution.dtau = c.get_double("grid.dtau", r.evolution.dtau);
  r.evolution.dx = r.evolution.dtau;
  r.evolution.x_lo = c.get_double("grid.x_lo", r.evolution.x_lo);
  r.evolution.x_hi = c.get_double("grid.x_hi", r.evolution.x_hi);
  const std::string tau_max = c.get_string("grid.tau_max", "auto");
  r.auto_tau_max = tau_max == "auto";
  if (!r.auto_tau_max) r.evolution.tau_max = c.get_double("grid.tau_max", r.evolution.tau_max);
  const std::string scheme = c.get_string("grid.scheme", "spectral");
  if (scheme == "spectral")
    r.evolution.scheme = FreeScheme::Spectral;
  else if (scheme == "light-cone")
    r.evolution.scheme = FreeScheme::LightCone;
  else
    throw Error(ErrorCode::Io, "grid.scheme must be 'spectral' or 'light-cone'");

  r.scan_p0 = c.get_list("scan.p0", r.scan_p0);
  r.scan_dtau = c.get_list("scan.dtau", {r.evolution.dtau});
  r.scan_height = c.get_list("scan.height", r.scan_height);
  r.velocities = c.get_list("scan.velocity", r.velocities);
  r.kappas = c.get_list("scan.kappa", r.kappas);
  r.richardson_lambda = c.get_double("scan.richardson_lambda", r.richardson_lambda);

  r.surface_t_min = c.get_double("initial_state.t_min", r.surface_t_min);
  r.surface_t_max = c.get_double("initial_state.t_max", r.surface_t_max);
  r.surface_x_min = c.get_double("initial_state.x_min", r.surface_x_min);
  r.surface_x_max = c.get_double("initial_state.x_max", r.surface_x_max);
  r.surface_nt = c.get_uint("initial_state.nt", r.surface_nt);
  r.surface_nx = c.get_uint("initial_state.nx", r.surface_nx);

  r.trajectories = c.get_uint("pdp.trajectories", r.trajectories);
  r.pdp_height = c.get_double("pdp.height", r.pdp_height);
  r.pdp_width = c.get_double("pdp.width", r.pdp_width);

  r.seed = c.get_uint("run.seed", r.seed);
  r.threads = static_cast<unsigned>(c.get_uint("run.threads", r.threads));
  r.validate();
  return r;
}

// ---------------------------------------------------------------------------
// Presets

namespace detail {

inline constexpr const char *kCommon = R"(
[packet]
p0 = 0.75
eta = 0.1
x0 = -1
t0 = 0

[detector]
height = 1e-5
width = 0.01
edge = 0.002
position = 0

[grid]
x_lo = -6
x_hi = 4
dtau = 0.001
tau_max = auto
scheme = spectral

[scan]
richardson_lambda = 1.5

[pdp]
trajectories = 10000
height = 5e-3
width = 1.0

[run]
seed = 1
threads = 0
)";

// Desk variants: coarser lattice and a smaller box.
inline constexpr const char *kDesk = R"(
[grid]
x_lo = -5
x_hi = 2
dtau = 0.002
[scan]
dtau = 0.002
)";

inline constexpr const char *kSurface = R"(
[packet]
p0 = 0.75
[initial_state]
t_min = -1
t_max = 1
nt = 41
x_min = -2
x_max = 1
nx = 301
)";

inline constexpr const char *kScan = R"(
[scan]
p0 = 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0
dtau = 0.001, 0.001, 0.001, 0.00075, 0.00075, 0.0005, 0.00043, 0.000375
kappa = 0, 1
)";

inline constexpr const char *kScanDesk = R"(
[scan]
p0 = 0.5, 0.75, 1.0, 2.0
dtau = 0.002
kappa = 0, 1
)";

inline constexpr const char *kDensities = R"(
[scan]
p0 = 0.75, 1.5, 2.0
dtau = 0.001, 0.0005, 0.000375
)";

inline constexpr const char *kDensitiesDesk = R"(
[scan]
p0 = 0.75, 1.5, 2.0
dtau = 0.002
)";

inline constexpr const char *kPoint = R"(
[scan]
p0 = 0.75, 2.0
dtau = 0.001, 0.000375
kappa = 0, 1
)";

inline constexpr const char *kPointDesk = R"(
[scan]
p0 = 0.75, 2.0
dtau = 0.002
kappa = 0, 1
)";

inline constexpr const char *kFrames = R"(
[packet]
p0 = 2.0
[scan]
p0 = 2.0
dtau = 0.000375
velocity = 0, 0.5, 0.9
)";

inline constexpr const char *kFramesDesk = R"(
[packet]
p0 = 2.0
[scan]
p0 = 2.0
dtau = 0.002
velocity = 0, 0.5, 0.9
)";

}  // namespace detail

inline std::vector<std::string> preset_names() {
  return {"surface", "surface-desk", "scan",  "scan-desk",  "densities",
          "densities-desk", "point", "point-desk", "frames", "frames-desk"};
}

inline ConfigFile preset(const std::string &name) {
  using namespace detail;
  static const std::map<std::string, std::vector<const char *>> table{
      {"surface", {kCommon, kSurface}},       {"surface-desk", {kCommon, kDesk, kSurface}},
      {"scan", {kCommon, kScan}},             {"scan-desk", {kCommon, kDesk, kScanDesk}},
      {"densities", {kCommon, kDensities}},   {"densities-desk", {kCommon, kDesk, kDensitiesDesk}},
      {"point", {kCommon, kPoint}},           {"point-desk", {kCommon, kDesk, kPointDesk}},
      {"frames", {kCommon, kFrames}},         {"frames-desk", {kCommon, kDesk, kFramesDesk}},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
  ConfigFile c;
  for (const char *text : it->second) c.merge(ConfigFile::parse_string(text, "preset " + name));
  c.set("run.preset", name);
  return c;
}

}  // namespace rtoa

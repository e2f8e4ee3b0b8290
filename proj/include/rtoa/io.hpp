#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "rtoa/config.hpp"
#include "rtoa/core.hpp"
#include "rtoa/propagator.hpp"

namespace rtoa {

/// Round-trip exact text form of a double.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void ensure_directory(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

/// CSV file with `# key = value` metadata lines, one header row and numeric rows.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path &path, const std::vector<std::pair<std::string, std::string>> &metadata,
            const std::vector<std::string> &columns)
      : path_(path), columns_(columns.size()) {
    if (path.has_parent_path()) ensure_directory(path.parent_path());
    out_.open(path);
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (const auto &[k, v] : metadata) out_ << "# " << k << " = " << v << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  void row(const std::vector<double> &values) {
    if (values.size() != columns_) throw Error(ErrorCode::Io, "CsvWriter: row width mismatch in " + path_.string());
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
    if (!out_) throw Error(ErrorCode::Io, "write failed: " + path_.string());
  }

  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::size_t columns_;
  std::ofstream out_;
};

/// Numeric content of a CSV written by CsvWriter.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string &name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw Error(ErrorCode::Io, "no column " + name);
  }
};

inline CsvTable read_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  CsvTable t;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) t.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 3));
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t comma; (comma = line.find(',', start)) != std::string::npos; start = comma + 1)
      cells.push_back(line.substr(start, comma - start));
    cells.push_back(line.substr(start));
    if (t.columns.empty()) {
      t.columns = std::move(cells);
      continue;
    }
    std::vector<double> row;
    for (const auto &c : cells) row.push_back(std::stod(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Per-step evolution record: tau, d, S, leakage.
inline std::filesystem::path write_evolution_csv(const std::filesystem::path &path, const EvolutionRecord &rec,
                                                 const std::vector<std::pair<std::string, std::string>> &metadata = {}) {
  CsvWriter csv(path, metadata, {"tau", "d", "S", "leakage"});
  for (std::size_t i = 0; i < rec.tau.size(); ++i)
    csv.row({rec.tau[i], rec.detection_density[i], rec.survival[i], rec.leakage[i]});
  return csv.path();
}

inline std::string format_list(const std::vector<double> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
  return s;
}

/// Every resolved parameter of a run, in config form (round-trips through resolve()).
inline ConfigFile to_config(const RunConfig &r) {
  ConfigFile c;
  c.set("packet.p0", format_number(r.packet.p0));
  c.set("packet.eta", format_number(r.packet.eta));
  c.set("packet.x0", format_number(r.packet.x0));
  c.set("packet.t0", format_number(r.packet.t0));
  c.set("detector.height", format_number(r.detector.height));
  c.set("detector.width", format_number(r.detector.width));
  c.set("detector.edge", format_number(r.detector.edge));
  c.set("detector.position", format_number(r.detector.position));
  c.set("grid.dtau", format_number(r.evolution.dtau));
  c.set("grid.x_lo", format_number(r.evolution.x_lo));
  c.set("grid.x_hi", format_number(r.evolution.x_hi));
  c.set("grid.tau_max", r.auto_tau_max ? std::string("auto") : format_number(r.evolution.tau_max));
  c.set("grid.scheme", r.evolution.scheme == FreeScheme::Spectral ? "spectral" : "light-cone");
  c.set("scan.p0", format_list(r.scan_p0));
  c.set("scan.dtau", format_list(r.scan_dtau));
  c.set("scan.height", format_list(r.scan_height));
  c.set("scan.velocity", format_list(r.velocities));
  c.set("scan.kappa", format_list(r.kappas));
  c.set("scan.richardson_lambda", format_number(r.richardson_lambda));
  c.set("initial_state.t_min", format_number(r.surface_t_min));
  c.set("initial_state.t_max", format_number(r.surface_t_max));
  c.set("initial_state.x_min", format_number(r.surface_x_min));
  c.set("initial_state.x_max", format_number(r.surface_x_max));
  c.set("initial_state.nt", std::to_string(r.surface_nt));
  c.set("initial_state.nx", std::to_string(r.surface_nx));
  c.set("pdp.trajectories", std::to_string(r.trajectories));
  c.set("pdp.height", format_number(r.pdp_height));
  c.set("pdp.width", format_number(r.pdp_width));
  c.set("run.seed", std::to_string(r.seed));
  c.set("run.threads", std::to_string(r.threads));
  return c;
}

/// Writes the fully resolved configuration, the code version and the command, in config
/// format so that `--config manifest.cfg` repeats the run.
inline std::filesystem::path write_manifest(const std::filesystem::path &dir, const std::string &command,
                                            const RunConfig &run) {
  ensure_directory(dir);
  ConfigFile resolved = to_config(run);
  resolved.set("manifest.command", command);
  resolved.set("manifest.version", kVersion);
  const auto path = dir / ("manifest-" + command + ".cfg");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "# rtoa run manifest\n" << resolved.str();
  return path;
}

}  // namespace rtoa

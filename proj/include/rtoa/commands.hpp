#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rtoa/arrival.hpp"
#include "rtoa/config.hpp"
#include "rtoa/experiment.hpp"
#include "rtoa/io.hpp"
#include "rtoa/parallel.hpp"
#include "rtoa/pdp.hpp"
#include "rtoa/point_analytic.hpp"
#include "rtoa/stats.hpp"

namespace rtoa {

/// Outcome of one CLI command: written files, diagnostics and the number of rejected runs.
struct CommandResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> messages;
  int rejected = 0;

  int exit_code() const { return rejected == 0 ? 0 : 1; }
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline Metadata base_metadata(const std::string &command, const RunConfig &r) {
  return {{"command", command}, {"version", kVersion}, {"seed", std::to_string(r.seed)}};
}

inline std::string tag(double v) { return format_number(v); }

/// Evolution settings for a packet at step dtau, with tau_max resolved.
inline EvolutionConfig scan_config(const RunConfig &r, const PacketSpec &packet, double dtau, double detector_x) {
  EvolutionConfig cfg = r.evolution;
  cfg.dtau = cfg.dx = dtau;
  if (r.auto_tau_max) cfg.tau_max = suggested_tau_max(packet, detector_x, cfg.units);
  return cfg;
}

inline PacketSpec with_momentum(PacketSpec p, double p0) {
  p.p0 = p0;
  return p;
}

/// Runs a simulation and converts rejections into a message.
inline std::optional<ArrivalResult> try_arrival(const PacketSpec &packet, const WindowDetector &det,
                                                const EvolutionConfig &cfg, std::string &error) {
  try {
    ArrivalResult r = simulate_arrival(packet, det, cfg);
    if (!r.record.tail_ok) {
      error = "tail criterion failed (density at tau_max above 1e-6 of its peak); increase grid.tau_max";
      return std::nullopt;
    }
    return r;
  } catch (const Error &e) {
    error = e.what();
    return std::nullopt;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// |Psi(ct, x)|^2 of components 1 and 4 over the configured (t, x) window.
inline CommandResult cmd_initial_state(const RunConfig &r, const std::filesystem::path &out) {
  CommandResult res;
  const SpectralPacket sp(r.packet, r.evolution.units);
  const auto nt = static_cast<std::size_t>(r.surface_nt), nx = static_cast<std::size_t>(r.surface_nx);
  std::vector<double> ts(nt), xs(nx);
  for (std::size_t i = 0; i < nt; ++i)
    ts[i] = r.surface_t_min + (r.surface_t_max - r.surface_t_min) * static_cast<double>(i) / static_cast<double>(nt - 1);
  for (std::size_t j = 0; j < nx; ++j)
    xs[j] = r.surface_x_min + (r.surface_x_max - r.surface_x_min) * static_cast<double>(j) / static_cast<double>(nx - 1);

  std::vector<std::vector<Spinor4>> psi(nt, std::vector<Spinor4>(nx));
  parallel_for(nt, r.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < nx; ++j) psi[i][j] = sp.evaluate(ts[i], xs[j]);
  });

  // Norm of component 1 on the row closest to t0.
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < nt; ++i)
    if (std::abs(ts[i] - r.packet.t0) < std::abs(ts[i0] - r.packet.t0)) i0 = i;
  std::vector<double> row(nx);
  for (std::size_t j = 0; j < nx; ++j) row[j] = std::norm(psi[i0][j][0]);
  const double norm1 = trapezoid(xs, row);

  for (const int comp : {0, 3}) {
    Metadata meta = detail::base_metadata("initial-state", r);
    meta.emplace_back("p0", format_number(r.packet.p0));
    meta.emplace_back("component", std::to_string(comp + 1));
    meta.emplace_back("component1_norm_at_t", format_number(ts[i0]) + " : " + format_number(norm1));
    CsvWriter csv(out / ("initial_state_component" + std::to_string(comp + 1) + ".csv"), meta, {"t", "x", "density"});
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t j = 0; j < nx; ++j) csv.row({ts[i], xs[j], std::norm(psi[i][j][comp])});
    res.files.push_back(csv.path());
  }
  res.messages.push_back("component-1 norm at t = " + format_number(ts[i0]) + ": " + format_number(norm1));
  return res;
}

/// Expected arrival time versus p0 with Richardson error, mechanics reference and
/// point-detector expectations for each configured kappa.
inline CommandResult cmd_arrival_scan(const RunConfig &r, const std::filesystem::path &out) {
  struct Row {
    std::vector<double> values;
    std::string error;
    std::string note;
  };
  const std::size_t n = r.scan_p0.size();
  std::vector<Row> rows(n);
  const double lambda = r.richardson_lambda;
  parallel_for(n, r.threads, [&](std::size_t i) {
    const PacketSpec packet = detail::with_momentum(r.packet, r.scan_p0[i]);
    const double dtau = r.dtau_for(i);
    const EvolutionConfig fine_cfg = detail::scan_config(r, packet, dtau, r.detector.position);
    auto fine = detail::try_arrival(packet, r.detector, fine_cfg, rows[i].error);
    if (!fine) return;
    // Coarse partner at lambda * dtau; if that under-resolves the detector edge, use
    // the pair (dtau / lambda, dtau) instead.
    double other_dtau = lambda * dtau;
    if (other_dtau > r.detector.edge) {
      other_dtau = dtau / lambda;
      rows[i].note = "richardson pair (dtau/lambda, dtau)";
    }
    EvolutionConfig other_cfg = fine_cfg;
    other_cfg.dtau = other_cfg.dx = other_dtau;
    auto other = detail::try_arrival(packet, r.detector, other_cfg, rows[i].error);
    if (!other) return;
    const bool coarse_is_other = other_dtau > dtau;
    const double err = coarse_is_other ? richardson_error(other->expected_time, fine->expected_time, lambda)
                                       : richardson_error(fine->expected_time, other->expected_time, lambda);
    std::vector<double> v{r.scan_p0[i],
                          dtau,
                          fine->expected_time,
                          err,
                          mechanics_time(r.scan_p0[i], std::abs(r.detector.position - packet.x0)),
                          fine->density.P_inf,
                          fine->negative_time_mass,
                          fine->record.boundary_leakage()};
    const auto grid = uniform_tau_grid(fine_cfg.tau_max, dtau);
    for (double kappa : r.kappas) {
      const PointDetectorSolution sol(packet, PointDetector{kappa, r.detector.position}, r.evolution.units);
      v.push_back(expected_time(sol.arrival_density(grid)));
    }
    rows[i].values = std::move(v);
  });

  CommandResult res;
  Metadata meta = detail::base_metadata("arrival-scan", r);
  meta.emplace_back("detector_height", format_number(r.detector.height));
  meta.emplace_back("detector_width", format_number(r.detector.width));
  meta.emplace_back("richardson_lambda", format_number(lambda));
  std::vector<std::string> cols{"p0", "dtau", "T", "error", "t_RM", "P_inf", "neg_mass", "leakage"};
  for (double k : r.kappas) cols.push_back("T_point_kappa_" + detail::tag(k));
  for (std::size_t i = 0; i < n; ++i)
    if (!rows[i].note.empty()) meta.emplace_back("note_p0_" + detail::tag(r.scan_p0[i]), rows[i].note);
  CsvWriter csv(out / "arrival_scan.csv", meta, cols);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].error.empty()) {
      ++res.rejected;
      res.messages.push_back("p0 = " + detail::tag(r.scan_p0[i]) + " rejected: " + rows[i].error);
      continue;
    }
    csv.row(rows[i].values);
  }
  res.files.push_back(csv.path());
  return res;
}

/// Lab-frame arrival densities p(t), one block per p0 and detector height.
inline CommandResult cmd_density(const RunConfig &r, const std::filesystem::path &out) {
  struct Job {
    double p0, dtau, height;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < r.scan_p0.size(); ++i)
    for (double h : r.scan_height) jobs.push_back({r.scan_p0[i], r.dtau_for(i), h});
  std::vector<std::optional<ArrivalResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), r.threads, [&](std::size_t j) {
    const PacketSpec packet = detail::with_momentum(r.packet, jobs[j].p0);
    WindowDetector det = r.detector;
    det.height = jobs[j].height;
    results[j] = detail::try_arrival(packet, det, detail::scan_config(r, packet, jobs[j].dtau, det.position), errors[j]);
  });

  CommandResult res;
  Metadata meta = detail::base_metadata("density", r);
  Metadata summary_meta = meta;
  CsvWriter csv(out / "density.csv", meta, {"p0", "height", "tau", "t", "p"});
  CsvWriter summary(out / "density_summary.csv", summary_meta, {"p0", "height", "T", "P_inf", "neg_mass", "t_RM"});
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!results[j]) {
      ++res.rejected;
      res.messages.push_back("p0 = " + detail::tag(jobs[j].p0) + ", W = " + detail::tag(jobs[j].height) +
                             " rejected: " + errors[j]);
      continue;
    }
    const auto &a = results[j]->density;
    for (std::size_t k = 0; k < a.tau.size(); ++k)
      csv.row({jobs[j].p0, jobs[j].height, a.tau[k], a.tau[k] + a.lab_offset, a.P[k]});
    res.files.push_back(write_evolution_csv(
        out / ("evolution_p0_" + detail::tag(jobs[j].p0) + "_W_" + detail::tag(jobs[j].height) + ".csv"),
        results[j]->record, meta));
    summary.row({jobs[j].p0, jobs[j].height, results[j]->expected_time, a.P_inf, results[j]->negative_time_mass,
                 mechanics_time(jobs[j].p0, std::abs(r.detector.position - r.packet.x0))});
  }
  res.files.push_back(csv.path());
  res.files.push_back(summary.path());
  return res;
}

/// Arrival density of one p0 seen from frames moving with the configured velocities.
inline CommandResult cmd_frames(const RunConfig &r, const std::filesystem::path &out) {
  CommandResult res;
  const PacketSpec packet = detail::with_momentum(r.packet, r.scan_p0.front());
  std::string error;
  const auto result =
      detail::try_arrival(packet, r.detector, detail::scan_config(r, packet, r.dtau_for(0), r.detector.position), error);
  if (!result) {
    res.rejected = 1;
    res.messages.push_back("frames run rejected: " + error);
    return res;
  }
  const TimeDensity lab = lab_density(result->density);
  Metadata meta = detail::base_metadata("frames", r);
  meta.emplace_back("p0", format_number(packet.p0));
  CsvWriter csv(out / "frames.csv", meta, {"v", "t", "p"});
  CsvWriter summary(out / "frames_summary.csv", meta, {"v", "T_boosted_density", "T_boosted_expectation", "mass"});
  for (double v : r.velocities) {
    const TimeDensity b = boost_density(lab, v);
    for (std::size_t k = 0; k < b.t.size(); ++k) csv.row({v, b.t[k], b.p[k]});
    summary.row({v, expected_time(b), boost_expectation(expected_time(lab), v), total_mass(b)});
  }
  res.files.push_back(csv.path());
  res.files.push_back(summary.path());
  return res;
}

/// Point-detector densities P(tau) for each (p0, kappa); for kappa = 0 the sup-norm
/// distance to the wide-detector density on the same grid is reported.
inline CommandResult cmd_point(const RunConfig &r, const std::filesystem::path &out) {
  struct Job {
    std::size_t scan;
    double kappa;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < r.scan_p0.size(); ++i)
    for (double k : r.kappas) jobs.push_back({i, k});
  std::vector<ArrivalDensity> dens(jobs.size());
  std::vector<double> wide_diff(jobs.size(), std::nan(""));
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), r.threads, [&](std::size_t j) {
    const PacketSpec packet = detail::with_momentum(r.packet, r.scan_p0[jobs[j].scan]);
    const double dtau = r.dtau_for(jobs[j].scan);
    const EvolutionConfig cfg = detail::scan_config(r, packet, dtau, r.detector.position);
    try {
      const PointDetectorSolution sol(packet, PointDetector{jobs[j].kappa, r.detector.position}, r.evolution.units);
      dens[j] = sol.arrival_density(uniform_tau_grid(cfg.tau_max, dtau));
    } catch (const Error &e) {
      errors[j] = e.what();
      return;
    }
    if (jobs[j].kappa == 0.0) {
      const auto wide = detail::try_arrival(packet, r.detector, cfg, errors[j]);
      if (!wide) return;
      const auto &w = wide->density.P;
      const auto &p = dens[j].P;
      const double peak = *std::max_element(w.begin(), w.end());
      double d = 0.0;
      for (std::size_t k = 0; k < std::min(w.size(), p.size()); ++k) d = std::max(d, std::abs(w[k] - p[k]));
      wide_diff[j] = d / peak;
    }
  });

  CommandResult res;
  Metadata meta = detail::base_metadata("point", r);
  CsvWriter csv(out / "point.csv", meta, {"p0", "kappa", "tau", "t", "P"});
  CsvWriter summary(out / "point_summary.csv", meta, {"p0", "kappa", "T", "P_inf", "sup_rel_diff_wide"});
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const double p0 = r.scan_p0[jobs[j].scan];
    if (!errors[j].empty()) {
      ++res.rejected;
      res.messages.push_back("p0 = " + detail::tag(p0) + ", kappa = " + detail::tag(jobs[j].kappa) +
                             " rejected: " + errors[j]);
      continue;
    }
    const auto &a = dens[j];
    for (std::size_t k = 0; k < a.tau.size(); ++k) csv.row({p0, jobs[j].kappa, a.tau[k], a.tau[k] + a.lab_offset, a.P[k]});
    summary.row({p0, jobs[j].kappa, expected_time(a), a.P_inf, wide_diff[j]});
  }
  res.files.push_back(csv.path());
  res.files.push_back(summary.path());
  return res;
}

/// Result of the continuous-detection sampling experiment.
struct PdpReport {
  std::size_t trajectories = 0;
  std::size_t detected = 0;
  double P_inf = 0.0;
  double sigma = 0.0;
  double ks = 0.0;
  std::size_t order_violations = 0;
  std::size_t negative_time_detections = 0;
  PdpEnsemble ensemble;
  EvolutionRecord deterministic;
  TwoVector preparation;
};

/// Samples trajectories against a single window detector of height pdp.height and width
/// pdp.width and compares them with the deterministic arrival density.
inline PdpReport run_pdp(const RunConfig &r) {
  const PacketSpec &packet = r.packet;
  const WindowDetector det{r.pdp_height, r.pdp_width, r.detector.edge, r.detector.position};
  det.validate();
  const double far_edge = det.position + 0.5 * det.width;
  EvolutionConfig cfg = r.evolution;
  cfg.dtau = cfg.dx = r.dtau_for(0);
  // The transmitted remainder must stay on the lattice until the density has decayed.
  cfg.x_hi = std::max(cfg.x_hi, far_edge + 1.0);
  if (r.auto_tau_max) cfg.tau_max = suggested_tau_max(packet, far_edge, cfg.units);

  const SpectralPacket sp(packet, cfg.units);
  const TwoVector prep{packet.t0, packet.x0};
  const PlaneState initial = prepare_plane_state(sp, light_cone_start(packet, det.position).t, cfg);
  const std::vector<DetectorChannel> channels{make_channel(det, prep, initial, cfg.units)};

  PdpReport rep;
  rep.preparation = prep;
  rep.deterministic = evolve(initial, DetectorSpec{det}, cfg);
  if (!rep.deterministic.tail_ok)
    throw Error(ErrorCode::InvalidArgument, "pdp: tail criterion failed; increase grid.tau_max");
  rep.ensemble = pdp_ensemble(initial, channels, prep, cfg, static_cast<std::size_t>(r.trajectories), r.seed, r.threads);
  rep.trajectories = rep.ensemble.outcomes.size();
  rep.P_inf = trapezoid(rep.deterministic.tau, rep.deterministic.detection_density);
  rep.sigma = binomial_sigma(rep.P_inf, rep.trajectories);
  std::vector<double> taus;
  for (const auto &o : rep.ensemble.outcomes) {
    if (!o.detected) continue;
    taus.push_back(o.tau);
    if (!validate_event_order({{0.0, prep, 0}, {o.tau, o.point, 1}}).ok) ++rep.order_violations;
    if (o.point.t < 0.0) ++rep.negative_time_detections;
  }
  rep.detected = taus.size();
  if (!taus.empty()) rep.ks = ks_statistic(taus, TabulatedCdf(rep.deterministic.tau, rep.deterministic.detection_density));
  return rep;
}

inline CommandResult cmd_pdp(const RunConfig &r, const std::filesystem::path &out) {
  CommandResult res;
  PdpReport rep;
  try {
    rep = run_pdp(r);
  } catch (const Error &e) {
    res.rejected = 1;
    res.messages.push_back(std::string("pdp run rejected: ") + e.what());
    return res;
  }
  Metadata meta = detail::base_metadata("pdp", r);
  meta.emplace_back("detector_height", format_number(r.pdp_height));
  meta.emplace_back("detector_width", format_number(r.pdp_width));
  CsvWriter traj(out / "pdp_trajectories.csv", meta, {"index", "detected", "tau", "t", "x", "channel"});
  for (std::size_t i = 0; i < rep.ensemble.outcomes.size(); ++i) {
    const auto &o = rep.ensemble.outcomes[i];
    traj.row({static_cast<double>(i), o.detected ? 1.0 : 0.0, o.detected ? o.tau : std::nan(""),
              o.detected ? o.point.t : std::nan(""), o.detected ? o.point.x : std::nan(""), static_cast<double>(o.channel)});
  }
  CsvWriter summary(out / "pdp_summary.csv", meta,
                    {"N", "detected", "P_inf", "sigma", "ks", "order_violations", "negative_time_detections"});
  summary.row({static_cast<double>(rep.trajectories), static_cast<double>(rep.detected), rep.P_inf, rep.sigma, rep.ks,
               static_cast<double>(rep.order_violations), static_cast<double>(rep.negative_time_detections)});
  res.files.push_back(traj.path());
  res.files.push_back(summary.path());
  res.messages.push_back("detected " + std::to_string(rep.detected) + " / " + std::to_string(rep.trajectories) +
                         ", P_inf = " + format_number(rep.P_inf) + ", KS = " + format_number(rep.ks));
  if (rep.order_violations) {
    ++res.rejected;
    res.messages.push_back(std::to_string(rep.order_violations) + " detections violate the event order");
  }
  return res;
}

/// Dispatch by subcommand name; writes the manifest next to the outputs.
inline CommandResult run_command(const std::string &name, const RunConfig &r, const std::filesystem::path &out) {
  static const std::vector<std::pair<std::string, std::function<CommandResult(const RunConfig &, const std::filesystem::path &)>>>
      table{{"initial-state", cmd_initial_state}, {"arrival-scan", cmd_arrival_scan}, {"density", cmd_density},
            {"frames", cmd_frames},               {"point", cmd_point},               {"pdp", cmd_pdp}};
  for (const auto &[n, fn] : table) {
    if (n != name) continue;
    ensure_directory(out);
    CommandResult res = fn(r, out);
    res.files.push_back(write_manifest(out, name, r));
    return res;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + name + "'");
}

}  // namespace rtoa

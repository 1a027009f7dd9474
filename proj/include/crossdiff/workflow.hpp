#ifndef CROSSDIFF_WORKFLOW_HPP
#define CROSSDIFF_WORKFLOW_HPP

// Command implementations behind the crossdiff executable. Each returns the
// process exit status; argument parsing lives in tools/crossdiff.cpp.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "crossdiff/csv.hpp"
#include "crossdiff/diffusion.hpp"
#include "crossdiff/metrics.hpp"
#include "crossdiff/pgm.hpp"
#include "crossdiff/regularize.hpp"
#include "crossdiff/scalespace.hpp"
#include "crossdiff/solver.hpp"
#include "crossdiff/synthetic.hpp"

namespace crossdiff {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int io = 2;
inline constexpr int unstable = 3;
inline constexpr int degenerate_reference = 4;
inline constexpr int property_failed = 5;
}  // namespace exit_code

/// Run parameters shared by filter, experiment and properties. Defaults are
/// h = 1, dt = 0.05, kappa = 10, raw edge variable, flux form, reflect.
struct RunManifest {
  std::string input;
  std::vector<std::string> presets{"ncdf1"};
  std::optional<DiffusionMatrix> matrix;
  double kappa = 10.0;
  std::string strategy = "raw";
  double dt = 0.05;
  double h = 1.0;
  std::size_t steps = 100;
  std::vector<double> snapshots;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::string boundary = "reflect";
  std::string scheme = "fluxform";
  bool clip_input = false;
  std::string out_prefix = "crossdiff";
  std::string u_rescale = "none";
  bool properties = false;
  std::size_t property_steps = 100;
  std::size_t decay_steps = 0;
};

namespace detail {

inline double parse_double(std::string_view text, std::string_view what) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::InvalidParameter, "bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return x;
}

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(sep, start), text.size());
    out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace detail

/// "raw" | "cutoff:<M>" | "smoothed:<sigma>"
inline EdgeVariableStrategy parse_strategy(std::string_view text) {
  const std::string key = detail::lowercase(text);
  if (key == "raw") return RawStrategy{};
  if (key.starts_with("cutoff:")) return CutoffStrategy{detail::parse_double(key.substr(7), "cutoff")};
  if (key.starts_with("smoothed:")) {
    return SmoothedStrategy{detail::parse_double(key.substr(9), "sigma"), std::nullopt};
  }
  throw Error(ErrorCode::InvalidParameter, "unknown strategy '" + std::string(text) + "'");
}

inline BoundaryMode parse_boundary(std::string_view text) {
  const std::string key = detail::lowercase(text);
  if (key == "reflect") return BoundaryMode::Reflect;
  if (key == "periodic") return BoundaryMode::Periodic;
  throw Error(ErrorCode::InvalidParameter, "unknown boundary '" + std::string(text) + "'");
}

inline Scheme parse_scheme(std::string_view text) {
  const std::string key = detail::lowercase(text);
  if (key == "fluxform") return Scheme::FluxForm;
  if (key == "central") return Scheme::CentralLiteral;
  throw Error(ErrorCode::InvalidParameter, "unknown scheme '" + std::string(text) + "'");
}

inline pgm::Rescale parse_rescale(std::string_view text) {
  const std::string key = detail::lowercase(text);
  if (key == "none") return pgm::Rescale::None;
  if (key == "minmax") return pgm::Rescale::MinMax;
  if (key == "symmetric") return pgm::Rescale::Symmetric;
  throw Error(ErrorCode::InvalidParameter, "unknown rescale '" + std::string(text) + "'");
}

/// "d11,d12,d21,d22"
inline DiffusionMatrix parse_matrix(std::string_view text) {
  const auto parts = detail::split(text, ',');
  if (parts.size() != 4) throw Error(ErrorCode::InvalidParameter, "matrix needs four entries");
  return {detail::parse_double(parts[0], "d11"), detail::parse_double(parts[1], "d12"),
          detail::parse_double(parts[2], "d21"), detail::parse_double(parts[3], "d22")};
}

inline std::vector<double> parse_times(std::string_view text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (const auto& p : detail::split(text, ',')) out.push_back(detail::parse_double(p, "time"));
  return out;
}

/// A named diffusion setup: either a preset or the explicit --matrix.
struct NamedMatrix {
  std::string name;
  DiffusionMatrix matrix;
  std::vector<std::string> warnings;
};

inline std::vector<NamedMatrix> resolve_matrices(const RunManifest& m) {
  if (m.matrix) return {NamedMatrix{"matrix", *m.matrix, {}}};
  std::vector<NamedMatrix> out;
  for (const auto& name : m.presets) {
    Preset p = preset(name);
    out.push_back({p.name, p.matrix, p.warnings});
  }
  if (out.empty()) throw Error(ErrorCode::InvalidParameter, "no preset given");
  return out;
}

inline SolverConfig make_config(const RunManifest& m, const DiffusionMatrix& d) {
  SolverConfig c;
  c.matrix = d;
  c.edge_stopping = make_edge_stopping(m.kappa);
  c.strategy = parse_strategy(m.strategy);
  c.boundary = parse_boundary(m.boundary);
  c.scheme = parse_scheme(m.scheme);
  c.dt = m.dt;
  validate_config(c);
  return c;
}

inline ScalarField load_image(const std::string& path, double h) {
  return pgm::to_field(pgm::read_file(path), h);
}

inline ScalarField clip_to_byte_range(const ScalarField& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& x : v) x = std::clamp(x, 0.0, 255.0);
  return ScalarField(f.grid(), std::move(v));
}

inline std::string snapshot_path(const std::string& prefix, std::string_view channel, double t) {
  return prefix + "_" + std::string(channel) + "_t" + csv::format(t) + ".pgm";
}

/// The scale-space property suite: grey shift (C1, 0), contrast reversal,
/// average grey and periodic translation.
inline std::vector<InvarianceReport> run_property_suite(const ChannelPair& pair, const SolverConfig& config,
                                                        std::size_t n_steps,
                                                        const InvarianceParams& params = {}) {
  std::vector<InvarianceReport> out;
  out.push_back(check_invariance(InvarianceKind::GreyShift, pair, config, n_steps, params));
  out.push_back(check_invariance(InvarianceKind::ReverseContrast, pair, config, n_steps, params));
  out.push_back(check_invariance(InvarianceKind::AverageGrey, pair, config, n_steps, params));
  SolverConfig periodic = config;
  periodic.boundary = BoundaryMode::Periodic;
  out.push_back(check_invariance(InvarianceKind::Translation, pair, periodic, n_steps, params));
  return out;
}

/// Number of strict local maxima of a sampled curve (plateaus count once).
inline std::size_t count_local_maxima(const std::vector<double>& y) {
  std::size_t count = 0;
  bool rising = false;
  for (std::size_t k = 1; k < y.size(); ++k) {
    if (y[k] > y[k - 1]) {
      rising = true;
    } else if (y[k] < y[k - 1]) {
      if (rising) ++count;
      rising = false;
    }
  }
  return count;
}

namespace detail {

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::Io: return exit_code::io;
      case ErrorCode::GridMismatch: return exit_code::io;
      case ErrorCode::NonFiniteState: return exit_code::unstable;
      case ErrorCode::DegenerateReference: return exit_code::degenerate_reference;
      default: return exit_code::usage;
    }
  }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return os;
}

}  // namespace detail

/// Filters one image: u0 = image, v0 = 0. Writes snapshot greymaps for both
/// channels and the monitor CSV (also on blow-up, up to the failing step).
inline int cmd_filter(const RunManifest& m, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto matrices = resolve_matrices(m);
    const NamedMatrix& nm = matrices.front();
    for (const auto& w : nm.warnings) err << "warning: " << w << "\n";
    const SolverConfig config = make_config(m, nm.matrix);
    const pgm::Rescale u_rescale = parse_rescale(m.u_rescale);

    ScalarField u0 = load_image(m.input, m.h);
    if (m.clip_input) u0 = clip_to_byte_range(u0);
    const ChannelPair initial{u0, ScalarField::filled(u0.grid(), 0.0)};

    std::vector<double> times = m.snapshots;
    if (times.empty()) times.push_back(static_cast<double>(m.steps) * m.dt);

    const Trajectory traj = run(initial, config, m.steps, times);
    for (const auto& w : traj.warnings) err << "warning: " << w << "\n";

    {
      auto os = detail::open_output(m.out_prefix + "_monitor.csv");
      write_monitor_csv(os, traj.monitors);
    }
    for (const auto& snap : traj.snapshots) {
      pgm::write_field(snapshot_path(m.out_prefix, "u", snap.time), snap.state.u, u_rescale);
      pgm::write_field(snapshot_path(m.out_prefix, "v", snap.time), snap.state.v, pgm::Rescale::Symmetric);
    }
    if (traj.failed) {
      err << "error: " << traj.error << "\n";
      return exit_code::unstable;
    }
    out << "filtered " << m.input << " with " << nm.name << " for " << m.steps << " steps; "
        << traj.snapshots.size() << " snapshot(s) written\n";
    return exit_code::ok;
  });
}

/// Compares a test image with a reference and prints SNR, PSNR, RMSE and the
/// NPB of the test image.
inline int cmd_metrics(const std::string& reference_path, const std::string& test_path,
                       const std::string& out_prefix = {}, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const ScalarField ref = pgm::to_field(pgm::read_file(reference_path));
    const ScalarField test = pgm::to_field(pgm::read_file(test_path));
    if (!(ref.grid() == test.grid())) throw Error(ErrorCode::GridMismatch, "image sizes differ");
    const MetricsReport r = measure(ref, test);
    out << "snr_db  " << csv::format(r.snr_db) << "\n"
        << "psnr_db " << csv::format(r.psnr_db) << "\n"
        << "rmse    " << csv::format(r.rmse) << "\n"
        << "npb     " << csv::format(r.npb) << "\n";
    if (!out_prefix.empty()) {
      auto os = detail::open_output(out_prefix + "_metrics.csv");
      write_metrics_header(os);
      write_metrics_row(os, 0.0, r);
    }
    return exit_code::ok;
  });
}

struct PresetSummary {
  std::string name;
  double peak_snr_db = 0.0;
  double peak_time = 0.0;
  double peak_psnr_db = 0.0;
  std::size_t snr_local_maxima = 0;
  double final_snr_db = 0.0;
};

/// Noise-then-filter experiment. The clean input is the reference; every
/// preset filters the same seeded noisy image and its metric curve is written
/// to <prefix>_<preset>_metrics.csv. A summary goes to <prefix>_summary.csv.
inline int cmd_experiment(const RunManifest& m, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto matrices = resolve_matrices(m);
    const ScalarField clean = load_image(m.input, m.h);
    ScalarField noisy = add_gaussian_noise(clean, NoiseSpec{m.noise_sigma, m.seed});
    if (m.clip_input) noisy = clip_to_byte_range(noisy);
    const ChannelPair initial{noisy, ScalarField::filled(noisy.grid(), 0.0)};

    std::vector<PresetSummary> summaries;
    bool all_pass = true;
    bool unstable = false;
    for (const auto& nm : matrices) {
      for (const auto& w : nm.warnings) err << "warning: " << w << "\n";
      const SolverConfig config = make_config(m, nm.matrix);

      auto os = detail::open_output(m.out_prefix + "_" + nm.name + "_metrics.csv");
      write_metrics_header(os);
      std::vector<double> snr_curve;
      PresetSummary s{nm.name};
      s.peak_snr_db = -std::numeric_limits<double>::infinity();
      const Trajectory traj = run(initial, config, m.steps, {}, [&](const ChannelPair& st, double t, std::size_t) {
        const MetricsReport r = measure(clean, st.u);
        write_metrics_row(os, t, r);
        snr_curve.push_back(r.snr_db);
        if (r.snr_db > s.peak_snr_db) {
          s.peak_snr_db = r.snr_db;
          s.peak_time = t;
          s.peak_psnr_db = r.psnr_db;
        }
      });
      for (const auto& w : traj.warnings) err << "warning: " << nm.name << ": " << w << "\n";
      if (traj.failed) {
        err << "error: " << nm.name << ": " << traj.error << "\n";
        unstable = true;
      }
      s.snr_local_maxima = count_local_maxima(snr_curve);
      s.final_snr_db = snr_curve.back();
      summaries.push_back(s);

      if (m.properties) {
        const auto reports = run_property_suite(initial, config, m.property_steps);
        out << "properties for " << nm.name << ":\n";
        write_reports_table(out, reports);
        auto ps = detail::open_output(m.out_prefix + "_" + nm.name + "_properties.csv");
        write_reports_csv(ps, reports);
        for (const auto& r : reports) all_pass = all_pass && r.pass;
      }
    }

    auto os = detail::open_output(m.out_prefix + "_summary.csv");
    csv::write_row(os, {"preset", "peak_snr_db", "peak_time", "peak_psnr_db", "snr_local_maxima",
                        "final_snr_db"});
    out << "preset  peak_snr_db  peak_time  local_maxima\n";
    for (const auto& s : summaries) {
      const std::string a = csv::format(s.peak_snr_db), b = csv::format(s.peak_time),
                        c = csv::format(s.peak_psnr_db), d = std::to_string(s.snr_local_maxima),
                        e = csv::format(s.final_snr_db);
      csv::write_row(os, {s.name, a, b, c, d, e});
      out << s.name << "  " << a << "  " << b << "  " << d << "\n";
    }
    if (unstable) return exit_code::unstable;
    return all_pass ? exit_code::ok : exit_code::property_failed;
  });
}

/// Runs the scale-space property suite (and optionally the decay check) on
/// u0 = image, v0 = 0 for every preset. Exit status 0 iff every check passes.
inline int cmd_properties(const RunManifest& m, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto matrices = resolve_matrices(m);
    ScalarField u0 = load_image(m.input, m.h);
    if (m.noise_sigma > 0.0) u0 = add_gaussian_noise(u0, NoiseSpec{m.noise_sigma, m.seed});
    const ChannelPair initial{u0, ScalarField::filled(u0.grid(), 0.0)};
    bool all_pass = true;
    for (const auto& nm : matrices) {
      const SolverConfig config = make_config(m, nm.matrix);
      auto reports = run_property_suite(initial, config, m.property_steps);
      if (m.decay_steps > 0) reports.push_back(asymptotic_decay(initial, config, m.decay_steps));
      out << "properties for " << nm.name << ":\n";
      write_reports_table(out, reports);
      auto os = detail::open_output(m.out_prefix + "_" + nm.name + "_properties.csv");
      write_reports_csv(os, reports);
      for (const auto& r : reports) all_pass = all_pass && r.pass;
    }
    return all_pass ? exit_code::ok : exit_code::property_failed;
  });
}

inline int cmd_gen_test_image(std::string_view kind, int width, int height, const std::string& path,
                              std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const ScalarField img = make_test_image(parse_test_image(kind), width, height);
    pgm::write_file(path, pgm::quantize(img, pgm::Quantization{}));
    return exit_code::ok;
  });
}

}  // namespace crossdiff

#endif  // CROSSDIFF_WORKFLOW_HPP

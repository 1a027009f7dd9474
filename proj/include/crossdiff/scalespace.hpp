#ifndef CROSSDIFF_SCALESPACE_HPP
#define CROSSDIFF_SCALESPACE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "crossdiff/csv.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

enum class InvarianceKind { GreyShift, ReverseContrast, Translation, AverageGrey, AsymptoticDecay };

inline std::string_view to_string(InvarianceKind k) noexcept {
  switch (k) {
    case InvarianceKind::GreyShift: return "GreyShift";
    case InvarianceKind::ReverseContrast: return "ReverseContrast";
    case InvarianceKind::Translation: return "Translation";
    case InvarianceKind::AverageGrey: return "AverageGrey";
    case InvarianceKind::AsymptoticDecay: return "AsymptoticDecay";
  }
  return "?";
}

struct InvarianceReport {
  InvarianceKind kind = InvarianceKind::GreyShift;
  /// For AsymptoticDecay: final / initial distance to the mean.
  double max_abs_deviation = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;

  // AsymptoticDecay only.
  double slope = 0.0;
  double fit_residual = 0.0;
  bool conclusive = true;
};

struct InvarianceParams {
  double c1 = 50.0;  // grey shift added to u
  double c2 = 0.0;   // grey shift added to v; nonzero is refused
  int shift_x = 3;
  int shift_y = 5;
  double threshold = 1e-10;
};

struct DecayOptions {
  double target_ratio = 1e-3;  // dist_to_mean must fall below this fraction
  double fit_fraction = 0.25;  // fit log(dist) over the final part of the run
  double residual_tol = 0.05;  // RMS residual of the log-linear fit
};

/// Periodic roll: out(i, j) = in(i - dx, j - dy).
inline ScalarField translate(const ScalarField& f, int dx, int dy) {
  const ImageGrid& g = f.grid();
  std::vector<double> out(g.size());
  for (int j = 0; j < g.height; ++j) {
    const int sj = ((j - dy) % g.height + g.height) % g.height;
    for (int i = 0; i < g.width; ++i) {
      const int si = ((i - dx) % g.width + g.width) % g.width;
      out[g.index(i, j)] = f(si, sj);
    }
  }
  return ScalarField(g, std::move(out));
}

inline ScalarField add_constant(const ScalarField& f, double c) {
  std::vector<double> out(f.values().begin(), f.values().end());
  for (double& x : out) x += c;
  return ScalarField(f.grid(), std::move(out));
}

inline ScalarField negate(const ScalarField& f) {
  std::vector<double> out(f.values().begin(), f.values().end());
  for (double& x : out) x = -x;
  return ScalarField(f.grid(), std::move(out));
}

inline double max_abs_difference(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double max_abs_difference(const ChannelPair& a, const ChannelPair& b) {
  return std::max(max_abs_difference(a.u, b.u), max_abs_difference(a.v, b.v));
}

inline double mean(const ScalarField& f) {
  double s = 0.0;
  for (double x : f.values()) s += x;
  return s / static_cast<double>(f.size());
}

/// Slowest decay rate r (dist ~ e^{-r t}) of the constant-coefficient
/// (g = 1) flux-form scheme over all non-constant modes. The discrete
/// Laplacian is diagonalised by the cosine basis under Reflect and by the
/// Fourier basis under Periodic.
inline double linear_mode_decay_rate(const SolverConfig& config, const ImageGrid& grid) {
  if (config.scheme != Scheme::FluxForm) {
    throw Error(ErrorCode::UnsupportedCombination, "mode analysis covers the flux-form scheme only");
  }
  const DiffusionMatrix& d = config.matrix;
  const double half_tr = 0.5 * (d.d11 + d.d22);
  const std::complex<double> root = std::sqrt(std::complex<double>(eigen_discriminant(d), 0.0)) * 0.5;
  const std::complex<double> mu[2] = {half_tr + root, half_tr - root};
  const bool periodic = config.boundary == BoundaryMode::Periodic;
  const double pi = std::numbers::pi;
  auto axis = [&](int k, int n) {
    const double s = periodic ? std::sin(pi * k / n) : std::sin(pi * k / (2.0 * n));
    return s * s;
  };
  double worst = 0.0;
  for (int ky = 0; ky < grid.height; ++ky) {
    for (int kx = 0; kx < grid.width; ++kx) {
      if (kx == 0 && ky == 0) continue;
      const double lambda = 4.0 / (grid.h * grid.h) * (axis(kx, grid.width) + axis(ky, grid.height));
      for (const auto& m : mu) worst = std::max(worst, std::abs(1.0 - config.dt * lambda * m));
    }
  }
  return -std::log(worst) / config.dt;
}

namespace detail {

inline InvarianceReport compare_runs(InvarianceKind kind, const ChannelPair& reference,
                                     const ChannelPair& transformed_back, double threshold) {
  InvarianceReport r;
  r.kind = kind;
  r.threshold = threshold;
  r.max_abs_deviation = max_abs_difference(reference, transformed_back);
  r.pass = r.max_abs_deviation <= threshold;
  r.detail = "max |T(x) - inverse(T(transform(x)))| = " + csv::format(r.max_abs_deviation);
  return r;
}

inline InvarianceReport failed_run(InvarianceKind kind, double threshold, const std::string& why) {
  InvarianceReport r;
  r.kind = kind;
  r.threshold = threshold;
  r.max_abs_deviation = std::numeric_limits<double>::infinity();
  r.pass = false;
  r.detail = why;
  return r;
}

}  // namespace detail

inline InvarianceReport asymptotic_decay(const ChannelPair& pair, const SolverConfig& config,
                                         std::size_t n_steps, const DecayOptions& options = {}) {
  const double initial = monitor(pair, 0.0).dist_to_mean;
  if (!(initial > 0.0)) {
    throw Error(ErrorCode::DegenerateInput, "initial state already equals its mean");
  }
  const Trajectory traj = run(pair, config, n_steps);
  InvarianceReport r;
  r.kind = InvarianceKind::AsymptoticDecay;
  r.threshold = options.target_ratio;
  if (traj.failed) return detail::failed_run(r.kind, r.threshold, traj.error);

  const auto& mon = traj.monitors;
  r.max_abs_deviation = mon.back().dist_to_mean / initial;
  r.conclusive = r.max_abs_deviation < options.target_ratio;

  const std::size_t count = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(options.fit_fraction * static_cast<double>(mon.size()))));
  const std::size_t first = mon.size() > count ? mon.size() - count : 0;
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  for (std::size_t k = first; k < mon.size(); ++k) {
    if (!(mon[k].dist_to_mean > 0.0)) continue;
    const double t = mon[k].t, y = std::log(mon[k].dist_to_mean);
    st += t; sy += y; stt += t * t; sty += t * y;
    ++n;
  }
  if (n >= 2) {
    const double nn = static_cast<double>(n);
    const double denom = nn * stt - st * st;
    r.slope = denom != 0.0 ? (nn * sty - st * sy) / denom : 0.0;
    const double intercept = (sy - r.slope * st) / nn;
    double ss = 0.0;
    for (std::size_t k = first; k < mon.size(); ++k) {
      if (!(mon[k].dist_to_mean > 0.0)) continue;
      const double e = std::log(mon[k].dist_to_mean) - (intercept + r.slope * mon[k].t);
      ss += e * e;
    }
    r.fit_residual = std::sqrt(ss / nn);
  }
  r.pass = r.conclusive && r.slope < 0.0 && r.fit_residual <= options.residual_tol;
  r.detail = "dist ratio " + csv::format(r.max_abs_deviation) + ", slope " + csv::format(r.slope) +
             ", residual " + csv::format(r.fit_residual) +
             (r.conclusive ? "" : " (inconclusive: ratio not below target)");
  return r;
}

/// Runs the solver on the input and on a transformed input, maps the second
/// result back, and reports the largest pointwise disagreement.
inline InvarianceReport check_invariance(InvarianceKind kind, const ChannelPair& pair,
                                         const SolverConfig& config, std::size_t n_steps,
                                         const InvarianceParams& params = {}) {
  auto evolve = [&](const ChannelPair& p) { return run(p, config, n_steps); };

  switch (kind) {
    case InvarianceKind::GreyShift: {
      // g depends on v (raw, cutoff) or on the v-row of K_sigma, which maps
      // (C1, 0) to (C1, 0); a shift of v changes g.
      if (params.c2 != 0.0) {
        throw Error(ErrorCode::UnsupportedCombination,
                    "grey shift of the v channel changes the edge variable");
      }
      const Trajectory a = evolve(pair);
      const Trajectory b = evolve(ChannelPair{add_constant(pair.u, params.c1), pair.v});
      if (a.failed || b.failed) return detail::failed_run(kind, params.threshold, a.error + b.error);
      const ChannelPair back{add_constant(b.final_state.u, -params.c1), b.final_state.v};
      return detail::compare_runs(kind, a.final_state, back, params.threshold);
    }
    case InvarianceKind::ReverseContrast: {
      const Trajectory a = evolve(pair);
      const Trajectory b = evolve(ChannelPair{negate(pair.u), negate(pair.v)});
      if (a.failed || b.failed) return detail::failed_run(kind, params.threshold, a.error + b.error);
      const ChannelPair back{negate(b.final_state.u), negate(b.final_state.v)};
      return detail::compare_runs(kind, a.final_state, back, params.threshold);
    }
    case InvarianceKind::Translation: {
      if (config.boundary != BoundaryMode::Periodic) {
        throw Error(ErrorCode::UnsupportedCombination, "translation is checked on periodic grids only");
      }
      const int dx = params.shift_x, dy = params.shift_y;
      const Trajectory a = evolve(pair);
      const Trajectory b = evolve(ChannelPair{translate(pair.u, dx, dy), translate(pair.v, dx, dy)});
      if (a.failed || b.failed) return detail::failed_run(kind, params.threshold, a.error + b.error);
      const ChannelPair back{translate(b.final_state.u, -dx, -dy), translate(b.final_state.v, -dx, -dy)};
      return detail::compare_runs(kind, a.final_state, back, params.threshold);
    }
    case InvarianceKind::AverageGrey: {
      const Trajectory a = evolve(pair);
      if (a.failed) return detail::failed_run(kind, params.threshold, a.error);
      InvarianceReport r;
      r.kind = kind;
      r.threshold = params.threshold;
      r.max_abs_deviation = std::max(std::abs(mean(a.final_state.u) - mean(pair.u)),
                                     std::abs(mean(a.final_state.v) - mean(pair.v)));
      r.pass = r.max_abs_deviation <= params.threshold;
      r.detail = "max channel-mean drift = " + csv::format(r.max_abs_deviation);
      return r;
    }
    case InvarianceKind::AsymptoticDecay:
      return asymptotic_decay(pair, config, n_steps);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown invariance kind");
}

inline void write_reports_csv(std::ostream& os, const std::vector<InvarianceReport>& reports) {
  csv::write_row(os, {"kind", "deviation", "threshold", "pass"});
  for (const auto& r : reports) {
    const std::string dev = csv::format(r.max_abs_deviation);
    const std::string thr = csv::format(r.threshold);
    csv::write_row(os, {to_string(r.kind), dev, thr, r.pass ? "true" : "false"});
  }
}

inline void write_reports_table(std::ostream& os, const std::vector<InvarianceReport>& reports) {
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %-14s %-12s %-6s\n", "check", "deviation", "threshold", "result");
  os << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-16s %-14.6e %-12.3e %-6s\n",
                  std::string(to_string(r.kind)).c_str(), r.max_abs_deviation, r.threshold,
                  r.pass ? "PASS" : "FAIL");
    os << line;
  }
}

}  // namespace crossdiff

#endif  // CROSSDIFF_SCALESPACE_HPP

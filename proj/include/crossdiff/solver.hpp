#ifndef CROSSDIFF_SOLVER_HPP
#define CROSSDIFF_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "crossdiff/csv.hpp"
#include "crossdiff/diffusion.hpp"
#include "crossdiff/field.hpp"
#include "crossdiff/regularize.hpp"

namespace crossdiff {

enum class Scheme {
  FluxForm,        // staggered edge fluxes, conservative
  CentralLiteral,  // node-centred central differences composed twice
};

/// Where the components of a FluxField live.
enum class Placement {
  Node,       // x and y both width*height, at the pixels
  Staggered,  // x: (width+1)*height vertical edges, y: width*(height+1) horizontal edges
};

/// Two-component field, either at pixels or on the edges between them.
/// Staggered x-edge (i, j) sits between pixels (i-1, j) and (i, j); edges 0
/// and width are the domain boundary (the same physical edge when periodic).
struct FluxField {
  ImageGrid grid;
  Placement placement = Placement::Node;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t x_index(int i, int j) const noexcept {
    const std::size_t stride = placement == Placement::Node ? grid.width : grid.width + 1;
    return static_cast<std::size_t>(j) * stride + static_cast<std::size_t>(i);
  }
  std::size_t y_index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * grid.width + static_cast<std::size_t>(i);
  }

  static FluxField zeros(const ImageGrid& grid, Placement placement) {
    FluxField f{grid, placement, {}, {}};
    if (placement == Placement::Node) {
      f.x.assign(grid.size(), 0.0);
      f.y.assign(grid.size(), 0.0);
    } else {
      f.x.assign(static_cast<std::size_t>(grid.width + 1) * grid.height, 0.0);
      f.y.assign(static_cast<std::size_t>(grid.width) * (grid.height + 1), 0.0);
    }
    return f;
  }
};

/// Central-difference gradient at the pixels, ghost values per `mode`.
inline FluxField discrete_gradient(const ScalarField& w, BoundaryMode mode) {
  const ImageGrid& g = w.grid();
  FluxField out = FluxField::zeros(g, Placement::Node);
  const double inv = 1.0 / (2.0 * g.h);
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      out.x[out.x_index(i, j)] = (sample(w, i + 1, j, mode) - sample(w, i - 1, j, mode)) * inv;
      out.y[out.y_index(i, j)] = (sample(w, i, j + 1, mode) - sample(w, i, j - 1, mode)) * inv;
    }
  }
  return out;
}

/// One-sided differences across each edge, (W_right - W_left) / h. Reflect
/// ghosts make the boundary-edge differences exactly zero.
inline FluxField edge_gradient(const ScalarField& w, BoundaryMode mode) {
  const ImageGrid& g = w.grid();
  FluxField out = FluxField::zeros(g, Placement::Staggered);
  const double inv = 1.0 / g.h;
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i <= g.width; ++i) {
      out.x[out.x_index(i, j)] = (sample(w, i, j, mode) - sample(w, i - 1, j, mode)) * inv;
    }
  }
  for (int j = 0; j <= g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      out.y[out.y_index(i, j)] = (sample(w, i, j, mode) - sample(w, i, j - 1, mode)) * inv;
    }
  }
  return out;
}

/// Samples a nodal coefficient at the given placement; edges take the
/// arithmetic mean of their two pixels.
inline FluxField coefficient_at(const ScalarField& c, BoundaryMode mode, Placement placement) {
  const ImageGrid& g = c.grid();
  if (placement == Placement::Node) {
    std::vector<double> v(c.values().begin(), c.values().end());
    return FluxField{g, Placement::Node, v, v};
  }
  FluxField out = FluxField::zeros(g, Placement::Staggered);
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i <= g.width; ++i) {
      out.x[out.x_index(i, j)] = 0.5 * (sample(c, i - 1, j, mode) + sample(c, i, j, mode));
    }
  }
  for (int j = 0; j <= g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      out.y[out.y_index(i, j)] = 0.5 * (sample(c, i, j - 1, mode) + sample(c, i, j, mode));
    }
  }
  return out;
}

namespace detail {

// Divergence values without the finiteness check, so step() can report
// blow-up as NonFiniteState.
inline std::vector<double> divergence_values(const FluxField& f, BoundaryMode mode) {
  const ImageGrid& g = f.grid;
  std::vector<double> out(g.size());
  if (f.placement == Placement::Staggered) {
    const bool periodic = mode == BoundaryMode::Periodic;
    const double inv = 1.0 / g.h;
    for (int j = 0; j < g.height; ++j) {
      for (int i = 0; i < g.width; ++i) {
        double west = f.x[f.x_index(i, j)];
        double east = f.x[f.x_index(i + 1, j)];
        double north = f.y[f.y_index(i, j)];
        double south = f.y[f.y_index(i, j + 1)];
        if (i == 0) west = periodic ? f.x[f.x_index(0, j)] : 0.0;
        if (i + 1 == g.width) east = periodic ? f.x[f.x_index(0, j)] : 0.0;
        if (j == 0) north = periodic ? f.y[f.y_index(i, 0)] : 0.0;
        if (j + 1 == g.height) south = periodic ? f.y[f.y_index(i, 0)] : 0.0;
        out[g.index(i, j)] = (east - west) * inv + (south - north) * inv;
      }
    }
    return out;
  }
  const double inv = 1.0 / (2.0 * g.h);
  auto fx = [&](int i, int j) {
    return f.x[f.x_index(ghost_index(i, g.width, mode), ghost_index(j, g.height, mode))];
  };
  auto fy = [&](int i, int j) {
    return f.y[f.y_index(ghost_index(i, g.width, mode), ghost_index(j, g.height, mode))];
  };
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      out[g.index(i, j)] = (fx(i + 1, j) - fx(i - 1, j)) * inv + (fy(i, j + 1) - fy(i, j - 1)) * inv;
    }
  }
  return out;
}

}  // namespace detail

/// Staggered fields: (F_{i+1/2} - F_{i-1/2}) / h per axis, with no flux across
/// Reflect boundaries. Node fields: central differences with ghost sampling.
inline ScalarField discrete_divergence(const FluxField& flux, BoundaryMode mode) {
  return ScalarField(flux.grid, detail::divergence_values(flux, mode));
}

struct SolverConfig {
  DiffusionMatrix matrix = DiffusionMatrix::identity();
  EdgeStoppingSpec edge_stopping{};
  EdgeVariableStrategy strategy = RawStrategy{};
  BoundaryMode boundary = BoundaryMode::Reflect;
  double dt = 0.05;
  Scheme scheme = Scheme::FluxForm;
};

inline void validate_config(const SolverConfig& config) {
  validate_matrix(config.matrix);
  if (!(config.edge_stopping.kappa > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "kappa must be positive");
  }
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
    throw Error(ErrorCode::InvalidParameter, "dt must be positive and finite");
  }
  validate_strategy(config.strategy);
}

/// g(w) evaluated pointwise on the current edge variable.
inline ScalarField diffusivity(const ChannelPair& pair, const SolverConfig& config) {
  const ScalarField w = edge_variable(pair, config.strategy, config.matrix);
  std::vector<double> g(w.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = edge_stopping(w[k], config.edge_stopping);
  return ScalarField(w.grid(), std::move(g));
}

/// One explicit step
///   U' = U + dt div(G (d11 grad U + d12 grad V)),
///   V' = V + dt div(G (d21 grad U + d22 grad V)).
/// Both schemes share this path; only where gradients and G live differs.
inline ChannelPair step(const ChannelPair& pair, const SolverConfig& config) {
  const BoundaryMode mode = config.boundary;
  const Placement placement =
      config.scheme == Scheme::FluxForm ? Placement::Staggered : Placement::Node;
  const auto gradient = [&](const ScalarField& w) {
    return placement == Placement::Staggered ? edge_gradient(w, mode) : discrete_gradient(w, mode);
  };

  const FluxField G = coefficient_at(diffusivity(pair, config), mode, placement);
  const FluxField gu = gradient(pair.u);
  const FluxField gv = gradient(pair.v);
  const DiffusionMatrix& d = config.matrix;

  FluxField flux_u = FluxField::zeros(pair.grid(), placement);
  FluxField flux_v = flux_u;
  for (std::size_t k = 0; k < G.x.size(); ++k) {
    flux_u.x[k] = G.x[k] * (d.d11 * gu.x[k] + d.d12 * gv.x[k]);
    flux_v.x[k] = G.x[k] * (d.d21 * gu.x[k] + d.d22 * gv.x[k]);
  }
  for (std::size_t k = 0; k < G.y.size(); ++k) {
    flux_u.y[k] = G.y[k] * (d.d11 * gu.y[k] + d.d12 * gv.y[k]);
    flux_v.y[k] = G.y[k] * (d.d21 * gu.y[k] + d.d22 * gv.y[k]);
  }

  std::vector<double> u = detail::divergence_values(flux_u, mode);
  std::vector<double> v = detail::divergence_values(flux_v, mode);
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] = pair.u[k] + config.dt * u[k];
    v[k] = pair.v[k] + config.dt * v[k];
    if (!std::isfinite(u[k]) || !std::isfinite(v[k])) {
      throw Error(ErrorCode::NonFiniteState, "state became non-finite; dt is likely unstable");
    }
  }
  return ChannelPair{ScalarField(pair.grid(), std::move(u)), ScalarField(pair.grid(), std::move(v))};
}

/// Largest tau with ||I - tau d|| <= 1 in the Euclidean norm, i.e. the
/// smallest generalized eigenvalue of (d + d^T, d^T d).
inline double energy_contraction_limit(const DiffusionMatrix& d) {
  validate_matrix(d);
  const double s11 = 2.0 * d.d11, s12 = d.d12 + d.d21, s22 = 2.0 * d.d22;
  const double p11 = d.d11 * d.d11 + d.d21 * d.d21;
  const double p12 = d.d11 * d.d12 + d.d21 * d.d22;
  const double p22 = d.d12 * d.d12 + d.d22 * d.d22;
  const double a = p11 * p22 - p12 * p12;
  const double b = -(s11 * p22 + s22 * p11 - 2.0 * s12 * p12);
  const double c = s11 * s22 - s12 * s12;
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  // Smaller root, written to avoid cancellation (b < 0 here).
  return (2.0 * c) / (-b + std::sqrt(disc));
}

struct StabilityBounds {
  double generic = 0.0;                 // h^2 / (4 rho(sym d))
  double energy = 0.0;                  // h^2 tau / 8, tau from energy_contraction_limit
  std::optional<double> rotation;       // complex-diffusion bound for rotation matrices

  double limit() const noexcept {
    double b = std::min(generic, energy);
    if (rotation) b = std::min(b, *rotation);
    return b;
  }
};

inline StabilityBounds stability_bounds(const SolverConfig& config, const ChannelPair& pair) {
  validate_matrix(config.matrix);
  const double h2 = pair.grid().h * pair.grid().h;
  StabilityBounds b;
  b.generic = h2 / (4.0 * symmetric_spectral_radius(config.matrix));
  // Spectrum of -div(g grad) lies in [0, 8/h^2] when 0 < g <= 1.
  b.energy = h2 * energy_contraction_limit(config.matrix) / 8.0;
  if (const auto theta = rotation_angle(config.matrix)) {
    // With g = 1 / (1 + (v / kappa_eff)^2), kappa_eff plays the role of kappa*theta.
    double min_v2 = std::numeric_limits<double>::infinity();
    for (double x : pair.v.values()) min_v2 = std::min(min_v2, x * x);
    const double k = config.edge_stopping.kappa;
    b.rotation = h2 * std::cos(*theta) / 4.0 * (1.0 + min_v2 / (k * k));
  }
  return b;
}

/// Largest dt the step guard accepts for this state.
inline double max_stable_dt(const SolverConfig& config, const ChannelPair& pair) {
  return stability_bounds(config, pair).limit();
}

struct MonitorSample {
  double t = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double energy = 0.0;
  double min_u = 0.0, max_u = 0.0;
  double min_v = 0.0, max_v = 0.0;
  double dist_to_mean = 0.0;
  double l2 = 0.0;
  double l4 = 0.0;
};

/// Sums run in storage order so the result is reproducible.
inline MonitorSample monitor(const ChannelPair& pair, double t) {
  const double h2 = pair.grid().h * pair.grid().h;
  const auto u = pair.u.values();
  const auto v = pair.v.values();
  MonitorSample s;
  s.t = t;
  double su = 0.0, sv = 0.0, sq = 0.0, quart = 0.0;
  s.min_u = s.max_u = u[0];
  s.min_v = s.max_v = v[0];
  for (std::size_t k = 0; k < u.size(); ++k) {
    su += u[k];
    sv += v[k];
    const double u2 = u[k] * u[k], v2 = v[k] * v[k];
    sq += u2 + v2;
    quart += u2 * u2 + v2 * v2;
    s.min_u = std::min(s.min_u, u[k]);
    s.max_u = std::max(s.max_u, u[k]);
    s.min_v = std::min(s.min_v, v[k]);
    s.max_v = std::max(s.max_v, v[k]);
  }
  const double n = static_cast<double>(u.size());
  const double mean_u = su / n, mean_v = sv / n;
  double dev = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double du = u[k] - mean_u, dv = v[k] - mean_v;
    dev += du * du + dv * dv;
  }
  s.mass_u = su * h2;
  s.mass_v = sv * h2;
  s.energy = 0.5 * sq * h2;
  s.dist_to_mean = std::sqrt(dev * h2);
  s.l2 = std::sqrt(sq * h2);
  s.l4 = std::sqrt(std::sqrt(quart * h2));
  return s;
}

struct Snapshot {
  double requested_time = 0.0;
  double time = 0.0;
  std::size_t step = 0;
  ChannelPair state;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<MonitorSample> monitors;
  ChannelPair final_state;
  bool failed = false;
  std::string error;
  std::vector<std::string> warnings;
};

/// Called after every completed step (and once for the initial state).
using StepObserver = std::function<void(const ChannelPair&, double t, std::size_t step)>;

inline std::vector<std::string> stability_warnings(const SolverConfig& config, const ChannelPair& pair) {
  std::vector<std::string> out;
  const double limit = max_stable_dt(config, pair);
  if (config.dt > limit) {
    out.push_back("dt = " + csv::format(config.dt) + " exceeds the stability bound " +
                  csv::format(limit));
  }
  return out;
}

/// Advances n_steps explicit steps. Each snapshot time is served by the step
/// whose time t = m dt is nearest to it (clamped to [0, n_steps]). Blow-up
/// stops the run and is reported through `failed`; everything recorded up to
/// that point is kept.
inline Trajectory run(const ChannelPair& initial, const SolverConfig& config, std::size_t n_steps,
                      const std::vector<double>& snapshot_times = {},
                      const StepObserver& observer = {}) {
  validate_config(config);
  if (!(initial.u.grid() == initial.v.grid())) {
    throw Error(ErrorCode::GridMismatch, "u and v live on different grids");
  }
  Trajectory traj;
  traj.warnings = stability_warnings(config, initial);

  std::vector<std::size_t> wanted(snapshot_times.size());
  for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
    const double m = std::round(std::max(0.0, snapshot_times[k]) / config.dt);
    wanted[k] = static_cast<std::size_t>(std::min(m, static_cast<double>(n_steps)));
  }
  auto record = [&](const ChannelPair& state, std::size_t m) {
    const double t = static_cast<double>(m) * config.dt;
    traj.monitors.push_back(monitor(state, t));
    for (std::size_t k = 0; k < wanted.size(); ++k) {
      if (wanted[k] == m) traj.snapshots.push_back({snapshot_times[k], t, m, state});
    }
    if (observer) observer(state, t, m);
  };

  ChannelPair state = initial;
  record(state, 0);
  for (std::size_t m = 1; m <= n_steps; ++m) {
    try {
      state = step(state, config);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteState) throw;
      traj.failed = true;
      traj.error = "step " + std::to_string(m) + ": " + e.what();
      break;
    }
    record(state, m);
  }
  std::stable_sort(traj.snapshots.begin(), traj.snapshots.end(),
                   [](const Snapshot& a, const Snapshot& b) { return a.step < b.step; });
  traj.final_state = std::move(state);
  return traj;
}

inline void write_monitor_csv(std::ostream& os, const std::vector<MonitorSample>& samples) {
  csv::write_row(os, {"t", "mass_u", "mass_v", "energy", "min_u", "max_u", "min_v", "max_v",
                      "dist_to_mean", "l2", "l4"});
  for (const auto& s : samples) {
    csv::write_row(os, {s.t, s.mass_u, s.mass_v, s.energy, s.min_u, s.max_u, s.min_v, s.max_v,
                        s.dist_to_mean, s.l2, s.l4});
  }
}

}  // namespace crossdiff

#endif  // CROSSDIFF_SOLVER_HPP

#ifndef CROSSDIFF_REGULARIZE_HPP
#define CROSSDIFF_REGULARIZE_HPP

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "crossdiff/diffusion.hpp"
#include "crossdiff/field.hpp"

namespace crossdiff {

/// w = v.
struct RawStrategy {};

/// w = min(v, M).
struct CutoffStrategy {
  double M = 255.0;
};

/// w = |second component of K_sigma * (u, v)|. Without a base matrix the
/// solver's own d is used.
struct SmoothedStrategy {
  double sigma = 1.0;
  std::optional<DiffusionMatrix> base;
};

using EdgeVariableStrategy = std::variant<RawStrategy, CutoffStrategy, SmoothedStrategy>;

inline ScalarField cutoff(const ScalarField& field, double M) {
  if (!(M > 0.0)) throw Error(ErrorCode::NonPositiveCutoff, "cutoff M must be positive");
  std::vector<double> out(field.values().begin(), field.values().end());
  for (double& x : out) x = std::min(x, M);
  return ScalarField(field.grid(), std::move(out));
}

/// Plain 2x2 matrix, row-major.
struct Matrix2 {
  double a = 0.0, b = 0.0;
  double c = 0.0, d = 0.0;
};

/// exp(-scale * m) in closed form. Uses
///   exp(M) = e^t (C(q) I + S(q) (M - t I)),  t = tr M / 2,  q = ((a-d)/2)^2 + bc,
/// where C = cosh(sqrt q), S = sinh(sqrt q)/sqrt q (cos/sin for q < 0).
inline Matrix2 exp_neg_scaled(const DiffusionMatrix& m, double scale) {
  const Matrix2 M{-scale * m.d11, -scale * m.d12, -scale * m.d21, -scale * m.d22};
  const double t = 0.5 * (M.a + M.d);
  const double half_diff = 0.5 * (M.a - M.d);
  const double q = half_diff * half_diff + M.b * M.c;
  double ec = 0.0;  // e^t C
  double es = 0.0;  // e^t S
  if (std::abs(q) < 1e-6) {
    const double et = std::exp(t);
    ec = et * (1.0 + q / 2.0 + q * q / 24.0 + q * q * q / 720.0);
    es = et * (1.0 + q / 6.0 + q * q / 120.0 + q * q * q / 5040.0);
  } else if (q > 0.0) {
    const double delta = std::sqrt(q);
    const double up = std::exp(t + delta);
    const double down = std::exp(t - delta);
    ec = 0.5 * (up + down);
    es = 0.5 * (up - down) / delta;
  } else {
    const double delta = std::sqrt(-q);
    const double et = std::exp(t);
    ec = et * std::cos(delta);
    es = et * std::sin(delta) / delta;
  }
  return {ec + es * (M.a - t), es * M.b, es * M.c, ec + es * (M.d - t)};
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan p) const noexcept {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

}  // namespace detail

/// Matrix convolution with the kernel whose Fourier symbol is
/// exp(-|xi|^2 sigma d), applied on the periodic extension of the grid.
inline ChannelPair ksigma_convolve(const ChannelPair& pair, const DiffusionMatrix& d, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidParameter, "sigma must be non-negative and finite");
  }
  validate_matrix(d);
  if (sigma == 0.0) return pair;

  const ImageGrid& grid = pair.grid();
  const int nx = grid.width;
  const int ny = grid.height;
  const int nxc = nx / 2 + 1;
  const std::size_t n_real = grid.size();
  const std::size_t n_cplx = static_cast<std::size_t>(ny) * static_cast<std::size_t>(nxc);

  std::unique_ptr<double, detail::FftwFree> real(fftw_alloc_real(n_real));
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_u(fftw_alloc_complex(n_cplx));
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_v(fftw_alloc_complex(n_cplx));

  detail::PlanHandle forward_u, forward_v, backward;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_u.reset(fftw_plan_dft_r2c_2d(ny, nx, real.get(), spec_u.get(), FFTW_ESTIMATE));
    forward_v.reset(fftw_plan_dft_r2c_2d(ny, nx, real.get(), spec_v.get(), FFTW_ESTIMATE));
    backward.reset(fftw_plan_dft_c2r_2d(ny, nx, spec_u.get(), real.get(), FFTW_ESTIMATE));
  }

  std::copy(pair.u.values().begin(), pair.u.values().end(), real.get());
  fftw_execute(forward_u.get());
  std::copy(pair.v.values().begin(), pair.v.values().end(), real.get());
  fftw_execute(forward_v.get());

  const double two_pi = 2.0 * std::numbers::pi;
  for (int ky = 0; ky < ny; ++ky) {
    const int sy = ky <= ny / 2 ? ky : ky - ny;
    const double xi_y = two_pi * sy / (ny * grid.h);
    for (int kx = 0; kx < nxc; ++kx) {
      const double xi_x = two_pi * kx / (nx * grid.h);
      const Matrix2 e = exp_neg_scaled(d, (xi_x * xi_x + xi_y * xi_y) * sigma);
      const std::size_t k = static_cast<std::size_t>(ky) * nxc + kx;
      const std::complex<double> fu(spec_u.get()[k][0], spec_u.get()[k][1]);
      const std::complex<double> fv(spec_v.get()[k][0], spec_v.get()[k][1]);
      const std::complex<double> gu = e.a * fu + e.b * fv;
      const std::complex<double> gv = e.c * fu + e.d * fv;
      spec_u.get()[k][0] = gu.real();
      spec_u.get()[k][1] = gu.imag();
      spec_v.get()[k][0] = gv.real();
      spec_v.get()[k][1] = gv.imag();
    }
  }

  const double norm = 1.0 / static_cast<double>(n_real);
  std::vector<double> out_u(n_real), out_v(n_real);
  fftw_execute_dft_c2r(backward.get(), spec_u.get(), real.get());
  for (std::size_t k = 0; k < n_real; ++k) out_u[k] = real.get()[k] * norm;
  fftw_execute_dft_c2r(backward.get(), spec_v.get(), real.get());
  for (std::size_t k = 0; k < n_real; ++k) out_v[k] = real.get()[k] * norm;

  return ChannelPair{ScalarField(grid, std::move(out_u)), ScalarField(grid, std::move(out_v))};
}

/// The argument fed to g. `solver_matrix` is the fallback base for Smoothed.
inline ScalarField edge_variable(const ChannelPair& pair, const EdgeVariableStrategy& strategy,
                                 const DiffusionMatrix& solver_matrix = DiffusionMatrix::identity()) {
  if (std::holds_alternative<RawStrategy>(strategy)) return pair.v;
  if (const auto* c = std::get_if<CutoffStrategy>(&strategy)) return cutoff(pair.v, c->M);
  const auto& s = std::get<SmoothedStrategy>(strategy);
  const ChannelPair smoothed = ksigma_convolve(pair, s.base.value_or(solver_matrix), s.sigma);
  std::vector<double> w(smoothed.v.values().begin(), smoothed.v.values().end());
  for (double& x : w) x = std::abs(x);
  return ScalarField(pair.grid(), std::move(w));
}

inline void validate_strategy(const EdgeVariableStrategy& strategy) {
  if (const auto* c = std::get_if<CutoffStrategy>(&strategy)) {
    if (!(c->M > 0.0)) throw Error(ErrorCode::NonPositiveCutoff, "cutoff M must be positive");
  } else if (const auto* s = std::get_if<SmoothedStrategy>(&strategy)) {
    if (!(s->sigma >= 0.0) || !std::isfinite(s->sigma)) {
      throw Error(ErrorCode::InvalidParameter, "sigma must be non-negative and finite");
    }
    if (s->base) validate_matrix(*s->base);
  }
}

inline std::string describe(const EdgeVariableStrategy& strategy) {
  if (std::holds_alternative<RawStrategy>(strategy)) return "raw";
  if (const auto* c = std::get_if<CutoffStrategy>(&strategy)) return "cutoff:" + std::to_string(c->M);
  return "smoothed:" + std::to_string(std::get<SmoothedStrategy>(strategy).sigma);
}

}  // namespace crossdiff

#endif  // CROSSDIFF_REGULARIZE_HPP

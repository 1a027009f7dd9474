#ifndef CROSSDIFF_METRICS_HPP
#define CROSSDIFF_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

#include "crossdiff/csv.hpp"
#include "crossdiff/field.hpp"

namespace crossdiff {

/// Mean squared deviation from the mean grey value.
inline double variance(const ScalarField& image) {
  const auto x = image.values();
  double s = 0.0;
  for (double v : x) s += v;
  const double m = s / static_cast<double>(x.size());
  double q = 0.0;
  for (double v : x) q += (v - m) * (v - m);
  return q / static_cast<double>(x.size());
}

namespace detail {

inline void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorCode::GridMismatch, "images differ in size");
}

inline ScalarField difference(const ScalarField& a, const ScalarField& b) {
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = a[k] - b[k];
  return ScalarField(a.grid(), std::move(d));
}

}  // namespace detail

/// 10 log10(Var(S) / Var(U - S)) in dB; +inf when the error has no variance.
inline double snr(const ScalarField& reference, const ScalarField& test) {
  detail::require_same_grid(reference, test);
  const double signal = variance(reference);
  if (!(signal > 0.0)) throw Error(ErrorCode::DegenerateReference, "reference image is constant");
  const double noise = variance(detail::difference(test, reference));
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

struct PsnrResult {
  double psnr_db = 0.0;
  double rmse = 0.0;
};

/// Peak value 255. RMSE is the usual ||S - U||_F / sqrt(N1 N2).
inline PsnrResult psnr(const ScalarField& reference, const ScalarField& test) {
  detail::require_same_grid(reference, test);
  double q = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double e = reference[k] - test[k];
    q += e * e;
  }
  PsnrResult r;
  r.rmse = std::sqrt(q / static_cast<double>(reference.size()));
  r.psnr_db = r.rmse == 0.0 ? std::numeric_limits<double>::infinity()
                            : 20.0 * std::log10(255.0 / r.rmse);
  return r;
}

/// No-reference perceptual blur estimate (Crete-Roffet et al. 2007).
/// Re-blurs with a 9-tap box filter along each axis and measures how much of
/// the neighbour variation survives; 0 is sharp, 1 maximally blurred.
inline double npb(const ScalarField& image) {
  const ImageGrid& g = image.grid();
  const int w = g.width, h = g.height;
  constexpr int radius = 4;

  std::vector<double> blur_v(g.size()), blur_h(g.size());
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      double sv = 0.0, sh = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        sv += image(i, std::clamp(j + k, 0, h - 1));
        sh += image(std::clamp(i + k, 0, w - 1), j);
      }
      blur_v[g.index(i, j)] = sv / 9.0;
      blur_h[g.index(i, j)] = sh / 9.0;
    }
  }

  double sd_v = 0.0, sv_v = 0.0, sd_h = 0.0, sv_h = 0.0;
  for (int j = 1; j < h; ++j) {
    for (int i = 1; i < w; ++i) {
      const std::size_t k = g.index(i, j);
      const double df_v = std::abs(image(i, j) - image(i, j - 1));
      const double df_h = std::abs(image(i, j) - image(i - 1, j));
      const double db_v = std::abs(blur_v[k] - blur_v[g.index(i, j - 1)]);
      const double db_h = std::abs(blur_h[k] - blur_h[g.index(i - 1, j)]);
      sd_v += df_v;
      sd_h += df_h;
      sv_v += std::max(0.0, df_v - db_v);
      sv_h += std::max(0.0, df_h - db_h);
    }
  }
  auto ratio = [](double sd, double sv) { return sd > 0.0 ? (sd - sv) / sd : 0.0; };
  return std::clamp(std::max(ratio(sd_v, sv_v), ratio(sd_h, sv_h)), 0.0, 1.0);
}

struct NoiseSpec {
  double sigma_prime = 30.0;
  std::uint64_t seed = 0;
};

namespace detail {

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) noexcept {
  return splitmix_finalize(splitmix_finalize(seed + 0x9E3779B97F4A7C15ULL * (counter + 1)) ^
                           splitmix_finalize(seed));
}

// Uniform on (0, 1].
constexpr double unit_open_closed(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace detail

/// Standard normal deviate that depends only on (seed, index).
inline double counter_normal(std::uint64_t seed, std::uint64_t index) noexcept {
  const double u1 = detail::unit_open_closed(detail::counter_hash(seed, 2 * index));
  const double u2 = detail::unit_open_closed(detail::counter_hash(seed, 2 * index + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Adds i.i.d. N(0, sigma'^2) noise; no clipping.
inline ScalarField add_gaussian_noise(const ScalarField& image, const NoiseSpec& spec) {
  if (!(spec.sigma_prime >= 0.0) || !std::isfinite(spec.sigma_prime)) {
    throw Error(ErrorCode::InvalidParameter, "noise sigma must be non-negative");
  }
  if (spec.sigma_prime == 0.0) return image;
  std::vector<double> out(image.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = image[k] + spec.sigma_prime * counter_normal(spec.seed, k);
  }
  return ScalarField(image.grid(), std::move(out));
}

struct MetricsReport {
  double snr_db = 0.0;
  double psnr_db = 0.0;
  double rmse = 0.0;
  double npb = 0.0;
};

inline MetricsReport measure(const ScalarField& reference, const ScalarField& test) {
  const PsnrResult p = psnr(reference, test);
  return MetricsReport{snr(reference, test), p.psnr_db, p.rmse, npb(test)};
}

inline void write_metrics_header(std::ostream& os) {
  csv::write_row(os, {"t", "snr_db", "psnr_db", "rmse", "npb"});
}

inline void write_metrics_row(std::ostream& os, double t, const MetricsReport& r) {
  csv::write_row(os, {t, r.snr_db, r.psnr_db, r.rmse, r.npb});
}

}  // namespace crossdiff

#endif  // CROSSDIFF_METRICS_HPP

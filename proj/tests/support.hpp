#ifndef CROSSDIFF_TESTS_SUPPORT_HPP
#define CROSSDIFF_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "crossdiff/field.hpp"

namespace crossdiff::testutil {

inline ScalarField random_field(const ImageGrid& grid, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(grid.size());
  for (double& x : v) x = dist(rng);
  return ScalarField(grid, std::move(v));
}

inline ChannelPair random_pair(const ImageGrid& grid, std::mt19937_64& rng, double lo = 0.0,
                               double hi = 255.0) {
  return ChannelPair{random_field(grid, rng, lo, hi), random_field(grid, rng, lo, hi)};
}

inline double relative_drift(double now, double then) {
  return std::abs(now - then) / std::max(1.0, std::abs(then));
}

// Explicit step of z_t = div(c grad z), z = u + iv, with
// c = e^{i theta} / (1 + (Im z / kappa_theta)^2), written as a neighbour sum.
// The edge coefficient is the mean of its two nodal values; neighbours outside
// the grid are clamped, which gives no flux through the border.
inline std::vector<std::complex<double>> complex_diffusion_step(const std::vector<std::complex<double>>& z,
                                                                int w, int h, double hh, double dt,
                                                                double theta, double kappa_theta) {
  const std::complex<double> rot = std::polar(1.0, theta);
  auto at = [&](int i, int j) {
    return z[static_cast<std::size_t>(std::clamp(j, 0, h - 1)) * w + std::clamp(i, 0, w - 1)];
  };
  auto g = [&](std::complex<double> x) {
    const double r = x.imag() / kappa_theta;
    return 1.0 / (1.0 + r * r);
  };
  std::vector<std::complex<double>> out(z.size());
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::complex<double> c = at(i, j);
      std::complex<double> acc = 0.0;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const std::complex<double> n = at(i + di, j + dj);
        acc += 0.5 * (g(c) + g(n)) * (n - c);
      }
      out[static_cast<std::size_t>(j) * w + i] = c + dt * rot * acc / (hh * hh);
    }
  }
  return out;
}

}  // namespace crossdiff::testutil

#endif  // CROSSDIFF_TESTS_SUPPORT_HPP

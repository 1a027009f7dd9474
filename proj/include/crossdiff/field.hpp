#ifndef CROSSDIFF_FIELD_HPP
#define CROSSDIFF_FIELD_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crossdiff/error.hpp"

namespace crossdiff {

/// Uniform pixel grid. Storage is row-major with the origin at the top-left:
/// column index i runs along x, row index j along y.
struct ImageGrid {
  int width = 0;
  int height = 0;
  double h = 1.0;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(i);
  }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

inline ImageGrid make_grid(int width, int height, double h = 1.0) {
  if (width < 3 || height < 3) {
    throw Error(ErrorCode::InvalidGrid, "grid must be at least 3x3, got " +
                                            std::to_string(width) + "x" + std::to_string(height));
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::InvalidGrid, "mesh spacing must be positive and finite");
  }
  return ImageGrid{width, height, h};
}

enum class BoundaryMode {
  Reflect,   // homogeneous Neumann: ghost value equals the adjacent interior value
  Periodic,  // torus
};

/// Finite scalar values on an ImageGrid.
class ScalarField {
 public:
  ScalarField() = default;

  ScalarField(ImageGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(grid_.size()) +
                                                 " values, got " + std::to_string(values_.size()));
    }
    for (double x : values_) {
      if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteValue, "field contains NaN or Inf");
    }
  }

  static ScalarField filled(ImageGrid grid, double value) {
    return ScalarField(grid, std::vector<double>(grid.size(), value));
  }

  const ImageGrid& grid() const noexcept { return grid_; }
  int width() const noexcept { return grid_.width; }
  int height() const noexcept { return grid_.height; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  ImageGrid grid_{};
  std::vector<double> values_;
};

/// The two-channel state (u, v) of the cross-diffusion system.
struct ChannelPair {
  ScalarField u;
  ScalarField v;

  const ImageGrid& grid() const noexcept { return u.grid(); }

  friend bool operator==(const ChannelPair&, const ChannelPair&) = default;
};

inline ChannelPair make_pair(ScalarField u, ScalarField v) {
  if (!(u.grid() == v.grid())) {
    throw Error(ErrorCode::GridMismatch, "u and v live on different grids");
  }
  return ChannelPair{std::move(u), std::move(v)};
}

/// Copies the given values into a new pair.
inline ChannelPair new_pair(const ImageGrid& grid, std::span<const double> u_values,
                            std::span<const double> v_values) {
  return ChannelPair{ScalarField(grid, {u_values.begin(), u_values.end()}),
                     ScalarField(grid, {v_values.begin(), v_values.end()})};
}

/// Maps an index in [-1, extent] onto stored storage, one ghost layer deep.
inline int ghost_index(int k, int extent, BoundaryMode mode) {
  if (k < -1 || k > extent) {
    throw Error(ErrorCode::IndexOutOfGhostRange,
                "index " + std::to_string(k) + " outside [-1, " + std::to_string(extent) + "]");
  }
  if (k >= 0 && k < extent) return k;
  if (mode == BoundaryMode::Reflect) return k < 0 ? 0 : extent - 1;
  return k < 0 ? extent - 1 : 0;
}

inline double sample(const ScalarField& field, int i, int j, BoundaryMode mode) {
  return field(ghost_index(i, field.width(), mode), ghost_index(j, field.height(), mode));
}

}  // namespace crossdiff

#endif  // CROSSDIFF_FIELD_HPP

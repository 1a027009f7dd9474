#ifndef CROSSDIFF_SYNTHETIC_HPP
#define CROSSDIFF_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "crossdiff/field.hpp"

namespace crossdiff {

enum class TestImage { Shapes, Disk, Step, Checkerboard, Ramp };

inline TestImage parse_test_image(std::string_view name) {
  if (name == "shapes") return TestImage::Shapes;
  if (name == "disk") return TestImage::Disk;
  if (name == "step") return TestImage::Step;
  if (name == "checkerboard") return TestImage::Checkerboard;
  if (name == "ramp") return TestImage::Ramp;
  throw Error(ErrorCode::InvalidParameter, "unknown test image '" + std::string(name) + "'");
}

/// Piecewise-constant integer-valued images in [0, 255]. Geometry is given in
/// fractions of the image size so every resolution shows the same scene.
inline ScalarField make_test_image(TestImage kind, int width, int height, double h = 1.0) {
  const ImageGrid grid = make_grid(width, height, h);
  std::vector<double> px(grid.size());
  const double W = width, H = height;
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const double x = (i + 0.5) / W, y = (j + 0.5) / H;
      double value = 0.0;
      switch (kind) {
        case TestImage::Shapes: {
          value = 60.0;
          if ((x - 0.35) * (x - 0.35) + (y - 0.35) * (y - 0.35) < 0.195 * 0.195) value = 200.0;
          if (x > 0.55 && x < 0.9 && y > 0.16 && y < 0.47) value = 140.0;
          if (x > 0.16 && x < 0.86 && y > 0.62 && y < 0.86) value = 100.0;
          if ((x - 0.7) * (x - 0.7) + (y - 0.74) * (y - 0.74) < 0.094 * 0.094) value = 230.0;
          break;
        }
        case TestImage::Disk:
          value = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5) < 0.09 ? 200.0 : 50.0;
          break;
        case TestImage::Step:
          value = i < width / 2 ? 50.0 : 200.0;
          break;
        case TestImage::Checkerboard: {
          const int cell = std::max(1, std::min(width, height) / 8);
          value = ((i / cell) + (j / cell)) % 2 == 0 ? 64.0 : 192.0;
          break;
        }
        case TestImage::Ramp:
          value = width > 1 ? std::floor(255.0 * i / (width - 1)) : 0.0;
          break;
      }
      px[grid.index(i, j)] = value;
    }
  }
  return ScalarField(grid, std::move(px));
}

}  // namespace crossdiff

#endif  // CROSSDIFF_SYNTHETIC_HPP

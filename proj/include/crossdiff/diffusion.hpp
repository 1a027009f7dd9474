#ifndef CROSSDIFF_DIFFUSION_HPP
#define CROSSDIFF_DIFFUSION_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crossdiff/error.hpp"

namespace crossdiff {

/// Constant 2x2 coefficient matrix d in D(u, v) = g(|w|) d.
struct DiffusionMatrix {
  double d11 = 1.0;
  double d12 = 0.0;
  double d21 = 0.0;
  double d22 = 1.0;

  static constexpr DiffusionMatrix identity() { return {1.0, 0.0, 0.0, 1.0}; }

  friend bool operator==(const DiffusionMatrix&, const DiffusionMatrix&) = default;
};

struct EdgeStoppingSpec {
  double kappa = 10.0;
};

inline EdgeStoppingSpec make_edge_stopping(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorCode::InvalidParameter, "kappa must be positive and finite");
  }
  return EdgeStoppingSpec{kappa};
}

/// g(w) = 1 / (1 + (w / kappa)^2): even, g(0) = 1, strictly decreasing in |w|.
inline double edge_stopping(double w, const EdgeStoppingSpec& spec) noexcept {
  const double r = w / spec.kappa;
  return 1.0 / (1.0 + r * r);
}

namespace detail {

struct SymmetricEigen {
  double lo;
  double hi;
};

// Closed-form eigenvalues of the symmetric part (d + d^T) / 2.
inline SymmetricEigen symmetric_part_eigenvalues(const DiffusionMatrix& d) noexcept {
  const double a = d.d11;
  const double b = 0.5 * (d.d12 + d.d21);
  const double c = d.d22;
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  return {mean - radius, mean + radius};
}

}  // namespace detail

/// Smallest eigenvalue of the symmetric part of d: the largest alpha with
/// xi^T d xi >= alpha |xi|^2. Positive exactly when d is (non-symmetrically)
/// positive definite.
inline double ellipticity(const DiffusionMatrix& d) noexcept {
  return detail::symmetric_part_eigenvalues(d).lo;
}

/// Spectral radius of the symmetric part of d.
inline double symmetric_spectral_radius(const DiffusionMatrix& d) noexcept {
  const auto e = detail::symmetric_part_eigenvalues(d);
  return std::max(std::abs(e.lo), std::abs(e.hi));
}

/// s = (d22 - d11)^2 + 4 d12 d21. Its sign says whether the eigenvalues of d
/// are real and distinct (s > 0), complex (s < 0) or repeated (s = 0).
inline double eigen_discriminant(const DiffusionMatrix& d) noexcept {
  const double diff = d.d22 - d.d11;
  return diff * diff + 4.0 * d.d12 * d.d21;
}

enum class EigenStructure { RealDistinct, Complex, Repeated };

inline std::string_view to_string(EigenStructure e) noexcept {
  switch (e) {
    case EigenStructure::RealDistinct: return "s>0";
    case EigenStructure::Complex: return "s<0";
    case EigenStructure::Repeated: return "s=0";
  }
  return "?";
}

/// Classifies s with a tolerance scaled to the matrix entries; the
/// NCDF6 coefficients only cancel to within one rounding error.
inline EigenStructure classify_eigen_structure(const DiffusionMatrix& d, double rel_tol = 1e-12) {
  const double s = eigen_discriminant(d);
  const double scale = std::max({1.0, d.d11 * d.d11, d.d22 * d.d22, std::abs(d.d12 * d.d21)});
  if (std::abs(s) <= rel_tol * scale) return EigenStructure::Repeated;
  return s > 0.0 ? EigenStructure::RealDistinct : EigenStructure::Complex;
}

inline bool is_finite(const DiffusionMatrix& d) noexcept {
  return std::isfinite(d.d11) && std::isfinite(d.d12) && std::isfinite(d.d21) &&
         std::isfinite(d.d22);
}

/// Throws NotPositiveDefinite unless d is finite with positive ellipticity.
inline void validate_matrix(const DiffusionMatrix& d) {
  if (!is_finite(d)) throw Error(ErrorCode::NonFiniteValue, "diffusion matrix has non-finite entries");
  if (!(ellipticity(d) > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "symmetric part of d is not positive definite (ellipticity " +
                    std::to_string(ellipticity(d)) + ")");
  }
}

inline DiffusionMatrix rotation_matrix(double theta) noexcept {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c, -s, s, c};
}

/// If d has the rotation form [[cos t, -sin t], [sin t, cos t]] with t in
/// (0, pi/2), returns t.
inline std::optional<double> rotation_angle(const DiffusionMatrix& d, double tol = 1e-12) {
  if (std::abs(d.d11 - d.d22) > tol || std::abs(d.d12 + d.d21) > tol) return std::nullopt;
  if (std::abs(std::hypot(d.d11, d.d21) - 1.0) > tol) return std::nullopt;
  if (!(d.d21 > 0.0) || !(d.d11 > 0.0)) return std::nullopt;
  return std::atan2(d.d21, d.d11);
}

enum class PresetId { NCDF1, NCDF2, NCDF3, NCDF4, NCDF5, NCDF6, Rotation };

struct Preset {
  PresetId id;
  std::string name;
  DiffusionMatrix matrix;
  std::optional<double> theta;
  /// Nominal eigen-structure label of the preset (NCDF presets only).
  std::optional<EigenStructure> label;
  double ellipticity = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr std::array<PresetId, 6> kNamedPresets = {
    PresetId::NCDF1, PresetId::NCDF2, PresetId::NCDF3,
    PresetId::NCDF4, PresetId::NCDF5, PresetId::NCDF6};

namespace detail {

inline Preset finish_preset(Preset p) {
  p.ellipticity = ellipticity(p.matrix);
  if (!(p.ellipticity > 0.0)) {
    p.warnings.push_back(p.name + ": matrix is not positive definite");
  }
  if (p.label) {
    const auto actual = classify_eigen_structure(p.matrix);
    if (actual != *p.label) {
      p.warnings.push_back(p.name + ": nominal label " + std::string(to_string(*p.label)) +
                           " but coefficients give s = " +
                           std::to_string(eigen_discriminant(p.matrix)));
    }
  }
  return p;
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace detail

/// The NCDF matrices, carried with their literal coefficients.
inline Preset preset(PresetId id) {
  using E = EigenStructure;
  switch (id) {
    case PresetId::NCDF1: return detail::finish_preset({id, "ncdf1", {1.0, 0.025, 1.0, 1.0}, {}, E::RealDistinct, 0.0, {}});
    case PresetId::NCDF2: return detail::finish_preset({id, "ncdf2", {1.0, -0.025, 0.025, 1.0}, {}, E::Complex, 0.0, {}});
    // Nominal label is s=0 but these coefficients give s = -0.09; kept verbatim.
    case PresetId::NCDF3: return detail::finish_preset({id, "ncdf3", {1.0, -0.025, 1.0, 1.1}, {}, E::Repeated, 0.0, {}});
    case PresetId::NCDF4: return detail::finish_preset({id, "ncdf4", {1.0, 0.9, 1.0, 1.0}, {}, E::RealDistinct, 0.0, {}});
    case PresetId::NCDF5: return detail::finish_preset({id, "ncdf5", {1.0, -0.9, 0.9, 1.0}, {}, E::Complex, 0.0, {}});
    case PresetId::NCDF6: return detail::finish_preset({id, "ncdf6", {1.0, -0.9, 0.225, 1.9}, {}, E::Repeated, 0.0, {}});
    case PresetId::Rotation: break;
  }
  throw Error(ErrorCode::UnknownPreset, "rotation preset needs an angle");
}

inline Preset rotation_preset(double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 2.0)) {
    throw Error(ErrorCode::InvalidParameter, "rotation angle must lie in (0, pi/2)");
  }
  return detail::finish_preset(
      {PresetId::Rotation, "rotation:" + std::to_string(theta), rotation_matrix(theta), theta, std::nullopt, 0.0, {}});
}

/// Accepts "ncdf1".."ncdf6" and "rotation:<theta>" (radians), case-insensitively.
inline Preset preset(std::string_view name) {
  const std::string key = detail::lowercase(name);
  static constexpr std::array<std::string_view, 6> names = {"ncdf1", "ncdf2", "ncdf3",
                                                            "ncdf4", "ncdf5", "ncdf6"};
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (key == names[k]) return preset(kNamedPresets[k]);
  }
  constexpr std::string_view rot = "rotation:";
  if (key.starts_with(rot)) {
    const std::string arg = key.substr(rot.size());
    double theta = 0.0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), theta);
    if (ec != std::errc() || ptr != arg.data() + arg.size() || arg.empty()) {
      throw Error(ErrorCode::UnknownPreset, "bad rotation angle '" + arg + "'");
    }
    return rotation_preset(theta);
  }
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'");
}

}  // namespace crossdiff

#endif  // CROSSDIFF_DIFFUSION_HPP

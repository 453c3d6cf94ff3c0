#pragma once

#include <span>
#include <vector>

#include "cfrf/common.hpp"

namespace cfrf {

inline constexpr int kMaxShDegree = 4;
inline constexpr int kMaxShCount = (kMaxShDegree + 1) * (kMaxShDegree + 1);
inline constexpr int kColorChannels = 3;

/// Number of basis functions for a given degree, (L+1)^2.
constexpr int sh_count(int degree) { return (degree + 1) * (degree + 1); }

/// Flat index of Y_l^m. Order is l-major, m ascending from -l to l.
constexpr int sh_index(int l, int m) { return l * l + l + m; }

/// Real, orthonormal spherical harmonics without the Condon-Shortley phase:
///   Y_1^{-1} = c*y,  Y_1^0 = c*z,  Y_1^1 = c*x,  and likewise for higher bands.
/// `dir` must be unit length (checked to 1e-6). Throws kValidation otherwise
/// or when degree is outside [0, 4].
std::vector<double> eval_basis(int degree, const Vec3& dir);

/// Unchecked variant for inner loops; writes sh_count(degree) values.
void eval_basis_into(int degree, const Vec3& dir, std::span<double> out);

void check_degree(int degree);

/// SH coefficients of an RGB color, stored channel-major:
/// values[channel * sh_count(degree) + sh_index(l, m)].
struct ShCoeffs {
  int degree = 0;
  std::vector<double> values;

  static ShCoeffs zeros(int degree);
  /// Coefficients of a view-independent color.
  static ShCoeffs constant(int degree, const Rgb& color);

  int count_per_channel() const { return sh_count(degree); }
  double& at(int channel, int index) { return values[channel * sh_count(degree) + index]; }
  double at(int channel, int index) const { return values[channel * sh_count(degree) + index]; }
  std::span<const double> channel(int c) const {
    return std::span<const double>(values).subspan(c * sh_count(degree), sh_count(degree));
  }
};

/// Sum over (l, m) of h_l^m Y_l^m(dir) per channel. Not clamped.
Rgb eval_color(const ShCoeffs& coeffs, const Vec3& dir);

/// Same as above with a precomputed basis; `coeffs` is channel-major.
inline Rgb eval_color(std::span<const double> coeffs, std::span<const double> basis) {
  const size_t n = basis.size();
  Rgb out = Rgb::Zero();
  for (int c = 0; c < kColorChannels; ++c) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += coeffs[c * n + i] * basis[i];
    out[c] = acc;
  }
  return out;
}

}  // namespace cfrf

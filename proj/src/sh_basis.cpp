#include "cfrf/sh_basis.hpp"

#include <cmath>
#include <string>

namespace cfrf {
namespace {

// Normalization constants of the real SH polynomials.
constexpr double kC0 = 0.28209479177387814;   // 1 / (2 sqrt(pi))
constexpr double kC1 = 0.4886025119029199;    // sqrt(3 / (4 pi))
constexpr double kC2a = 1.0925484305920792;   // sqrt(15 / (4 pi))
constexpr double kC2b = 0.31539156525252005;  // sqrt(5 / (16 pi))
constexpr double kC2c = 0.5462742152960396;   // sqrt(15 / (16 pi))
constexpr double kC3a = 0.5900435899266435;
constexpr double kC3b = 2.890611442640554;
constexpr double kC3c = 0.4570457994644658;
constexpr double kC3d = 0.3731763325901154;
constexpr double kC3e = 1.445305721320277;
constexpr double kC4a = 2.5033429417967046;
constexpr double kC4b = 1.7701307697799304;
constexpr double kC4c = 0.9461746957575601;
constexpr double kC4d = 0.6690465435572892;
constexpr double kC4e = 0.10578554691520431;
constexpr double kC4f = 0.47308734787878004;
constexpr double kC4g = 0.6258357354491761;

}  // namespace

void check_degree(int degree) {
  if (degree < 0 || degree > kMaxShDegree) {
    fail(ErrorKind::kValidation, "SH degree " + std::to_string(degree) + " outside [0, 4]");
  }
}

void eval_basis_into(int degree, const Vec3& dir, std::span<double> out) {
  const double x = dir.x(), y = dir.y(), z = dir.z();
  out[0] = kC0;
  if (degree < 1) return;
  out[1] = kC1 * y;
  out[2] = kC1 * z;
  out[3] = kC1 * x;
  if (degree < 2) return;
  const double xx = x * x, yy = y * y, zz = z * z;
  out[4] = kC2a * x * y;
  out[5] = kC2a * y * z;
  out[6] = kC2b * (3.0 * zz - 1.0);
  out[7] = kC2a * x * z;
  out[8] = kC2c * (xx - yy);
  if (degree < 3) return;
  out[9] = kC3a * y * (3.0 * xx - yy);
  out[10] = kC3b * x * y * z;
  out[11] = kC3c * y * (5.0 * zz - 1.0);
  out[12] = kC3d * z * (5.0 * zz - 3.0);
  out[13] = kC3c * x * (5.0 * zz - 1.0);
  out[14] = kC3e * z * (xx - yy);
  out[15] = kC3a * x * (xx - 3.0 * yy);
  if (degree < 4) return;
  out[16] = kC4a * x * y * (xx - yy);
  out[17] = kC4b * y * z * (3.0 * xx - yy);
  out[18] = kC4c * x * y * (7.0 * zz - 1.0);
  out[19] = kC4d * y * z * (7.0 * zz - 3.0);
  out[20] = kC4e * (35.0 * zz * zz - 30.0 * zz + 3.0);
  out[21] = kC4d * x * z * (7.0 * zz - 3.0);
  out[22] = kC4f * (xx - yy) * (7.0 * zz - 1.0);
  out[23] = kC4b * x * z * (xx - 3.0 * yy);
  out[24] = kC4g * (xx * (xx - 3.0 * yy) - yy * (3.0 * xx - yy));
}

std::vector<double> eval_basis(int degree, const Vec3& dir) {
  check_degree(degree);
  if (std::abs(dir.norm() - 1.0) > 1e-6) {
    fail(ErrorKind::kValidation, "SH direction is not unit length");
  }
  std::vector<double> out(sh_count(degree));
  eval_basis_into(degree, dir, out);
  return out;
}

ShCoeffs ShCoeffs::zeros(int degree) {
  check_degree(degree);
  return ShCoeffs{degree, std::vector<double>(kColorChannels * sh_count(degree), 0.0)};
}

ShCoeffs ShCoeffs::constant(int degree, const Rgb& color) {
  ShCoeffs out = zeros(degree);
  for (int c = 0; c < kColorChannels; ++c) out.at(c, 0) = color[c] / kC0;
  return out;
}

Rgb eval_color(const ShCoeffs& coeffs, const Vec3& dir) {
  if (coeffs.values.size() != static_cast<size_t>(kColorChannels * sh_count(coeffs.degree))) {
    fail(ErrorKind::kValidation, "SH coefficient count does not match degree");
  }
  const auto basis = eval_basis(coeffs.degree, dir);
  return eval_color(coeffs.values, basis);
}

}  // namespace cfrf

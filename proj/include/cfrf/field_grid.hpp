#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cfrf/common.hpp"
#include "cfrf/sh_basis.hpp"

namespace cfrf {

/// Trilinear footprint of a point: up to 8 in-range voxels and their weights.
/// Corners that fall outside the grid are dropped (zero padding).
struct TrilinearStencil {
  std::array<uint32_t, 8> index{};
  std::array<double, 8> weight{};
  int count = 0;
};

/// Regular voxel lattice over an axis-aligned box. Voxel centers sit at
/// bbox_min + (i + 0.5) * voxel_size; linear order is x-fastest.
class GridGeometry {
 public:
  GridGeometry() = default;
  GridGeometry(std::array<int, 3> dims, const Vec3& bbox_min, const Vec3& bbox_max);

  const std::array<int, 3>& dims() const { return dims_; }
  const Vec3& bbox_min() const { return bbox_min_; }
  const Vec3& bbox_max() const { return bbox_max_; }
  Vec3 voxel_size() const { return voxel_size_; }
  /// Voxel half-width; for non-cubic voxels the smallest axis.
  double half_width() const { return 0.5 * voxel_size_.minCoeff(); }
  size_t voxel_count() const {
    return static_cast<size_t>(dims_[0]) * dims_[1] * dims_[2];
  }

  size_t linear_index(int i, int j, int k) const {
    return static_cast<size_t>(i) + static_cast<size_t>(dims_[0]) * (j + static_cast<size_t>(dims_[1]) * k);
  }
  std::array<int, 3> unravel(size_t index) const;
  Vec3 voxel_center(size_t index) const;

  bool contains(const Vec3& p) const;
  /// Empty stencil for points outside the box.
  TrilinearStencil stencil(const Vec3& p) const;

  bool operator==(const GridGeometry& o) const {
    return dims_ == o.dims_ && bbox_min_ == o.bbox_min_ && bbox_max_ == o.bbox_max_;
  }

 private:
  std::array<int, 3> dims_{1, 1, 1};
  Vec3 bbox_min_ = Vec3::Zero();
  Vec3 bbox_max_ = Vec3::Ones();
  Vec3 voxel_size_ = Vec3::Ones();
};

/// Nonnegative density per voxel (units of 1 / world length).
class DensityGrid {
 public:
  DensityGrid() = default;
  explicit DensityGrid(const GridGeometry& geometry, double fill = 0.0);

  const GridGeometry& geometry() const { return geometry_; }
  std::span<const double> values() const { return values_; }
  double value(size_t index) const { return values_[index]; }
  /// Throws kValidation on negative or non-finite values.
  void set(size_t index, double value);
  /// Unchecked write used by finite-difference probes; may go negative.
  void set_unchecked(size_t index, double value) { values_[index] = value; }
  std::span<double> mutable_values() { return values_; }
  /// Throws if any stored value is negative or non-finite.
  void check_nonnegative() const;

  /// Trilinear interpolation; zero outside the box.
  double sample(const Vec3& p) const;
  double sample(const TrilinearStencil& s) const {
    double acc = 0.0;
    for (int c = 0; c < s.count; ++c) acc += s.weight[c] * values_[s.index[c]];
    return acc;
  }

  bool operator==(const DensityGrid& o) const = default;

 private:
  GridGeometry geometry_;
  std::vector<double> values_;
};

/// Per-voxel SH color coefficients, voxel-major then channel-major.
class ShColorGrid {
 public:
  ShColorGrid() = default;
  ShColorGrid(const GridGeometry& geometry, int degree);

  const GridGeometry& geometry() const { return geometry_; }
  int degree() const { return degree_; }
  int coeffs_per_voxel() const { return kColorChannels * sh_count(degree_); }

  std::span<const double> coeffs(size_t voxel) const {
    return std::span<const double>(values_).subspan(voxel * coeffs_per_voxel(), coeffs_per_voxel());
  }
  std::span<double> coeffs(size_t voxel) {
    return std::span<double>(values_).subspan(voxel * coeffs_per_voxel(), coeffs_per_voxel());
  }
  void set(size_t voxel, const ShCoeffs& c);
  ShCoeffs get(size_t voxel) const;
  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }

  /// Per-coefficient trilinear interpolation; zeros outside the box.
  ShCoeffs sample(const Vec3& p) const;

  bool operator==(const ShColorGrid& o) const = default;

 private:
  GridGeometry geometry_;
  int degree_ = 0;
  std::vector<double> values_;
};

struct Checkpoint {
  DensityGrid density;
  std::optional<ShColorGrid> color;
};

/// Little-endian binary: "CFRF", u32 version=1, u32 flags (bit0 = color),
/// 3 x u32 dims, 6 x f64 bbox (min then max), u32 SH degree, f32 densities
/// (x-fastest), then f32 SH coefficients (voxel, channel, (l,m) order).
/// Values are rounded to f32 on write.
void save_checkpoint(const std::filesystem::path& path, const DensityGrid& density,
                     const ShColorGrid* color);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Round every value to the nearest f32, matching what a checkpoint stores.
void round_to_float(DensityGrid& density);
void round_to_float(ShColorGrid& color);

}  // namespace cfrf

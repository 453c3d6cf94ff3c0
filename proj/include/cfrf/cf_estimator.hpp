#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cfrf/camera.hpp"
#include "cfrf/field_grid.hpp"
#include "cfrf/volume_renderer.hpp"

namespace cfrf {

enum class PdfKind { kUniform, kMixtureVmf };

/// Density of viewing directions used as the Monte-Carlo importance weight.
/// A mixture with no modes takes each voxel's own observation directions
/// as modes.
struct DirectionPdf {
  PdfKind kind = PdfKind::kUniform;
  std::vector<Vec3> modes;
  double concentration = 0.0;

  static DirectionPdf uniform() { return {}; }
  static DirectionPdf mixture_vmf(std::vector<Vec3> modes, double concentration);
  void validate() const;
};

/// Uniform: 1/(4 pi). Mixture: mean over modes of
/// c exp(c mu.d) / (4 pi sinh c), evaluated without overflow.
double pdf_eval(const DirectionPdf& pdf, const Vec3& d);

struct Observation {
  Vec3 direction;  // unit, from the voxel toward the camera
  double weight;   // transmittance to the camera, or 1 without occlusion
  Rgb color;
  uint32_t camera;
};

/// Only cameras that see the point (in front, inside the image) appear.
struct VoxelObservations {
  std::vector<Observation> items;
};

struct EstimatorConfig {
  bool occlusion = true;  // weight by transmittance to the camera
  bool residual = true;   // estimate coefficients in turn on the residual
  int rounds = 1;         // extra rounds re-estimate each coefficient on the full residual
  RenderConfig render;    // step, dead zone and cutoff for transmittance_to_camera

  void validate() const;
};

VoxelObservations gather_observations(const Vec3& point, const DensityGrid& density, const Dataset& dataset,
                                      const EstimatorConfig& cfg);

struct VoxelEstimate {
  ShCoeffs coeffs;
  /// Color minus the full reconstruction, one per observation.
  std::vector<Rgb> residuals;
  bool estimated = false;  // false when no observation carries weight
};

/// h_lm = sum_k w_k r_k Y_lm(d_k) / p(d_k) / sum_k w_k per channel, taking the
/// coefficients in (l, m) order. With cfg.residual, r_k is the color minus the
/// components estimated so far; without it r_k is the raw color.
VoxelEstimate estimate_voxel_sh(const VoxelObservations& obs, const DirectionPdf& pdf, int degree,
                                const EstimatorConfig& cfg);

enum class VoxelSetKind { kAll, kThreshold, kRayBatch, kList };

struct VoxelSet {
  VoxelSetKind kind = VoxelSetKind::kAll;
  double threshold = 0.0;       // kThreshold: density >= threshold
  std::vector<Ray> rays;        // kRayBatch
  std::vector<uint32_t> list;   // kList

  static VoxelSet all() { return {}; }
  static VoxelSet above(double tau);
  static VoxelSet occupied();  // density > 0
  static VoxelSet ray_batch(std::vector<Ray> rays);
  static VoxelSet explicit_list(std::vector<uint32_t> voxels);
};

/// Voxels whose values can reach the renders of `rays`: corners of every
/// marched sample, restricted to nonzero density under density-weighted
/// color blending. Sorted, unique.
std::vector<uint32_t> ray_batch_voxels(const DensityGrid& density, std::span<const Ray> rays,
                                       const RenderConfig& cfg);

std::vector<uint32_t> select_voxels(const DensityGrid& density, const VoxelSet& set, const RenderConfig& cfg);

struct ColorFieldEstimate {
  ShColorGrid color;
  std::vector<uint32_t> estimated;    // voxels that received coefficients
  std::vector<uint32_t> unestimated;  // selected but without weighted observations
};

/// Independent per-voxel estimation at voxel centers; unselected voxels stay zero.
ColorFieldEstimate estimate_color_field(const DensityGrid& density, const Dataset& dataset, const DirectionPdf& pdf,
                                        int degree, const VoxelSet& set, const EstimatorConfig& cfg);

}  // namespace cfrf

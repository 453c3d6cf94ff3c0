#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cfrf/camera.hpp"
#include "cfrf/field_grid.hpp"

namespace cfrf {

/// How SH coefficients are blended between voxel corners at a sample point.
enum class ColorInterp {
  /// Plain trilinear blend of the corner coefficients.
  kTrilinear,
  /// Corners weighted by trilinear weight times their density, so voxels
  /// with zero density never contribute color.
  kDensityWeighted,
};

struct RenderConfig {
  double step_size = 0.01;    // uniform quadrature step along rays (world units)
  double early_stop = 1e-6;   // stop marching once transmittance drops below this
  double dead_zone = 0.005;   // excluded segment around the point in transmittance_to_camera
  double t_near = 0.0;
  double t_far = 1e3;         // also the depth reported for rays that hit nothing
  ColorInterp color_interp = ColorInterp::kDensityWeighted;

  /// Step and dead zone equal to the voxel half-width.
  static RenderConfig for_grid(const GridGeometry& geometry, double t_far);
  void validate() const;
};

struct RenderResult {
  Rgb color = Rgb::Zero();
  double transmittance = 1.0;  // after the last sample
};

/// Per-sample quantities of the discretized rendering integral.
struct RaySample {
  double t = 0.0;
  double sigma = 0.0;
  double alpha = 0.0;          // 1 - exp(-sigma * step)
  double transmittance = 1.0;  // before this sample
  double weight = 0.0;         // transmittance * alpha
};

/// Emitted color at a point seen from `toward_camera` (unit, pointing from
/// the point back to the viewer).
using ColorFn = std::function<Rgb(const Vec3& point, const Vec3& toward_camera)>;

/// Samples t_i = t0 + (i + 1/2) step over the part of the ray inside the
/// grid box, stopping early once transmittance < early_stop.
std::vector<RaySample> march_samples(const DensityGrid& density, const Ray& ray, const RenderConfig& cfg);

/// C = sum_i T_i alpha_i c_i with a black background. Colors come from the SH
/// grid evaluated at the direction opposite to the ray.
RenderResult render_ray(const DensityGrid& density, const ShColorGrid& color, const Ray& ray,
                        const RenderConfig& cfg);
RenderResult render_ray(const DensityGrid& density, const ColorFn& color, const Ray& ray,
                        const RenderConfig& cfg);

/// Backpropagates dL/dC for one ray. Adds into `grad_density` (one entry per
/// voxel) and, when non-empty, `grad_color` (same layout as the color grid).
/// Returns the rendered color, identical to render_ray.
Rgb render_ray_backward(const DensityGrid& density, const ShColorGrid& color, const Ray& ray,
                        const RenderConfig& cfg, const Rgb& dloss_dcolor,
                        std::span<double> grad_density, std::span<double> grad_color);

/// exp(-sum sigma * step) along the segment from `point` to `camera_origin`,
/// skipping the first cfg.dead_zone of it. Returns exactly 0 once the
/// transmittance falls below cfg.early_stop.
double transmittance_to_camera(const DensityGrid& density, const Vec3& point, const Vec3& camera_origin,
                               const RenderConfig& cfg);

/// Expected termination distance sum w_i t_i / sum w_i; t_far if sum w_i < 1e-6.
double render_depth(const DensityGrid& density, const Ray& ray, const RenderConfig& cfg);

Image render_image(const DensityGrid& density, const ShColorGrid& color, const Camera& camera,
                   const RenderConfig& cfg);
/// Row-major depth per pixel.
std::vector<double> render_depth_map(const DensityGrid& density, const Camera& camera, const RenderConfig& cfg);

}  // namespace cfrf

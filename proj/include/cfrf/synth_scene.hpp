#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfrf/camera.hpp"
#include "cfrf/field_grid.hpp"
#include "cfrf/volume_renderer.hpp"
#include "json.hpp"

namespace cfrf {

enum class PrimitiveKind { kSphere, kBox };

/// Solid primitive with constant density and a view-dependent emitter. The
/// emitter's DC color may vary linearly with position.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kSphere;
  Vec3 center = Vec3::Zero();    // sphere
  double radius = 0.5;           // sphere
  Vec3 box_min = -Vec3::Ones();  // box
  Vec3 box_max = Vec3::Ones();   // box
  double density = 50.0;
  ShCoeffs color = ShCoeffs::constant(2, Rgb::Constant(0.5));
  /// d(rgb)/d(position): row = channel, column = axis; the DC color at p is
  /// the emitter's DC color plus dc_gradient * (p - reference point).
  Mat3 dc_gradient = Mat3::Zero();

  /// Emitter at a point, with the gradient measured from the sphere center
  /// or the box center.
  ShCoeffs color_at(const Vec3& p) const;

  /// Signed distance (negative inside); exact for spheres, box-exact outside.
  double signed_distance(const Vec3& p) const;
};

enum class CameraLayout { kSphere, kHemisphere };

struct SceneSpec {
  std::vector<Primitive> primitives;
  std::array<int, 3> dims{64, 64, 64};
  Vec3 bbox_min = -Vec3::Ones();
  Vec3 bbox_max = Vec3::Ones();
  int sh_degree = 2;
  int camera_count = 100;
  CameraLayout layout = CameraLayout::kHemisphere;
  double camera_radius = 3.0;
  Vec3 look_at = Vec3::Zero();
  /// Hemisphere only: lowest camera elevation above the look-at plane.
  double min_elevation_deg = 0.0;
  double fov_deg = 40.0;
  int width = 64;
  int height = 64;
  /// Subsamples per axis when rasterizing density (1 = voxel-center test).
  int supersample = 1;
  uint64_t seed = 0;

  void validate() const;
};

struct SynthScene {
  DensityGrid density;
  ShColorGrid color;
  Dataset views;  // unquantized renders of the ground-truth fields
  RenderConfig render;
};

/// Far bound and step for a scene: step = voxel half-width,
/// t_far = camera radius + half the box diagonal.
RenderConfig scene_render_config(const SceneSpec& spec);

/// Fibonacci-lattice camera positions on a sphere or upper hemisphere
/// (z >= look_at.z) at `camera_radius`, rotated about z by a seed-derived angle.
std::vector<Camera> make_cameras(const SceneSpec& spec);

/// Density: per subsample, the largest density among primitives containing
/// it, averaged over subsamples. Color: every voxel (empty ones included)
/// takes the emitter of the primitive with the smallest signed distance.
/// Grids are rounded to f32 so they survive a checkpoint bit-exactly.
void rasterize(const SceneSpec& spec, DensityGrid& density, ShColorGrid& color);

SynthScene synth_scene(const SceneSpec& spec);

/// Bundled benchmark scenes: "globe" (sphere whose color varies with
/// position, full-sphere views), "tabletop" (floor slab, sphere and box of
/// distinct colors seen from a hemisphere), "pillars" (two boxes occluding
/// each other on a base, hemisphere). "round_trip_sphere" is also accepted.
SceneSpec bundled_scene(const std::string& name);
std::vector<std::string> bundled_scene_names();

/// Round-trip fixture: one sphere with a spatially uniform, mildly
/// view-dependent degree-2 emitter, 200 distant full-sphere cameras. Every
/// voxel's true emitter is the same, so its estimate is checkable against
/// the generator even without occlusion handling.
SceneSpec round_trip_sphere_scene();

/// Degree-`degree` emitter: DC equal to `base`, higher bands drawn from
/// N(0, amplitude^2) per coefficient.
ShCoeffs random_emitter(int degree, const Rgb& base, double amplitude, uint64_t seed);

/// Density corruptions used to probe geometry metrics.
/// Floaters: a `fraction` of all voxels, drawn uniformly, get a density drawn
/// uniformly from (0, max density].
DensityGrid corrupt_floaters(const DensityGrid& density, double fraction, uint64_t seed);
/// Thickening: every empty voxel with an occupied 6-neighbor takes the
/// largest neighboring density.
DensityGrid corrupt_thicken(const DensityGrid& density);
/// Erosion: every occupied voxel with an empty 6-neighbor is emptied.
DensityGrid corrupt_erode(const DensityGrid& density);

/// Adds `count` solid balls of density `value` and the given radius, with
/// centers drawn uniformly in [region_min, region_max]. Existing density is
/// kept where it is larger.
DensityGrid seed_floaters(const DensityGrid& density, int count, double radius, double value, const Vec3& region_min,
                          const Vec3& region_max, uint64_t seed);

nlohmann::json scene_spec_to_json(const SceneSpec& spec);
/// Throws kValidation on malformed or invalid specs.
SceneSpec scene_spec_from_json(const nlohmann::json& j);

}  // namespace cfrf

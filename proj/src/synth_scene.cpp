#include "cfrf/synth_scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace cfrf {

using json = nlohmann::json;

double Primitive::signed_distance(const Vec3& p) const {
  if (kind == PrimitiveKind::kSphere) return (p - center).norm() - radius;
  const Vec3 c = 0.5 * (box_min + box_max);
  const Vec3 h = 0.5 * (box_max - box_min);
  const Vec3 q = (p - c).cwiseAbs() - h;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

ShCoeffs Primitive::color_at(const Vec3& p) const {
  if (dc_gradient.isZero()) return color;
  const Vec3 ref = kind == PrimitiveKind::kSphere ? center : Vec3(0.5 * (box_min + box_max));
  ShCoeffs c = color;
  const Rgb shift = dc_gradient * (p - ref);
  const ShCoeffs dc = ShCoeffs::constant(0, shift);
  for (int ch = 0; ch < kColorChannels; ++ch) c.at(ch, 0) += dc.at(ch, 0);
  return c;
}

void SceneSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) fail(ErrorKind::kValidation, "scene grid dims must be positive");
    if (!(bbox_max[a] > bbox_min[a])) fail(ErrorKind::kValidation, "scene bbox_max must exceed bbox_min");
  }
  check_degree(sh_degree);
  if (camera_count <= 0) fail(ErrorKind::kValidation, "scene needs at least one camera");
  if (!(camera_radius > 0.0)) fail(ErrorKind::kValidation, "camera radius must be positive");
  if (width <= 0 || height <= 0) fail(ErrorKind::kValidation, "image resolution must be positive");
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) fail(ErrorKind::kValidation, "fov must be in (0, 180) degrees");
  if (supersample <= 0) fail(ErrorKind::kValidation, "supersample must be positive");
  if (!(min_elevation_deg >= 0.0 && min_elevation_deg < 90.0)) {
    fail(ErrorKind::kValidation, "min elevation must be in [0, 90) degrees");
  }
  for (const auto& p : primitives) {
    if (!(p.density >= 0.0)) fail(ErrorKind::kValidation, "primitive density must be nonnegative");
    if (p.color.degree > sh_degree) fail(ErrorKind::kValidation, "primitive emitter degree exceeds scene SH degree");
    if (p.kind == PrimitiveKind::kSphere && !(p.radius > 0.0)) fail(ErrorKind::kValidation, "sphere radius must be positive");
    if (p.kind == PrimitiveKind::kBox && !((p.box_max - p.box_min).minCoeff() > 0.0)) {
      fail(ErrorKind::kValidation, "box extents must be positive");
    }
  }
}

RenderConfig scene_render_config(const SceneSpec& spec) {
  const GridGeometry g(spec.dims, spec.bbox_min, spec.bbox_max);
  const double reach = (spec.look_at - 0.5 * (spec.bbox_min + spec.bbox_max)).norm();
  return RenderConfig::for_grid(g, spec.camera_radius + reach + 0.5 * (spec.bbox_max - spec.bbox_min).norm());
}

std::vector<Camera> make_cameras(const SceneSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double spin = 2.0 * std::numbers::pi * unit(rng);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const int n = spec.camera_count;
  const double z_low = spec.layout == CameraLayout::kSphere ? -1.0 : std::sin(spec.min_elevation_deg * std::numbers::pi / 180.0);
  std::vector<Camera> cams;
  cams.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (1.0 - z_low) * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i + spin;
    const Vec3 dir(r * std::cos(phi), r * std::sin(phi), z);
    cams.push_back(Camera::look_at(spec.look_at + spec.camera_radius * dir, spec.look_at, Vec3::UnitZ(),
                                   spec.width, spec.height, spec.fov_deg * std::numbers::pi / 180.0));
  }
  return cams;
}

void rasterize(const SceneSpec& spec, DensityGrid& density, ShColorGrid& color) {
  const GridGeometry g(spec.dims, spec.bbox_min, spec.bbox_max);
  density = DensityGrid(g);
  color = ShColorGrid(g, spec.sh_degree);
  const int ss = spec.supersample;
  const Vec3 vs = g.voxel_size();
  for (size_t v = 0; v < g.voxel_count(); ++v) {
    const Vec3 center = g.voxel_center(v);
    double acc = 0.0;
    for (int a = 0; a < ss; ++a) {
      for (int b = 0; b < ss; ++b) {
        for (int c = 0; c < ss; ++c) {
          const Vec3 offset = (Vec3(a + 0.5, b + 0.5, c + 0.5) / ss - Vec3::Constant(0.5)).cwiseProduct(vs);
          const Vec3 p = center + offset;
          double best = 0.0;
          for (const auto& prim : spec.primitives) {
            if (prim.signed_distance(p) <= 0.0) best = std::max(best, prim.density);
          }
          acc += best;
        }
      }
    }
    density.set(v, acc / (ss * ss * ss));

    const Primitive* nearest = nullptr;
    double nearest_d = INFINITY;
    for (const auto& prim : spec.primitives) {
      const double d = prim.signed_distance(center);
      if (d < nearest_d) {
        nearest_d = d;
        nearest = &prim;
      }
    }
    if (nearest) {
      // Emitters of lower degree embed into the leading coefficients.
      const ShCoeffs src = nearest->color_at(center);
      ShCoeffs c = ShCoeffs::zeros(spec.sh_degree);
      for (int ch = 0; ch < kColorChannels; ++ch) {
        for (int i = 0; i < sh_count(src.degree); ++i) c.at(ch, i) = src.at(ch, i);
      }
      color.set(v, c);
    }
  }
  round_to_float(density);
  round_to_float(color);
}

SynthScene synth_scene(const SceneSpec& spec) {
  spec.validate();
  SynthScene out;
  rasterize(spec, out.density, out.color);
  out.render = scene_render_config(spec);
  for (const Camera& cam : make_cameras(spec)) {
    out.views.push_back({cam, render_image(out.density, out.color, cam, out.render)});
  }
  return out;
}

ShCoeffs random_emitter(int degree, const Rgb& base, double amplitude, uint64_t seed) {
  ShCoeffs c = ShCoeffs::constant(degree, base);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, amplitude);
  for (int ch = 0; ch < kColorChannels; ++ch) {
    for (int i = 1; i < sh_count(degree); ++i) c.at(ch, i) = normal(rng);
  }
  return c;
}

SceneSpec round_trip_sphere_scene() {
  SceneSpec s;
  Primitive p;
  p.kind = PrimitiveKind::kSphere;
  p.center = Vec3::Zero();
  p.radius = 0.55;
  p.density = 80.0;
  p.color = random_emitter(2, Rgb(0.55, 0.45, 0.35), 0.02, 7);
  s.primitives = {p};
  s.layout = CameraLayout::kSphere;
  s.camera_count = 200;
  // Distant, narrow cameras keep the directions seen from off-center
  // voxels close to the lattice directions.
  s.camera_radius = 6.0;
  s.fov_deg = 20.0;
  s.seed = 1;
  return s;
}

SceneSpec bundled_scene(const std::string& name) {
  SceneSpec s;
  if (name == "globe") {
    Primitive p;
    p.kind = PrimitiveKind::kSphere;
    p.center = Vec3::Zero();
    p.radius = 0.55;
    p.density = 80.0;
    p.color = random_emitter(2, Rgb(0.5, 0.45, 0.4), 0.04, 31);
    p.dc_gradient << 0.6, 0.0, 0.3,
                     0.0, -0.5, 0.45,
                     -0.4, 0.5, 0.0;
    s.primitives = {p};
    s.layout = CameraLayout::kSphere;
    s.camera_count = 100;
    s.seed = 4;
    return s;
  }
  if (name == "tabletop") {
    Primitive floor;
    floor.kind = PrimitiveKind::kBox;
    floor.box_min = Vec3(-0.8, -0.8, -0.55);
    floor.box_max = Vec3(0.8, 0.8, -0.35);
    floor.density = 80.0;
    floor.color = random_emitter(2, Rgb(0.2, 0.5, 0.25), 0.04, 11);
    Primitive ball;
    ball.kind = PrimitiveKind::kSphere;
    ball.center = Vec3(-0.2, 0.1, -0.05);
    ball.radius = 0.3;
    ball.density = 80.0;
    ball.color = random_emitter(2, Rgb(0.8, 0.3, 0.2), 0.05, 12);
    Primitive block;
    block.kind = PrimitiveKind::kBox;
    block.box_min = Vec3(0.15, -0.45, -0.35);
    block.box_max = Vec3(0.5, -0.1, 0.25);
    block.density = 80.0;
    block.color = random_emitter(2, Rgb(0.25, 0.35, 0.8), 0.05, 13);
    s.primitives = {floor, ball, block};
    s.layout = CameraLayout::kHemisphere;
    s.min_elevation_deg = 10.0;
    s.camera_count = 100;
    s.seed = 2;
    return s;
  }
  if (name == "pillars") {
    Primitive a;
    a.kind = PrimitiveKind::kBox;
    a.box_min = Vec3(-0.45, -0.15, -0.5);
    a.box_max = Vec3(-0.15, 0.15, 0.4);
    a.density = 80.0;
    a.color = random_emitter(2, Rgb(0.9, 0.8, 0.2), 0.05, 21);
    Primitive b = a;
    b.box_min = Vec3(0.15, -0.15, -0.5);
    b.box_max = Vec3(0.45, 0.15, 0.4);
    b.color = random_emitter(2, Rgb(0.2, 0.7, 0.8), 0.05, 22);
    Primitive base;
    base.kind = PrimitiveKind::kBox;
    base.box_min = Vec3(-0.7, -0.5, -0.7);
    base.box_max = Vec3(0.7, 0.5, -0.5);
    base.density = 80.0;
    base.color = random_emitter(2, Rgb(0.6, 0.6, 0.6), 0.03, 23);
    s.primitives = {a, b, base};
    s.layout = CameraLayout::kHemisphere;
    s.min_elevation_deg = 10.0;
    s.camera_count = 100;
    s.seed = 3;
    return s;
  }
  if (name == "round_trip_sphere") return round_trip_sphere_scene();
  fail(ErrorKind::kValidation, "unknown bundled scene: " + name);
}

std::vector<std::string> bundled_scene_names() { return {"globe", "tabletop", "pillars"}; }

DensityGrid corrupt_floaters(const DensityGrid& density, double fraction, uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) fail(ErrorKind::kValidation, "floater fraction must be in [0, 1]");
  DensityGrid out = density;
  const auto values = density.values();
  const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  const size_t n = density.geometry().voxel_count();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const size_t count = static_cast<size_t>(std::llround(fraction * n));
  for (size_t i = 0; i < count; ++i) out.set(order[i], peak * (1.0 - unit(rng)));
  round_to_float(out);
  return out;
}

DensityGrid seed_floaters(const DensityGrid& density, int count, double radius, double value, const Vec3& region_min,
                          const Vec3& region_max, uint64_t seed) {
  if (count < 0 || !(radius > 0.0) || !(value >= 0.0)) fail(ErrorKind::kValidation, "invalid floater parameters");
  DensityGrid out = density;
  const GridGeometry& g = density.geometry();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int f = 0; f < count; ++f) {
    Vec3 c;
    for (int a = 0; a < 3; ++a) c[a] = region_min[a] + (region_max[a] - region_min[a]) * unit(rng);
    for (size_t v = 0; v < g.voxel_count(); ++v) {
      if ((g.voxel_center(v) - c).norm() < radius && out.value(v) < value) out.set(v, value);
    }
  }
  return out;
}

namespace {

// Calls fn(neighbor) for each in-grid 6-neighbor of voxel v.
template <class Fn>
void for_each_neighbor(const GridGeometry& g, size_t v, Fn&& fn) {
  const auto ijk = g.unravel(v);
  for (int axis = 0; axis < 3; ++axis) {
    for (int step : {-1, 1}) {
      auto n = ijk;
      n[axis] += step;
      if (n[axis] < 0 || n[axis] >= g.dims()[axis]) continue;
      fn(g.linear_index(n[0], n[1], n[2]));
    }
  }
}

}  // namespace

DensityGrid corrupt_thicken(const DensityGrid& density) {
  const GridGeometry& g = density.geometry();
  DensityGrid out = density;
  for (size_t v = 0; v < g.voxel_count(); ++v) {
    if (density.value(v) > 0.0) continue;
    double best = 0.0;
    for_each_neighbor(g, v, [&](size_t n) { best = std::max(best, density.value(n)); });
    out.set(v, best);
  }
  return out;
}

DensityGrid corrupt_erode(const DensityGrid& density) {
  const GridGeometry& g = density.geometry();
  DensityGrid out = density;
  for (size_t v = 0; v < g.voxel_count(); ++v) {
    if (density.value(v) == 0.0) continue;
    bool boundary = false;
    for_each_neighbor(g, v, [&](size_t n) { boundary = boundary || density.value(n) == 0.0; });
    if (boundary) out.set(v, 0.0);
  }
  return out;
}

// --- JSON ------------------------------------------------------------------

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::kValidation, "expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json coeffs_json(const ShCoeffs& c) {
  json channels = json::array();
  for (int ch = 0; ch < kColorChannels; ++ch) {
    const auto span = c.channel(ch);
    channels.push_back(std::vector<double>(span.begin(), span.end()));
  }
  return json{{"degree", c.degree}, {"coeffs", channels}};
}

ShCoeffs coeffs_from(const json& j) {
  if (j.contains("rgb")) {
    const Vec3 rgb = vec_from(j.at("rgb"));
    return ShCoeffs::constant(j.value("degree", 0), rgb);
  }
  ShCoeffs c = ShCoeffs::zeros(j.at("degree").get<int>());
  const auto& channels = j.at("coeffs");
  if (!channels.is_array() || channels.size() != kColorChannels) {
    fail(ErrorKind::kValidation, "emitter needs 3 coefficient channels");
  }
  for (int ch = 0; ch < kColorChannels; ++ch) {
    if (channels[ch].size() != static_cast<size_t>(sh_count(c.degree))) {
      fail(ErrorKind::kValidation, "emitter coefficient count does not match its degree");
    }
    for (int i = 0; i < sh_count(c.degree); ++i) c.at(ch, i) = channels[ch][i].get<double>();
  }
  return c;
}

}  // namespace

json scene_spec_to_json(const SceneSpec& s) {
  json prims = json::array();
  for (const auto& p : s.primitives) {
    json jp{{"density", p.density}, {"color", coeffs_json(p.color)}};
    if (!p.dc_gradient.isZero()) {
      json rows = json::array();
      for (int r = 0; r < 3; ++r) rows.push_back(vec_json(p.dc_gradient.row(r).transpose()));
      jp["dc_gradient"] = rows;
    }
    if (p.kind == PrimitiveKind::kSphere) {
      jp["type"] = "sphere";
      jp["center"] = vec_json(p.center);
      jp["radius"] = p.radius;
    } else {
      jp["type"] = "box";
      jp["min"] = vec_json(p.box_min);
      jp["max"] = vec_json(p.box_max);
    }
    prims.push_back(jp);
  }
  return json{{"primitives", prims},
              {"dims", s.dims},
              {"bbox_min", vec_json(s.bbox_min)},
              {"bbox_max", vec_json(s.bbox_max)},
              {"sh_degree", s.sh_degree},
              {"camera_count", s.camera_count},
              {"layout", s.layout == CameraLayout::kSphere ? "sphere" : "hemisphere"},
              {"camera_radius", s.camera_radius},
              {"look_at", vec_json(s.look_at)},
              {"min_elevation_deg", s.min_elevation_deg},
              {"fov_deg", s.fov_deg},
              {"width", s.width},
              {"height", s.height},
              {"supersample", s.supersample},
              {"seed", s.seed}};
}

SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec s;
  try {
    if (j.contains("bundled")) s = bundled_scene(j.at("bundled").get<std::string>());
    if (j.contains("primitives")) {
      s.primitives.clear();
      for (const auto& jp : j.at("primitives")) {
        Primitive p;
        const std::string type = jp.at("type").get<std::string>();
        if (type == "sphere") {
          p.kind = PrimitiveKind::kSphere;
          p.center = vec_from(jp.at("center"));
          p.radius = jp.at("radius").get<double>();
        } else if (type == "box") {
          p.kind = PrimitiveKind::kBox;
          p.box_min = vec_from(jp.at("min"));
          p.box_max = vec_from(jp.at("max"));
        } else {
          fail(ErrorKind::kValidation, "unknown primitive type: " + type);
        }
        p.density = jp.value("density", p.density);
        if (jp.contains("color")) p.color = coeffs_from(jp.at("color"));
        if (jp.contains("dc_gradient")) {
          const auto& rows = jp.at("dc_gradient");
          if (!rows.is_array() || rows.size() != 3) fail(ErrorKind::kValidation, "dc_gradient must be 3x3");
          for (int r = 0; r < 3; ++r) p.dc_gradient.row(r) = vec_from(rows[r]).transpose();
        }
        s.primitives.push_back(p);
      }
    }
    if (j.contains("dims")) s.dims = j.at("dims").get<std::array<int, 3>>();
    if (j.contains("bbox_min")) s.bbox_min = vec_from(j.at("bbox_min"));
    if (j.contains("bbox_max")) s.bbox_max = vec_from(j.at("bbox_max"));
    s.sh_degree = j.value("sh_degree", s.sh_degree);
    s.camera_count = j.value("camera_count", s.camera_count);
    if (j.contains("layout")) {
      const std::string layout = j.at("layout").get<std::string>();
      if (layout == "sphere") s.layout = CameraLayout::kSphere;
      else if (layout == "hemisphere") s.layout = CameraLayout::kHemisphere;
      else fail(ErrorKind::kValidation, "layout must be 'sphere' or 'hemisphere'");
    }
    s.camera_radius = j.value("camera_radius", s.camera_radius);
    if (j.contains("look_at")) s.look_at = vec_from(j.at("look_at"));
    s.min_elevation_deg = j.value("min_elevation_deg", s.min_elevation_deg);
    s.fov_deg = j.value("fov_deg", s.fov_deg);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.supersample = j.value("supersample", s.supersample);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, std::string("malformed scene spec: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace cfrf

#include "cfrf/volume_renderer.hpp"

#include <array>
#include <cmath>

#include "cfrf/sh_basis.hpp"

namespace cfrf {
namespace {

struct MarchRange {
  double t0 = 0.0;
  double t1 = 0.0;
  bool hit = false;
};

MarchRange march_range(const GridGeometry& g, const Ray& ray, const RenderConfig& cfg) {
  Ray r = ray;
  r.t_near = std::max(ray.t_near, cfg.t_near);
  r.t_far = std::min(ray.t_far, cfg.t_far);
  if (!(r.t_far > r.t_near)) return {};
  const auto clipped = clip_to_box(r, g.bbox_min(), g.bbox_max());
  if (!clipped) return {};
  return {clipped->t_near, clipped->t_far, true};
}

// alpha(sigma) / sigma, continuous through sigma = 0.
double opacity_per_density(double sigma, double step) {
  const double x = sigma * step;
  if (std::abs(x) < 1e-2) return step * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
  return -std::expm1(-x) / sigma;
}

// d/dsigma of opacity_per_density.
double opacity_per_density_deriv(double sigma, double step) {
  const double x = sigma * step;
  if (std::abs(x) < 1e-2) return step * step * (-0.5 + x / 3.0 - x * x / 8.0 + x * x * x / 30.0);
  const double e = std::exp(-x);
  return (step * sigma * e + std::expm1(-x)) / (sigma * sigma);
}

bool all_corners_empty(const DensityGrid& density, const TrilinearStencil& s) {
  for (int c = 0; c < s.count; ++c) {
    if (density.value(s.index[c]) != 0.0) return false;
  }
  return true;
}

Rgb corner_color(const ShColorGrid& color, uint32_t voxel, std::span<const double> basis) {
  return eval_color(color.coeffs(voxel), basis);
}

// Opacity-weighted emission a_i of one sample from the SH grid.
Rgb sample_emission(const DensityGrid& density, const ShColorGrid& color, const TrilinearStencil& s,
                    double sigma, std::span<const double> basis, const RenderConfig& cfg) {
  Rgb acc = Rgb::Zero();
  if (cfg.color_interp == ColorInterp::kTrilinear) {
    for (int c = 0; c < s.count; ++c) acc += s.weight[c] * corner_color(color, s.index[c], basis);
    return -std::expm1(-sigma * cfg.step_size) * acc;
  }
  for (int c = 0; c < s.count; ++c) {
    acc += (s.weight[c] * density.value(s.index[c])) * corner_color(color, s.index[c], basis);
  }
  return opacity_per_density(sigma, cfg.step_size) * acc;
}

}  // namespace

RenderConfig RenderConfig::for_grid(const GridGeometry& geometry, double t_far) {
  RenderConfig cfg;
  cfg.step_size = geometry.half_width();
  cfg.dead_zone = geometry.half_width();
  cfg.t_far = t_far;
  return cfg;
}

void RenderConfig::validate() const {
  if (!(step_size > 0.0)) fail(ErrorKind::kValidation, "render step size must be positive");
  if (!(early_stop >= 0.0 && early_stop < 1.0)) fail(ErrorKind::kValidation, "early-stop threshold must be in [0, 1)");
  if (!(dead_zone >= 0.0)) fail(ErrorKind::kValidation, "dead zone must be nonnegative");
  if (!(t_far > t_near)) fail(ErrorKind::kValidation, "t_far must exceed t_near");
}

std::vector<RaySample> march_samples(const DensityGrid& density, const Ray& ray, const RenderConfig& cfg) {
  std::vector<RaySample> out;
  const MarchRange range = march_range(density.geometry(), ray, cfg);
  if (!range.hit) return out;
  double trans = 1.0;
  for (int i = 0;; ++i) {
    const double t = range.t0 + (i + 0.5) * cfg.step_size;
    if (t >= range.t1) break;
    const double sigma = density.sample(density.geometry().stencil(ray.point_at(t)));
    const double alpha = -std::expm1(-sigma * cfg.step_size);
    out.push_back({t, sigma, alpha, trans, trans * alpha});
    trans *= std::exp(-sigma * cfg.step_size);
    if (trans < cfg.early_stop) break;
  }
  return out;
}

RenderResult render_ray(const DensityGrid& density, const ShColorGrid& color, const Ray& ray,
                        const RenderConfig& cfg) {
  RenderResult out;
  const MarchRange range = march_range(density.geometry(), ray, cfg);
  if (!range.hit) return out;
  std::array<double, kMaxShCount> basis_buf;
  const std::span<double> basis(basis_buf.data(), sh_count(color.degree()));
  eval_basis_into(color.degree(), -ray.direction, basis);
  const GridGeometry& g = density.geometry();
  double trans = 1.0;
  for (int i = 0;; ++i) {
    const double t = range.t0 + (i + 0.5) * cfg.step_size;
    if (t >= range.t1) break;
    const TrilinearStencil s = g.stencil(ray.point_at(t));
    if (all_corners_empty(density, s)) continue;
    const double sigma = density.sample(s);
    out.color += trans * sample_emission(density, color, s, sigma, basis, cfg);
    trans *= std::exp(-sigma * cfg.step_size);
    if (trans < cfg.early_stop) break;
  }
  out.transmittance = trans;
  return out;
}

RenderResult render_ray(const DensityGrid& density, const ColorFn& color, const Ray& ray,
                        const RenderConfig& cfg) {
  RenderResult out;
  const MarchRange range = march_range(density.geometry(), ray, cfg);
  if (!range.hit) return out;
  const GridGeometry& g = density.geometry();
  const Vec3 toward_camera = -ray.direction;
  double trans = 1.0;
  for (int i = 0;; ++i) {
    const double t = range.t0 + (i + 0.5) * cfg.step_size;
    if (t >= range.t1) break;
    const Vec3 p = ray.point_at(t);
    const double sigma = density.sample(g.stencil(p));
    if (sigma == 0.0) continue;
    out.color += trans * -std::expm1(-sigma * cfg.step_size) * color(p, toward_camera);
    trans *= std::exp(-sigma * cfg.step_size);
    if (trans < cfg.early_stop) break;
  }
  out.transmittance = trans;
  return out;
}

Rgb render_ray_backward(const DensityGrid& density, const ShColorGrid& color, const Ray& ray,
                        const RenderConfig& cfg, const Rgb& dloss_dcolor,
                        std::span<double> grad_density, std::span<double> grad_color) {
  struct Record {
    TrilinearStencil stencil;
    std::array<Rgb, 8> corner;
    double sigma;
    double trans;
    double factor;  // emission = factor * blend
    Rgb blend;      // density-weighted moment or trilinear color
  };
  const MarchRange range = march_range(density.geometry(), ray, cfg);
  if (!range.hit) return Rgb::Zero();

  const int n_basis = sh_count(color.degree());
  std::array<double, kMaxShCount> basis_buf;
  const std::span<double> basis(basis_buf.data(), n_basis);
  eval_basis_into(color.degree(), -ray.direction, basis);
  const GridGeometry& g = density.geometry();
  const double step = cfg.step_size;
  const bool density_weighted = cfg.color_interp == ColorInterp::kDensityWeighted;

  std::vector<Record> records;
  Rgb rendered = Rgb::Zero();
  double trans = 1.0;
  for (int i = 0;; ++i) {
    const double t = range.t0 + (i + 0.5) * step;
    if (t >= range.t1) break;
    Record r;
    r.stencil = g.stencil(ray.point_at(t));
    if (r.stencil.count == 0) continue;
    r.sigma = density.sample(r.stencil);
    r.trans = trans;
    r.blend = Rgb::Zero();
    for (int c = 0; c < r.stencil.count; ++c) {
      r.corner[c] = corner_color(color, r.stencil.index[c], basis);
      const double w = density_weighted ? r.stencil.weight[c] * density.value(r.stencil.index[c])
                                        : r.stencil.weight[c];
      r.blend += w * r.corner[c];
    }
    r.factor = density_weighted ? opacity_per_density(r.sigma, step) : -std::expm1(-r.sigma * step);
    rendered += trans * (r.factor * r.blend);
    records.push_back(r);
    trans *= std::exp(-r.sigma * step);
    if (trans < cfg.early_stop) break;
  }

  // suffix = sum over later samples of T_k a_k
  Rgb suffix = Rgb::Zero();
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    const Record& r = *it;
    const double through_later = -step * dloss_dcolor.dot(suffix);
    const Rgb up = r.trans * dloss_dcolor;  // dL/d(emission)
    const double factor_deriv = density_weighted ? opacity_per_density_deriv(r.sigma, step)
                                                 : step * std::exp(-r.sigma * step);
    const double up_blend = up.dot(r.blend);
    for (int c = 0; c < r.stencil.count; ++c) {
      const uint32_t v = r.stencil.index[c];
      const double w = r.stencil.weight[c];
      double d_emission = w * factor_deriv * up_blend;
      if (density_weighted) d_emission += w * r.factor * up.dot(r.corner[c]);
      grad_density[v] += w * through_later + d_emission;
      if (!grad_color.empty()) {
        const double scale = density_weighted ? r.factor * w * density.value(v) : r.factor * w;
        if (scale != 0.0) {
          double* dst = grad_color.data() + static_cast<size_t>(v) * kColorChannels * n_basis;
          for (int ch = 0; ch < kColorChannels; ++ch) {
            const double s = scale * up[ch];
            for (int j = 0; j < n_basis; ++j) dst[ch * n_basis + j] += s * basis[j];
          }
        }
      }
    }
    suffix += r.trans * r.factor * r.blend;
  }
  return rendered;
}

double transmittance_to_camera(const DensityGrid& density, const Vec3& point, const Vec3& camera_origin,
                               const RenderConfig& cfg) {
  const Vec3 delta = camera_origin - point;
  const double dist = delta.norm();
  if (dist <= cfg.dead_zone) return 1.0;
  Ray seg;
  seg.origin = point;
  seg.direction = delta / dist;
  seg.t_near = cfg.dead_zone;
  seg.t_far = dist;
  const GridGeometry& g = density.geometry();
  const auto clipped = clip_to_box(seg, g.bbox_min(), g.bbox_max());
  if (!clipped) return 1.0;
  const double depth_limit = cfg.early_stop > 0.0 ? -std::log(cfg.early_stop) : INFINITY;
  double optical_depth = 0.0;
  for (int i = 0;; ++i) {
    const double t = clipped->t_near + (i + 0.5) * cfg.step_size;
    if (t >= clipped->t_far) break;
    optical_depth += density.sample(g.stencil(seg.point_at(t))) * cfg.step_size;
    if (optical_depth > depth_limit) return 0.0;
  }
  return std::exp(-optical_depth);
}

double render_depth(const DensityGrid& density, const Ray& ray, const RenderConfig& cfg) {
  double wsum = 0.0, tsum = 0.0;
  for (const RaySample& s : march_samples(density, ray, cfg)) {
    wsum += s.weight;
    tsum += s.weight * s.t;
  }
  if (wsum < 1e-6) return std::min(ray.t_far, cfg.t_far);
  return tsum / wsum;
}

Image render_image(const DensityGrid& density, const ShColorGrid& color, const Camera& camera,
                   const RenderConfig& cfg) {
  Image out(camera.width, camera.height);
#pragma omp parallel for schedule(dynamic)
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      out.set(x, y, render_ray(density, color, pixel_ray(camera, x, y), cfg).color);
    }
  }
  return out;
}

std::vector<double> render_depth_map(const DensityGrid& density, const Camera& camera, const RenderConfig& cfg) {
  std::vector<double> out(static_cast<size_t>(camera.width) * camera.height);
#pragma omp parallel for schedule(dynamic)
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      out[static_cast<size_t>(y) * camera.width + x] = render_depth(density, pixel_ray(camera, x, y), cfg);
    }
  }
  return out;
}

}  // namespace cfrf

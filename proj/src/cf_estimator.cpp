#include "cfrf/cf_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cfrf {

namespace {
constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);
}

DirectionPdf DirectionPdf::mixture_vmf(std::vector<Vec3> modes, double concentration) {
  DirectionPdf p;
  p.kind = PdfKind::kMixtureVmf;
  p.modes = std::move(modes);
  p.concentration = concentration;
  p.validate();
  return p;
}

void DirectionPdf::validate() const {
  if (kind != PdfKind::kMixtureVmf) return;
  if (!(concentration >= 0.0) || !std::isfinite(concentration)) {
    fail(ErrorKind::kValidation, "vMF concentration must be finite and nonnegative");
  }
  for (const Vec3& m : modes) {
    if (std::abs(m.norm() - 1.0) > 1e-6) fail(ErrorKind::kValidation, "vMF modes must be unit vectors");
  }
}

double pdf_eval(const DirectionPdf& pdf, const Vec3& d) {
  if (std::abs(d.norm() - 1.0) > 1e-6) fail(ErrorKind::kValidation, "pdf_eval needs a unit direction");
  if (pdf.kind == PdfKind::kUniform) return kInv4Pi;
  pdf.validate();
  if (pdf.modes.empty()) fail(ErrorKind::kValidation, "vMF mixture has no modes");
  const double c = pdf.concentration;
  double acc = 0.0;
  for (const Vec3& mu : pdf.modes) {
    const double cos = mu.dot(d);
    if (c < 1e-4) {
      // c / sinh c = 1 - c^2/6 + O(c^4)
      acc += kInv4Pi * (1.0 - c * c / 6.0) * std::exp(c * cos);
    } else {
      // c e^{c cos} / (4 pi sinh c) = c e^{c (cos - 1)} / (2 pi (1 - e^{-2c}))
      acc += c * std::exp(c * (cos - 1.0)) / (2.0 * std::numbers::pi * -std::expm1(-2.0 * c));
    }
  }
  return acc / static_cast<double>(pdf.modes.size());
}

void EstimatorConfig::validate() const {
  if (rounds < 1) fail(ErrorKind::kValidation, "estimator needs at least one round");
  render.validate();
}

VoxelObservations gather_observations(const Vec3& point, const DensityGrid& density, const Dataset& dataset,
                                      const EstimatorConfig& cfg) {
  VoxelObservations out;
  for (size_t k = 0; k < dataset.size(); ++k) {
    const Camera& cam = dataset[k].camera;
    const auto proj = project(cam, point);
    if (!proj) continue;
    const auto color = sample_image(dataset[k].image, proj->pixel);
    if (!color) continue;
    const Vec3 toward = cam.origin() - point;
    const double dist = toward.norm();
    if (!(dist > 0.0)) continue;
    const double w = cfg.occlusion ? transmittance_to_camera(density, point, cam.origin(), cfg.render) : 1.0;
    out.items.push_back({toward / dist, w, *color, static_cast<uint32_t>(k)});
  }
  return out;
}

VoxelEstimate estimate_voxel_sh(const VoxelObservations& obs, const DirectionPdf& pdf, int degree,
                                const EstimatorConfig& cfg) {
  check_degree(degree);
  VoxelEstimate out;
  out.coeffs = ShCoeffs::zeros(degree);
  const int n = sh_count(degree);
  const size_t count = obs.items.size();
  out.residuals.resize(count);
  for (size_t k = 0; k < count; ++k) out.residuals[k] = obs.items[k].color;

  double wsum = 0.0;
  for (const auto& o : obs.items) wsum += o.weight;
  if (!(wsum > 0.0)) return out;

  std::vector<Vec3> vmf_modes;
  const DirectionPdf* used = &pdf;
  DirectionPdf local;
  if (pdf.kind == PdfKind::kMixtureVmf && pdf.modes.empty()) {
    local = pdf;
    for (const auto& o : obs.items) local.modes.push_back(o.direction);
    used = &local;
  }

  // basis[k * n + i] = Y_i(d_k); gain[k] = w_k / p(d_k) / sum w
  std::vector<double> basis(count * n);
  std::vector<double> gain(count);
  for (size_t k = 0; k < count; ++k) {
    eval_basis_into(degree, obs.items[k].direction, std::span<double>(basis).subspan(k * n, n));
    gain[k] = obs.items[k].weight / pdf_eval(*used, obs.items[k].direction) / wsum;
  }

  std::vector<Rgb>& r = out.residuals;
  const int rounds = cfg.residual ? cfg.rounds : 1;
  for (int round = 0; round < rounds; ++round) {
    for (int i = 0; i < n; ++i) {
      Rgb prev;
      for (int ch = 0; ch < kColorChannels; ++ch) prev[ch] = out.coeffs.at(ch, i);
      Rgb h = Rgb::Zero();
      for (size_t k = 0; k < count; ++k) {
        if (gain[k] == 0.0) continue;
        const double y = basis[k * n + i];
        // Later rounds put the component back before re-estimating it.
        const Rgb src = cfg.residual ? Rgb(r[k] + prev * y) : obs.items[k].color;
        h += gain[k] * y * src;
      }
      for (int ch = 0; ch < kColorChannels; ++ch) out.coeffs.at(ch, i) = h[ch];
      if (cfg.residual) {
        for (size_t k = 0; k < count; ++k) r[k] -= (h - prev) * basis[k * n + i];
      }
    }
  }
  if (!cfg.residual) {
    for (size_t k = 0; k < count; ++k) {
      r[k] = obs.items[k].color -
             eval_color(out.coeffs.values, std::span<const double>(basis).subspan(k * n, n));
    }
  }
  out.estimated = true;
  return out;
}

VoxelSet VoxelSet::above(double tau) {
  VoxelSet s;
  s.kind = VoxelSetKind::kThreshold;
  s.threshold = tau;
  return s;
}

VoxelSet VoxelSet::occupied() { return above(std::numeric_limits<double>::denorm_min()); }

VoxelSet VoxelSet::ray_batch(std::vector<Ray> rays) {
  VoxelSet s;
  s.kind = VoxelSetKind::kRayBatch;
  s.rays = std::move(rays);
  return s;
}

VoxelSet VoxelSet::explicit_list(std::vector<uint32_t> voxels) {
  VoxelSet s;
  s.kind = VoxelSetKind::kList;
  s.list = std::move(voxels);
  return s;
}

std::vector<uint32_t> ray_batch_voxels(const DensityGrid& density, std::span<const Ray> rays,
                                       const RenderConfig& cfg) {
  std::vector<uint32_t> out;
  const bool skip_empty = cfg.color_interp == ColorInterp::kDensityWeighted;
  const GridGeometry& g = density.geometry();
  for (const Ray& ray : rays) {
    for (const RaySample& s : march_samples(density, ray, cfg)) {
      const TrilinearStencil st = g.stencil(ray.point_at(s.t));
      for (int c = 0; c < st.count; ++c) {
        if (skip_empty && density.value(st.index[c]) == 0.0) continue;
        out.push_back(st.index[c]);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<uint32_t> select_voxels(const DensityGrid& density, const VoxelSet& set, const RenderConfig& cfg) {
  const size_t n = density.geometry().voxel_count();
  std::vector<uint32_t> out;
  switch (set.kind) {
    case VoxelSetKind::kAll:
      out.resize(n);
      for (size_t v = 0; v < n; ++v) out[v] = static_cast<uint32_t>(v);
      break;
    case VoxelSetKind::kThreshold:
      for (size_t v = 0; v < n; ++v) {
        if (density.value(v) >= set.threshold) out.push_back(static_cast<uint32_t>(v));
      }
      break;
    case VoxelSetKind::kRayBatch:
      out = ray_batch_voxels(density, set.rays, cfg);
      break;
    case VoxelSetKind::kList:
      out = set.list;
      for (uint32_t v : out) {
        if (v >= n) fail(ErrorKind::kValidation, "voxel index out of range");
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
  }
  return out;
}

ColorFieldEstimate estimate_color_field(const DensityGrid& density, const Dataset& dataset, const DirectionPdf& pdf,
                                        int degree, const VoxelSet& set, const EstimatorConfig& cfg) {
  check_degree(degree);
  cfg.validate();
  pdf.validate();
  ColorFieldEstimate out;
  out.color = ShColorGrid(density.geometry(), degree);
  const std::vector<uint32_t> voxels = select_voxels(density, set, cfg.render);
  std::vector<char> ok(voxels.size(), 0);
  const GridGeometry& g = density.geometry();
#pragma omp parallel for schedule(dynamic, 64)
  for (size_t i = 0; i < voxels.size(); ++i) {
    const uint32_t v = voxels[i];
    const VoxelObservations obs = gather_observations(g.voxel_center(v), density, dataset, cfg);
    const VoxelEstimate est = estimate_voxel_sh(obs, pdf, degree, cfg);
    if (!est.estimated) continue;
    out.color.set(v, est.coeffs);
    ok[i] = 1;
  }
  for (size_t i = 0; i < voxels.size(); ++i) (ok[i] ? out.estimated : out.unestimated).push_back(voxels[i]);
  return out;
}

}  // namespace cfrf

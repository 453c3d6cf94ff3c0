#include "cfrf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cfrf {

double psnr_from_mse(double mse) {
  if (!(mse > 0.0)) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double psnr(const Image& img, const Image& ref) {
  if (img.width != ref.width || img.height != ref.height) fail(ErrorKind::kValidation, "psnr: image shapes differ");
  if (img.data.empty()) fail(ErrorKind::kValidation, "psnr: empty image");
  std::vector<double> sq(img.data.size());
  for (size_t i = 0; i < sq.size(); ++i) sq[i] = (img.data[i] - ref.data[i]) * (img.data[i] - ref.data[i]);
  return psnr_from_mse(pairwise_sum(sq) / static_cast<double>(sq.size()));
}

double depth_psnr(std::span<const double> depth, std::span<const double> ref) {
  if (depth.size() != ref.size()) fail(ErrorKind::kValidation, "depth_psnr: map sizes differ");
  if (ref.empty()) fail(ErrorKind::kValidation, "depth_psnr: empty map");
  const auto [lo, hi] = std::minmax_element(ref.begin(), ref.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) fail(ErrorKind::kValidation, "depth_psnr: reference depth is constant");
  std::vector<double> sq(ref.size());
  for (size_t i = 0; i < sq.size(); ++i) {
    const double e = (depth[i] - ref[i]) / range;
    sq[i] = e * e;
  }
  return psnr_from_mse(pairwise_sum(sq) / static_cast<double>(sq.size()));
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

ImrcResult imrc(const DensityGrid& density, const Dataset& dataset, const DirectionPdf& pdf, int degree,
                const EstimatorConfig& cfg, double threshold) {
  cfg.validate();
  const GridGeometry& g = density.geometry();
  const double delta = g.half_width();
  std::vector<uint32_t> voxels;
  for (size_t v = 0; v < g.voxel_count(); ++v) {
    if (density.value(v) > threshold) voxels.push_back(static_cast<uint32_t>(v));
  }
  std::vector<double> num(voxels.size(), 0.0), den(voxels.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 64)
  for (size_t i = 0; i < voxels.size(); ++i) {
    const uint32_t v = voxels[i];
    const VoxelObservations obs = gather_observations(g.voxel_center(v), density, dataset, cfg);
    const VoxelEstimate est = estimate_voxel_sh(obs, pdf, degree, cfg);
    if (!est.estimated) continue;
    const double opacity = -std::expm1(-density.value(v) * delta);
    for (size_t k = 0; k < obs.items.size(); ++k) {
      const double w = obs.items[k].weight * opacity;
      num[i] += w * est.residuals[k].squaredNorm() / kColorChannels;
      den[i] += w;
    }
  }
  ImrcResult out;
  out.voxels = voxels.size();
  out.numerator = pairwise_sum(num);
  out.denominator = pairwise_sum(den);
  if (out.denominator > 0.0) out.db = psnr_from_mse(out.numerator / out.denominator);
  return out;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string fmt(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v);
  return buf;
}

}  // namespace

nlohmann::json MetricReport::to_json() const {
  nlohmann::json views_json = nlohmann::json::array();
  for (const auto& v : views) {
    views_json.push_back({{"view", v.view}, {"psnr", v.psnr}, {"depth_psnr", opt(v.depth_psnr)}});
  }
  return {{"psnr", opt(psnr)}, {"depth_psnr", opt(depth_psnr)}, {"imrc", opt(imrc)}, {"views", views_json}};
}

std::string MetricReport::table() const {
  std::ostringstream os;
  os << "metric      dB\n";
  os << "psnr        " << fmt(psnr) << "\n";
  os << "depth_psnr  " << fmt(depth_psnr) << "\n";
  os << "imrc        " << fmt(imrc) << "\n";
  if (!views.empty()) {
    os << "\nview  psnr    depth_psnr\n";
    for (const auto& v : views) {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "%-5zu %-7.2f %s\n", v.view, v.psnr, fmt(v.depth_psnr).c_str());
      os << buf;
    }
  }
  return os.str();
}

}  // namespace cfrf

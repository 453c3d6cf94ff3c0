#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfrf/cf_estimator.hpp"
#include "json.hpp"

namespace cfrf {

inline constexpr double kPsnrCap = 99.0;

/// -10 log10(mse), capped at kPsnrCap.
double psnr_from_mse(double mse);
/// Symmetric. Throws kValidation on a shape mismatch.
double psnr(const Image& img, const Image& ref);
/// Both maps are normalized by the reference's min and max, so the result is
/// not symmetric. Throws kValidation on a shape mismatch or constant reference.
double depth_psnr(std::span<const double> depth, std::span<const double> ref);

/// Fixed-order pairwise summation.
double pairwise_sum(std::span<const double> values);

struct ImrcResult {
  std::optional<double> db;  // empty when the total weight is zero
  double numerator = 0.0;    // sum of w (mean over channels of residual^2)
  double denominator = 0.0;  // sum of w
  size_t voxels = 0;         // voxels with sigma > threshold
};

/// Estimates every voxel with density > `threshold` and weights each final
/// residual by T_vk (1 - exp(-sigma_v delta)), delta = the voxel half-width.
ImrcResult imrc(const DensityGrid& density, const Dataset& dataset, const DirectionPdf& pdf, int degree,
                const EstimatorConfig& cfg, double threshold = 0.0);

struct ViewMetrics {
  size_t view = 0;
  double psnr = 0.0;
  std::optional<double> depth_psnr;
};

struct MetricReport {
  std::optional<double> psnr;        // mean over views
  std::optional<double> depth_psnr;  // mean over views with a reference depth
  std::optional<double> imrc;
  std::vector<ViewMetrics> views;

  nlohmann::json to_json() const;
  std::string table() const;
};

}  // namespace cfrf

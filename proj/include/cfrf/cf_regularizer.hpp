#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfrf/cf_estimator.hpp"
#include "json.hpp"

namespace cfrf {

struct LossValue {
  double loss = 0.0;
  std::vector<double> grad_density;  // one per voxel
  std::vector<double> grad_color;    // color-grid layout; empty when not requested
  std::vector<Rgb> rendered;         // one per ray
};

/// (1/|R|) sum_r ||C(r) - gt(r)||^2 with analytic gradients through the
/// quadrature. Throws kValidation on an empty or misaligned batch.
LossValue photometric_loss(const DensityGrid& density, const ShColorGrid& color, const std::vector<Ray>& rays,
                           const std::vector<Rgb>& gt, const RenderConfig& cfg, bool want_color_grad = true);

struct CfLossValue {
  LossValue value;  // grad_color stays empty
  ColorFieldEstimate estimate;
};

/// Estimates the colors of the voxels the rays can reach, then evaluates the
/// photometric loss with those colors held fixed: the density gradient flows
/// through the rendering weights only.
CfLossValue cf_loss(const DensityGrid& density, const Dataset& dataset, const std::vector<Ray>& rays,
                    const std::vector<Rgb>& gt, const DirectionPdf& pdf, int degree, const EstimatorConfig& cfg);

struct TrainConfig {
  double lambda = 0.1;  // CF loss weight
  int batch_rays = 256;
  int cf_rays = 25;
  int iterations = 500;
  int sh_degree = 2;
  std::string optimizer = "rmsprop";
  double lr_density = 1.0;
  double lr_color = 0.03;
  double lr_final_factor = 0.1;  // learning rates decay exponentially to this fraction
  double rms_decay = 0.95;
  double rms_epsilon = 1e-8;
  /// Densities below this are set to zero after every step (0 = off).
  double prune_threshold = 0.0;
  bool occlusion = true;  // CF estimation switches
  bool residual = true;
  int eval_every = 0;     // 0: evaluate held-out views only at the end
  uint64_t seed = 0;

  /// Weights used with the original models: "dtu" 10, "synthetic" 0.1, "llff" 0.5.
  static TrainConfig preset(const std::string& name);
  void validate() const;
};

nlohmann::json train_config_to_json(const TrainConfig& cfg);
/// Unknown keys are rejected; "preset" selects the base before overrides.
TrainConfig train_config_from_json(const nlohmann::json& j);

struct LossRecord {
  int iteration = 0;
  double photometric = 0.0;
  double cf = 0.0;
  double total = 0.0;  // photometric + lambda * cf
  std::optional<double> psnr;
  std::optional<double> depth_psnr;
};

struct HeldOut {
  Dataset views;
  std::vector<std::vector<double>> depth;  // reference depth per view, may be empty
};

struct TrainState {
  DensityGrid density;
  ShColorGrid color;
  int iteration = 0;  // iterations already done; a resumed run continues from here
};

struct TrainResult {
  TrainState state;
  std::vector<LossRecord> history;
};

/// Rays through pixel centers drawn uniformly over all pixels of all views.
void sample_pixel_rays(const Dataset& dataset, int count, uint64_t seed, uint64_t iteration, uint64_t stream,
                       std::vector<Ray>& rays, std::vector<Rgb>& gt);

/// RMSProp on density and color with projection to density >= 0. Ray batches
/// depend only on (seed, iteration), so runs differing in lambda see the same
/// photometric rays. Throws kNumerical when a loss becomes non-finite.
TrainResult train(const Dataset& dataset, TrainState init, const TrainConfig& cfg, const RenderConfig& render,
                  const HeldOut* held_out = nullptr);

/// Held-out PSNR and depth PSNR of the current fields.
void evaluate_held_out(const DensityGrid& density, const ShColorGrid& color, const HeldOut& held_out,
                       const RenderConfig& render, LossRecord& record);

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossRecord>& history);

}  // namespace cfrf

#include "cfrf/cf_regularizer.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "cfrf/metrics.hpp"

namespace cfrf {

using json = nlohmann::json;

LossValue photometric_loss(const DensityGrid& density, const ShColorGrid& color, const std::vector<Ray>& rays,
                           const std::vector<Rgb>& gt, const RenderConfig& cfg, bool want_color_grad) {
  if (rays.empty()) fail(ErrorKind::kValidation, "loss needs a nonempty ray batch");
  if (rays.size() != gt.size()) fail(ErrorKind::kValidation, "rays and target pixels differ in count");
  LossValue out;
  out.grad_density.assign(density.geometry().voxel_count(), 0.0);
  if (want_color_grad) out.grad_color.assign(color.values().size(), 0.0);
  out.rendered.resize(rays.size());
  const double inv = 1.0 / static_cast<double>(rays.size());
  std::vector<double> sq(rays.size());
  // Serial so that gradient accumulation order is fixed.
  for (size_t r = 0; r < rays.size(); ++r) {
    // Forward once to get the residual, then backward with dL/dC.
    const Rgb c = render_ray(density, color, rays[r], cfg).color;
    const Rgb diff = c - gt[r];
    sq[r] = diff.squaredNorm();
    out.rendered[r] = render_ray_backward(density, color, rays[r], cfg, 2.0 * inv * diff, out.grad_density,
                                          out.grad_color);
  }
  out.loss = pairwise_sum(sq) * inv;
  return out;
}

CfLossValue cf_loss(const DensityGrid& density, const Dataset& dataset, const std::vector<Ray>& rays,
                    const std::vector<Rgb>& gt, const DirectionPdf& pdf, int degree, const EstimatorConfig& cfg) {
  if (rays.empty()) fail(ErrorKind::kValidation, "loss needs a nonempty ray batch");
  CfLossValue out;
  out.estimate = estimate_color_field(density, dataset, pdf, degree, VoxelSet::ray_batch(rays), cfg);
  out.value = photometric_loss(density, out.estimate.color, rays, gt, cfg.render, false);
  return out;
}

// --- config ---------------------------------------------------------------

TrainConfig TrainConfig::preset(const std::string& name) {
  TrainConfig c;
  if (name == "dtu") c.lambda = 10.0;
  else if (name == "synthetic") c.lambda = 0.1;
  else if (name == "llff") c.lambda = 0.5;
  else fail(ErrorKind::kValidation, "unknown preset: " + name);
  return c;
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorKind::kValidation, "lambda must be finite and >= 0");
  if (batch_rays < 1) fail(ErrorKind::kValidation, "batch_rays must be positive");
  if (cf_rays < 0) fail(ErrorKind::kValidation, "cf_rays must be >= 0");
  if (iterations < 0) fail(ErrorKind::kValidation, "iterations must be >= 0");
  check_degree(sh_degree);
  if (optimizer != "rmsprop") fail(ErrorKind::kValidation, "optimizer must be 'rmsprop'");
  if (!(lr_density > 0.0) || !(lr_color > 0.0)) fail(ErrorKind::kValidation, "learning rates must be positive");
  if (!(lr_final_factor > 0.0 && lr_final_factor <= 1.0)) fail(ErrorKind::kValidation, "lr_final_factor must be in (0, 1]");
  if (!(rms_decay > 0.0 && rms_decay < 1.0)) fail(ErrorKind::kValidation, "rms_decay must be in (0, 1)");
  if (!(rms_epsilon > 0.0)) fail(ErrorKind::kValidation, "rms_epsilon must be positive");
  if (!(prune_threshold >= 0.0)) fail(ErrorKind::kValidation, "prune_threshold must be >= 0");
  if (eval_every < 0) fail(ErrorKind::kValidation, "eval_every must be >= 0");
}

json train_config_to_json(const TrainConfig& c) {
  return {{"lambda", c.lambda},         {"batch_rays", c.batch_rays},
          {"cf_rays", c.cf_rays},       {"iterations", c.iterations},
          {"sh_degree", c.sh_degree},   {"optimizer", c.optimizer},
          {"lr_density", c.lr_density}, {"lr_color", c.lr_color},
          {"lr_final_factor", c.lr_final_factor}, {"rms_decay", c.rms_decay},
          {"rms_epsilon", c.rms_epsilon}, {"prune_threshold", c.prune_threshold},
          {"occlusion", c.occlusion},
          {"residual", c.residual},     {"eval_every", c.eval_every},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::kValidation, "train config must be a JSON object");
  TrainConfig c;
  try {
    if (j.contains("preset")) c = TrainConfig::preset(j.at("preset").get<std::string>());
    const json known = train_config_to_json(c);
    for (const auto& [key, value] : j.items()) {
      if (key != "preset" && !known.contains(key)) fail(ErrorKind::kValidation, "unknown train config key: " + key);
    }
    c.lambda = j.value("lambda", c.lambda);
    c.batch_rays = j.value("batch_rays", c.batch_rays);
    c.cf_rays = j.value("cf_rays", c.cf_rays);
    c.iterations = j.value("iterations", c.iterations);
    c.sh_degree = j.value("sh_degree", c.sh_degree);
    c.optimizer = j.value("optimizer", c.optimizer);
    c.lr_density = j.value("lr_density", c.lr_density);
    c.lr_color = j.value("lr_color", c.lr_color);
    c.lr_final_factor = j.value("lr_final_factor", c.lr_final_factor);
    c.rms_decay = j.value("rms_decay", c.rms_decay);
    c.rms_epsilon = j.value("rms_epsilon", c.rms_epsilon);
    c.prune_threshold = j.value("prune_threshold", c.prune_threshold);
    c.occlusion = j.value("occlusion", c.occlusion);
    c.residual = j.value("residual", c.residual);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, std::string("malformed train config: ") + e.what());
  }
  c.validate();
  return c;
}

// --- training ---------------------------------------------------------------

void sample_pixel_rays(const Dataset& dataset, int count, uint64_t seed, uint64_t iteration, uint64_t stream,
                       std::vector<Ray>& rays, std::vector<Rgb>& gt) {
  if (dataset.empty()) fail(ErrorKind::kValidation, "cannot sample rays from an empty dataset");
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(iteration), static_cast<uint32_t>(iteration >> 32),
                    static_cast<uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  size_t total = 0;
  for (const auto& v : dataset) total += static_cast<size_t>(v.camera.width) * v.camera.height;
  std::uniform_int_distribution<size_t> pick(0, total - 1);
  rays.clear();
  gt.clear();
  for (int i = 0; i < count; ++i) {
    size_t p = pick(rng);
    size_t view = 0;
    while (p >= static_cast<size_t>(dataset[view].camera.width) * dataset[view].camera.height) {
      p -= static_cast<size_t>(dataset[view].camera.width) * dataset[view].camera.height;
      ++view;
    }
    const int w = dataset[view].camera.width;
    const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
    rays.push_back(pixel_ray(dataset[view].camera, x, y));
    gt.push_back(dataset[view].image.at(x, y));
  }
}

namespace {

struct RmsProp {
  std::vector<double> mean_sq;
  void step(std::span<double> params, std::span<const double> grad, double lr, double decay, double eps) {
    if (mean_sq.size() != params.size()) mean_sq.assign(params.size(), 0.0);
    for (size_t i = 0; i < params.size(); ++i) {
      // Untouched entries keep their state: a zero gradient moves nothing.
      if (grad[i] == 0.0) continue;
      // The first gradient seeds the accumulator, so a first step is lr long
      // rather than lr / sqrt(1 - decay).
      const double g2 = grad[i] * grad[i];
      mean_sq[i] = mean_sq[i] == 0.0 ? g2 : decay * mean_sq[i] + (1.0 - decay) * g2;
      params[i] -= lr * grad[i] / (std::sqrt(mean_sq[i]) + eps);
    }
  }
};

void check_finite(double v, const char* what, int iteration) {
  if (!std::isfinite(v)) {
    fail(ErrorKind::kNumerical, std::string(what) + " became non-finite at iteration " + std::to_string(iteration));
  }
}

}  // namespace

void evaluate_held_out(const DensityGrid& density, const ShColorGrid& color, const HeldOut& held_out,
                       const RenderConfig& render, LossRecord& record) {
  if (held_out.views.empty()) return;
  double psnr_acc = 0.0, depth_acc = 0.0;
  int depth_n = 0;
  for (size_t i = 0; i < held_out.views.size(); ++i) {
    const auto& view = held_out.views[i];
    psnr_acc += psnr(render_image(density, color, view.camera, render), view.image);
    if (i < held_out.depth.size() && !held_out.depth[i].empty()) {
      depth_acc += depth_psnr(render_depth_map(density, view.camera, render), held_out.depth[i]);
      ++depth_n;
    }
  }
  record.psnr = psnr_acc / static_cast<double>(held_out.views.size());
  if (depth_n > 0) record.depth_psnr = depth_acc / depth_n;
}

TrainResult train(const Dataset& dataset, TrainState init, const TrainConfig& cfg, const RenderConfig& render,
                  const HeldOut* held_out) {
  cfg.validate();
  render.validate();
  if (dataset.empty()) fail(ErrorKind::kValidation, "training needs at least one view");
  if (!(init.density.geometry() == init.color.geometry())) fail(ErrorKind::kValidation, "grid geometries differ");
  if (init.color.degree() != cfg.sh_degree) fail(ErrorKind::kValidation, "initial color degree differs from sh_degree");
  init.density.check_nonnegative();

  TrainResult out;
  out.state = std::move(init);
  DensityGrid& density = out.state.density;
  ShColorGrid& color = out.state.color;

  EstimatorConfig est_cfg;
  est_cfg.occlusion = cfg.occlusion;
  est_cfg.residual = cfg.residual;
  est_cfg.render = render;
  const DirectionPdf pdf = DirectionPdf::uniform();

  RmsProp opt_density, opt_color;
  std::vector<Ray> rays, cf_rays;
  std::vector<Rgb> gt, cf_gt;
  const int start = out.state.iteration;
  const int end = start + cfg.iterations;
  for (int it = start; it < end; ++it) {
    const double progress = end > 1 ? static_cast<double>(it) / (end - 1) : 0.0;
    const double decay = std::pow(cfg.lr_final_factor, progress);

    sample_pixel_rays(dataset, cfg.batch_rays, cfg.seed, it, 0, rays, gt);
    LossValue photo = photometric_loss(density, color, rays, gt, render, true);
    check_finite(photo.loss, "photometric loss", it);

    LossRecord rec;
    rec.iteration = it + 1;
    rec.photometric = photo.loss;
    if (cfg.lambda > 0.0 && cfg.cf_rays > 0) {
      sample_pixel_rays(dataset, cfg.cf_rays, cfg.seed, it, 1, cf_rays, cf_gt);
      const CfLossValue cf = cf_loss(density, dataset, cf_rays, cf_gt, pdf, cfg.sh_degree, est_cfg);
      check_finite(cf.value.loss, "CF loss", it);
      rec.cf = cf.value.loss;
      for (size_t v = 0; v < photo.grad_density.size(); ++v) {
        photo.grad_density[v] += cfg.lambda * cf.value.grad_density[v];
      }
    }
    rec.total = rec.photometric + cfg.lambda * rec.cf;

    opt_density.step(density.mutable_values(), photo.grad_density, cfg.lr_density * decay, cfg.rms_decay,
                     cfg.rms_epsilon);
    for (double& s : density.mutable_values()) {
      check_finite(s, "density", it);
      if (s < cfg.prune_threshold || s < 0.0) s = 0.0;
    }
    opt_color.step(color.mutable_values(), photo.grad_color, cfg.lr_color * decay, cfg.rms_decay, cfg.rms_epsilon);

    out.state.iteration = it + 1;
    const bool last = it + 1 == end;
    if (held_out && (last || (cfg.eval_every > 0 && (it + 1 - start) % cfg.eval_every == 0))) {
      evaluate_held_out(density, color, *held_out, render, rec);
    }
    out.history.push_back(rec);
  }
  return out;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossRecord>& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string());
  out.precision(10);
  out << "iteration,L_p,L_cf,total,psnr,depth_psnr\n";
  for (const auto& r : history) {
    out << r.iteration << ',' << r.photometric << ',' << r.cf << ',' << r.total << ',';
    if (r.psnr) out << *r.psnr;
    out << ',';
    if (r.depth_psnr) out << *r.depth_psnr;
    out << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

}  // namespace cfrf

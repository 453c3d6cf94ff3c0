// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by id (e.g. "acceptance F1 G1").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "cfrf/cf_regularizer.hpp"
#include "cfrf/fourier_lab.hpp"
#include "cfrf/metrics.hpp"
#include "cfrf/synth_scene.hpp"
#include "test_support.hpp"

using namespace cfrf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

Dataset quantized(const Dataset& views) {
  Dataset out = views;
  for (auto& v : out) v.image = quantize_8bit(v.image);
  return out;
}

double coefficient_relative_error(const ShColorGrid& est, const ShColorGrid& truth, const std::vector<uint32_t>& voxels) {
  double num = 0.0, den = 0.0;
  for (uint32_t v : voxels) {
    const auto a = est.coeffs(v), t = truth.coeffs(v);
    for (size_t i = 0; i < a.size(); ++i) {
      num += (a[i] - t[i]) * (a[i] - t[i]);
      den += t[i] * t[i];
    }
  }
  return std::sqrt(num / den);
}

double mean_render_psnr(const DensityGrid& density, const ShColorGrid& color, const Dataset& reference,
                        const RenderConfig& render) {
  double acc = 0.0;
  for (const auto& v : reference) acc += psnr(render_image(density, color, v.camera, render), v.image);
  return acc / reference.size();
}

// --- F1 / F2 ----------------------------------------------------------------

Outcome run_f1() {
  Timer timer;
  fourier::ExperimentConfig cfg;  // k_max 3, sigma 10, T = 10..100, 10000 repeats
  const auto rows = fourier::run_curves(cfg);
  auto find = [&](fourier::Estimator e, fourier::Target t, int T) {
    for (const auto& r : rows) {
      if (r.estimator == e && r.target == t && r.sample_count == T) return r.mrmse;
    }
    return std::nan("");
  };
  bool ok = true;
  std::string detail;
  for (auto t : {fourier::Target::kF1, fourier::Target::kF2, fourier::Target::kF3}) {
    int violations = 0;
    for (int T : cfg.sample_counts) {
      if (!(find(fourier::Estimator::kResidual, t, T) <= find(fourier::Estimator::kPlain, t, T))) ++violations;
    }
    const double ls10 = find(fourier::Estimator::kLeastSquares, t, 10);
    const double plain10 = find(fourier::Estimator::kPlain, t, 10);
    const double res10 = find(fourier::Estimator::kResidual, t, 10);
    ok = ok && violations == 0 && ls10 > plain10;
    detail += fourier::to_string(t) + ": residual>plain at " + std::to_string(violations) + " T; T=10 plain " +
              fmt("%.2f", plain10) + " residual " + fmt("%.2f", res10) + " lsq " + fmt("%.2f", ls10) + "; ";
  }
  const double secs = timer.seconds();
  ok = ok && secs < 120.0;
  return {ok, detail + fmt("%.1f s", secs)};
}

Outcome run_f2() {
  Timer timer;
  fourier::ExperimentConfig cfg;
  const auto rows = fourier::run_dc_table(cfg);
  const double published_plain[6] = {4.09, 4.17, 4.60, 5.31, 13.53, 25.13};
  std::vector<double> plain, residual, lsq;
  for (const auto& r : rows) {
    if (r.estimator == fourier::Estimator::kPlain) plain.push_back(r.mrmse);
    if (r.estimator == fourier::Estimator::kResidual) residual.push_back(r.mrmse);
    if (r.estimator == fourier::Estimator::kLeastSquares) lsq.push_back(r.mrmse);
  }
  auto variation = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return (*hi - *lo) / *lo;
  };
  bool ok = plain.size() == 6 && residual.size() == 6 && lsq.size() == 6;
  if (!ok) return {false, "malformed table"};
  ok = variation(residual) < 5e-3 && variation(lsq) < 5e-3;
  for (int i = 1; i < 6; ++i) ok = ok && plain[i] > plain[i - 1];
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    worst = std::max({worst, std::abs(residual[i] - 3.89), std::abs(lsq[i] - 3.90), std::abs(plain[i] - published_plain[i])});
  }
  ok = ok && worst <= 0.3;
  const double secs = timer.seconds();
  ok = ok && secs < 60.0;
  std::string detail = "residual " + fmt("%.3f", residual[0]) + " (var " + fmt("%.2e", variation(residual)) + "), lsq " +
                       fmt("%.3f", lsq[0]) + " (var " + fmt("%.2e", variation(lsq)) + "), plain";
  for (double p : plain) detail += " " + fmt("%.2f", p);
  return {ok, detail + "; max |diff| to table " + fmt("%.3f", worst) + "; literal basis; " + fmt("%.1f s", secs)};
}

// --- E1 / E2 ----------------------------------------------------------------

Outcome run_e1() {
  Timer timer;
  const SceneSpec spec = round_trip_sphere_scene();  // 64^3, 200 full-sphere cameras
  const SynthScene scene = synth_scene(spec);
  const Dataset views = quantized(scene.views);
  EstimatorConfig cfg;
  cfg.render = scene.render;
  cfg.occlusion = false;  // unoccluded round trip
  const auto est = estimate_color_field(scene.density, views, DirectionPdf::uniform(), spec.sh_degree,
                                        VoxelSet::occupied(), cfg);
  const double p = mean_render_psnr(scene.density, est.color, scene.views, scene.render);
  const double err = coefficient_relative_error(est.color, scene.color, est.estimated);
  const double secs = timer.seconds();
  const bool ok = p >= 40.0 && err < 1e-2 && secs < 120.0 && est.unestimated.empty();
  return {ok, "PSNR " + fmt("%.2f dB", p) + ", coefficient rel. error " + fmt("%.2e", err) + ", " +
                  std::to_string(est.estimated.size()) + " voxels, " + fmt("%.1f s", secs)};
}

Outcome run_e2() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"tabletop", "pillars"}) {
    const SceneSpec spec = bundled_scene(name);
    const SynthScene scene = synth_scene(spec);
    const Dataset views = quantized(scene.views);
    double p[3];
    const bool occlusion[3] = {true, false, false};
    const bool residual[3] = {true, true, false};
    for (int i = 0; i < 3; ++i) {
      EstimatorConfig cfg;
      cfg.render = scene.render;
      cfg.occlusion = occlusion[i];
      cfg.residual = residual[i];
      const auto est = estimate_color_field(scene.density, views, DirectionPdf::uniform(), spec.sh_degree,
                                            VoxelSet::occupied(), cfg);
      p[i] = mean_render_psnr(scene.density, est.color, views, scene.render);
    }
    ok = ok && p[0] > p[1] && p[1] > p[2] && p[0] - p[2] >= 3.0;
    detail += std::string(name) + ": occ+res " + fmt("%.2f", p[0]) + " > res " + fmt("%.2f", p[1]) + " > neither " +
              fmt("%.2f", p[2]) + "; ";
  }
  return {ok, detail};
}

// --- G1 ---------------------------------------------------------------------

Outcome run_g1() {
  SceneSpec spec = bundled_scene("tabletop");  // 64^3 grid
  spec.camera_count = 20;
  const SynthScene scene = synth_scene(spec);
  const Dataset views = quantized(scene.views);
  DensityGrid density = scene.density;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  for (double& v : density.mutable_values()) v *= jitter(rng);
  const RenderConfig& render = scene.render;

  std::vector<Ray> rays, cf_rays;
  std::vector<Rgb> gt, cf_gt;
  sample_pixel_rays(views, 256, 7, 0, 0, rays, gt);
  sample_pixel_rays(views, 25, 7, 0, 1, cf_rays, cf_gt);
  EstimatorConfig est_cfg;
  est_cfg.render = render;
  const LossValue photo = photometric_loss(density, scene.color, rays, gt, render);
  const CfLossValue cf = cf_loss(density, views, cf_rays, cf_gt, DirectionPdf::uniform(), 2, est_cfg);

  auto check = [&](const std::vector<double>& grad, const std::function<double(const DensityGrid&)>& loss,
                   uint64_t seed, double& worst) {
    std::vector<size_t> candidates;
    for (size_t v = 0; v < grad.size(); ++v) {
      if (grad[v] != 0.0) candidates.push_back(v);
    }
    std::mt19937_64 pick(seed);
    std::shuffle(candidates.begin(), candidates.end(), pick);
    candidates.resize(std::min<size_t>(20, candidates.size()));
    const double h = 1e-4;
    for (size_t v : candidates) {
      DensityGrid p = density, m = density;
      p.set_unchecked(v, density.value(v) + h);
      m.set_unchecked(v, density.value(v) - h);
      const double fd = (loss(p) - loss(m)) / (2 * h);
      worst = std::max(worst, std::abs(grad[v] - fd) / std::max(std::abs(fd), 1e-12));
    }
    return candidates.size();
  };
  double worst_photo = 0.0, worst_cf = 0.0;
  const size_t n_photo = check(photo.grad_density, [&](const DensityGrid& d) {
    return photometric_loss(d, scene.color, rays, gt, render, false).loss;
  }, 1, worst_photo);
  // Frozen-color contract: the estimate from the unperturbed density is held fixed.
  const size_t n_cf = check(cf.value.grad_density, [&](const DensityGrid& d) {
    return photometric_loss(d, cf.estimate.color, cf_rays, cf_gt, render, false).loss;
  }, 2, worst_cf);
  const bool ok = n_photo == 20 && n_cf == 20 && worst_photo < 1e-3 && worst_cf < 1e-3;
  return {ok, "64^3 grid, 20 voxels each: photometric max rel. error " + fmt("%.2e", worst_photo) +
                  ", CF max rel. error " + fmt("%.2e", worst_cf)};
}

// --- R1 ---------------------------------------------------------------------

struct R1Setup {
  SynthScene scene;
  Dataset train_views;
  HeldOut held_out;
};

R1Setup r1_setup() {
  SceneSpec spec = bundled_scene("tabletop");
  spec.dims = {32, 32, 32};
  spec.width = spec.height = 32;
  spec.camera_count = 32;
  R1Setup s{synth_scene(spec), {}, {}};
  s.train_views = quantized(s.scene.views);
  SceneSpec held = spec;
  held.camera_count = 6;
  held.seed = 99;
  held.min_elevation_deg = 20.0;
  for (const Camera& cam : make_cameras(held)) {
    s.held_out.views.push_back({cam, quantize_8bit(render_image(s.scene.density, s.scene.color, cam, s.scene.render))});
    s.held_out.depth.push_back(render_depth_map(s.scene.density, cam, s.scene.render));
  }
  return s;
}

Outcome run_r1() {
  Timer timer;
  const R1Setup s = r1_setup();
  EstimatorConfig est_cfg;
  est_cfg.render = s.scene.render;
  bool ok = true;
  std::string detail;
  for (uint64_t seed : {1, 2, 3}) {
    TrainState init;
    init.density = seed_floaters(s.scene.density, 12, 0.09, 30.0, Vec3(-0.6, -0.6, 0.45), Vec3(0.6, 0.6, 0.75), seed);
    init.color = s.scene.color;
    double depth[2], score[2];
    const double lambdas[2] = {0.0, TrainConfig::preset("synthetic").lambda};
    for (int i = 0; i < 2; ++i) {
      TrainConfig cfg;
      cfg.lambda = lambdas[i];
      cfg.iterations = 500;
      cfg.lr_density = 1.0;
      cfg.prune_threshold = 2.0;
      cfg.seed = seed;
      const TrainResult r = train(s.train_views, init, cfg, s.scene.render, &s.held_out);
      depth[i] = *r.history.back().depth_psnr;
      score[i] = *imrc(r.state.density, s.train_views, DirectionPdf::uniform(), 2, est_cfg).db;
    }
    ok = ok && depth[1] >= depth[0] + 0.5 && score[1] > score[0];
    detail += "seed " + std::to_string(seed) + ": depth " + fmt("%.3f", depth[0]) + " -> " + fmt("%.3f", depth[1]) +
              ", IMRC " + fmt("%.2f", score[0]) + " -> " + fmt("%.2f", score[1]) + "; ";
  }
  return {ok, detail + fmt("%.1f s", timer.seconds())};
}

// --- M1 ---------------------------------------------------------------------

Outcome run_m1() {
  bool ok = true;
  std::string detail;
  for (const auto& name : bundled_scene_names()) {
    const SceneSpec spec = bundled_scene(name);
    const SynthScene scene = synth_scene(spec);
    const Dataset views = quantized(scene.views);
    EstimatorConfig cfg;
    cfg.render = scene.render;
    auto score = [&](const DensityGrid& d) {
      const auto r = imrc(d, views, DirectionPdf::uniform(), spec.sh_degree, cfg);
      return r.db ? *r.db : -1e9;
    };
    const double gt = score(scene.density);
    const double fl = score(corrupt_floaters(scene.density, 0.05, 17));
    const double th = score(corrupt_thicken(scene.density));
    const double er = score(corrupt_erode(scene.density));
    ok = ok && gt > fl && gt > th && gt > er;
    detail += name + ": gt " + fmt("%.2f", gt) + " floaters " + fmt("%.2f", fl) + " thicken " + fmt("%.2f", th) +
              " erode " + fmt("%.2f", er) + "; ";
  }
  return {ok, detail};
}

// --- P1 ---------------------------------------------------------------------

Outcome run_p1() {
  std::string failures;
  auto require = [&](bool cond, const std::string& what) {
    if (!cond) failures += what + "; ";
  };

  {  // SH orthonormality, 10^6 uniform samples
    constexpr int kSamples = 1000000, n = kMaxShCount;
    std::mt19937_64 rng(1);
    std::vector<double> gram(n * n, 0.0), y(n);
    for (int s = 0; s < kSamples; ++s) {
      eval_basis_into(kMaxShDegree, test::random_unit(rng), y);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) gram[i * n + j] += y[i] * y[j];
      }
    }
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        worst = std::max(worst, std::abs(4.0 * std::numbers::pi * gram[i * n + j] / kSamples - (i == j)));
      }
    }
    require(worst < 1e-2, "SH orthonormality " + fmt("%.3e", worst));
  }

  const SceneSpec spec = bundled_scene("tabletop");
  SceneSpec small = spec;
  small.dims = {24, 24, 24};
  small.width = small.height = 16;
  small.camera_count = 8;
  const SynthScene scene = synth_scene(small);

  {  // transmittance monotone, telescoping
    double worst = 0.0;
    bool monotone = true;
    for (const auto& v : scene.views) {
      for (int y = 0; y < 16; y += 3) {
        for (int x = 0; x < 16; x += 3) {
          const Ray r = pixel_ray(v.camera, x, y);
          const auto samples = march_samples(scene.density, r, scene.render);
          double sum = 0.0, prev = 1.0;
          for (const auto& s : samples) {
            monotone = monotone && s.transmittance <= prev && s.transmittance > 0.0;
            prev = s.transmittance;
            sum += s.weight;
          }
          const double t_final =
              samples.empty() ? 1.0 : samples.back().transmittance * std::exp(-samples.back().sigma * scene.render.step_size);
          worst = std::max(worst, std::abs(sum - (1.0 - t_final)));
        }
      }
    }
    require(monotone, "transmittance not monotone");
    require(worst <= 1e-12, "telescoping " + fmt("%.3e", worst));
  }

  {  // slab render vs closed form, O(step) bound
    const double sigma = 3.0, length = 0.7;
    const GridGeometry g({8, 8, 20}, Vec3(-0.4, -0.4, 0.0), Vec3(0.4, 0.4, 2.0));
    DensityGrid slab(g);
    for (size_t v = 0; v < g.voxel_count(); ++v) {
      const int k = g.unravel(v)[2];
      if (k >= 5 && k < 12) slab.set(v, sigma);
    }
    Ray ray;
    ray.origin = Vec3(0, 0, -1);
    ray.direction = Vec3::UnitZ();
    const ColorFn white = [](const Vec3&, const Vec3&) { return Rgb::Ones(); };
    const double analytic = -std::expm1(-sigma * length);
    for (double step : {0.05, 0.025, 0.0125}) {
      RenderConfig cfg;
      cfg.step_size = step;
      cfg.early_stop = 0.0;
      cfg.t_far = 10.0;
      const double a = render_ray(slab, white, ray, cfg).color[0];
      cfg.step_size = step / 2;
      const double b = render_ray(slab, white, ray, cfg).color[0];
      require(std::abs(a - analytic) < sigma * step, "slab error at step " + fmt("%.4f", step));
      require(std::abs(a - b) < sigma * step, "slab halving at step " + fmt("%.4f", step));
    }
  }

  {  // checkpoint byte-exact round trip
    const auto dir = test::scratch_dir("acceptance_ckpt");
    save_checkpoint(dir / "a.cfrf", scene.density, &scene.color);
    const Checkpoint back = load_checkpoint(dir / "a.cfrf");
    require(back.density == scene.density && back.color && *back.color == scene.color, "checkpoint values");
    save_checkpoint(dir / "b.cfrf", back.density, &*back.color);
    require(test::read_bytes(dir / "a.cfrf") == test::read_bytes(dir / "b.cfrf"), "checkpoint bytes");
  }

  {  // determinism under a fixed seed
    const SynthScene again = synth_scene(small);
    bool same = again.density == scene.density && again.color == scene.color;
    for (size_t i = 0; i < scene.views.size(); ++i) same = same && again.views[i].image == scene.views[i].image;
    require(same, "synth not deterministic");
    TrainConfig cfg;
    cfg.iterations = 5;
    cfg.cf_rays = 10;
    TrainState init{DensityGrid(scene.density.geometry(), 0.1), ShColorGrid(scene.density.geometry(), 2), 0};
    const Dataset views = quantized(scene.views);
    const TrainResult a = train(views, init, cfg, scene.render);
    const TrainResult b = train(views, init, cfg, scene.render);
    require(a.state.density == b.state.density && a.state.color == b.state.color, "train not deterministic");
    fourier::ExperimentConfig fc;
    fc.repeats = 200;
    require(fourier::run_mrmse(fc, fourier::Estimator::kResidual, fourier::Target::kF3, 30) ==
                fourier::run_mrmse(fc, fourier::Estimator::kResidual, fourier::Target::kF3, 30),
            "fourier not deterministic");
  }
  return {failures.empty(), failures.empty() ? "orthonormality, transmittance, slab, checkpoint, determinism" : failures};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"F1", run_f1}, {"F2", run_f2}, {"E1", run_e1}, {"E2", run_e2},
      {"G1", run_g1}, {"R1", run_r1}, {"M1", run_m1}, {"P1", run_p1},
  };
  std::set<std::string> selected(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s  %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}

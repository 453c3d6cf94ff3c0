// cfrf: synth, train, estimate, render, metrics and fourier-bench workflows.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <Eigen/Core>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "cfrf/cf_estimator.hpp"
#include "cfrf/cf_regularizer.hpp"
#include "cfrf/dataset.hpp"
#include "cfrf/fourier_lab.hpp"
#include "cfrf/image_io.hpp"
#include "cfrf/metrics.hpp"
#include "cfrf/synth_scene.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace cfrf;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Common {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
  int threads = 0;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, path + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string());
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

fs::path prepare_out(const std::string& out) {
  if (out.empty()) fail(ErrorKind::kValidation, "--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + out + ": " + ec.message());
  return out;
}

void write_manifest(const fs::path& dir, const std::string& sub, const json& config, uint64_t seed,
                    const json& inputs) {
  json m;
  m["tool"] = "cfrf";
  m["version"] = kVersion;
  m["subcommand"] = sub;
  m["seed"] = seed;
  m["config"] = config;
  m["inputs"] = inputs;
  m["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"libpng", libpng_version()},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  write_json(dir / "manifest.json", m);
}

std::string view_name(size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03zu%s", i, ext);
  return buf;
}

// Far bound covering the grid from every camera.
RenderConfig render_config_for(const GridGeometry& g, const std::vector<Camera>& cams) {
  const Vec3 center = 0.5 * (g.bbox_min() + g.bbox_max());
  const double half_diag = 0.5 * (g.bbox_max() - g.bbox_min()).norm();
  double t_far = 2.0 * half_diag;
  for (const auto& c : cams) t_far = std::max(t_far, (c.origin() - center).norm() + half_diag);
  return RenderConfig::for_grid(g, t_far);
}

std::vector<Camera> cameras_of(const Dataset& d) {
  std::vector<Camera> cams;
  for (const auto& v : d) cams.push_back(v.camera);
  return cams;
}

// Optional reference depth maps next to a dataset (written by synth).
std::vector<std::vector<double>> load_depths(const fs::path& data, const Dataset& d) {
  std::vector<std::vector<double>> out(d.size());
  for (size_t i = 0; i < d.size(); ++i) {
    const fs::path p = data / "depth" / view_name(i, ".f32");
    if (!fs::exists(p)) continue;
    int w = 0, h = 0;
    out[i] = read_f32_map(p, w, h);
    if (w != d[i].camera.width || h != d[i].camera.height) fail(ErrorKind::kFormat, "depth map size mismatch: " + p.string());
  }
  return out;
}

void write_depth(const fs::path& dir, size_t i, const Camera& cam, const std::vector<double>& depth, double t_far) {
  std::vector<double> norm(depth.size());
  for (size_t p = 0; p < depth.size(); ++p) norm[p] = depth[p] / t_far;
  write_png_gray16(dir / view_name(i, ".png"), cam.width, cam.height, norm);
  write_f32_map(dir / view_name(i, ".f32"), cam.width, cam.height, depth);
}

// --- subcommands ------------------------------------------------------------

int run_synth(const Common& c) {
  SceneSpec spec = c.config.empty() ? bundled_scene("tabletop") : scene_spec_from_json(read_json(c.config));
  if (c.seed) spec.seed = *c.seed;
  spec.validate();
  const fs::path out = prepare_out(c.out);
  const SynthScene scene = synth_scene(spec);
  save_dataset(out, scene.views);
  save_checkpoint(out / "gt.cfrf", scene.density, &scene.color);
  fs::create_directories(out / "depth");
  for (size_t i = 0; i < scene.views.size(); ++i) {
    const Camera& cam = scene.views[i].camera;
    write_f32_map(out / "depth" / view_name(i, ".f32"), cam.width, cam.height,
                  render_depth_map(scene.density, cam, scene.render));
  }
  write_json(out / "scene.json", scene_spec_to_json(spec));
  write_manifest(out, "synth", scene_spec_to_json(spec), spec.seed, json::object());
  std::printf("synth: %zu views, %d^3 grid -> %s\n", scene.views.size(), spec.dims[0], out.c_str());
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string init;
  std::string resume;
  std::optional<double> lambda;
  std::optional<int> cf_rays;
  std::optional<int> sh_degree;
  std::optional<int> iterations;
  int holdout_every = 8;
  std::vector<int> dims{64, 64, 64};
  double init_density = 0.1;
};

int run_train(const Common& c, const TrainArgs& a) {
  TrainConfig cfg = c.config.empty() ? TrainConfig::preset("synthetic") : train_config_from_json(read_json(c.config));
  if (a.lambda) cfg.lambda = *a.lambda;
  if (a.cf_rays) cfg.cf_rays = *a.cf_rays;
  if (a.sh_degree) cfg.sh_degree = *a.sh_degree;
  if (a.iterations) cfg.iterations = *a.iterations;
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  if (a.holdout_every < 0) fail(ErrorKind::kValidation, "--holdout-every must be >= 0");
  if (a.data.empty()) fail(ErrorKind::kValidation, "--data is required");

  const Dataset all = load_dataset(a.data);
  const auto depths = load_depths(a.data, all);
  Dataset train_views;
  HeldOut held_out;
  for (size_t i = 0; i < all.size(); ++i) {
    if (a.holdout_every > 0 && static_cast<int>(i % a.holdout_every) == a.holdout_every - 1) {
      held_out.views.push_back(all[i]);
      held_out.depth.push_back(depths[i]);
    } else {
      train_views.push_back(all[i]);
    }
  }
  if (train_views.empty()) fail(ErrorKind::kValidation, "no training views left after the hold-out split");

  TrainState init;
  std::string init_path = a.resume.empty() ? a.init : (fs::path(a.resume) / "final.cfrf").string();
  if (!init_path.empty()) {
    Checkpoint ck = load_checkpoint(init_path);
    init.density = ck.density;
    init.color = ck.color ? *ck.color : ShColorGrid(ck.density.geometry(), cfg.sh_degree);
    if (init.color.degree() != cfg.sh_degree) fail(ErrorKind::kValidation, "checkpoint SH degree differs from config");
    if (!a.resume.empty()) init.iteration = read_json((fs::path(a.resume) / "state.json").string()).at("iteration").get<int>();
  } else {
    if (a.dims.size() != 3) fail(ErrorKind::kValidation, "--dims needs three values");
    json scene = json::object();
    if (fs::exists(fs::path(a.data) / "scene.json")) scene = read_json((fs::path(a.data) / "scene.json").string());
    const SceneSpec spec = scene_spec_from_json(scene);
    const GridGeometry g({a.dims[0], a.dims[1], a.dims[2]}, spec.bbox_min, spec.bbox_max);
    init.density = DensityGrid(g, a.init_density);
    init.color = ShColorGrid(g, cfg.sh_degree);
  }

  const fs::path out = prepare_out(c.out);
  const RenderConfig render = render_config_for(init.density.geometry(), cameras_of(all));
  const TrainResult result = train(train_views, init, cfg, render, held_out.views.empty() ? nullptr : &held_out);
  save_checkpoint(out / "final.cfrf", result.state.density, &result.state.color);
  write_loss_csv(out / "loss.csv", result.history);
  write_json(out / "state.json", {{"iteration", result.state.iteration}});
  json summary = {{"iteration", result.state.iteration}, {"held_out_views", held_out.views.size()}};
  if (!result.history.empty()) {
    const LossRecord& last = result.history.back();
    summary["L_p"] = last.photometric;
    summary["L_cf"] = last.cf;
    summary["total"] = last.total;
    summary["psnr"] = last.psnr ? json(*last.psnr) : json(nullptr);
    summary["depth_psnr"] = last.depth_psnr ? json(*last.depth_psnr) : json(nullptr);
  }
  write_json(out / "summary.json", summary);
  write_manifest(out, "train", train_config_to_json(cfg), cfg.seed,
                 {{"data", a.data}, {"init", init_path}, {"holdout_every", a.holdout_every}});
  std::printf("train: %d iterations (now at %d) -> %s\n", cfg.iterations, result.state.iteration, out.c_str());
  return 0;
}

struct EstimateArgs {
  std::string checkpoint;
  std::string data;
  bool no_occlusion = false;
  bool no_residual = false;
  int sh_degree = 2;
  int rounds = 1;
  double vmf = -1.0;  // < 0: uniform pdf
};

int run_estimate(const Common& c, const EstimateArgs& a) {
  if (a.checkpoint.empty() || a.data.empty()) fail(ErrorKind::kValidation, "--checkpoint and --data are required");
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const Dataset data = load_dataset(a.data);
  if (data.empty()) fail(ErrorKind::kValidation, "dataset has no views");
  check_degree(a.sh_degree);

  EstimatorConfig cfg;
  cfg.occlusion = !a.no_occlusion;
  cfg.residual = !a.no_residual;
  cfg.rounds = a.rounds;
  cfg.render = render_config_for(ck.density.geometry(), cameras_of(data));
  const DirectionPdf pdf = a.vmf >= 0.0 ? DirectionPdf::mixture_vmf({}, a.vmf) : DirectionPdf::uniform();

  const ColorFieldEstimate est =
      estimate_color_field(ck.density, data, pdf, a.sh_degree, VoxelSet::occupied(), cfg);

  // Per-voxel weighted RMS residual, rendered as a gray field.
  const GridGeometry& g = ck.density.geometry();
  ShColorGrid residual_field(g, 0);
  for (uint32_t v : est.estimated) {
    const VoxelObservations obs = gather_observations(g.voxel_center(v), ck.density, data, cfg);
    const VoxelEstimate ve = estimate_voxel_sh(obs, pdf, a.sh_degree, cfg);
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < obs.items.size(); ++k) {
      num += obs.items[k].weight * ve.residuals[k].squaredNorm() / kColorChannels;
      den += obs.items[k].weight;
    }
    if (den > 0.0) residual_field.set(v, ShCoeffs::constant(0, Rgb::Constant(std::sqrt(num / den))));
  }

  const fs::path out = prepare_out(c.out);
  save_checkpoint(out / "est.cfrf", ck.density, &est.color);
  for (const char* sub : {"renders", "depth", "residual"}) fs::create_directories(out / sub);
  json views = json::array();
  double psnr_acc = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    const Camera& cam = data[i].camera;
    const Image img = render_image(ck.density, est.color, cam, cfg.render);
    write_png_rgb(out / "renders" / view_name(i, ".png"), img);
    write_depth(out / "depth", i, cam, render_depth_map(ck.density, cam, cfg.render), cfg.render.t_far);
    write_png_rgb(out / "residual" / view_name(i, ".png"), render_image(ck.density, residual_field, cam, cfg.render));
    const double p = psnr(quantize_8bit(img), data[i].image);
    psnr_acc += p;
    views.push_back({{"view", i}, {"psnr", p}});
  }
  const json summary = {{"psnr", psnr_acc / data.size()},
                        {"estimated_voxels", est.estimated.size()},
                        {"unestimated_voxels", est.unestimated.size()},
                        {"views", views}};
  write_json(out / "summary.json", summary);
  const json config = {{"occlusion", cfg.occlusion}, {"residual", cfg.residual}, {"rounds", cfg.rounds},
                       {"sh_degree", a.sh_degree},   {"pdf", a.vmf >= 0.0 ? "vmf" : "uniform"},
                       {"vmf_concentration", a.vmf}};
  write_manifest(out, "estimate", config, c.seed.value_or(0), {{"checkpoint", a.checkpoint}, {"data", a.data}});
  std::printf("estimate: %zu voxels, mean PSNR %.2f dB -> %s\n", est.estimated.size(), psnr_acc / data.size(),
              out.c_str());
  return 0;
}

struct RenderArgs {
  std::string checkpoint;
  std::string cameras;
};

int run_render(const Common& c, const RenderArgs& a) {
  if (a.checkpoint.empty() || a.cameras.empty()) fail(ErrorKind::kValidation, "--checkpoint and --cameras are required");
  if (!fs::exists(a.cameras)) fail(ErrorKind::kValidation, "camera file not found: " + a.cameras);
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  if (!ck.color) fail(ErrorKind::kValidation, "checkpoint has no color field");
  const std::vector<Camera> cams = load_cameras(a.cameras);
  const RenderConfig cfg = render_config_for(ck.density.geometry(), cams);
  const fs::path out = prepare_out(c.out);
  fs::create_directories(out / "depth");
  for (size_t i = 0; i < cams.size(); ++i) {
    write_png_rgb(out / view_name(i, ".png"), render_image(ck.density, *ck.color, cams[i], cfg));
    write_depth(out / "depth", i, cams[i], render_depth_map(ck.density, cams[i], cfg), cfg.t_far);
  }
  write_manifest(out, "render", {{"t_far", cfg.t_far}, {"step_size", cfg.step_size}}, c.seed.value_or(0),
                 {{"checkpoint", a.checkpoint}, {"cameras", a.cameras}});
  std::printf("render: %zu views -> %s\n", cams.size(), out.c_str());
  return 0;
}

struct MetricsArgs {
  std::string checkpoint;
  std::string data;
  int sh_degree = 2;
};

int run_metrics(const Common& c, const MetricsArgs& a) {
  if (a.checkpoint.empty() || a.data.empty()) fail(ErrorKind::kValidation, "--checkpoint and --data are required");
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const Dataset data = load_dataset(a.data);
  if (data.empty()) fail(ErrorKind::kValidation, "dataset has no views");
  const auto depths = load_depths(a.data, data);
  EstimatorConfig cfg;
  cfg.render = render_config_for(ck.density.geometry(), cameras_of(data));

  MetricReport report;
  double psnr_acc = 0.0, depth_acc = 0.0;
  int depth_n = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    ViewMetrics vm;
    vm.view = i;
    if (ck.color) {
      vm.psnr = psnr(quantize_8bit(render_image(ck.density, *ck.color, data[i].camera, cfg.render)), data[i].image);
      psnr_acc += vm.psnr;
    }
    if (!depths[i].empty()) {
      vm.depth_psnr = depth_psnr(render_depth_map(ck.density, data[i].camera, cfg.render), depths[i]);
      depth_acc += *vm.depth_psnr;
      ++depth_n;
    }
    report.views.push_back(vm);
  }
  if (ck.color) report.psnr = psnr_acc / data.size();
  if (depth_n > 0) report.depth_psnr = depth_acc / depth_n;
  report.imrc = imrc(ck.density, data, DirectionPdf::uniform(), a.sh_degree, cfg).db;

  const fs::path out = prepare_out(c.out);
  write_json(out / "metrics.json", report.to_json());
  write_manifest(out, "metrics", {{"sh_degree", a.sh_degree}}, c.seed.value_or(0),
                 {{"checkpoint", a.checkpoint}, {"data", a.data}});
  std::cout << report.table();
  return 0;
}

struct FourierArgs {
  bool dc_table = false;
  std::string basis;
  std::optional<int> repeats;
};

int run_fourier(const Common& c, const FourierArgs& a) {
  fourier::ExperimentConfig cfg;
  if (!c.config.empty()) {
    const json j = read_json(c.config);
    try {
      cfg.k_max = j.value("k_max", cfg.k_max);
      cfg.sigma = j.value("sigma", cfg.sigma);
      cfg.sample_counts = j.value("sample_counts", cfg.sample_counts);
      cfg.repeats = j.value("repeats", cfg.repeats);
      cfg.eval_points = j.value("eval_points", cfg.eval_points);
      cfg.seed = j.value("seed", cfg.seed);
      cfg.residual_rounds = j.value("residual_rounds", cfg.residual_rounds);
      if (j.contains("basis")) {
        const std::string b = j.at("basis").get<std::string>();
        if (b != "literal" && b != "rescaled") fail(ErrorKind::kValidation, "basis must be 'literal' or 'rescaled'");
        cfg.basis = b == "literal" ? fourier::Basis::kLiteral : fourier::Basis::kRescaled;
      }
    } catch (const json::exception& e) {
      fail(ErrorKind::kValidation, std::string("malformed fourier config: ") + e.what());
    }
  }
  if (!a.basis.empty()) {
    if (a.basis != "literal" && a.basis != "rescaled") fail(ErrorKind::kValidation, "--basis must be literal or rescaled");
    cfg.basis = a.basis == "literal" ? fourier::Basis::kLiteral : fourier::Basis::kRescaled;
  }
  if (a.repeats) cfg.repeats = *a.repeats;
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();

  const std::vector<fourier::MrmseRow> rows = a.dc_table ? fourier::run_dc_table(cfg) : fourier::run_curves(cfg);
  const fs::path out = prepare_out(c.out);
  const fs::path csv_path = out / (a.dc_table ? "dc_table.csv" : "mrmse.csv");
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) fail(ErrorKind::kIo, "cannot open " + csv_path.string());
  csv.precision(10);
  csv << "estimator,target,T,dc_addition,mrmse\n";
  for (const auto& r : rows) {
    csv << to_string(r.estimator) << ',' << to_string(r.target) << ',' << r.sample_count << ',' << r.dc << ','
        << r.mrmse << '\n';
  }
  if (!a.dc_table) {
    // gnuplot blocks, one per target: T plain residual least_squares
    std::ofstream dat(out / "mrmse.dat", std::ios::trunc);
    dat.precision(10);
    for (auto t : {fourier::Target::kF1, fourier::Target::kF2, fourier::Target::kF3}) {
      dat << "# " << to_string(t) << "\n# T plain residual least_squares\n";
      for (int T : cfg.sample_counts) {
        dat << T;
        for (auto e : {fourier::Estimator::kPlain, fourier::Estimator::kResidual, fourier::Estimator::kLeastSquares}) {
          for (const auto& r : rows) {
            if (r.target == t && r.estimator == e && r.sample_count == T) dat << ' ' << r.mrmse;
          }
        }
        dat << '\n';
      }
      dat << "\n\n";
    }
  }
  const json config = {{"k_max", cfg.k_max},         {"sigma", cfg.sigma},
                       {"sample_counts", cfg.sample_counts}, {"repeats", cfg.repeats},
                       {"eval_points", cfg.eval_points}, {"seed", cfg.seed},
                       {"residual_rounds", cfg.residual_rounds},
                       {"basis", cfg.basis == fourier::Basis::kLiteral ? "literal" : "rescaled"},
                       {"dc_table", a.dc_table}};
  write_manifest(out, "fourier-bench", config, cfg.seed, json::object());
  std::printf("fourier-bench: %zu rows -> %s\n", rows.size(), csv_path.c_str());
  return 0;
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form color fields for voxel radiance fields"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file");
    sub->add_option("--out", common.out, "output directory")->required();
    sub->add_option("--seed", common.seed, "random seed override");
    sub->add_option("--threads", common.threads, "worker threads (0 = runtime default)");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset and ground-truth checkpoint");
  add_common(synth);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train density and color grids");
  add_common(train_cmd);
  train_cmd->add_option("--data", train_args.data, "dataset directory")->required();
  train_cmd->add_option("--init", train_args.init, "initial checkpoint");
  train_cmd->add_option("--resume", train_args.resume, "previous train output directory to continue from");
  train_cmd->add_option("--lambda", train_args.lambda, "CF loss weight");
  train_cmd->add_option("--cf-rays", train_args.cf_rays, "CF rays per iteration");
  train_cmd->add_option("--sh-degree", train_args.sh_degree, "SH degree");
  train_cmd->add_option("--iterations", train_args.iterations, "iterations to run");
  train_cmd->add_option("--holdout-every", train_args.holdout_every, "hold out every n-th view (0 = none)");
  train_cmd->add_option("--dims", train_args.dims, "grid size without --init")->expected(3);
  train_cmd->add_option("--init-density", train_args.init_density, "constant density without --init");

  EstimateArgs est_args;
  auto* est_cmd = app.add_subcommand("estimate", "closed-form color field from a density checkpoint");
  add_common(est_cmd);
  est_cmd->add_option("--checkpoint", est_args.checkpoint, "checkpoint with a density field")->required();
  est_cmd->add_option("--data", est_args.data, "dataset directory")->required();
  est_cmd->add_flag("--no-occlusion", est_args.no_occlusion, "disable transmittance weighting");
  est_cmd->add_flag("--no-residual", est_args.no_residual, "disable residual estimation");
  est_cmd->add_option("--sh-degree", est_args.sh_degree, "SH degree (0..4)");
  est_cmd->add_option("--rounds", est_args.rounds, "estimation rounds");
  est_cmd->add_option("--vmf", est_args.vmf, "use a vMF mixture over observation directions with this concentration");

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "render a checkpoint from given cameras");
  add_common(render_cmd);
  render_cmd->add_option("--checkpoint", render_args.checkpoint, "checkpoint with density and color")->required();
  render_cmd->add_option("--cameras", render_args.cameras, "cameras.json")->required();

  MetricsArgs metrics_args;
  auto* metrics_cmd = app.add_subcommand("metrics", "PSNR, depth PSNR and IMRC of a checkpoint");
  add_common(metrics_cmd);
  metrics_cmd->add_option("--checkpoint", metrics_args.checkpoint, "checkpoint")->required();
  metrics_cmd->add_option("--data", metrics_args.data, "dataset directory")->required();
  metrics_cmd->add_option("--sh-degree", metrics_args.sh_degree, "SH degree for IMRC");

  FourierArgs fourier_args;
  auto* fourier_cmd = app.add_subcommand("fourier-bench", "1D Fourier estimator MRMSE experiments");
  add_common(fourier_cmd);
  fourier_cmd->add_flag("--dc-table", fourier_args.dc_table, "emit the DC-addition table");
  fourier_cmd->add_option("--basis", fourier_args.basis, "literal or rescaled");
  fourier_cmd->add_option("--repeats", fourier_args.repeats, "repeats per cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("validation", e.what());
    return 2;
  }

  try {
#ifdef _OPENMP
    if (common.threads > 0) omp_set_num_threads(common.threads);
#endif
    if (common.threads < 0) fail(ErrorKind::kValidation, "--threads must be >= 0");
    if (*synth) return run_synth(common);
    if (*train_cmd) return run_train(common, train_args);
    if (*est_cmd) return run_estimate(common, est_args);
    if (*render_cmd) return run_render(common, render_args);
    if (*metrics_cmd) return run_metrics(common, metrics_args);
    if (*fourier_cmd) return run_fourier(common, fourier_args);
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return e.kind() == ErrorKind::kNumerical ? 3 : 2;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 2;
  }
  return 0;
}

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cfrf/metrics.hpp"
#include "cfrf/synth_scene.hpp"
#include "test_support.hpp"

using namespace cfrf;

namespace {

// First hit of a ray with a sphere, or t_far.
double sphere_depth(const Ray& r, const Vec3& c, double radius, double t_far) {
  const Vec3 oc = r.origin - c;
  const double b = oc.dot(r.direction);
  const double disc = b * b - (oc.squaredNorm() - radius * radius);
  if (disc < 0.0) return t_far;
  const double t = -b - std::sqrt(disc);
  return t > 0.0 ? t : t_far;
}

struct ImrcFixture {
  SceneSpec spec;
  SynthScene scene;
  Dataset views;
  EstimatorConfig cfg;
};

const ImrcFixture& round_trip() {
  static const ImrcFixture f = [] {
    ImrcFixture x;
    x.spec = round_trip_sphere_scene();
    x.spec.dims = {32, 32, 32};
    x.spec.width = x.spec.height = 48;
    x.scene = synth_scene(x.spec);
    x.views = x.scene.views;
    for (auto& v : x.views) v.image = quantize_8bit(v.image);
    x.cfg.render = x.scene.render;
    return x;
  }();
  return f;
}

}  // namespace

TEST(Psnr, Arithmetic) {
  Image a(4, 4), b(4, 4);
  for (double& v : a.data) v = 0.5;
  EXPECT_EQ(psnr(a, a), 99.0);
  for (double& v : b.data) v = 0.6;
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-9);
  for (double& v : b.data) v = 1.5;
  EXPECT_NEAR(psnr(a, b), 0.0, 1e-9);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  EXPECT_THROW(psnr(a, Image(4, 3)), Error);
  EXPECT_EQ(psnr_from_mse(0.0), kPsnrCap);
}

TEST(DepthPsnr, NormalizationAndErrors) {
  const std::vector<double> ref{1.0, 2.0, 3.0, 5.0};
  const std::vector<double> est{1.1, 2.0, 2.8, 5.0};
  EXPECT_EQ(depth_psnr(ref, ref), 99.0);
  std::vector<double> ref2, est2;
  for (double v : ref) ref2.push_back(2 * v);
  for (double v : est) est2.push_back(2 * v);
  EXPECT_NEAR(depth_psnr(est, ref), depth_psnr(est2, ref2), 1e-12);
  // Hand computation: normalized errors 0.1/4, 0, 0.2/4, 0.
  const double mse = (0.025 * 0.025 + 0.05 * 0.05) / 4.0;
  EXPECT_NEAR(depth_psnr(est, ref), -10.0 * std::log10(mse), 1e-9);
  EXPECT_NE(depth_psnr(est, ref), depth_psnr(ref, est));
  EXPECT_THROW(depth_psnr(est, std::vector<double>{2, 2, 2, 2}), Error);
  EXPECT_THROW(depth_psnr(est, std::vector<double>{1, 2}), Error);
}

TEST(DepthPsnr, GroundTruthDensityAgainstAnalyticSphere) {
  SceneSpec s = round_trip_sphere_scene();
  s.camera_count = 4;
  s.camera_radius = 3.0;
  s.fov_deg = 40.0;
  s.width = s.height = 64;
  const SynthScene scene = synth_scene(s);
  for (const auto& view : scene.views) {
    const auto depth = render_depth_map(scene.density, view.camera, scene.render);
    // The silhouette is only defined to within a voxel, so rays grazing it are skipped.
    const double band = 2.0 * scene.density.geometry().voxel_size().x();
    std::vector<double> analytic, rendered;
    for (int y = 0; y < view.camera.height; ++y) {
      for (int x = 0; x < view.camera.width; ++x) {
        const Ray r = pixel_ray(view.camera, x, y);
        const double miss = (-r.origin).cross(r.direction).norm();
        if (std::abs(miss - 0.55) < band) continue;
        analytic.push_back(sphere_depth(r, Vec3::Zero(), 0.55, scene.render.t_far));
        rendered.push_back(depth[static_cast<size_t>(y) * view.camera.width + x]);
      }
    }
    EXPECT_GE(depth_psnr(rendered, analytic), 30.0);
  }
}

TEST(PairwiseSum, MatchesNaiveOnSmallAndIsAccurate) {
  std::vector<double> v(1000001, 0.1);
  v[0] = 1e8;
  const double s = pairwise_sum(v);
  EXPECT_NEAR(s, 1e8 + 100000.0, 1e-6);
  EXPECT_EQ(pairwise_sum(std::vector<double>{1, 2, 3}), 6.0);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(Imrc, GroundTruthReachesQuantizationFloor) {
  const ImrcFixture& f = round_trip();
  const ImrcResult r = imrc(f.scene.density, f.views, DirectionPdf::uniform(), 2, f.cfg);
  ASSERT_TRUE(r.db.has_value());
  EXPECT_GE(*r.db, 40.0);
}

TEST(Imrc, FloatersLowerTheScore) {
  const ImrcFixture& f = round_trip();
  const double clean = *imrc(f.scene.density, f.views, DirectionPdf::uniform(), 2, f.cfg).db;
  const DensityGrid noisy = corrupt_floaters(f.scene.density, 0.05, 3);
  const auto dirty = imrc(noisy, f.views, DirectionPdf::uniform(), 2, f.cfg).db;
  ASSERT_TRUE(dirty.has_value());
  EXPECT_LT(*dirty, clean);
}

TEST(Imrc, EmptyGridIsUndefined) {
  const ImrcFixture& f = round_trip();
  const DensityGrid empty(f.scene.density.geometry());
  const ImrcResult r = imrc(empty, f.views, DirectionPdf::uniform(), 2, f.cfg);
  EXPECT_FALSE(r.db.has_value());
  EXPECT_EQ(r.voxels, 0u);
}

TEST(Imrc, InvariantToCameraOrder) {
  const ImrcFixture& f = round_trip();
  Dataset shuffled = f.views;
  std::mt19937_64 rng(4);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const ImrcResult a = imrc(f.scene.density, f.views, DirectionPdf::uniform(), 2, f.cfg);
  const ImrcResult b = imrc(f.scene.density, shuffled, DirectionPdf::uniform(), 2, f.cfg);
  EXPECT_NEAR(*a.db, *b.db, 1e-9);
}

TEST(MetricReport, JsonShape) {
  MetricReport r;
  r.psnr = 30.0;
  r.imrc = 35.5;
  r.views.push_back({0, 30.0, std::nullopt});
  const auto j = r.to_json();
  EXPECT_EQ(j.at("psnr").get<double>(), 30.0);
  EXPECT_TRUE(j.at("depth_psnr").is_null());
  EXPECT_EQ(j.at("views").size(), 1u);
  EXPECT_NE(r.table().find("imrc"), std::string::npos);
}

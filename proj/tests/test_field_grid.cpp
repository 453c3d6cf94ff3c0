#include <cstring>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "cfrf/field_grid.hpp"
#include "test_support.hpp"

using namespace cfrf;

namespace {

GridGeometry unit_grid(int n) { return GridGeometry({n, n, n}, -Vec3::Ones(), Vec3::Ones()); }

DensityGrid random_density(const GridGeometry& g, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  DensityGrid d(g);
  for (size_t v = 0; v < g.voxel_count(); ++v) d.set(v, u(rng));
  return d;
}

ShColorGrid random_color(const GridGeometry& g, int degree, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ShColorGrid c(g, degree);
  for (double& v : c.mutable_values()) v = n(rng);
  return c;
}

}  // namespace

TEST(DensityGrid, VoxelCenterReturnsStoredValue) {
  const GridGeometry g = unit_grid(4);
  const DensityGrid d = random_density(g, 1);
  for (size_t v = 0; v < g.voxel_count(); ++v) EXPECT_NEAR(d.sample(g.voxel_center(v)), d.value(v), 1e-12);
}

TEST(DensityGrid, OutsideIsZero) {
  const DensityGrid d(unit_grid(4), 3.0);
  EXPECT_EQ(d.sample(Vec3(1.5, 0, 0)), 0.0);
  EXPECT_EQ(d.sample(Vec3(0, -2, 0)), 0.0);
  EXPECT_EQ(d.sample(Vec3(0, 0, 10)), 0.0);
}

TEST(DensityGrid, MidpointIsMean) {
  const GridGeometry g = unit_grid(4);
  DensityGrid d(g, 1.0);
  const size_t a = g.linear_index(1, 1, 1), b = g.linear_index(2, 1, 1);
  d.set(a, 2.0);
  d.set(b, 4.0);
  EXPECT_NEAR(d.sample(0.5 * (g.voxel_center(a) + g.voxel_center(b))), 3.0, 1e-12);
}

TEST(DensityGrid, SlopeBetweenAdjacentCenters) {
  const GridGeometry g = unit_grid(6);
  const DensityGrid d = random_density(g, 2);
  const size_t a = g.linear_index(2, 3, 1), b = g.linear_index(3, 3, 1);
  const Vec3 pa = g.voxel_center(a), pb = g.voxel_center(b);
  const double spacing = (pb - pa).norm();
  for (double s : {0.1, 0.4, 0.8}) {
    const double h = 1e-4;
    const Vec3 p = pa + s * (pb - pa);
    const double slope = (d.sample(p + Vec3(h, 0, 0)) - d.sample(p - Vec3(h, 0, 0))) / (2 * h);
    EXPECT_NEAR(slope, (d.value(b) - d.value(a)) / spacing, 1e-6);
  }
}

TEST(DensityGrid, TrilinearMatchesHandFormula) {
  const GridGeometry g = unit_grid(3);
  const DensityGrid d = random_density(g, 3);
  const Vec3 c000 = g.voxel_center(g.linear_index(0, 0, 0));
  const double h = g.voxel_size().x();
  const double fx = 0.3, fy = 0.7, fz = 0.2;
  const Vec3 p = c000 + h * Vec3(fx, fy, fz);
  double expected = 0.0;
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i) {
        const double w = (i ? fx : 1 - fx) * (j ? fy : 1 - fy) * (k ? fz : 1 - fz);
        expected += w * d.value(g.linear_index(i, j, k));
      }
    }
  }
  EXPECT_NEAR(d.sample(p), expected, 1e-12);
}

TEST(DensityGrid, RejectsNegativeWrites) {
  DensityGrid d(unit_grid(2));
  EXPECT_THROW(d.set(0, -1.0), Error);
  EXPECT_THROW(d.set(0, std::nan("")), Error);
  EXPECT_THROW(DensityGrid(unit_grid(2), -0.5), Error);
}

TEST(ShColorGrid, SampleInterpolatesPerCoefficient) {
  const GridGeometry g = unit_grid(4);
  const ShColorGrid c = random_color(g, 2, 4);
  const size_t a = g.linear_index(1, 2, 1), b = g.linear_index(1, 2, 2);
  const ShCoeffs at_a = c.sample(g.voxel_center(a));
  for (int i = 0; i < c.coeffs_per_voxel(); ++i) EXPECT_NEAR(at_a.values[i], c.coeffs(a)[i], 1e-12);
  const ShCoeffs mid = c.sample(0.5 * (g.voxel_center(a) + g.voxel_center(b)));
  for (int i = 0; i < c.coeffs_per_voxel(); ++i) {
    EXPECT_NEAR(mid.values[i], 0.5 * (c.coeffs(a)[i] + c.coeffs(b)[i]), 1e-12);
  }
  const ShCoeffs out = c.sample(Vec3(3, 3, 3));
  for (double v : out.values) EXPECT_EQ(v, 0.0);
}

TEST(Checkpoint, BitExactRoundTrip) {
  const auto dir = test::scratch_dir("ckpt");
  const GridGeometry g({4, 5, 3}, Vec3(-1, -2, -0.5), Vec3(1, 2, 0.5));
  DensityGrid d = random_density(g, 5);
  ShColorGrid c = random_color(g, 3, 6);
  round_to_float(d);
  round_to_float(c);
  save_checkpoint(dir / "a.cfrf", d, &c);
  const Checkpoint back = load_checkpoint(dir / "a.cfrf");
  EXPECT_TRUE(back.density == d);
  ASSERT_TRUE(back.color.has_value());
  EXPECT_TRUE(*back.color == c);
  save_checkpoint(dir / "b.cfrf", back.density, &*back.color);
  EXPECT_EQ(test::read_bytes(dir / "a.cfrf"), test::read_bytes(dir / "b.cfrf"));
}

TEST(Checkpoint, DensityOnly) {
  const auto dir = test::scratch_dir("ckpt_density");
  DensityGrid d = random_density(unit_grid(4), 7);
  round_to_float(d);
  save_checkpoint(dir / "d.cfrf", d, nullptr);
  const Checkpoint back = load_checkpoint(dir / "d.cfrf");
  EXPECT_FALSE(back.color.has_value());
  EXPECT_TRUE(back.density == d);
}

TEST(Checkpoint, StructuredErrors) {
  const auto dir = test::scratch_dir("ckpt_bad");
  DensityGrid d = random_density(unit_grid(4), 8);
  ShColorGrid c = random_color(unit_grid(4), 1, 9);
  save_checkpoint(dir / "ok.cfrf", d, &c);
  auto bytes = test::read_bytes(dir / "ok.cfrf");

  auto expect_kind = [&](const std::vector<char>& data, ErrorKind kind) {
    {
      std::ofstream out(dir / "x.cfrf", std::ios::binary | std::ios::trunc);
      out.write(data.data(), static_cast<std::streamsize>(data.size()));
    }
    try {
      load_checkpoint(dir / "x.cfrf");
      ADD_FAILURE() << "expected a throw";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), kind) << e.what();
    }
  };
  for (size_t cut : {size_t{2}, size_t{10}, size_t{40}, bytes.size() - 3}) {
    expect_kind(std::vector<char>(bytes.begin(), bytes.begin() + cut), ErrorKind::kFormat);
  }
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  expect_kind(bad_magic, ErrorKind::kFormat);
  auto bad_version = bytes;
  bad_version[4] = 9;
  expect_kind(bad_version, ErrorKind::kFormat);
  auto huge = bytes;
  const uint32_t big = 1u << 20;
  for (int a = 0; a < 3; ++a) std::memcpy(&huge[12 + 4 * a], &big, 4);
  expect_kind(huge, ErrorKind::kFormat);
  auto trailing = bytes;
  trailing.push_back(0);
  expect_kind(trailing, ErrorKind::kFormat);

  try {
    load_checkpoint(dir / "missing.cfrf");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(Checkpoint, MismatchedColorGeometryRejected) {
  const auto dir = test::scratch_dir("ckpt_geom");
  const DensityGrid d(unit_grid(4));
  const ShColorGrid c(unit_grid(3), 1);
  EXPECT_THROW(save_checkpoint(dir / "x.cfrf", d, &c), Error);
}

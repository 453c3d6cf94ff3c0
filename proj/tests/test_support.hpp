#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cfrf/common.hpp"

namespace cfrf::test {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cfrf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
inline Quadrature gauss_legendre(int n) {
  Quadrature q;
  for (int i = 1; i <= n; ++i) {
    double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes.push_back(x);
    q.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  }
  return q;
}

// Product rule on the sphere: Gauss-Legendre in cos(theta), uniform in phi.
// Exact for spherical polynomials of degree < min(2 n_theta, n_phi).
struct SphereRule {
  std::vector<Vec3> dirs;
  std::vector<double> weights;
};

inline SphereRule sphere_rule(int n_theta, int n_phi) {
  SphereRule r;
  const Quadrature gl = gauss_legendre(n_theta);
  for (int i = 0; i < n_theta; ++i) {
    const double z = gl.nodes[i];
    const double s = std::sqrt(1.0 - z * z);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / n_phi;
      r.dirs.emplace_back(s * std::cos(phi), s * std::sin(phi), z);
      r.weights.push_back(gl.weights[i] * 2.0 * std::numbers::pi / n_phi);
    }
  }
  return r;
}

}  // namespace cfrf::test

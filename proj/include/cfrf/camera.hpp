#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Geometry>

#include "cfrf/common.hpp"

namespace cfrf {

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit length
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();

  Vec3 point_at(double t) const { return origin + t * direction; }
};

/// Clip a ray's [t_near, t_far] to an axis-aligned box. Empty if it misses.
std::optional<Ray> clip_to_box(const Ray& ray, const Vec3& box_min, const Vec3& box_max);

/// Pinhole camera. Camera frame: +x right, +y down, +z forward (OpenCV).
/// cam_to_world = [R | o] maps camera-frame points to world.
struct Camera {
  double fx = 1.0, fy = 1.0, cx = 0.5, cy = 0.5;
  int width = 1, height = 1;
  Eigen::Matrix<double, 3, 4> cam_to_world = Eigen::Matrix<double, 3, 4>::Identity();

  Vec3 origin() const { return cam_to_world.col(3); }
  Mat3 rotation() const { return cam_to_world.block<3, 3>(0, 0); }
  Vec3 forward() const { return cam_to_world.col(2); }

  /// Throws kValidation on nonpositive focal lengths/resolution or a
  /// rotation that is not orthonormal with det +1 (tolerance 1e-6).
  void validate() const;

  /// Camera at `eye` looking at `target`; `up` only fixes the roll.
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height,
                        double fov_x_radians);
};

/// Ray through continuous pixel coordinates (pixel (i, j) spans [i, i+1) x [j, j+1)).
/// Throws kValidation when `px` is outside [0, width] x [0, height].
Ray generate_ray(const Camera& camera, const Vec2& px);
/// Ray through the center of integer pixel (col, row).
Ray pixel_ray(const Camera& camera, int col, int row);

struct Projection {
  Vec2 pixel;       // continuous pixel coordinates
  double depth;     // camera-frame z
  double distance;  // distance along the unit viewing ray
};

/// Perspective projection; nullopt when the point is not in front of the camera.
std::optional<Projection> project(const Camera& camera, const Vec3& point);

/// Row-major RGB image with values nominally in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // 3 * width * height

  Image() = default;
  Image(int w, int h) : width(w), height(h), data(static_cast<size_t>(3) * w * h, 0.0) {}

  Rgb at(int x, int y) const {
    const size_t o = 3 * (static_cast<size_t>(y) * width + x);
    return Rgb(data[o], data[o + 1], data[o + 2]);
  }
  void set(int x, int y, const Rgb& c) {
    const size_t o = 3 * (static_cast<size_t>(y) * width + x);
    data[o] = c[0];
    data[o + 1] = c[1];
    data[o + 2] = c[2];
  }
  bool operator==(const Image& o) const = default;
};

/// Bilinear lookup between pixel centers (clamped at the border half-pixel).
/// nullopt when `px` lies outside [0, width) x [0, height).
std::optional<Rgb> sample_image(const Image& image, const Vec2& px);

/// Map to 8 bits and back, as a PNG round trip does.
Image quantize_8bit(const Image& image);

struct PosedImage {
  Camera camera;
  Image image;
};

using Dataset = std::vector<PosedImage>;

}  // namespace cfrf

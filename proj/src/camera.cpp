#include "cfrf/camera.hpp"

#include <algorithm>
#include <cmath>

namespace cfrf {

std::optional<Ray> clip_to_box(const Ray& ray, const Vec3& box_min, const Vec3& box_max) {
  double t0 = ray.t_near, t1 = ray.t_far;
  for (int a = 0; a < 3; ++a) {
    const double d = ray.direction[a];
    const double o = ray.origin[a];
    if (std::abs(d) < 1e-300) {
      if (o < box_min[a] || o > box_max[a]) return std::nullopt;
      continue;
    }
    double ta = (box_min[a] - o) / d;
    double tb = (box_max[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (!(t1 > t0)) return std::nullopt;
  Ray out = ray;
  out.t_near = t0;
  out.t_far = t1;
  return out;
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorKind::kValidation, "camera focal lengths must be positive");
  if (width <= 0 || height <= 0) fail(ErrorKind::kValidation, "camera resolution must be positive");
  const Mat3 r = rotation();
  if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 || std::abs(r.determinant() - 1.0) > 1e-6) {
    fail(ErrorKind::kValidation, "camera rotation is not orthonormal with det +1");
  }
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height,
                       double fov_x_radians) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 ref = up.normalized();
  if (std::abs(forward.dot(ref)) > 0.999) {
    ref = std::abs(forward.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  }
  // Image y points down, so the camera's +y is the negated up vector.
  const Vec3 right = forward.cross(ref).normalized();
  const Vec3 down = forward.cross(right);
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = 0.5 * width / std::tan(0.5 * fov_x_radians);
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.cam_to_world.col(0) = right;
  cam.cam_to_world.col(1) = down;
  cam.cam_to_world.col(2) = forward;
  cam.cam_to_world.col(3) = eye;
  return cam;
}

Ray generate_ray(const Camera& camera, const Vec2& px) {
  if (!(px.x() >= 0.0 && px.x() <= camera.width && px.y() >= 0.0 && px.y() <= camera.height)) {
    fail(ErrorKind::kValidation, "pixel coordinates outside the image");
  }
  const Vec3 dir_cam((px.x() - camera.cx) / camera.fx, (px.y() - camera.cy) / camera.fy, 1.0);
  Ray ray;
  ray.origin = camera.origin();
  ray.direction = (camera.rotation() * dir_cam).normalized();
  return ray;
}

Ray pixel_ray(const Camera& camera, int col, int row) {
  return generate_ray(camera, Vec2(col + 0.5, row + 0.5));
}

std::optional<Projection> project(const Camera& camera, const Vec3& point) {
  const Vec3 p = camera.rotation().transpose() * (point - camera.origin());
  if (!(p.z() > 0.0)) return std::nullopt;
  Projection out;
  out.pixel = Vec2(camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy);
  out.depth = p.z();
  out.distance = p.norm();
  return out;
}

std::optional<Rgb> sample_image(const Image& image, const Vec2& px) {
  if (!(px.x() >= 0.0 && px.x() < image.width && px.y() >= 0.0 && px.y() < image.height)) {
    return std::nullopt;
  }
  const double u = std::clamp(px.x() - 0.5, 0.0, image.width - 1.0);
  const double v = std::clamp(px.y() - 0.5, 0.0, image.height - 1.0);
  const int x0 = std::min(static_cast<int>(u), image.width - 1);
  const int y0 = std::min(static_cast<int>(v), image.height - 1);
  const int x1 = std::min(x0 + 1, image.width - 1);
  const int y1 = std::min(y0 + 1, image.height - 1);
  const double fx = u - x0, fy = v - y0;
  return (1 - fx) * (1 - fy) * image.at(x0, y0) + fx * (1 - fy) * image.at(x1, y0) +
         (1 - fx) * fy * image.at(x0, y1) + fx * fy * image.at(x1, y1);
}

Image quantize_8bit(const Image& image) {
  Image out = image;
  for (double& v : out.data) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  return out;
}

}  // namespace cfrf

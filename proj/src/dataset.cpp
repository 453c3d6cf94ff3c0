#include "cfrf/dataset.hpp"

#include <cstdio>
#include <fstream>

#include "cfrf/image_io.hpp"
#include "json.hpp"

namespace cfrf {
namespace {

using json = nlohmann::json;

std::string view_filename(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03zu.png", index);
  return buf;
}

json camera_to_json(const Camera& cam) {
  json pose = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) pose.push_back(cam.cam_to_world(r, c));
  }
  return json{{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx}, {"cy", cam.cy},
              {"width", cam.width}, {"height", cam.height}, {"cam_to_world", pose}};
}

Camera camera_from_json(const json& j) {
  Camera cam;
  try {
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    const auto& pose = j.at("cam_to_world");
    if (!pose.is_array() || pose.size() != 12) fail(ErrorKind::kFormat, "cam_to_world must hold 12 values");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) cam.cam_to_world(r, c) = pose[r * 4 + c].get<double>();
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("malformed camera entry: ") + e.what());
  }
  try {
    cam.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, e.what());
  }
  return cam;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  json cams = json::array();
  for (size_t i = 0; i < dataset.size(); ++i) {
    const auto& view = dataset[i];
    if (view.image.width != view.camera.width || view.image.height != view.camera.height) {
      fail(ErrorKind::kValidation, "image resolution does not match its camera");
    }
    json entry = camera_to_json(view.camera);
    entry["file"] = view_filename(i);
    cams.push_back(entry);
    write_png_rgb(dir / view_filename(i), view.image);
  }
  std::ofstream out(dir / "cameras.json");
  if (!out) fail(ErrorKind::kIo, "cannot write " + (dir / "cameras.json").string());
  out << cams.dump(1) << "\n";
}

std::vector<Camera> load_cameras(const std::filesystem::path& cameras_json) {
  const json cams = read_json(cameras_json);
  if (!cams.is_array()) fail(ErrorKind::kFormat, "cameras.json must be an array");
  std::vector<Camera> out;
  for (const auto& entry : cams) out.push_back(camera_from_json(entry));
  return out;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const json cams = read_json(dir / "cameras.json");
  if (!cams.is_array()) fail(ErrorKind::kFormat, "cameras.json must be an array");
  Dataset out;
  for (const auto& entry : cams) {
    PosedImage view;
    view.camera = camera_from_json(entry);
    if (!entry.contains("file") || !entry["file"].is_string()) {
      fail(ErrorKind::kFormat, "camera entry lacks an image file name");
    }
    const auto file = dir / entry["file"].get<std::string>();
    if (!std::filesystem::exists(file)) fail(ErrorKind::kIo, "missing image file: " + file.string());
    view.image = read_png_rgb(file);
    if (view.image.width != view.camera.width || view.image.height != view.camera.height) {
      fail(ErrorKind::kFormat, "resolution mismatch for " + file.string());
    }
    out.push_back(std::move(view));
  }
  return out;
}

}  // namespace cfrf

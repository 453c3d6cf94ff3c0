#pragma once

#include <filesystem>

#include "cfrf/camera.hpp"

namespace cfrf {

/// Writes `cameras.json` plus one 8-bit PNG per view ("000.png", ...).
/// Pixels are quantized to 8 bits here, once.
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Reads a directory written by save_dataset. Throws kFormat on malformed
/// JSON or resolution mismatch and kIo naming any missing image file.
Dataset load_dataset(const std::filesystem::path& dir);

/// Only the cameras of a dataset directory (images are not decoded).
std::vector<Camera> load_cameras(const std::filesystem::path& cameras_json);

}  // namespace cfrf

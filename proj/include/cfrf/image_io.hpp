#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfrf/camera.hpp"

namespace cfrf {

/// 8-bit RGB PNG. Values are clamped to [0, 1] and rounded on write; read
/// maps bytes linearly to [0, 1] (no gamma).
void write_png_rgb(const std::filesystem::path& path, const Image& image);
Image read_png_rgb(const std::filesystem::path& path);

/// 16-bit single-channel PNG of values already normalized to [0, 1].
void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      const std::vector<double>& values);
std::vector<uint16_t> read_png_gray16(const std::filesystem::path& path, int& width, int& height);

/// Raw little-endian f32 dump with an 8-byte (u32 width, u32 height) header.
void write_f32_map(const std::filesystem::path& path, int width, int height,
                   const std::vector<double>& values);
std::vector<double> read_f32_map(const std::filesystem::path& path, int& width, int& height);

std::string libpng_version();

}  // namespace cfrf

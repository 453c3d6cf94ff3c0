#include "cfrf/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <png.h>

namespace cfrf {

void write_png_rgb(const std::filesystem::path& path, const Image& image) {
  std::vector<uint8_t> bytes(image.data.size());
  for (size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<uint8_t>(std::lround(std::clamp(image.data[i], 0.0, 1.0) * 255.0));
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    fail(ErrorKind::kIo, "failed to write PNG " + path.string() + ": " + png.message);
  }
}

Image read_png_rgb(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::kIo, "missing image file: " + path.string());
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    fail(ErrorKind::kFormat, "cannot decode PNG " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<uint8_t> bytes(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
    fail(ErrorKind::kFormat, "cannot decode PNG " + path.string() + ": " + png.message);
  }
  Image out(static_cast<int>(png.width), static_cast<int>(png.height));
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = bytes[i] / 255.0;
  return out;
}

void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      const std::vector<double>& values) {
  std::vector<uint16_t> words(values.size());
  for (size_t i = 0; i < words.size(); ++i) {
    words[i] = static_cast<uint16_t>(std::lround(std::clamp(values[i], 0.0, 1.0) * 65535.0));
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(width);
  png.height = static_cast<png_uint_32>(height);
  png.format = PNG_FORMAT_LINEAR_Y;
  if (!png_image_write_to_file(&png, path.c_str(), 0, words.data(), 0, nullptr)) {
    fail(ErrorKind::kIo, "failed to write PNG " + path.string() + ": " + png.message);
  }
}

std::vector<uint16_t> read_png_gray16(const std::filesystem::path& path, int& width, int& height) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    fail(ErrorKind::kFormat, "cannot decode PNG " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_LINEAR_Y;
  std::vector<uint16_t> words(PNG_IMAGE_SIZE(png) / 2);
  if (!png_image_finish_read(&png, nullptr, words.data(), 0, nullptr)) {
    fail(ErrorKind::kFormat, "cannot decode PNG " + path.string() + ": " + png.message);
  }
  width = static_cast<int>(png.width);
  height = static_cast<int>(png.height);
  return words;
}

void write_f32_map(const std::filesystem::path& path, int width, int height,
                   const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string());
  auto put_u32 = [&](uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
  };
  put_u32(static_cast<uint32_t>(width));
  put_u32(static_cast<uint32_t>(height));
  for (double v : values) put_u32(std::bit_cast<uint32_t>(static_cast<float>(v)));
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

std::vector<double> read_f32_map(const std::filesystem::path& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  auto get_u32 = [&]() {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) fail(ErrorKind::kFormat, "truncated f32 map " + path.string());
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 | static_cast<uint32_t>(b[2]) << 16 |
           static_cast<uint32_t>(b[3]) << 24;
  };
  const uint32_t w = get_u32(), h = get_u32();
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) fail(ErrorKind::kFormat, "bad f32 map size in " + path.string());
  width = static_cast<int>(w);
  height = static_cast<int>(h);
  std::vector<double> out(static_cast<size_t>(w) * h);
  for (double& v : out) v = std::bit_cast<float>(get_u32());
  if (in.peek() != std::char_traits<char>::eof()) fail(ErrorKind::kFormat, "trailing bytes in " + path.string());
  return out;
}

std::string libpng_version() { return PNG_LIBPNG_VER_STRING; }

}  // namespace cfrf

#include "cfrf/field_grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace cfrf {

GridGeometry::GridGeometry(std::array<int, 3> dims, const Vec3& bbox_min, const Vec3& bbox_max)
    : dims_(dims), bbox_min_(bbox_min), bbox_max_(bbox_max) {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) fail(ErrorKind::kValidation, "grid dimensions must be positive");
    if (!(bbox_max[a] > bbox_min[a])) fail(ErrorKind::kValidation, "bbox_max must exceed bbox_min");
  }
  if (voxel_count() > (size_t{1} << 31)) fail(ErrorKind::kValidation, "grid too large");
  voxel_size_ = (bbox_max - bbox_min).cwiseQuotient(Vec3(dims[0], dims[1], dims[2]));
}

std::array<int, 3> GridGeometry::unravel(size_t index) const {
  const int i = static_cast<int>(index % dims_[0]);
  index /= dims_[0];
  const int j = static_cast<int>(index % dims_[1]);
  const int k = static_cast<int>(index / dims_[1]);
  return {i, j, k};
}

Vec3 GridGeometry::voxel_center(size_t index) const {
  const auto [i, j, k] = unravel(index);
  return bbox_min_ + (Vec3(i, j, k) + Vec3::Constant(0.5)).cwiseProduct(voxel_size_);
}

bool GridGeometry::contains(const Vec3& p) const {
  return (p.array() >= bbox_min_.array()).all() && (p.array() <= bbox_max_.array()).all();
}

TrilinearStencil GridGeometry::stencil(const Vec3& p) const {
  TrilinearStencil s;
  if (!contains(p)) return s;
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const double u = (p[a] - bbox_min_[a]) / voxel_size_[a] - 0.5;
    const double fl = std::floor(u);
    base[a] = static_cast<int>(fl);
    frac[a] = u - fl;
  }
  for (int c = 0; c < 8; ++c) {
    int idx[3];
    double w = 1.0;
    bool inside = true;
    for (int a = 0; a < 3; ++a) {
      const int bit = (c >> a) & 1;
      idx[a] = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
      inside = inside && idx[a] >= 0 && idx[a] < dims_[a];
    }
    if (!inside || w == 0.0) continue;
    s.index[s.count] = static_cast<uint32_t>(linear_index(idx[0], idx[1], idx[2]));
    s.weight[s.count] = w;
    ++s.count;
  }
  return s;
}

DensityGrid::DensityGrid(const GridGeometry& geometry, double fill)
    : geometry_(geometry), values_(geometry.voxel_count(), fill) {
  if (fill < 0.0) fail(ErrorKind::kValidation, "density fill must be nonnegative");
}

void DensityGrid::set(size_t index, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    fail(ErrorKind::kValidation, "density values must be finite and nonnegative");
  }
  values_[index] = value;
}

void DensityGrid::check_nonnegative() const {
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorKind::kNumerical, "density grid holds a negative or non-finite value");
    }
  }
}

double DensityGrid::sample(const Vec3& p) const { return sample(geometry_.stencil(p)); }

ShColorGrid::ShColorGrid(const GridGeometry& geometry, int degree)
    : geometry_(geometry), degree_(degree) {
  check_degree(degree);
  values_.assign(geometry.voxel_count() * coeffs_per_voxel(), 0.0);
}

void ShColorGrid::set(size_t voxel, const ShCoeffs& c) {
  if (c.degree != degree_) fail(ErrorKind::kValidation, "SH degree mismatch");
  std::copy(c.values.begin(), c.values.end(), coeffs(voxel).begin());
}

ShCoeffs ShColorGrid::get(size_t voxel) const {
  ShCoeffs out = ShCoeffs::zeros(degree_);
  const auto src = coeffs(voxel);
  std::copy(src.begin(), src.end(), out.values.begin());
  return out;
}

ShCoeffs ShColorGrid::sample(const Vec3& p) const {
  ShCoeffs out = ShCoeffs::zeros(degree_);
  const TrilinearStencil s = geometry_.stencil(p);
  for (int c = 0; c < s.count; ++c) {
    const auto src = coeffs(s.index[c]);
    for (size_t i = 0; i < src.size(); ++i) out.values[i] += s.weight[c] * src[i];
  }
  return out;
}

void round_to_float(DensityGrid& density) {
  for (double& v : density.mutable_values()) v = static_cast<float>(v);
}

void round_to_float(ShColorGrid& color) {
  for (double& v : color.mutable_values()) v = static_cast<float>(v);
}

// --- checkpoint I/O --------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'C', 'F', 'R', 'F'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kFlagColor = 1u;

class ByteWriter {
 public:
  void u32(uint32_t v) {
    for (int b = 0; b < 4; ++b) bytes_.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  }
  void u64(uint64_t v) {
    for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void raw(const char* p, size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}
  size_t remaining() const { return bytes_.size() - pos_; }
  void need(size_t n, const char* what) const {
    if (remaining() < n) fail(ErrorKind::kFormat, std::string("checkpoint truncated while reading ") + what);
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += 4;
    return v;
  }
  uint64_t u64(const char* what) {
    need(8, what);
    uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += 8;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  void raw(char* out, size_t n, const char* what) {
    need(n, what);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }

 private:
  std::vector<char> bytes_;
  size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const DensityGrid& density,
                     const ShColorGrid* color) {
  const GridGeometry& g = density.geometry();
  if (color && !(color->geometry() == g)) {
    fail(ErrorKind::kValidation, "color grid geometry differs from density grid");
  }
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u32(kVersion);
  w.u32(color ? kFlagColor : 0u);
  for (int a = 0; a < 3; ++a) w.u32(static_cast<uint32_t>(g.dims()[a]));
  for (int a = 0; a < 3; ++a) w.f64(g.bbox_min()[a]);
  for (int a = 0; a < 3; ++a) w.f64(g.bbox_max()[a]);
  w.u32(color ? static_cast<uint32_t>(color->degree()) : 0u);
  for (double v : density.values()) w.f32(static_cast<float>(v));
  if (color) {
    for (double v : color->values()) w.f32(static_cast<float>(v));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open checkpoint for writing: " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) fail(ErrorKind::kIo, "failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open checkpoint: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(std::move(bytes));

  char magic[4];
  r.raw(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) fail(ErrorKind::kFormat, "not a CFRF checkpoint (bad magic)");
  const uint32_t version = r.u32("version");
  if (version != kVersion) {
    fail(ErrorKind::kFormat, "unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t flags = r.u32("flags");
  std::array<int, 3> dims{};
  uint64_t count = 1;
  for (int a = 0; a < 3; ++a) {
    const uint32_t d = r.u32("dims");
    if (d == 0 || d > (1u << 20)) fail(ErrorKind::kFormat, "checkpoint dimension out of range");
    dims[a] = static_cast<int>(d);
    count *= d;
  }
  if (count > (uint64_t{1} << 31)) fail(ErrorKind::kFormat, "checkpoint dimensions overflow");
  Vec3 lo, hi;
  for (int a = 0; a < 3; ++a) lo[a] = r.f64("bbox");
  for (int a = 0; a < 3; ++a) hi[a] = r.f64("bbox");
  const uint32_t degree = r.u32("SH degree");
  if (degree > static_cast<uint32_t>(kMaxShDegree)) fail(ErrorKind::kFormat, "checkpoint SH degree out of range");

  GridGeometry geometry;
  try {
    geometry = GridGeometry(dims, lo, hi);
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, std::string("invalid checkpoint geometry: ") + e.what());
  }
  r.need(count * 4, "density");
  Checkpoint ckpt{DensityGrid(geometry), std::nullopt};
  auto dens = ckpt.density.mutable_values();
  for (uint64_t i = 0; i < count; ++i) {
    const float v = r.f32("density");
    if (!(v >= 0.0f) || !std::isfinite(v)) fail(ErrorKind::kFormat, "checkpoint holds an invalid density");
    dens[i] = v;
  }
  if (flags & kFlagColor) {
    ShColorGrid color(geometry, static_cast<int>(degree));
    auto vals = color.mutable_values();
    r.need(vals.size() * 4, "SH coefficients");
    for (double& v : vals) v = r.f32("SH coefficients");
    ckpt.color = std::move(color);
  }
  if (r.remaining() != 0) fail(ErrorKind::kFormat, "trailing bytes after checkpoint payload");
  return ckpt;
}

}  // namespace cfrf

#include "oamp/grids.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "json.hpp"

#include "oamp/errors.hpp"
#include "oamp/io.hpp"

namespace oamp {
namespace {

constexpr char kMagic[4] = {'O', 'A', 'M', 'P'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 4 + 4;

void check_dims(int height, int width) {
  if (height <= 0 || width <= 0 || height > kMaxGridSide || width > kMaxGridSide) {
    throw DimensionError("grid dimensions " + std::to_string(height) + "x" +
                         std::to_string(width) + " outside [1, 4096]");
  }
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

std::vector<std::uint8_t> header(GridDtype dtype, int height, int width) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(height));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(width));
  return out;
}

}  // namespace

// --- Mask -------------------------------------------------------------------

Mask::Mask(int height, int width, std::uint8_t fill) : height_(height), width_(width) {
  check_dims(height, width);
  if (fill > 1) throw ValidationError("mask fill must be 0 or 1");
  bits_.assign(static_cast<std::size_t>(height) * width, fill);
}

Mask::Mask(int height, int width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  check_dims(height, width);
  if (bits_.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("mask bit count does not match height*width");
  }
  if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; })) {
    throw ValidationError("mask bits must be 0 or 1");
  }
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

// --- Field ------------------------------------------------------------------

Field::Field(std::vector<double> values, Mask validity)
    : values_(std::move(values)), validity_(std::move(validity)) {
  if (values_.size() != validity_.size()) {
    throw DimensionError("field values do not match validity shape");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (validity_[i]) {
      if (!std::isfinite(values_[i])) throw NumericalError("non-finite value at valid pixel");
    } else {
      values_[i] = 0.0;
    }
  }
}

Field::Field(int height, int width, std::vector<double> values)
    : Field(std::move(values), Mask::ones(height, width)) {}

Field Field::masked(const Mask& mask) const {
  return Field(values_, intersect(validity_, mask));
}

// --- algebra ----------------------------------------------------------------

void require_same_shape(const Mask& a, const Mask& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.height()) +
                         "x" + std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                         "x" + std::to_string(b.width()));
  }
}

namespace {

template <typename Op>
Mask zip(const Mask& a, const Mask& b, const char* what, Op op) {
  require_same_shape(a, b, what);
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]) ? 1 : 0;
  return Mask(a.height(), a.width(), std::move(out));
}

}  // namespace

Mask intersect(const Mask& a, const Mask& b) {
  return zip(a, b, "intersect", [](auto x, auto y) { return x && y; });
}

Mask unite(const Mask& a, const Mask& b) {
  return zip(a, b, "unite", [](auto x, auto y) { return x || y; });
}

Mask subtract(const Mask& a, const Mask& b) {
  return zip(a, b, "subtract", [](auto x, auto y) { return x && !y; });
}

Mask complement(const Mask& a) {
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] ? 0 : 1;
  return Mask(a.height(), a.width(), std::move(out));
}

bool is_subset(const Mask& inner, const Mask& outer) {
  require_same_shape(inner, outer, "is_subset");
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i] && !outer[i]) return false;
  }
  return true;
}

std::size_t hamming(const Mask& a, const Mask& b) {
  require_same_shape(a, b, "hamming");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

Partition make_partition(const Mask& observed, const Mask& generated) {
  Mask ctx = intersect(generated, observed);
  Mask qry = subtract(observed, ctx);
  return Partition{std::move(ctx), std::move(qry), observed, true};
}

Mask land_mask(std::span<const Mask> masks) {
  if (masks.empty()) throw ValidationError("land_mask: no samples");
  Mask seen = Mask::zeros(masks.front().height(), masks.front().width());
  for (const auto& m : masks) seen = unite(seen, m);
  return complement(seen);
}

// --- GRD --------------------------------------------------------------------

std::vector<std::uint8_t> encode_grid(const Mask& mask) {
  auto out = header(GridDtype::kMask, mask.height(), mask.width());
  out.insert(out.end(), mask.bits().begin(), mask.bits().end());
  return out;
}

std::vector<std::uint8_t> encode_grid(const ValueGrid& grid) {
  check_dims(grid.height, grid.width);
  if (grid.values.size() != static_cast<std::size_t>(grid.height) * grid.width) {
    throw DimensionError("value grid size does not match height*width");
  }
  auto out = header(GridDtype::kField, grid.height, grid.width);
  out.reserve(out.size() + grid.values.size() * 8);
  for (double v : grid.values) put_le<double>(out, v);
  return out;
}

std::variant<Mask, ValueGrid> decode_grid(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw FormatError("grid file truncated before header end");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad grid magic");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kVersion) throw FormatError("unsupported grid version " + std::to_string(version));
  const auto dtype = get_le<std::uint8_t>(bytes, 6);
  const auto height = get_le<std::uint32_t>(bytes, 7);
  const auto width = get_le<std::uint32_t>(bytes, 11);
  if (height == 0 || width == 0 || height > kMaxGridSide || width > kMaxGridSide) {
    throw FormatError("grid dimensions out of range");
  }
  const std::size_t n = static_cast<std::size_t>(height) * width;
  const auto payload = bytes.subspan(kHeaderSize);
  if (dtype == static_cast<std::uint8_t>(GridDtype::kMask)) {
    if (payload.size() != n) throw FormatError("mask payload size mismatch");
    std::vector<std::uint8_t> bits(payload.begin(), payload.end());
    if (std::any_of(bits.begin(), bits.end(), [](auto b) { return b > 1; })) {
      throw FormatError("mask payload holds values other than 0/1");
    }
    return Mask(static_cast<int>(height), static_cast<int>(width), std::move(bits));
  }
  if (dtype == static_cast<std::uint8_t>(GridDtype::kField)) {
    if (payload.size() != n * 8) throw FormatError("field payload size mismatch");
    ValueGrid grid{static_cast<int>(height), static_cast<int>(width), std::vector<double>(n)};
    std::memcpy(grid.values.data(), payload.data(), n * 8);
    return grid;
  }
  throw FormatError("unknown grid dtype " + std::to_string(dtype));
}

void save_grid(const std::filesystem::path& path, const Mask& mask) {
  io::write_atomic(path, encode_grid(mask));
}

void save_grid(const std::filesystem::path& path, const ValueGrid& grid) {
  io::write_atomic(path, encode_grid(grid));
}

void save_grid(const std::filesystem::path& path, const Field& field) {
  save_grid(path, ValueGrid{field.height(), field.width(),
                            {field.values().begin(), field.values().end()}});
}

std::variant<Mask, ValueGrid> load_grid(const std::filesystem::path& path) {
  return decode_grid(io::read_bytes(path));
}

Mask load_mask(const std::filesystem::path& path) {
  auto grid = load_grid(path);
  if (auto* m = std::get_if<Mask>(&grid)) return std::move(*m);
  throw FormatError(path.string() + ": expected mask dtype, found field");
}

ValueGrid load_values(const std::filesystem::path& path) {
  auto grid = load_grid(path);
  if (auto* v = std::get_if<ValueGrid>(&grid)) return std::move(*v);
  throw FormatError(path.string() + ": expected field dtype, found mask");
}

Field load_field(const std::filesystem::path& path, const Mask& validity) {
  auto grid = load_values(path);
  if (grid.height != validity.height() || grid.width != validity.width()) {
    throw DimensionError(path.string() + ": field shape does not match its mask");
  }
  return Field(std::move(grid.values), validity);
}

// --- manifests --------------------------------------------------------------

DatasetManifest load_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  DatasetManifest m;
  m.base_dir = path.parent_path();
  try {
    m.height = j.at("height").get<int>();
    m.width = j.at("width").get<int>();
    m.mean = j.at("mean").get<double>();
    m.std = j.at("std").get<double>();
    for (const auto& s : j.at("samples")) {
      m.samples.push_back({s.at("field").get<std::string>(), s.at("mask").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  check_dims(m.height, m.width);
  if (!(m.std > 0.0) || !std::isfinite(m.mean)) throw FormatError("manifest statistics invalid");
  return m;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  nlohmann::json j;
  j["height"] = manifest.height;
  j["width"] = manifest.width;
  j["mean"] = manifest.mean;
  j["std"] = manifest.std;
  j["samples"] = nlohmann::json::array();
  for (const auto& s : manifest.samples) j["samples"].push_back({{"field", s.field}, {"mask", s.mask}});
  io::write_atomic(path, j.dump(2) + "\n");
}

std::vector<Mask> load_masks(const DatasetManifest& manifest) {
  std::vector<Mask> masks;
  masks.reserve(manifest.samples.size());
  for (const auto& s : manifest.samples) {
    auto m = load_mask(manifest.base_dir / s.mask);
    if (m.height() != manifest.height || m.width() != manifest.width) {
      throw DimensionError(s.mask + ": shape differs from manifest");
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

std::vector<Sample> load_samples(const DatasetManifest& manifest) {
  std::vector<Sample> out;
  auto masks = load_masks(manifest);
  out.reserve(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    auto raw = load_field(manifest.base_dir / manifest.samples[i].field, masks[i]);
    out.push_back({standardize(raw, manifest.mean, manifest.std), std::move(masks[i])});
  }
  return out;
}

Mask land_mask(const DatasetManifest& manifest) {
  auto masks = load_masks(manifest);
  return land_mask(masks);
}

std::pair<double, double> valid_pixel_stats(std::span<const Field> fields) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : fields) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.validity()[i]) {
        sum += f[i];
        ++n;
      }
    }
  }
  if (n == 0) throw ValidationError("no valid pixels for normalization statistics");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& f : fields) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.validity()[i]) ss += (f[i] - mean) * (f[i] - mean);
    }
  }
  const double std = std::sqrt(ss / static_cast<double>(n));
  return {mean, std > 0.0 ? std : 1.0};
}

Field standardize(const Field& field, double mean, double std) {
  std::vector<double> v(field.values().begin(), field.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (field.validity()[i]) v[i] = (v[i] - mean) / std;
  }
  return Field(std::move(v), field.validity());
}

}  // namespace oamp

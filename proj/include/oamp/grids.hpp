#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace oamp {

inline constexpr int kMaxGridSide = 4096;

/// H x W binary grid, row-major. Bit 1 marks a valid observation.
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, std::uint8_t fill = 0);
  Mask(int height, int width, std::vector<std::uint8_t> bits);

  static Mask ones(int height, int width) { return Mask(height, width, 1); }
  static Mask zeros(int height, int width) { return Mask(height, width, 0); }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::uint8_t operator()(int row, int col) const {
    return bits_[static_cast<std::size_t>(row) * width_ + col];
  }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  void set(int row, int col, bool on) { set(static_cast<std::size_t>(row) * width_ + col, on); }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::size_t count() const;
  bool same_shape(const Mask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// H x W real grid paired with a validity mask. Invalid entries hold 0.0 and
/// valid entries are finite.
class Field {
 public:
  Field() = default;
  Field(std::vector<double> values, Mask validity);
  /// Fully valid field.
  Field(int height, int width, std::vector<double> values);

  int height() const { return validity_.height(); }
  int width() const { return validity_.width(); }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double operator()(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width() + col];
  }
  std::span<const double> values() const { return values_; }
  const Mask& validity() const { return validity_; }

  /// Copy restricted to `mask` (values outside are zeroed).
  Field masked(const Mask& mask) const;

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::vector<double> values_;
  Mask validity_;
};

struct Partition {
  Mask ctx;
  Mask qry;
  Mask parent;
  bool disjoint = true;
};

void require_same_shape(const Mask& a, const Mask& b, const char* what);

Mask intersect(const Mask& a, const Mask& b);
Mask unite(const Mask& a, const Mask& b);
Mask complement(const Mask& a);
/// a minus b: a AND NOT b.
Mask subtract(const Mask& a, const Mask& b);
bool is_subset(const Mask& inner, const Mask& outer);
std::size_t hamming(const Mask& a, const Mask& b);

/// ctx = generated AND observed, qry = observed AND NOT ctx.
Partition make_partition(const Mask& observed, const Mask& generated);

/// Pixels that no mask in `masks` ever observes.
Mask land_mask(std::span<const Mask> masks);

// ---------------------------------------------------------------------------
// GRD files: "OAMP", u16 version, u8 dtype, u32 height, u32 width, payload.

enum class GridDtype : std::uint8_t { kMask = 0, kField = 1 };

/// Raw f64 grid as stored on disk; validity is carried by a separate mask file.
struct ValueGrid {
  int height = 0;
  int width = 0;
  std::vector<double> values;
};

void save_grid(const std::filesystem::path& path, const Mask& mask);
void save_grid(const std::filesystem::path& path, const Field& field);
void save_grid(const std::filesystem::path& path, const ValueGrid& grid);

std::variant<Mask, ValueGrid> load_grid(const std::filesystem::path& path);
Mask load_mask(const std::filesystem::path& path);
ValueGrid load_values(const std::filesystem::path& path);
/// Values file paired with its validity mask; checks shape and the zero/finite
/// invariants.
Field load_field(const std::filesystem::path& path, const Mask& validity);

std::vector<std::uint8_t> encode_grid(const Mask& mask);
std::vector<std::uint8_t> encode_grid(const ValueGrid& grid);
std::variant<Mask, ValueGrid> decode_grid(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Dataset manifests

struct SamplePaths {
  std::string field;
  std::string mask;
};

struct DatasetManifest {
  std::filesystem::path base_dir;  // directory the sample paths are relative to
  int height = 0;
  int width = 0;
  double mean = 0.0;
  double std = 1.0;
  std::vector<SamplePaths> samples;
};

/// Observed field and its mask, standardized with the manifest statistics.
struct Sample {
  Field observed;
  Mask mask;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

std::vector<Mask> load_masks(const DatasetManifest& manifest);
std::vector<Sample> load_samples(const DatasetManifest& manifest);
Mask land_mask(const DatasetManifest& manifest);

/// Mean and population standard deviation over the valid pixels of `fields`.
std::pair<double, double> valid_pixel_stats(std::span<const Field> fields);
Field standardize(const Field& field, double mean, double std);

}  // namespace oamp

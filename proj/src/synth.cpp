#include "oamp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "oamp/errors.hpp"
#include "oamp/rng.hpp"

namespace oamp {

void SynthConfig::validate() const {
  if (height < 1 || width < 1) throw ConfigError("synth: grid dimensions must be positive");
  if (!(corr_length >= 1.0)) throw ConfigError("synth: corr_length must be >= 1");
  if (style != "blobs" && style != "swaths" && style != "mixed") {
    throw ConfigError("synth: unknown occlusion style '" + style + "'");
  }
  if (!(coverage > 0.0 && coverage < 1.0)) throw ConfigError("synth: coverage must lie in (0, 1)");
  if (!(land_fraction >= 0.0 && land_fraction < 1.0)) {
    throw ConfigError("synth: land_fraction must lie in [0, 1)");
  }
  if (samples < 1) throw ConfigError("synth: samples must be >= 1");
}

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<double> white_noise(int n, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = standard_normal(rng);
  return v;
}

// Pixels not on land, ordered by descending score (index breaks ties).
std::vector<std::size_t> rank_free(std::span<const double> score, const Mask& land) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (!land[i]) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return idx;
}

Mask top_k(const SynthConfig& cfg, std::span<const std::size_t> ranked, std::size_t k) {
  Mask m = Mask::zeros(cfg.height, cfg.width);
  for (std::size_t j = 0; j < k; ++j) m.set(ranked[j], 1);
  return m;
}

std::vector<double> blob_score(const SynthConfig& cfg, Rng& rng) {
  const double sigma = std::max(2.0, 0.1 * std::min(cfg.height, cfg.width));
  return gaussian_blur(white_noise(cfg.height * cfg.width, rng), cfg.height, cfg.width, sigma);
}

// Sawtooth along a random near-diagonal direction; low values form the stripes.
std::vector<double> swath_score(const SynthConfig& cfg, Rng& rng) {
  const double angle = std::numbers::pi / 4.0 * (uniform01(rng) < 0.5 ? 1.0 : 3.0) +
                       (uniform01(rng) - 0.5) * std::numbers::pi / 6.0;
  const double period = std::max(4.0, std::min(cfg.height, cfg.width) * (0.25 + 0.35 * uniform01(rng)));
  const double phase = uniform01(rng) * period;
  const double c = std::cos(angle), s = std::sin(angle);
  std::vector<double> score(static_cast<std::size_t>(cfg.height) * cfg.width);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const double u = x * c + y * s + phase;
      const double frac = u / period - std::floor(u / period);
      score[static_cast<std::size_t>(y) * cfg.width + x] = -frac;
    }
  }
  return score;
}

}  // namespace

std::vector<double> gaussian_blur(std::span<const double> values, int height, int width,
                                  double sigma) {
  if (values.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("gaussian_blur: size mismatch");
  }
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(values.size(), 0.0), out(values.size(), 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) acc += k[j + r] * values[y * width + reflect(x + j, width)];
      tmp[y * width + x] = acc;
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) acc += k[j + r] * tmp[reflect(y + j, height) * width + x];
      out[y * width + x] = acc;
    }
  }
  return out;
}

Field gen_field(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed, "synth-field");
  auto v = gaussian_blur(white_noise(cfg.height * cfg.width, rng), cfg.height, cfg.width,
                         cfg.corr_length);
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double& x : v) {
    x -= mean;
    var += x * x;
  }
  const double sd = std::sqrt(var / n);
  if (!(sd > 0.0)) throw NumericalError("gen_field: constant field");
  for (double& x : v) x /= sd;
  return Field(cfg.height, cfg.width, std::move(v));
}

Mask gen_land(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = static_cast<std::size_t>(cfg.height) * cfg.width;
  const auto k = static_cast<std::size_t>(std::llround(cfg.land_fraction * static_cast<double>(n)));
  if (k == 0) return Mask::zeros(cfg.height, cfg.width);
  Rng rng = make_rng(cfg.seed, "synth-land");
  const double sigma = std::max(2.0, 0.2 * std::min(cfg.height, cfg.width));
  const auto score = gaussian_blur(white_noise(static_cast<int>(n), rng), cfg.height, cfg.width, sigma);
  const Mask none = Mask::zeros(cfg.height, cfg.width);
  return top_k(cfg, rank_free(score, none), k);
}

Mask gen_occlusion(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Mask land = gen_land(cfg);
  const std::size_t n = land.size();
  const std::size_t free = n - land.count();
  const auto k = static_cast<std::size_t>(std::llround(cfg.coverage * static_cast<double>(n)));
  if (k == 0 || k > free) {
    throw ConfigError("synth: coverage " + std::to_string(cfg.coverage) +
                      " unachievable with land fraction " + std::to_string(cfg.land_fraction));
  }
  Rng rng = make_rng(seed, "synth-occlusion");
  if (cfg.style == "blobs") return top_k(cfg, rank_free(blob_score(cfg, rng), land), k);
  if (cfg.style == "swaths") return top_k(cfg, rank_free(swath_score(cfg, rng), land), k);

  // mixed: a swath pass wide enough for the target, then blobs inside it
  const auto swath = swath_score(cfg, rng);
  const auto blobs = blob_score(cfg, rng);
  const auto k_swath = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(std::sqrt(cfg.coverage) * static_cast<double>(n))), k,
      free);
  const Mask in_swath = top_k(cfg, rank_free(swath, land), k_swath);
  return top_k(cfg, rank_free(blobs, complement(in_swath)), k);
}

std::uint64_t sample_seed(const SynthConfig& cfg, std::size_t index) {
  return derive_seed(cfg.seed, "synth-sample", index);
}

namespace {

std::string grid_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu.grd", index);
  return buf;
}

}  // namespace

DatasetManifest gen_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  manifest.height = cfg.height;
  manifest.width = cfg.width;
  std::vector<Field> observed;
  observed.reserve(static_cast<std::size_t>(cfg.samples));
  for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.samples); ++i) {
    const std::uint64_t s = sample_seed(cfg, i);
    const Field full = gen_field(cfg, s);
    const Mask mask = gen_occlusion(cfg, s);
    Field obs = full.masked(mask);
    const std::string name = grid_name(i);
    save_grid(out_dir / "fields" / name, obs);
    save_grid(out_dir / "masks" / name, mask);
    save_grid(out_dir / "oracle" / name, full);
    manifest.samples.push_back({"fields/" + name, "masks/" + name});
    observed.push_back(std::move(obs));
  }
  const auto [mean, sd] = valid_pixel_stats(observed);
  manifest.mean = mean;
  manifest.std = sd;
  save_manifest(out_dir / "manifest.json", manifest);
  return manifest;
}

std::filesystem::path oracle_path(const DatasetManifest& manifest, std::size_t index) {
  if (index >= manifest.samples.size()) throw ValidationError("oracle_path: index out of range");
  return manifest.base_dir / "oracle" / std::filesystem::path(manifest.samples[index].field).filename();
}

Field load_oracle(const DatasetManifest& manifest, std::size_t index) {
  const ValueGrid g = load_values(oracle_path(manifest, index));
  if (g.height != manifest.height || g.width != manifest.width) {
    throw DimensionError("oracle grid shape differs from manifest");
  }
  return standardize(Field(g.height, g.width, g.values), manifest.mean, manifest.std);
}

}  // namespace oamp

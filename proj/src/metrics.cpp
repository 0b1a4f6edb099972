#include "oamp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oamp/errors.hpp"
#include "oamp/io.hpp"
#include "oamp/rng.hpp"

namespace oamp {

double masked_mse(const Field& pred, const Field& truth, const Mask& region) {
  if (pred.height() != region.height() || pred.width() != region.width() ||
      truth.height() != region.height() || truth.width() != region.width()) {
    throw DimensionError("masked_mse: shape mismatch");
  }
  const std::size_t n = region.count();
  if (n == 0) throw ValidationError("masked_mse: empty region");
  double sum = 0.0;
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (!region[i]) continue;
    const double d = pred[i] - truth[i];
    sum += d * d;
  }
  return sum / static_cast<double>(n);
}

double psnr(double mse, double peak) {
  if (!(mse >= 0.0) || !std::isfinite(mse)) throw ValidationError("psnr: mse must be finite and >= 0");
  if (!(peak > 0.0) || !std::isfinite(peak)) throw ValidationError("psnr: peak must be positive");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

std::vector<double> fill_missing_with_mean(const Field& f) {
  const Mask& valid = f.validity();
  const std::size_t n = valid.count();
  double mean = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (valid[i]) mean += f[i];
  }
  if (n > 0) mean /= static_cast<double>(n);
  std::vector<double> out(f.values().begin(), f.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!valid[i]) out[i] = mean;
  }
  return out;
}

std::vector<double> sobel_magnitude(const Field& f) {
  const int h = f.height(), w = f.width();
  if (h < 3 || w < 3) throw DimensionError("sobel_magnitude: grid must be at least 3x3");
  const auto v = fill_missing_with_mean(f);
  auto at = [&](int y, int x) {
    y = std::clamp(y, 0, h - 1);
    x = std::clamp(x, 0, w - 1);
    return v[static_cast<std::size_t>(y) * w + x];
  };
  std::vector<double> out(v.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
      const double gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
      out[static_cast<std::size_t>(y) * w + x] = std::hypot(gx, gy);
    }
  }
  return out;
}

namespace {

// Pixels of `a` with an 8-neighbour in `b`.
Mask adjacent_to(const Mask& a, const Mask& b) {
  const int h = a.height(), w = a.width();
  Mask out = Mask::zeros(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!a(y, x)) continue;
      bool hit = false;
      for (int dy = -1; dy <= 1 && !hit; ++dy) {
        for (int dx = -1; dx <= 1 && !hit; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w && b(yy, xx)) hit = true;
        }
      }
      if (hit) out.set(y, x, true);
    }
  }
  return out;
}

double band_mean(std::span<const double> mag, const Mask& band) {
  double s = 0.0;
  for (std::size_t i = 0; i < band.size(); ++i) {
    if (band[i]) s += mag[i];
  }
  return s / static_cast<double>(band.count());
}

}  // namespace

BoundaryBands boundary_bands(const Mask& ctx, const Mask& gen_region) {
  require_same_shape(ctx, gen_region, "boundary_bands");
  return {adjacent_to(gen_region, ctx), adjacent_to(ctx, gen_region)};
}

double cbgd(const Field& recon, const Mask& ctx, const Mask& gen_region) {
  require_same_shape(recon.validity(), ctx, "cbgd");
  const BoundaryBands bands = boundary_bands(ctx, gen_region);
  if (bands.generated.count() == 0 || bands.context.count() == 0) {
    throw UndefinedMetricError("cbgd: empty boundary band");
  }
  const auto mag = sobel_magnitude(recon);
  const double denom = band_mean(mag, bands.context);
  if (denom < 1e-8) throw UndefinedMetricError("cbgd: vanishing gradient on the context band");
  return band_mean(mag, bands.generated) / denom;
}

EvalCase make_eval_case(const Mask& eval_mask, const Mask& overlay) {
  require_same_shape(eval_mask, overlay, "make_eval_case");
  EvalCase c{eval_mask, overlay, intersect(overlay, eval_mask), {}};
  c.eval_region = subtract(eval_mask, c.input_mask);
  return c;
}

EvalCase build_eval_case(const Mask& eval_mask, std::span<const Mask> pool, std::uint64_t seed) {
  if (pool.empty()) throw ValidationError("build_eval_case: empty overlay pool");
  Rng rng = make_rng(seed, "eval-overlay");
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int attempt = 0; attempt < 100; ++attempt) {
    EvalCase c = make_eval_case(eval_mask, pool[pick(rng)]);
    if (c.input_mask.count() > 0 && c.eval_region.count() > 0) return c;
  }
  throw ValidationError("build_eval_case: no usable overlay after 100 draws");
}

double QueryProbGrid::min_valid() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (valid[i]) m = std::min(m, values[i]);
  }
  return m;
}

double QueryProbGrid::mean_valid() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (valid[i]) s += values[i];
  }
  return s / static_cast<double>(valid.count());
}

QueryProbGrid query_prob_heatmap(const Mask& observed, const PartitionGenerator& generator,
                                 int n_ens, std::uint64_t seed) {
  if (n_ens < 1) throw ValidationError("query_prob_heatmap: n_ens must be >= 1");
  QueryProbGrid g{observed.height(), observed.width(), n_ens, observed,
                  std::vector<int>(observed.size(), 0), {}};
  for (int k = 0; k < n_ens; ++k) {
    const Partition p = generator(derive_seed(seed, "ensemble", static_cast<std::uint64_t>(k)));
    require_same_shape(p.qry, observed, "query_prob_heatmap");
    for (std::size_t i = 0; i < observed.size(); ++i) {
      if (observed[i] && p.qry[i]) ++g.counts[i];
    }
  }
  g.values.assign(observed.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i]) g.values[i] = static_cast<double>(g.counts[i]) / n_ens;
  }
  return g;
}

void write_pgm(const std::filesystem::path& path, int height, int width,
               std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("write_pgm: size mismatch");
  }
  std::ostringstream out;
  out << "P2\n" << width << ' ' << height << "\n255\n";
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double v = values[static_cast<std::size_t>(y) * width + x];
      const int q = std::isfinite(v) ? static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) : 0;
      out << q << (x + 1 < width ? ' ' : '\n');
    }
  }
  io::write_atomic(path, out.str());
}

void write_heatmap(const std::filesystem::path& pgm_path, const std::filesystem::path& grd_path,
                   const QueryProbGrid& grid) {
  write_pgm(pgm_path, grid.height, grid.width, grid.values);
  std::vector<double> v(grid.values);
  for (double& x : v) {
    if (!std::isfinite(x)) x = 0.0;
  }
  save_grid(grd_path, Field(std::move(v), grid.valid));
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "sample_id,mse,psnr,cbgd,n_eval_pixels\n";
  for (const auto& r : rows) {
    out << r.sample_id << ',' << r.mse << ',' << r.psnr << ',';
    if (std::isnan(r.cbgd)) {
      out << "nan";
    } else {
      out << r.cbgd;
    }
    out << ',' << r.n_eval_pixels << '\n';
  }
  io::write_atomic(path, out.str());
}

}  // namespace oamp

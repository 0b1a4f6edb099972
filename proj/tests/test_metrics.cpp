#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "oamp/errors.hpp"
#include "oamp/io.hpp"
#include "oamp/metrics.hpp"
#include "support.hpp"

using namespace oamp;

namespace {

Field ramp(int h, int w, double ax, double ay, double c = 0.0) {
  std::vector<double> v(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) v[static_cast<std::size_t>(y) * w + x] = ax * x + ay * y + c;
  }
  return Field(h, w, std::move(v));
}

// Random disjoint ctx / generated regions that avoid the outer ring.
std::pair<Mask, Mask> interior_split(int h, int w, Rng& rng) {
  Mask ctx = Mask::zeros(h, w), gen = Mask::zeros(h, w);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const double u = uniform01(rng);
      if (u < 0.45) {
        ctx.set(y, x, true);
      } else if (u < 0.9) {
        gen.set(y, x, true);
      }
    }
  }
  return {ctx, gen};
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("masked mse") {
    const Field truth(1, 3, {1.0, 2.0, 3.0});
    CHECK(masked_mse(truth, truth, Mask::ones(1, 3)) == 0.0);
    CHECK(masked_mse(Field(1, 3, {1.5, 2.0, 3.0}), truth, test::mask_of(1, 3, {1, 0, 0})) == 0.25);
    CHECK(masked_mse(Field(1, 3, {2.0, 1.0, 9.0}), truth, test::mask_of(1, 3, {1, 1, 0})) == 1.0);
    CHECK_THROWS_AS(masked_mse(truth, truth, Mask::zeros(1, 3)), ValidationError);
    CHECK_THROWS_AS(masked_mse(truth, truth, Mask::ones(1, 2)), DimensionError);
  }

  TEST_CASE("psnr") {
    CHECK(psnr(0.01, 1.0) == 20.0);
    CHECK(psnr(0.04, 2.0) == 20.0);
    CHECK(psnr(1.0, 10.0) == 20.0);
    CHECK(psnr(0.0, 1.0) == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(psnr(-1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(psnr(0.1, 0.0), ValidationError);
    CHECK_THROWS_AS(psnr(NAN, 1.0), ValidationError);
    double prev = psnr(1e-6, 3.0);
    for (int k = 1; k < 200; ++k) {
      const double cur = psnr(1e-6 * std::pow(1.1, k), 3.0);
      CHECK(cur < prev);
      prev = cur;
    }
  }

  TEST_CASE("sobel") {
    for (double v : sobel_magnitude(ramp(5, 6, 0.0, 0.0, 2.5))) CHECK(v == 0.0);
    const auto hx = sobel_magnitude(ramp(5, 6, 1.0, 0.0));
    const auto hy = sobel_magnitude(ramp(6, 5, 0.0, 1.0));
    for (int y = 1; y < 4; ++y) {
      for (int x = 1; x < 5; ++x) {
        CHECK(hx[y * 6 + x] == 8.0);
        CHECK(hy[x * 5 + y] == 8.0);
      }
    }
    // replicate padding halves the difference at the border
    CHECK(hx[0] == 4.0);
    CHECK_THROWS_AS(sobel_magnitude(Field(2, 5, std::vector<double>(10, 0.0))), DimensionError);

    // missing pixels take the observed mean
    const Field part({1.0, 3.0, 0.0, 5.0}, test::mask_of(2, 2, {1, 1, 0, 1}));
    CHECK(fill_missing_with_mean(part) == std::vector<double>{1.0, 3.0, 3.0, 5.0});
  }

  TEST_CASE("boundary bands") {
    const Mask ctx = test::mask_of(1, 4, {1, 1, 0, 0});
    const Mask gen = test::mask_of(1, 4, {0, 0, 1, 1});
    const auto b = boundary_bands(ctx, gen);
    CHECK(b.context == test::mask_of(1, 4, {0, 1, 0, 0}));
    CHECK(b.generated == test::mask_of(1, 4, {0, 0, 1, 0}));
    // diagonal neighbours count
    const auto d = boundary_bands(test::mask_of(2, 2, {1, 0, 0, 0}), test::mask_of(2, 2, {0, 0, 0, 1}));
    CHECK(d.context.count() == 1);
    CHECK(d.generated.count() == 1);
  }

  TEST_CASE("cbgd on a linear ramp is one") {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      const auto [ctx, gen] = interior_split(12, 10, rng);
      const Field f = ramp(12, 10, standard_normal(rng), standard_normal(rng), standard_normal(rng));
      CHECK(std::abs(cbgd(f, ctx, gen) - 1.0) <= 1e-9);
    }
    // a straight cut through the whole frame keeps the border mix equal on both sides
    Mask top = Mask::zeros(8, 8), bottom = Mask::zeros(8, 8);
    for (int i = 0; i < 64; ++i) (i < 24 ? top : bottom).set(static_cast<std::size_t>(i), true);
    CHECK(std::abs(cbgd(ramp(8, 8, 0.7, -1.3), top, bottom) - 1.0) <= 1e-9);
  }

  TEST_CASE("cbgd ignores a global offset") {
    Rng rng(2);
    const auto [ctx, gen] = interior_split(9, 9, rng);
    std::vector<double> v(81);
    for (double& x : v) x = std::floor(10 * standard_normal(rng));
    const Field f(9, 9, v);
    for (double& x : v) x += 3.0;
    CHECK(cbgd(Field(9, 9, v), ctx, gen) == cbgd(f, ctx, gen));
  }

  TEST_CASE("cbgd reacts to a seam and is undefined without gradients") {
    const int h = 6, w = 10;
    Mask ctx = Mask::zeros(h, w), gen = Mask::zeros(h, w);
    std::vector<double> v(h * w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        (x < 5 ? ctx : gen).set(y, x, true);
        v[y * w + x] = x < 6 ? 0.01 * x : 10.0;
      }
    }
    CHECK(cbgd(Field(h, w, v), ctx, gen) > 100.0);
    CHECK_THROWS_AS(cbgd(ramp(h, w, 0.0, 0.0, 1.0), ctx, gen), UndefinedMetricError);
    CHECK_THROWS_AS(cbgd(ramp(h, w, 1.0, 0.0), Mask::ones(h, w), Mask::zeros(h, w)), UndefinedMetricError);
  }

  TEST_CASE("evaluation cases") {
    const auto c = make_eval_case(test::mask_of(1, 4, {1, 1, 1, 0}), test::mask_of(1, 4, {1, 0, 1, 1}));
    CHECK(c.input_mask == test::mask_of(1, 4, {1, 0, 1, 0}));
    CHECK(c.eval_region == test::mask_of(1, 4, {0, 1, 0, 0}));

    const Mask eval = test::mask_of(1, 4, {1, 1, 0, 0});
    // all-ones leaves nothing to evaluate, the complement leaves no input
    const std::vector<Mask> bad = {Mask::ones(1, 4), complement(eval)};
    CHECK_THROWS_AS(build_eval_case(eval, bad, 1), ValidationError);
    std::vector<Mask> pool = bad;
    pool.push_back(test::mask_of(1, 4, {1, 0, 0, 1}));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto e = build_eval_case(eval, pool, seed);
      CHECK(e.overlay == pool[2]);
      CHECK(unite(e.input_mask, e.eval_region) == eval);
      CHECK(intersect(e.input_mask, e.eval_region).count() == 0);
    }
  }

  TEST_CASE("query probability heatmap") {
    Rng rng(3);
    const Mask m = test::random_mask(6, 7, 0.6, rng);
    const auto all = query_prob_heatmap(m, [&](std::uint64_t) { return make_partition(m, Mask::zeros(6, 7)); }, 5, 1);
    CHECK(all.min_valid() == 1.0);
    CHECK(all.mean_valid() == 1.0);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK((m[i] ? !std::isnan(all.values[i]) : std::isnan(all.values[i])));

    const auto gen = [&](std::uint64_t seed) {
      Rng r(seed);
      return make_partition(m, test::random_mask(6, 7, 0.5, r));
    };
    const auto g = query_prob_heatmap(m, gen, 13, 2);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i]) continue;
      CHECK(g.values[i] == static_cast<double>(g.counts[i]) / 13.0);
      CHECK(g.values[i] >= 0.0);
      CHECK(g.values[i] <= 1.0);
    }
    const auto fixed = query_prob_heatmap(m, [&](std::uint64_t) { return gen(99); }, 4, 2);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i]) CHECK((fixed.values[i] == 0.0 || fixed.values[i] == 1.0));
    }
    CHECK_THROWS_AS(query_prob_heatmap(m, gen, 0, 2), ValidationError);
  }

  TEST_CASE("output files") {
    const auto dir = test::scratch_dir("metrics");
    write_pgm(dir / "a.pgm", 2, 2, std::vector<double>{0.0, 1.0, 0.5, NAN});
    CHECK(io::read_text(dir / "a.pgm") == "P2\n2 2\n255\n0 255\n128 0\n");

    QueryProbGrid g{1, 2, 2, test::mask_of(1, 2, {1, 0}), {1, 0}, {0.5, NAN}};
    write_heatmap(dir / "h.pgm", dir / "h.grd", g);
    const auto back = load_values(dir / "h.grd");
    CHECK(back.values == std::vector<double>{0.5, 0.0});

    const std::vector<MetricRow> rows = {{"0001", 0.0, std::numeric_limits<double>::infinity(), NAN, 12},
                                         {"0002", 0.25, 6.0, 1.5, 3}};
    write_metrics_csv(dir / "m.csv", rows);
    std::istringstream csv(io::read_text(dir / "m.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "sample_id,mse,psnr,cbgd,n_eval_pixels");
    std::getline(csv, line);
    CHECK(line == "0001,0,inf,nan,12");
    std::getline(csv, line);
    CHECK(line == "0002,0.25,6,1.5,3");
  }
}

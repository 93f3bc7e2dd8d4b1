#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "depthopt/metrics.h"

using namespace depthopt;

namespace {

DepthMap random_map(std::mt19937_64& rng, int h, int w, double lo = 0.5,
                    double hi = 8.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  DepthMap d(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) d.d(r, c) = u(rng);
  return d;
}

// Naive reference: explicit loops, two passes where needed.
MetricReport naive_evaluate(const DepthMap& pred, const DepthMap& gt,
                            bool scale_flag) {
  std::vector<double> ratios;
  for (int r = 0; r < pred.rows(); ++r)
    for (int c = 0; c < pred.cols(); ++c)
      if (pred.valid(r, c) && gt.valid(r, c) && pred.d(r, c) > 0 && gt.d(r, c) > 0)
        ratios.push_back(gt.d(r, c) / pred.d(r, c));
  std::sort(ratios.begin(), ratios.end());
  size_t n = ratios.size();
  double s = 1.0;
  if (scale_flag)
    s = (n % 2) ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);

  MetricReport rep;
  rep.scale = s;
  double se = 0, ar = 0, sr = 0, lr = 0, lr2 = 0;
  long cnt = 0, acc1 = 0, acc2 = 0, acc3 = 0;
  for (int r = 0; r < pred.rows(); ++r)
    for (int c = 0; c < pred.cols(); ++c) {
      if (!(pred.valid(r, c) && gt.valid(r, c) && gt.d(r, c) > 0)) continue;
      double d = s * pred.d(r, c);
      if (d <= 0) {
        ++rep.n_nonpositive;
        continue;
      }
      double g = gt.d(r, c);
      ++cnt;
      se += (d - g) * (d - g);
      ar += std::abs(d - g) / g;
      sr += (d - g) * (d - g) / g;
      double lg = std::log(d) - std::log(g);
      lr += lg;
      lr2 += lg * lg;
      double ratio = std::max(d / g, g / d);
      if (ratio < 1.25) ++acc1;
      if (ratio < 1.25 * 1.25) ++acc2;
      if (ratio < 1.25 * 1.25 * 1.25) ++acc3;
    }
  rep.n_pixels = cnt;
  rep.rmse = std::sqrt(se / cnt);
  rep.abs_rel = ar / cnt;
  rep.sq_rel = sr / cnt;
  double ml = lr / cnt;
  rep.si_rmse = std::sqrt(std::max(0.0, lr2 / cnt - ml * ml));
  rep.delta_acc[0] = double(acc1) / cnt;
  rep.delta_acc[1] = double(acc2) / cnt;
  rep.delta_acc[2] = double(acc3) / cnt;
  return rep;
}

}  // namespace

TEST_CASE("median scale basics") {
  std::mt19937_64 rng(3);
  DepthMap gt = random_map(rng, 6, 8);
  CHECK(median_scale(gt, gt) == doctest::Approx(1.0).epsilon(1e-12));
  DepthMap pred = gt;
  pred.d = 2.0 * gt.d;
  CHECK(median_scale(pred, gt) == doctest::Approx(0.5).epsilon(1e-12));
  // s * pred equals gt exactly after scaling.
  CHECK((0.5 * pred.d - gt.d).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("median scale matches a sort-based oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    DepthMap pred = random_map(rng, 7, 9);
    DepthMap gt = random_map(rng, 7, 9);
    std::vector<double> ratios;
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 9; ++c) ratios.push_back(gt.d(r, c) / pred.d(r, c));
    std::sort(ratios.begin(), ratios.end());
    size_t n = ratios.size();
    double oracle = (n % 2) ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
    CHECK(median_scale(pred, gt) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("perfect prediction: zero errors, full accuracy") {
  std::mt19937_64 rng(7);
  DepthMap gt = random_map(rng, 10, 10);
  MetricReport rep = evaluate(gt, gt, false);
  CHECK(rep.rmse <= 1e-12);
  CHECK(rep.abs_rel <= 1e-12);
  CHECK(rep.sq_rel <= 1e-12);
  CHECK(rep.si_rmse <= 1e-7);
  CHECK(rep.delta_acc[0] == 1.0);
  CHECK(rep.delta_acc[2] == 1.0);
}

TEST_CASE("doubled prediction without scaling") {
  std::mt19937_64 rng(11);
  DepthMap gt = random_map(rng, 10, 10);
  DepthMap pred = gt;
  pred.d = 2.0 * gt.d;
  MetricReport rep = evaluate(pred, gt, false);
  CHECK(rep.abs_rel == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.delta_acc[0] == 0.0);  // ratio 2 >= 1.25
  CHECK(rep.si_rmse <= 1e-10);     // constant log offset
}

TEST_CASE("evaluate matches the naive reference on random maps") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    DepthMap pred = random_map(rng, 12, 14);
    DepthMap gt = random_map(rng, 12, 14);
    // Punch some invalid pixels.
    pred.valid(1, 1) = false;
    gt.valid(3, 4) = false;
    for (bool flag : {false, true}) {
      MetricReport a = evaluate(pred, gt, flag);
      MetricReport b = naive_evaluate(pred, gt, flag);
      CHECK(std::abs(a.rmse - b.rmse) <= 1e-10);
      CHECK(std::abs(a.abs_rel - b.abs_rel) <= 1e-10);
      CHECK(std::abs(a.sq_rel - b.sq_rel) <= 1e-10);
      CHECK(std::abs(a.si_rmse - b.si_rmse) <= 1e-10);
      for (int k = 0; k < 3; ++k)
        CHECK(std::abs(a.delta_acc[k] - b.delta_acc[k]) <= 1e-12);
      CHECK(a.n_pixels == b.n_pixels);
      CHECK(std::abs(a.scale - b.scale) <= 1e-12);
    }
  }
}

TEST_CASE("si_rmse is scale invariant") {
  std::mt19937_64 rng(17);
  DepthMap pred = random_map(rng, 9, 9);
  DepthMap gt = random_map(rng, 9, 9);
  double base = evaluate(pred, gt, false).si_rmse;
  for (double c : {0.1, 3.0, 42.0}) {
    DepthMap scaled = pred;
    scaled.d = c * pred.d;
    CHECK(std::abs(evaluate(scaled, gt, false).si_rmse - base) <= 1e-10);
  }
}

TEST_CASE("median scaling recovers scaled ground truth exactly") {
  std::mt19937_64 rng(19);
  DepthMap gt = random_map(rng, 8, 8);
  for (double c : {0.1, 1.0, 7.0}) {
    DepthMap pred = gt;
    pred.d = c * gt.d;
    MetricReport rep = evaluate(pred, gt, true);
    CHECK(rep.rmse <= 1e-9);
    CHECK(rep.abs_rel <= 1e-10);
    CHECK(rep.delta_acc[0] == 1.0);
  }
}

TEST_CASE("non-positive predictions are excluded and counted") {
  DepthMap gt(2, 2);
  gt.d.setConstant(3.0);
  DepthMap pred = gt;
  pred.d(0, 0) = -1.0;
  MetricReport rep = evaluate(pred, gt, false);
  CHECK(rep.n_nonpositive == 1);
  CHECK(rep.n_pixels == 3);
  CHECK(rep.rmse <= 1e-12);
}

TEST_CASE("delta accuracies are monotone") {
  std::mt19937_64 rng(23);
  DepthMap pred = random_map(rng, 15, 15);
  DepthMap gt = random_map(rng, 15, 15);
  MetricReport rep = evaluate(pred, gt, false);
  CHECK(rep.delta_acc[0] <= rep.delta_acc[1]);
  CHECK(rep.delta_acc[1] <= rep.delta_acc[2]);
}

TEST_CASE("empty overlap raises") {
  DepthMap a(2, 2), b(2, 2);
  a.valid.setConstant(false);
  CHECK_THROWS_AS(evaluate(a, b, false), std::invalid_argument);
  CHECK_THROWS_AS(median_scale(a, b), std::invalid_argument);
}

TEST_CASE("mean report averages per frame") {
  MetricReport a, b;
  a.rmse = 1.0;
  a.abs_rel = 0.2;
  a.delta_acc[0] = 0.8;
  a.n_pixels = 100;
  b.rmse = 3.0;
  b.abs_rel = 0.4;
  b.delta_acc[0] = 0.6;
  b.n_pixels = 300;  // pixel pooling would weight this frame 3x
  MetricReport m = mean_report({a, b});
  CHECK(m.rmse == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.abs_rel == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(m.delta_acc[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(m.n_pixels == 400);
}

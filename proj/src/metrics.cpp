#include "depthopt/metrics.h"

#include <cmath>

#include "depthopt/masking.h"

namespace depthopt {

double median_scale(const DepthMap& d_pred, const DepthMap& d_gt) {
  require(d_pred.rows() == d_gt.rows() && d_pred.cols() == d_gt.cols(),
          "median_scale: shape mismatch");
  std::vector<double> ratios;
  for (int r = 0; r < d_pred.rows(); ++r)
    for (int c = 0; c < d_pred.cols(); ++c)
      if (d_pred.valid(r, c) && d_gt.valid(r, c) && d_pred.d(r, c) > 0.0 &&
          d_gt.d(r, c) > 0.0)
        ratios.push_back(d_gt.d(r, c) / d_pred.d(r, c));
  require(!ratios.empty(), "median_scale: empty valid overlap");
  return median_of(std::move(ratios));
}

MetricReport evaluate(const DepthMap& d_pred, const DepthMap& d_gt,
                      bool apply_median_scale) {
  require(d_pred.rows() == d_gt.rows() && d_pred.cols() == d_gt.cols(),
          "evaluate: shape mismatch");
  MetricReport rep;
  rep.scale = apply_median_scale ? median_scale(d_pred, d_gt) : 1.0;

  double se = 0.0, abs_rel = 0.0, sq_rel = 0.0, log_sum = 0.0, log_sq = 0.0;
  long acc[3] = {0, 0, 0};
  const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;
  long n = 0;
  for (int r = 0; r < d_pred.rows(); ++r) {
    for (int c = 0; c < d_pred.cols(); ++c) {
      if (!d_pred.valid(r, c) || !d_gt.valid(r, c)) continue;
      const double g = d_gt.d(r, c);
      if (g <= 0.0) continue;
      const double d = rep.scale * d_pred.d(r, c);
      if (d <= 0.0) {
        ++rep.n_nonpositive;
        continue;
      }
      const double e = d - g;
      se += e * e;
      abs_rel += std::abs(e) / g;
      sq_rel += e * e / g;
      const double lr = std::log(d) - std::log(g);
      log_sum += lr;
      log_sq += lr * lr;
      const double ratio = std::max(d / g, g / d);
      if (ratio < t1) ++acc[0];
      if (ratio < t2) ++acc[1];
      if (ratio < t3) ++acc[2];
      ++n;
    }
  }
  require(n >= 1, "evaluate: empty valid overlap");
  rep.n_pixels = n;
  rep.rmse = std::sqrt(se / double(n));
  rep.abs_rel = abs_rel / double(n);
  rep.sq_rel = sq_rel / double(n);
  const double mean_log = log_sum / double(n);
  rep.si_rmse = std::sqrt(std::max(0.0, log_sq / double(n) - mean_log * mean_log));
  for (int k = 0; k < 3; ++k) rep.delta_acc[k] = double(acc[k]) / double(n);
  return rep;
}

MetricReport mean_report(const std::vector<MetricReport>& frames) {
  require(!frames.empty(), "mean_report: no frames");
  MetricReport m;
  for (const MetricReport& f : frames) {
    m.rmse += f.rmse;
    m.abs_rel += f.abs_rel;
    m.sq_rel += f.sq_rel;
    m.si_rmse += f.si_rmse;
    for (int k = 0; k < 3; ++k) m.delta_acc[k] += f.delta_acc[k];
    m.n_pixels += f.n_pixels;
    m.n_nonpositive += f.n_nonpositive;
  }
  const double n = double(frames.size());
  m.rmse /= n;
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.si_rmse /= n;
  for (int k = 0; k < 3; ++k) m.delta_acc[k] /= n;
  m.scale = 1.0;
  return m;
}

}  // namespace depthopt

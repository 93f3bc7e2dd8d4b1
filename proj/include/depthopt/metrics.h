#pragma once

#include <vector>

#include "depthopt/types.h"

namespace depthopt {

struct MetricReport {
  double rmse = 0.0;
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double si_rmse = 0.0;
  double delta_acc[3] = {0.0, 0.0, 0.0};  // thresholds 1.25, 1.25^2, 1.25^3
  double scale = 1.0;                      // applied median scale
  long n_pixels = 0;
  long n_nonpositive = 0;  // predicted pixels excluded from ratio metrics
};

// s = Median(D_gt / D_pred) over the valid, strictly positive overlap.
double median_scale(const DepthMap& d_pred, const DepthMap& d_gt);

// Standard depth metrics; si_rmse is the variance-of-log-ratio form
// sqrt(mean r^2 - (mean r)^2), r = log d - log g, insensitive to global
// scale. Non-positive predictions are excluded and counted, never clamped.
MetricReport evaluate(const DepthMap& d_pred, const DepthMap& d_gt,
                      bool apply_median_scale);

// Per-frame metrics averaged (not pixel-pooled), matching mean-over-samples
// aggregation.
MetricReport mean_report(const std::vector<MetricReport>& frames);

}  // namespace depthopt

#include "depthopt/depth_codec.h"

#include <algorithm>

namespace depthopt {

TransformedDepth encode(const DepthMap& d, double alpha) {
  require(alpha > 0.0, "encode: alpha must be positive");
  TransformedDepth t;
  t.alpha = alpha;
  t.valid = d.valid;
  t.rho.resize(d.d.rows(), d.d.cols());
  for (Eigen::Index r = 0; r < d.d.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.d.cols(); ++c) {
      if (!d.valid(r, c)) {
        t.rho(r, c) = 1.0;
        continue;
      }
      require(d.d(r, c) >= 0.0, "encode: negative depth on valid pixel");
      t.rho(r, c) = std::clamp(alpha / (d.d(r, c) + alpha), kRhoMin, 1.0);
    }
  }
  return t;
}

DepthMap decode(const TransformedDepth& t) {
  DepthMap d;
  d.valid = t.valid;
  d.d.resize(t.rho.rows(), t.rho.cols());
  for (Eigen::Index r = 0; r < t.rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.rho.cols(); ++c) {
      const double rho = std::clamp(t.rho(r, c), kRhoMin, 1.0);
      d.d(r, c) = t.alpha * (1.0 - rho) / rho;
    }
  }
  return d;
}

double alpha_loss(const TransformedDepth& t) {
  double sum = 0.0;
  long n = 0;
  for (Eigen::Index r = 0; r < t.rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.rho.cols(); ++c) {
      if (!t.valid(r, c)) continue;
      const double rho = std::clamp(t.rho(r, c), kRhoMin, 1.0);
      sum += (1.0 - rho) / rho;
      ++n;
    }
  }
  require(n >= 1, "alpha_loss: no valid pixels");
  const double m = sum / double(n);
  return (1.0 - m) * (1.0 - m);
}

}  // namespace depthopt

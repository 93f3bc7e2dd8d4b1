#include "depthopt/losses.h"

#include <cmath>

namespace depthopt {

double huber(double e, double delta) {
  require(delta > 0.0, "huber: delta must be positive");
  const double a = std::abs(e);
  return a <= delta ? e * e / (2.0 * delta) : a - delta / 2.0;
}

double huber_grad(double e, double delta) {
  require(delta > 0.0, "huber: delta must be positive");
  if (std::abs(e) <= delta) return e / delta;
  return e > 0.0 ? 1.0 : -1.0;
}

Grid huber(const Grid& e, double delta) {
  Grid out(e.rows(), e.cols());
  for (Eigen::Index r = 0; r < e.rows(); ++r)
    for (Eigen::Index c = 0; c < e.cols(); ++c) out(r, c) = huber(e(r, c), delta);
  return out;
}

namespace {

// Kept-pixel sum of huber(residual), deterministic row-major order.
double masked_huber_sum(const Grid& residual, const BoolGrid& mask, double delta,
                        long* kept) {
  double sum = 0.0;
  long n = 0;
  for (Eigen::Index r = 0; r < residual.rows(); ++r) {
    for (Eigen::Index c = 0; c < residual.cols(); ++c) {
      if (!mask(r, c)) continue;
      sum += huber(residual(r, c), delta);
      ++n;
    }
  }
  if (kept) *kept = n;
  return sum;
}

}  // namespace

double photometric_loss(const Image& image_i,
                        const std::vector<NeighborTerm>& neighbors,
                        const LossWeights& w, std::vector<long>* pixels_used) {
  require(!neighbors.empty(), "photometric_loss: no neighbor views");
  require(image_i.num_channels() >= 1, "photometric_loss: empty reference image");

  // Channel-mean reference intensity; residuals are averaged over channels
  // before the Huber norm.
  Grid ref = image_i.channels[0];
  for (int ch = 1; ch < image_i.num_channels(); ++ch) ref += image_i.channels[ch];
  ref /= double(image_i.num_channels());

  double loss = 0.0;
  for (const NeighborTerm& nb : neighbors) {
    long kept = 0;
    const double s =
        masked_huber_sum(nb.i_j_sampled_mean - ref, nb.mask, w.huber_delta_photo, &kept);
    if (pixels_used) pixels_used->push_back(kept);
    if (kept == 0) continue;  // neighbor fully masked, contributes nothing
    loss += w.lambda_photo * (w.raw_sum ? s : s / double(kept));
  }
  return loss;
}

double depth_consistency_loss(const std::vector<NeighborTerm>& neighbors,
                              const LossWeights& w, std::vector<long>* pixels_used) {
  require(!neighbors.empty(), "depth_consistency_loss: no neighbor views");
  double loss = 0.0;
  for (const NeighborTerm& nb : neighbors) {
    require(nb.alpha_j > 0.0, "depth_consistency_loss: alpha_j must be positive");
    long kept = 0;
    const double s = masked_huber_sum((nb.d_j_sampled - nb.d_ij) / nb.alpha_j, nb.mask,
                                      w.huber_delta_depth, &kept);
    if (pixels_used) pixels_used->push_back(kept);
    if (kept == 0) continue;
    loss += w.lambda_depth * (w.raw_sum ? s : s / double(kept));
  }
  return loss;
}

double supervised_loss(const DepthMap& d, const DepthMap& d_gt,
                       const Eigen::VectorXd& z, double weights_norm,
                       double lambda1, double lambda2) {
  require(d.rows() == d_gt.rows() && d.cols() == d_gt.cols(),
          "supervised_loss: shape mismatch");
  require(lambda1 >= 0.0 && lambda2 >= 0.0, "supervised_loss: negative weights");
  double sum = 0.0;
  long n = 0;
  for (int r = 0; r < d.rows(); ++r) {
    for (int c = 0; c < d.cols(); ++c) {
      if (!d.valid(r, c) || !d_gt.valid(r, c)) continue;
      const double e = d.d(r, c) - d_gt.d(r, c);
      sum += e * e;
      ++n;
    }
  }
  require(n >= 1, "supervised_loss: no valid overlap");
  return sum + lambda1 * z.squaredNorm() + lambda2 * weights_norm * weights_norm;
}

LossBreakdown total_self_supervised(const std::vector<ViewLossInput>& views,
                                    double weights_norm, const LossWeights& w) {
  require(views.size() >= 2, "total_self_supervised: need a co-visible set of >= 2 views");
  LossBreakdown out;
  for (const ViewLossInput& v : views) {
    require(v.image && v.rho, "total_self_supervised: missing view data");
    out.photo += photometric_loss(*v.image, v.neighbors, w, &out.pixels_used);
    out.depth += depth_consistency_loss(v.neighbors, w);
    out.alpha += alpha_loss(*v.rho);
    out.z_reg += w.lambda_z * v.z.squaredNorm();
  }
  out.w_reg = w.lambda_w * weights_norm * weights_norm;
  out.total = out.photo + out.depth + out.alpha + out.z_reg + out.w_reg;
  return out;
}

}  // namespace depthopt

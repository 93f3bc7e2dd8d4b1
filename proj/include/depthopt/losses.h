#pragma once

#include <vector>

#include "depthopt/depth_codec.h"
#include "depthopt/geometry.h"
#include "depthopt/masking.h"
#include "depthopt/types.h"

namespace depthopt {

struct LossWeights {
  double lambda_photo = 100.0;
  double lambda_depth = 10.0;
  double lambda_z = 1e-4;
  double lambda_w = 1e-4;
  double huber_delta_photo = 0.1;
  double huber_delta_depth = 0.1;
  // The source formulation is a raw sum over pixels; by default each
  // neighbor term is divided by its kept-pixel count instead so the weights
  // keep their meaning as mask coverage varies.
  bool raw_sum = false;
};

struct LossBreakdown {
  double photo = 0.0;
  double depth = 0.0;
  double alpha = 0.0;
  double z_reg = 0.0;
  double w_reg = 0.0;
  double total = 0.0;
  std::vector<long> pixels_used;  // kept pixels per neighbor term, in order
};

// h(e) = e^2/(2*delta) for |e| <= delta, |e| - delta/2 otherwise. C1 at the knee.
double huber(double e, double delta);
// Derivative dh/de.
double huber_grad(double e, double delta);
Grid huber(const Grid& e, double delta);

// Neighbor data for the pairwise losses: everything sampled/warped into the
// reference view's pixel grid, with a frozen mask.
struct NeighborTerm {
  Grid i_j_sampled_mean;  // channel-mean of I_j resampled at q_ij (photo)
  Grid d_j_sampled;       // D_j resampled at q_ij (depth consistency)
  Grid d_ij;              // projected depth in camera j
  double alpha_j = 1.0;
  BoolGrid mask;          // combined keep mask
};

// lambda_p * sum_j huber(channel-mean intensity residual) over kept pixels,
// each neighbor normalized by its kept count unless raw_sum.
double photometric_loss(const Image& image_i,
                        const std::vector<NeighborTerm>& neighbors,
                        const LossWeights& w, std::vector<long>* pixels_used = nullptr);

// lambda_d * sum_j huber((D_j∘q_ij - D_ij)/alpha_j) over kept pixels.
double depth_consistency_loss(const std::vector<NeighborTerm>& neighbors,
                              const LossWeights& w,
                              std::vector<long>* pixels_used = nullptr);

// ||D - D_gt||^2 over the valid overlap + lambda1||z||^2 + lambda2*weights_norm^2.
double supervised_loss(const DepthMap& d, const DepthMap& d_gt,
                       const Eigen::VectorXd& z, double weights_norm,
                       double lambda1, double lambda2);

// One view's contribution to the self-supervised objective.
struct ViewLossInput {
  const Image* image = nullptr;
  const TransformedDepth* rho = nullptr;  // for the alpha term
  std::vector<NeighborTerm> neighbors;
  Eigen::VectorXd z;
};

// sum_i (L_photo_i + L_depth_i + L_alpha_i + lambda1||z_i||^2) + lambda2*||W||^2.
LossBreakdown total_self_supervised(const std::vector<ViewLossInput>& views,
                                    double weights_norm, const LossWeights& w);

}  // namespace depthopt

#pragma once

#include <vector>

#include "depthopt/latent_decoder.h"
#include "depthopt/losses.h"
#include "depthopt/masking.h"
#include "depthopt/types.h"

namespace depthopt {

struct AdaMaxState {
  long step = 0;
  Eigen::VectorXd m;  // first moment
  Eigen::VectorXd u;  // infinity-norm second moment
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// m <- b1*m + (1-b1)*g;  u <- max(b2*u, |g|);
// params <- params - lr/(1 - b1^t) * m / (u + eps).
void adamax_step(AdaMaxState& state, Eigen::VectorXd& params,
                 const Eigen::VectorXd& grad);

struct RefineConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double rel_tol = 1e-4;
  int max_iters = 500;
  int mask_refresh = 10;
  bool optimize_alpha = false;
  bool include_alpha_loss = true;
  int threads = 1;
  double divergence_factor = 1e6;
  LossWeights weights;
  OcclusionConfig occlusion;
  double viewing_angle_max_deg = 85.0;
};

// Everything the joint optimization needs about a co-visible set.
struct CovisibleViews {
  std::vector<PosedView> views;
  std::vector<double> alphas;  // one per view
  const ShapeBasis* basis = nullptr;
};

// Frozen per-ordered-pair masks; index = i * M + j.
struct PairMasks {
  int num_views = 0;
  std::vector<MaskGrid> masks;

  const MaskGrid& at(int i, int j) const { return masks[size_t(i) * num_views + j]; }
};

// Decoded state of the set at given codes (clamp tracked per view).
struct DecodedSet {
  std::vector<TransformedDepth> rho;
  std::vector<BoolGrid> clamped;
  std::vector<DepthMap> depth;
};

DecodedSet decode_set(const CovisibleViews& set,
                      const std::vector<Eigen::VectorXd>& codes);

// Bounds/chirality/occlusion/viewing-angle masks for the current depths.
PairMasks compute_masks(const CovisibleViews& set, const DecodedSet& dec,
                        const RefineConfig& cfg);

// Value + analytic gradient of the total loss at fixed masks. Masks,
// bilinear taps and the clamp active set are treated as constants; the
// result is deterministic for any thread count (per-pair partials reduced
// in fixed order).
struct TotalLoss {
  LossBreakdown breakdown;
  std::vector<Eigen::VectorXd> grad_z;
  std::vector<double> grad_alpha;
};

TotalLoss evaluate_total_loss(const CovisibleViews& set,
                              const std::vector<Eigen::VectorXd>& codes,
                              const PairMasks& masks, const RefineConfig& cfg,
                              bool with_gradients = true);

struct RefineResult {
  std::vector<Eigen::VectorXd> z;
  std::vector<double> alphas;
  std::vector<LossBreakdown> trace;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
};

// Joint AdaMax refinement of all codes (and alphas when enabled), with the
// relative-loss stopping rule; returns the best-seen parameters.
RefineResult refine_codes(const CovisibleViews& set,
                          const std::vector<Eigen::VectorXd>& init_z,
                          const RefineConfig& cfg);

}  // namespace depthopt

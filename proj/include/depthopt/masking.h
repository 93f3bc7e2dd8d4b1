#pragma once

#include "depthopt/geometry.h"
#include "depthopt/types.h"

namespace depthopt {

// Per-pixel validity for a view pair: bounds, chirality, occlusion and
// viewing-angle tests, combined by AND. true = keep throughout.
struct MaskGrid {
  BoolGrid bounds;
  BoolGrid chirality;
  BoolGrid occlusion;
  BoolGrid viewing_angle;
  BoolGrid combined;

  long rejected_bounds = 0;
  long rejected_chirality = 0;
  long rejected_occlusion = 0;
  long rejected_viewing_angle = 0;
};

struct OcclusionConfig {
  double tau = 4.44;
  // Minimum number of valid pixels for the robust statistics; below it the
  // test is skipped and everything kept.
  long min_samples = 16;
  // The printed inequality of the source masks pixels above the threshold,
  // which rejects the majority; kept behind a switch for comparison.
  bool literal_inequality = false;
};

// Robust occlusion test on Delta = D_j∘q_ij - D_ij over valid pixels:
// masks pixels with Delta < Median - tau * MAD (raw MAD, no normal factor).
// Sets *warned when too few samples force an all-keep result.
BoolGrid occlusion_mask(const Grid& d_j_sampled, const Grid& d_ij,
                        const BoolGrid& valid, const OcclusionConfig& cfg = {},
                        bool* warned = nullptr);

// Keep pixels whose surface normal makes an angle of at most max_angle_deg
// with the ray from the camera center; invalid normals are masked out.
BoolGrid viewing_angle_mask(const NormalGrid& normals, const PointGrid& X,
                            double max_angle_deg = 85.0);

MaskGrid combine(const BoolGrid& bounds, const BoolGrid& chirality,
                 const BoolGrid& occlusion, const BoolGrid& viewing_angle);

// Median and raw median-absolute-deviation of a sample.
double median_of(std::vector<double> values);
double mad_of(const std::vector<double>& values, double median);

}  // namespace depthopt

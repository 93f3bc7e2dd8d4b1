#include "depthopt/masking.h"

#include <algorithm>
#include <cmath>

namespace depthopt {

double median_of(std::vector<double> values) {
  require(!values.empty(), "median_of: empty sample");
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lo = *std::max_element(values.begin(), values.begin() + mid);
    m = 0.5 * (lo + m);
  }
  return m;
}

double mad_of(const std::vector<double>& values, double median) {
  std::vector<double> dev(values.size());
  for (size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - median);
  return median_of(std::move(dev));
}

BoolGrid occlusion_mask(const Grid& d_j_sampled, const Grid& d_ij,
                        const BoolGrid& valid, const OcclusionConfig& cfg,
                        bool* warned) {
  require(d_j_sampled.rows() == d_ij.rows() && d_j_sampled.cols() == d_ij.cols() &&
              valid.rows() == d_ij.rows() && valid.cols() == d_ij.cols(),
          "occlusion_mask: shape mismatch");
  if (warned) *warned = false;

  std::vector<double> delta;
  delta.reserve(size_t(valid.size()));
  for (Eigen::Index r = 0; r < valid.rows(); ++r)
    for (Eigen::Index c = 0; c < valid.cols(); ++c)
      if (valid(r, c)) delta.push_back(d_j_sampled(r, c) - d_ij(r, c));

  BoolGrid keep = BoolGrid::Constant(valid.rows(), valid.cols(), true);
  if (long(delta.size()) < cfg.min_samples) {
    if (warned) *warned = true;
    return keep;
  }

  const double med = median_of(delta);
  const double mad = mad_of(delta, med);
  const double thresh = med - cfg.tau * mad;
  for (Eigen::Index r = 0; r < valid.rows(); ++r) {
    for (Eigen::Index c = 0; c < valid.cols(); ++c) {
      if (!valid(r, c)) continue;
      const double d = d_j_sampled(r, c) - d_ij(r, c);
      const bool occluded = cfg.literal_inequality ? (d >= thresh) : (d < thresh);
      keep(r, c) = !occluded;
    }
  }
  return keep;
}

BoolGrid viewing_angle_mask(const NormalGrid& normals, const PointGrid& X,
                            double max_angle_deg) {
  require(normals.nx.rows() == X.x.rows() && normals.nx.cols() == X.x.cols(),
          "viewing_angle_mask: shape mismatch");
  const double cos_max = std::cos(max_angle_deg * M_PI / 180.0);
  BoolGrid keep = BoolGrid::Constant(X.x.rows(), X.x.cols(), false);
  for (int r = 0; r < X.rows(); ++r) {
    for (int c = 0; c < X.cols(); ++c) {
      if (!normals.valid(r, c)) continue;
      const Eigen::Vector3d p = X.at(r, c);
      const double len = p.norm();
      if (len <= 0.0) continue;
      // Angle between the normal and the direction from the surface point
      // back to the camera center (both unit).
      const Eigen::Vector3d n(normals.nx(r, c), normals.ny(r, c), normals.nz(r, c));
      const double cos_angle = n.dot(-p / len);
      keep(r, c) = cos_angle >= cos_max;
    }
  }
  return keep;
}

MaskGrid combine(const BoolGrid& bounds, const BoolGrid& chirality,
                 const BoolGrid& occlusion, const BoolGrid& viewing_angle) {
  require(bounds.rows() == chirality.rows() && bounds.cols() == chirality.cols() &&
              bounds.rows() == occlusion.rows() && bounds.cols() == occlusion.cols() &&
              bounds.rows() == viewing_angle.rows() && bounds.cols() == viewing_angle.cols(),
          "combine: shape mismatch");
  MaskGrid m;
  m.bounds = bounds;
  m.chirality = chirality;
  m.occlusion = occlusion;
  m.viewing_angle = viewing_angle;
  m.combined = bounds && chirality && occlusion && viewing_angle;
  m.rejected_bounds = (!bounds).count();
  m.rejected_chirality = (!chirality).count();
  m.rejected_occlusion = (!occlusion).count();
  m.rejected_viewing_angle = (!viewing_angle).count();
  return m;
}

}  // namespace depthopt

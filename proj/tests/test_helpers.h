#pragma once

// Shared construction of co-visible view sets from rendered scenes.

#include <vector>

#include "depthopt/optimizer.h"
#include "depthopt/synth.h"

namespace depthopt::testing {

struct RenderedSet {
  CovisibleViews set;
  std::vector<DepthMap> gt_depth;
  ShapeBasis basis;
};

inline RenderedSet make_rendered_set(const SynthScene& scene, int coarse_rows = 12,
                                     int coarse_cols = 16) {
  RenderedSet out;
  for (int cam = 0; cam < int(scene.cameras.size()); ++cam) {
    RenderOutput r = render(scene, cam);
    PosedView v = make_view(r.image, scene.cameras[cam].pose, scene.cameras[cam].K);
    out.set.views.push_back(std::move(v));
    double mean = 0;
    long n = 0;
    for (int i = 0; i < r.depth.d.size(); ++i)
      if (r.depth.valid.data()[i]) {
        mean += r.depth.d.data()[i];
        ++n;
      }
    out.set.alphas.push_back(n ? mean / double(n) : 1.0);
    out.gt_depth.push_back(std::move(r.depth));
  }
  out.basis = coarse_grid_basis(scene.height, scene.width, coarse_rows, coarse_cols);
  out.set.basis = &out.basis;
  return out;
}

// Least-squares codes reproducing the ground-truth rho maps: scatter the
// encoded depth onto the coarse grid by solving per-view normal equations.
inline std::vector<Eigen::VectorXd> gt_codes(const RenderedSet& rs) {
  const ShapeBasis& b = rs.basis;
  int dim = b.latent_dim();
  std::vector<Eigen::VectorXd> codes;
  Eigen::MatrixXd B(b.rows() * b.cols(), dim);
  for (int k = 0; k < dim; ++k)
    B.col(k) = Eigen::Map<const Eigen::VectorXd>(b.basis[k].data(), b.basis[k].size());
  Eigen::MatrixXd BtB = B.transpose() * B;
  Eigen::LDLT<Eigen::MatrixXd> solver(BtB);
  for (size_t i = 0; i < rs.gt_depth.size(); ++i) {
    TransformedDepth t = encode(rs.gt_depth[i], rs.set.alphas[i]);
    Grid resid = t.rho - b.mean_rho;
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(resid.data(), resid.size());
    codes.push_back(solver.solve(B.transpose() * r));
  }
  return codes;
}

}  // namespace depthopt::testing

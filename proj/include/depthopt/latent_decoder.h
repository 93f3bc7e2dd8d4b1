#pragma once

#include <string>
#include <vector>

#include "depthopt/types.h"

namespace depthopt {

enum class BasisMode { kSvd, kCoarseGrid };

// Linear depth-shape decoder: rho(z) = clamp(mean_rho + sum_k z_k * B_k).
// A low-dimensional code parameterizes the family of feasible transformed
// depth maps; the default 192 codes live on a 12x16 grid bilinearly
// upsampled to the image resolution.
struct ShapeBasis {
  Grid mean_rho;
  std::vector<Grid> basis;
  int coarse_rows = 12;
  int coarse_cols = 16;
  BasisMode mode = BasisMode::kCoarseGrid;
  std::string trained_on;

  int latent_dim() const { return int(basis.size()); }
  int rows() const { return int(mean_rho.rows()); }
  int cols() const { return int(mean_rho.cols()); }
};

struct DecodeResult {
  Grid rho;
  BoolGrid clamped;  // pixels saturated by the clamp; gradient is zero there
};

DecodeResult decode(const ShapeBasis& basis, const Eigen::VectorXd& z);

// SVD basis from training grids: mean (or an optional linear regression on
// per-grid feature vectors) plus the top right singular vectors of the
// residual stack, unit Frobenius norm each. Emits fewer maps than requested
// when the stack has lower rank.
ShapeBasis fit_basis(const std::vector<Grid>& train_rho,
                     const std::vector<Eigen::VectorXd>& features,
                     int latent_dim);

// Image-independent basis: each map is the bilinear upsampling of a one-hot
// coarse grid; the maps form a partition of unity. mean_rho is constant 0.5.
ShapeBasis coarse_grid_basis(int h, int w, int coarse_rows = 12, int coarse_cols = 16);

// Single binary file: header (dims, latent_dim, mode) + mean grid + basis
// grids as little-endian 32-bit floats.
void save_basis(const std::string& path, const ShapeBasis& basis);
ShapeBasis load_basis(const std::string& path);

}  // namespace depthopt

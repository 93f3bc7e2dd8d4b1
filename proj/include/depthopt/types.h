#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace depthopt {

using Grid = Eigen::ArrayXXd;
using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Pinhole intrinsics. Pixel (u,v) = (fx*qx + cx, fy*qy + cy) with (0,0) at
// the center of the top-left pixel.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

// Multi-channel intensity image, values in [0,1].
struct Image {
  std::vector<Grid> channels;

  Image() = default;
  explicit Image(Grid gray) { channels.push_back(std::move(gray)); }

  int rows() const { return channels.empty() ? 0 : int(channels[0].rows()); }
  int cols() const { return channels.empty() ? 0 : int(channels[0].cols()); }
  int num_channels() const { return int(channels.size()); }
};

// Metric depth with per-pixel validity. Invalid pixels carry d = 0.
struct DepthMap {
  Grid d;
  BoolGrid valid;

  DepthMap() = default;
  DepthMap(int h, int w) : d(Grid::Zero(h, w)), valid(BoolGrid::Constant(h, w, true)) {}
  DepthMap(Grid depth, BoolGrid v) : d(std::move(depth)), valid(std::move(v)) {}

  int rows() const { return int(d.rows()); }
  int cols() const { return int(d.cols()); }
};

// Bounded depth parameterization rho = alpha / (D + alpha), rho in (0,1].
struct TransformedDepth {
  Grid rho;
  double alpha = 1.0;
  BoolGrid valid;

  int rows() const { return int(rho.rows()); }
  int cols() const { return int(rho.cols()); }
};

// Rigid world -> camera transform: X_cam = R * X_world + t.
struct Pose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Vector3d center() const { return -R.transpose() * t; }
};

// Image + normalized pixel coordinates + pose: the unit of multiview work.
struct PosedView {
  Image image;
  Grid qx, qy;  // normalized coordinates, qx(r,c) = (c - cx)/fx
  Pose pose;
  Intrinsics K;

  int rows() const { return int(qx.rows()); }
  int cols() const { return int(qx.cols()); }
};

// Builds the normalized coordinate grids from the intrinsics.
PosedView make_view(Image image, const Pose& pose, const Intrinsics& K);
PosedView make_view(int h, int w, const Pose& pose, const Intrinsics& K);

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace depthopt

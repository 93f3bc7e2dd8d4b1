#pragma once

#include <string>
#include <vector>

#include "depthopt/types.h"

namespace depthopt {

struct PointGrid {
  Grid x, y, z;

  int rows() const { return int(x.rows()); }
  int cols() const { return int(x.cols()); }
  Eigen::Vector3d at(int r, int c) const { return {x(r, c), y(r, c), z(r, c)}; }
};

// Rigid transform from camera frame i to camera frame j.
struct RelativeTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  static RelativeTransform identity() { return {}; }
  static RelativeTransform between(const Pose& from, const Pose& to);
  RelativeTransform inverse() const;
  RelativeTransform compose(const RelativeTransform& first) const;  // this ∘ first
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return R * p + t; }
};

// X(p) = (Q(p); 1) * D(p).
PointGrid backproject(const Grid& qx, const Grid& qy, const DepthMap& d);

struct WarpResult {
  Grid qx, qy;        // normalized coordinates in the target camera
  Grid depth;         // third coordinate of T * X(p)
  BoolGrid chirality;  // true where that coordinate is positive
};

// Transforms the point grid and projects (division by the third coordinate);
// pixels at or behind the target camera plane are flagged, coordinates left 0.
WarpResult warp(const PointGrid& X, const RelativeTransform& T);

struct SampleResult {
  Grid values;
  BoolGrid in_bounds;  // false when any of the 4 taps falls off the grid
};

// Bilinear interpolation at continuous pixel positions (u = column, v = row);
// never extrapolates.
SampleResult sample_bilinear(const Grid& grid, const Grid& u, const Grid& v);

// Pixel coordinates for normalized ones: u = fx*qx + cx, v = fy*qy + cy.
void to_pixel_coords(const Intrinsics& K, const Grid& qx, const Grid& qy,
                     Grid& u, Grid& v);

struct NormalGrid {
  Grid nx, ny, nz;
  BoolGrid valid;
};

// Unit surface normals from central-difference tangents of the backprojected
// points, one-sided at the border, oriented toward the camera (nz < 0).
NormalGrid estimate_normals(const PointGrid& X);

// Plain-text trajectory: "id r00 r01 r02 tx r10 r11 r12 ty r20 r21 r22 tz fx fy cx cy"
// per line, '#' comments allowed. The transform maps world to camera.
struct TrajectoryEntry {
  int id = 0;
  Pose pose;
  Intrinsics K;
};

std::vector<TrajectoryEntry> load_trajectory(const std::string& path);
void save_trajectory(const std::string& path, const std::vector<TrajectoryEntry>& entries);

}  // namespace depthopt

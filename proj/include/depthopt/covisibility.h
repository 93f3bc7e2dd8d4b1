#pragma once

#include <map>
#include <set>
#include <vector>

#include "depthopt/geometry.h"
#include "depthopt/types.h"

namespace depthopt {

struct VoxelKey {
  int x = 0, y = 0, z = 0;
  auto operator<=>(const VoxelKey&) const = default;
};

// Sparse voxel map: which cameras un-project valid depth into which cell.
struct VoxelMap {
  double voxel_size = 1.0;
  std::map<VoxelKey, std::set<int>> cells;
  std::map<int, std::set<VoxelKey>> cells_by_camera;
  // World-space cell centroids are recovered from the key when needed.
};

struct PosedDepth {
  int id = 0;
  Pose pose;  // world -> camera
  Grid qx, qy;
  DepthMap depth;
};

// One pass over all cameras; every valid pixel's world point is hashed to
// its cell and the camera id inserted once per cell.
VoxelMap build_voxel_map(const std::vector<PosedDepth>& views, double voxel_size);

// Cameras sharing at least one cell with cam, with overlap fraction
// |shared cells| / |cam's cells|. The camera itself is excluded.
std::map<int, double> overlapping_cameras(const VoxelMap& map, int cam);

struct CovisibleSet {
  int reference = 0;
  std::vector<int> members;  // reference first
  std::vector<double> overlaps;   // per member, min overlap to the set
  std::vector<double> parallaxes;  // per member, min parallax to the set (radians)
  bool complete = true;  // false when fewer than N qualifying cameras exist
};

// Parallax between two cameras: angle between their viewing rays to a point
// (the centroid of their shared voxels).
double pairwise_parallax(const Pose& a, const Pose& b, const Eigen::Vector3d& point);

// Greedy growth from {reference}: each step adds the candidate maximizing
// the minimum pairwise parallax to the current members, subject to overlap
// >= overlap_min with every member. Ties break by ascending camera id.
// Candidates with zero parallax to every member are redundant and skipped.
CovisibleSet select_covisible(const VoxelMap& map, const std::map<int, Pose>& poses,
                              int reference, int n, double overlap_min,
                              double min_parallax = 1e-9);

// Structure-from-motion style selection: top n-1 cameras by shared 3D point
// count with the reference; ties break by ascending camera id.
CovisibleSet select_by_shared_points(
    const std::map<int, std::vector<int>>& track_table, int reference, int n);

}  // namespace depthopt

#include "depthopt/covisibility.h"

#include <algorithm>
#include <cmath>

namespace depthopt {

VoxelMap build_voxel_map(const std::vector<PosedDepth>& views, double voxel_size) {
  require(voxel_size > 0.0, "build_voxel_map: voxel_size must be positive");
  VoxelMap map;
  map.voxel_size = voxel_size;
  for (const PosedDepth& v : views) {
    const Eigen::Matrix3d Rt = v.pose.R.transpose();
    for (int r = 0; r < v.depth.rows(); ++r) {
      for (int c = 0; c < v.depth.cols(); ++c) {
        if (!v.depth.valid(r, c)) continue;
        const double d = v.depth.d(r, c);
        const Eigen::Vector3d x_cam(v.qx(r, c) * d, v.qy(r, c) * d, d);
        const Eigen::Vector3d x = Rt * (x_cam - v.pose.t);
        const VoxelKey key{int(std::floor(x.x() / voxel_size)),
                           int(std::floor(x.y() / voxel_size)),
                           int(std::floor(x.z() / voxel_size))};
        map.cells[key].insert(v.id);
        map.cells_by_camera[v.id].insert(key);
      }
    }
  }
  return map;
}

std::map<int, double> overlapping_cameras(const VoxelMap& map, int cam) {
  const auto it = map.cells_by_camera.find(cam);
  require(it != map.cells_by_camera.end(), "overlapping_cameras: unknown camera id");
  std::map<int, long> shared;
  for (const VoxelKey& key : it->second)
    for (int other : map.cells.at(key))
      if (other != cam) ++shared[other];
  std::map<int, double> out;
  const double total = double(it->second.size());
  for (const auto& [id, count] : shared) out[id] = double(count) / total;
  return out;
}

double pairwise_parallax(const Pose& a, const Pose& b, const Eigen::Vector3d& point) {
  const Eigen::Vector3d ra = point - a.center();
  const Eigen::Vector3d rb = point - b.center();
  const double na = ra.norm(), nb = rb.norm();
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::acos(std::clamp(ra.dot(rb) / (na * nb), -1.0, 1.0));
}

namespace {

// Shared-voxel centroid of two cameras; false when they share no cell.
bool shared_centroid(const VoxelMap& map, int a, int b, Eigen::Vector3d* centroid,
                     long* count) {
  const auto& ca = map.cells_by_camera.at(a);
  const auto& cb = map.cells_by_camera.at(b);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  long n = 0;
  for (const VoxelKey& key : ca) {
    if (!cb.count(key)) continue;
    sum += map.voxel_size * (Eigen::Vector3d(key.x, key.y, key.z) +
                             Eigen::Vector3d::Constant(0.5));
    ++n;
  }
  if (count) *count = n;
  if (n == 0) return false;
  if (centroid) *centroid = sum / double(n);
  return true;
}

// Overlap of candidate a with b, from a's perspective.
double overlap_fraction(const VoxelMap& map, int a, int b) {
  long shared = 0;
  shared_centroid(map, a, b, nullptr, &shared);
  return double(shared) / double(map.cells_by_camera.at(a).size());
}

}  // namespace

CovisibleSet select_covisible(const VoxelMap& map, const std::map<int, Pose>& poses,
                              int reference, int n, double overlap_min,
                              double min_parallax) {
  require(n >= 2, "select_covisible: n must be >= 2");
  require(map.cells_by_camera.count(reference), "select_covisible: unknown reference");
  require(poses.count(reference), "select_covisible: missing reference pose");

  CovisibleSet out;
  out.reference = reference;
  out.members = {reference};
  out.overlaps = {1.0};
  out.parallaxes = {0.0};

  std::vector<int> candidates;
  for (const auto& [id, frac] : overlapping_cameras(map, reference)) {
    (void)frac;
    if (poses.count(id)) candidates.push_back(id);
  }
  std::sort(candidates.begin(), candidates.end());

  while (int(out.members.size()) < n) {
    int best_id = -1;
    double best_score = -1.0, best_overlap = 0.0;
    for (int cand : candidates) {
      if (std::find(out.members.begin(), out.members.end(), cand) != out.members.end())
        continue;
      double min_par = std::numeric_limits<double>::infinity();
      double min_ov = std::numeric_limits<double>::infinity();
      bool ok = true;
      for (int member : out.members) {
        Eigen::Vector3d centroid;
        if (!shared_centroid(map, cand, member, &centroid, nullptr)) {
          ok = false;
          break;
        }
        const double ov = overlap_fraction(map, cand, member);
        if (ov < overlap_min) {
          ok = false;
          break;
        }
        min_ov = std::min(min_ov, ov);
        min_par = std::min(min_par,
                           pairwise_parallax(poses.at(cand), poses.at(member), centroid));
      }
      if (!ok || min_par <= min_parallax) continue;  // redundant or insufficient
      if (min_par > best_score) {  // strict: ties keep the lowest id
        best_score = min_par;
        best_id = cand;
        best_overlap = min_ov;
      }
    }
    if (best_id < 0) break;
    out.members.push_back(best_id);
    out.overlaps.push_back(best_overlap);
    out.parallaxes.push_back(best_score);
  }
  out.complete = int(out.members.size()) == n;
  return out;
}

CovisibleSet select_by_shared_points(
    const std::map<int, std::vector<int>>& track_table, int reference, int n) {
  require(!track_table.empty(), "select_by_shared_points: empty track table");
  require(track_table.count(reference), "select_by_shared_points: unknown reference");
  const auto& ref_points = track_table.at(reference);
  const std::set<int> ref_set(ref_points.begin(), ref_points.end());

  std::vector<std::pair<long, int>> counts;  // (-shared, id) for sorting
  for (const auto& [id, points] : track_table) {
    if (id == reference) continue;
    long shared = 0;
    for (int p : points)
      if (ref_set.count(p)) ++shared;
    if (shared > 0) counts.emplace_back(-shared, id);
  }
  std::sort(counts.begin(), counts.end());

  CovisibleSet out;
  out.reference = reference;
  out.members = {reference};
  out.overlaps = {1.0};
  out.parallaxes = {0.0};
  for (const auto& [neg, id] : counts) {
    if (int(out.members.size()) >= n) break;
    out.members.push_back(id);
    out.overlaps.push_back(double(-neg) / double(ref_set.size()));
    out.parallaxes.push_back(0.0);  // no geometry in this input
  }
  out.complete = int(out.members.size()) == n;
  return out;
}

}  // namespace depthopt

#include "depthopt/geometry.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace depthopt {

RelativeTransform RelativeTransform::between(const Pose& from, const Pose& to) {
  RelativeTransform T;
  T.R = to.R * from.R.transpose();
  T.t = to.t - T.R * from.t;
  return T;
}

RelativeTransform RelativeTransform::inverse() const {
  RelativeTransform T;
  T.R = R.transpose();
  T.t = -T.R * t;
  return T;
}

RelativeTransform RelativeTransform::compose(const RelativeTransform& first) const {
  RelativeTransform T;
  T.R = R * first.R;
  T.t = R * first.t + t;
  return T;
}

PointGrid backproject(const Grid& qx, const Grid& qy, const DepthMap& d) {
  require(qx.rows() == d.d.rows() && qx.cols() == d.d.cols(),
          "backproject: grid shapes differ");
  PointGrid X;
  X.x = qx * d.d;
  X.y = qy * d.d;
  X.z = d.d;
  return X;
}

WarpResult warp(const PointGrid& X, const RelativeTransform& T) {
  const int h = X.rows(), w = X.cols();
  WarpResult out;
  out.qx = Grid::Zero(h, w);
  out.qy = Grid::Zero(h, w);
  out.depth = Grid::Zero(h, w);
  out.chirality = BoolGrid::Constant(h, w, false);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Eigen::Vector3d p = T.apply(X.at(r, c));
      out.depth(r, c) = p.z();
      if (p.z() > 0.0) {
        out.chirality(r, c) = true;
        out.qx(r, c) = p.x() / p.z();
        out.qy(r, c) = p.y() / p.z();
      }
    }
  }
  return out;
}

SampleResult sample_bilinear(const Grid& grid, const Grid& u, const Grid& v) {
  require(u.rows() == v.rows() && u.cols() == v.cols(),
          "sample_bilinear: coordinate grids differ");
  const int h = int(grid.rows()), w = int(grid.cols());
  SampleResult out;
  out.values = Grid::Zero(u.rows(), u.cols());
  out.in_bounds = BoolGrid::Constant(u.rows(), u.cols(), false);
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      const double x = u(r, c), y = v(r, c);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
      if (x0 < 0 || y0 < 0 || x0 + 1 >= w || y0 + 1 >= h) continue;
      const double fx = x - x0, fy = y - y0;
      out.values(r, c) = (1 - fy) * ((1 - fx) * grid(y0, x0) + fx * grid(y0, x0 + 1)) +
                         fy * ((1 - fx) * grid(y0 + 1, x0) + fx * grid(y0 + 1, x0 + 1));
      out.in_bounds(r, c) = true;
    }
  }
  return out;
}

void to_pixel_coords(const Intrinsics& K, const Grid& qx, const Grid& qy,
                     Grid& u, Grid& v) {
  u = K.fx * qx + K.cx;
  v = K.fy * qy + K.cy;
}

NormalGrid estimate_normals(const PointGrid& X) {
  const int h = X.rows(), w = X.cols();
  require(h >= 3 && w >= 3, "estimate_normals: grid must be at least 3x3");
  NormalGrid out;
  out.nx = Grid::Zero(h, w);
  out.ny = Grid::Zero(h, w);
  out.nz = Grid::Zero(h, w);
  out.valid = BoolGrid::Constant(h, w, false);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int c0 = std::max(c - 1, 0), c1 = std::min(c + 1, w - 1);
      const int r0 = std::max(r - 1, 0), r1 = std::min(r + 1, h - 1);
      const Eigen::Vector3d tx = X.at(r, c1) - X.at(r, c0);
      const Eigen::Vector3d ty = X.at(r1, c) - X.at(r0, c);
      Eigen::Vector3d n = tx.cross(ty);
      const double len = n.norm();
      if (len <= 1e-15) continue;
      n /= len;
      if (n.z() > 0.0) n = -n;
      out.nx(r, c) = n.x();
      out.ny(r, c) = n.y();
      out.nz(r, c) = n.z();
      out.valid(r, c) = true;
    }
  }
  return out;
}

std::vector<TrajectoryEntry> load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_trajectory: cannot open " + path);
  std::vector<TrajectoryEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    TrajectoryEntry e;
    double m[12];
    if (!(ss >> e.id)) continue;
    for (double& x : m)
      if (!(ss >> x)) throw std::runtime_error("load_trajectory: short line in " + path);
    if (!(ss >> e.K.fx >> e.K.fy >> e.K.cx >> e.K.cy))
      throw std::runtime_error("load_trajectory: missing intrinsics in " + path);
    e.pose.R << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
    e.pose.t << m[3], m[7], m[11];
    entries.push_back(e);
  }
  return entries;
}

void save_trajectory(const std::string& path, const std::vector<TrajectoryEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_trajectory: cannot open " + path);
  out << "# id r00 r01 r02 tx r10 r11 r12 ty r20 r21 r22 tz fx fy cx cy\n";
  out.precision(17);
  for (const auto& e : entries) {
    out << e.id;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << ' ' << e.pose.R(r, c);
      out << ' ' << e.pose.t(r);
    }
    out << ' ' << e.K.fx << ' ' << e.K.fy << ' ' << e.K.cx << ' ' << e.K.cy << '\n';
  }
}

}  // namespace depthopt

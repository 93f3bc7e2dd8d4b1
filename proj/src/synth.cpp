#include "depthopt/synth.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "depthopt/image_io.h"

namespace depthopt {

namespace {

std::uint32_t hash2(std::int64_t ix, std::int64_t iy, std::uint32_t seed) {
  std::uint32_t h = std::uint32_t(ix) * 0x9E3779B1u ^ std::uint32_t(iy) * 0x85EBCA77u ^
                    (seed + 0x165667B1u);
  h ^= h >> 15;
  h *= 0x2C1B3C6Du;
  h ^= h >> 12;
  h *= 0x297A2D39u;
  h ^= h >> 15;
  return h;
}

double lattice(std::int64_t ix, std::int64_t iy, std::uint32_t seed) {
  return double(hash2(ix, iy, seed)) / 4294967296.0;
}

double value_noise(double x, double y, std::uint32_t seed) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = std::int64_t(fx), iy = std::int64_t(fy);
  const double tx = x - fx, ty = y - fy;
  // Smoothstep keeps the field C1, which keeps photometric gradients sane.
  const double sx = tx * tx * (3 - 2 * tx), sy = ty * ty * (3 - 2 * ty);
  const double v00 = lattice(ix, iy, seed), v10 = lattice(ix + 1, iy, seed);
  const double v01 = lattice(ix, iy + 1, seed), v11 = lattice(ix + 1, iy + 1, seed);
  return (1 - sy) * ((1 - sx) * v00 + sx * v10) + sy * ((1 - sx) * v01 + sx * v11);
}

}  // namespace

double Texture::sample(double u, double v) const {
  double n = 0.0, amp = 1.0, freq = noise_freq, amp_sum = 0.0;
  for (int octave = 0; octave < 3; ++octave) {
    n += amp * value_noise(u * freq, v * freq, seed + std::uint32_t(octave) * 101u);
    amp_sum += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  n = n / amp_sum;  // in [0,1]
  const double stripes = 0.5 * (1.0 + std::sin(stripe_freq * (u + 0.35 * v)));
  return base + noise_amp * (2.0 * n - 1.0) + stripe_amp * (stripes - 0.5);
}

RayHit raycast(const SynthScene& scene, const Eigen::Vector3d& origin,
               const Eigen::Vector3d& dir) {
  constexpr double kEps = 1e-9;
  RayHit best;
  best.s = std::numeric_limits<double>::infinity();
  int id = 0;
  for (const Plane& pl : scene.planes) {
    const double denom = dir.dot(pl.normal);
    if (std::abs(denom) > 1e-14) {
      const double s = (pl.point - origin).dot(pl.normal) / denom;
      if (s > kEps && s < best.s) {
        const Eigen::Vector3d rel = origin + s * dir - pl.point;
        if (std::abs(rel.dot(pl.u_axis)) <= pl.half_u &&
            std::abs(rel.dot(pl.v_axis)) <= pl.half_v) {
          best.s = s;
          best.primitive = id;
        }
      }
    }
    ++id;
  }
  for (const Sphere& sp : scene.spheres) {
    const Eigen::Vector3d oc = origin - sp.center;
    const double a = dir.squaredNorm();
    const double b = 2.0 * dir.dot(oc);
    const double c = oc.squaredNorm() - sp.radius * sp.radius;
    const double disc = b * b - 4 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      double s = (-b - sq) / (2 * a);
      if (s <= kEps) s = (-b + sq) / (2 * a);
      if (s > kEps && s < best.s) {
        best.s = s;
        best.primitive = id;
      }
    }
    ++id;
  }
  if (!std::isfinite(best.s)) return {};
  return best;
}

namespace {

// Texture + Lambertian shade at a hit point of primitive `prim`.
double shade_point(const SynthScene& scene, int prim, const Eigen::Vector3d& p) {
  double u = 0, v = 0, tex = 0;
  Eigen::Vector3d n;
  const int n_planes = int(scene.planes.size());
  if (prim < n_planes) {
    const Plane& pl = scene.planes[prim];
    const Eigen::Vector3d rel = p - pl.point;
    u = rel.dot(pl.u_axis);
    v = rel.dot(pl.v_axis);
    n = pl.normal;
    tex = pl.tex.sample(u, v);
  } else {
    const Sphere& sp = scene.spheres[prim - n_planes];
    n = (p - sp.center).normalized();
    u = std::atan2(n.y(), n.x());
    v = std::acos(std::clamp(n.z(), -1.0, 1.0));
    tex = sp.tex.sample(u * sp.radius, v * sp.radius);
  }
  const double lambert = std::abs(n.dot(scene.light_dir));
  return std::clamp(tex * (scene.ambient + (1.0 - scene.ambient) * lambert), 0.0, 1.0);
}

Eigen::Vector3d pixel_ray_world(const TrajectoryEntry& cam, double u, double v) {
  const Eigen::Vector3d d_cam((u - cam.K.cx) / cam.K.fx, (v - cam.K.cy) / cam.K.fy, 1.0);
  return cam.pose.R.transpose() * d_cam;
}

}  // namespace

std::optional<RayHit> cast_pixel(const SynthScene& scene, int cam, double u, double v) {
  require(cam >= 0 && cam < int(scene.cameras.size()), "cast_pixel: bad camera index");
  const TrajectoryEntry& c = scene.cameras[cam];
  const RayHit hit = raycast(scene, c.pose.center(), pixel_ray_world(c, u, v));
  if (hit.primitive < 0) return std::nullopt;
  return hit;
}

RenderOutput render(const SynthScene& scene, int cam) {
  require(cam >= 0 && cam < int(scene.cameras.size()), "render: bad camera index");
  const TrajectoryEntry& c = scene.cameras[cam];
  const int h = scene.height, w = scene.width;
  RenderOutput out;
  out.image = Image(Grid::Zero(h, w));
  out.depth = DepthMap(h, w);
  out.depth.valid.setConstant(false);
  out.primitive_id = Eigen::ArrayXXi::Constant(h, w, -1);
  out.primitive_id_valid = BoolGrid::Constant(h, w, false);

  const Eigen::Vector3d origin = c.pose.center();
  for (int r = 0; r < h; ++r) {
    for (int col = 0; col < w; ++col) {
      const Eigen::Vector3d dir = pixel_ray_world(c, col, r);
      const RayHit hit = raycast(scene, origin, dir);
      if (hit.primitive < 0) continue;
      out.depth.d(r, col) = hit.s;  // dir has unit z in the camera frame
      out.depth.valid(r, col) = true;
      out.primitive_id(r, col) = hit.primitive;
      out.primitive_id_valid(r, col) = true;
      out.image.channels[0](r, col) = shade_point(scene, hit.primitive, origin + hit.s * dir);
    }
  }

  if (scene.image_noise_sigma > 0.0) {
    std::mt19937_64 rng(scene.seed * 1000003ull + std::uint64_t(cam));
    std::normal_distribution<double> gauss(0.0, scene.image_noise_sigma);
    Grid& img = out.image.channels[0];
    for (int r = 0; r < h; ++r)
      for (int col = 0; col < w; ++col)
        img(r, col) = std::clamp(img(r, col) + gauss(rng), 0.0, 1.0);
  }
  return out;
}

double scene_coverage(const SynthScene& scene, int cam) {
  const RenderOutput out = render(scene, cam);
  return double(out.depth.valid.count()) / double(scene.height * scene.width);
}

namespace {

Pose pose_at(const Eigen::Vector3d& center, double yaw, double pitch) {
  // Camera axes from small yaw (about y) and pitch (about x) angles.
  Eigen::Matrix3d Ry, Rx;
  Ry << std::cos(yaw), 0, std::sin(yaw), 0, 1, 0, -std::sin(yaw), 0, std::cos(yaw);
  Rx << 1, 0, 0, 0, std::cos(pitch), -std::sin(pitch), 0, std::sin(pitch), std::cos(pitch);
  Pose p;
  p.R = Rx * Ry;
  p.t = -p.R * center;
  return p;
}

TrajectoryEntry make_camera(int id, const Eigen::Vector3d& center, double yaw,
                            double pitch, double focal, int h, int w) {
  TrajectoryEntry e;
  e.id = id;
  e.pose = pose_at(center, yaw, pitch);
  e.K = {focal, focal, (w - 1) / 2.0, (h - 1) / 2.0};
  return e;
}

}  // namespace

SynthScene benchmark_scene(char suite, int height, int width, double texture_contrast) {
  SynthScene scene;
  scene.height = height;
  scene.width = width;
  scene.seed = std::uint64_t(suite);
  const double focal = 220.0 * width / 256.0;

  auto textured = [&](std::uint32_t seed) {
    Texture t;
    t.seed = seed;
    t.noise_amp *= texture_contrast;
    t.stripe_amp *= texture_contrast;
    return t;
  };

  switch (suite) {
    case 'a': {
      // Convex wedge of two textured planes, crease toward the camera.
      const double beta = 20.0 * M_PI / 180.0;
      Plane p1, p2;
      p1.point = p2.point = {0, 0, 4};
      p1.normal = {std::sin(beta), 0, -std::cos(beta)};
      p2.normal = {-std::sin(beta), 0, -std::cos(beta)};
      p1.u_axis = {std::cos(beta), 0, std::sin(beta)};
      p2.u_axis = {std::cos(beta), 0, -std::sin(beta)};
      p1.v_axis = p2.v_axis = {0, 1, 0};
      p1.tex = textured(11);
      p2.tex = textured(12);
      scene.planes = {p1, p2};
      scene.cameras = {
          make_camera(0, {0, 0, 0}, 0.0, 0.0, focal, height, width),
          make_camera(1, {0.25, 0.04, 0.02}, -0.035, 0.0, focal, height, width),
          make_camera(2, {-0.22, -0.05, -0.01}, 0.03, 0.012, focal, height, width)};
      break;
    }
    case 'b': {
      Plane bg;
      bg.point = {0, 0, 5.2};
      bg.normal = Eigen::Vector3d(0.08, -0.06, -1.0).normalized();
      bg.tex = textured(21);
      Sphere sp;
      sp.center = {0.12, -0.06, 3.9};
      sp.radius = 0.75;
      sp.tex = textured(22);
      sp.tex.noise_freq = 6.0;
      scene.planes = {bg};
      scene.spheres = {sp};
      scene.cameras = {
          make_camera(0, {0, 0, 0}, 0.0, 0.0, focal, height, width),
          make_camera(1, {0.3, 0.03, 0.0}, -0.045, 0.0, focal, height, width),
          make_camera(2, {-0.26, -0.04, 0.03}, 0.04, 0.01, focal, height, width)};
      break;
    }
    case 'c': {
      // Plane slanted 86 degrees to the viewing direction; telephoto camera
      // so the per-pixel angle stays above the 85-degree threshold.
      const double ang = 86.0 * M_PI / 180.0;
      Plane pl;
      pl.point = {0, 0, 5};
      pl.normal = {0, std::sin(ang), -std::cos(ang)};
      pl.u_axis = {1, 0, 0};
      pl.v_axis = Eigen::Vector3d(0, std::cos(ang), std::sin(ang));
      pl.tex = textured(31);
      scene.planes = {pl};
      const double tele = 6000.0 * width / 256.0;
      scene.cameras = {make_camera(0, {0, 0, 0}, 0.0, 0.0, tele, height, width),
                       make_camera(1, {0.08, 0.0, 0.0}, -0.016, 0.0, tele, height, width)};
      break;
    }
    case 'd': {
      Plane pl;
      pl.point = {0, 0, 4};
      pl.normal = {0, 0, -1};
      pl.tex = textured(41);
      pl.tex.noise_amp *= 0.12;
      pl.tex.stripe_amp *= 0.1;
      scene.planes = {pl};
      scene.cameras = {make_camera(0, {0, 0, 0}, 0.0, 0.0, focal, height, width),
                       make_camera(1, {0.24, 0.0, 0.0}, -0.04, 0.0, focal, height, width)};
      break;
    }
    default:
      throw std::invalid_argument("benchmark_scene: unknown suite");
  }

  for (int cam = 0; cam < int(scene.cameras.size()); ++cam)
    require(scene_coverage(scene, cam) >= 0.5, "benchmark_scene: camera coverage below 50%");
  return scene;
}

namespace {

using nlohmann::json;

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json tex_json(const Texture& t) {
  return {{"base", t.base},          {"noise_amp", t.noise_amp},
          {"noise_freq", t.noise_freq}, {"stripe_amp", t.stripe_amp},
          {"stripe_freq", t.stripe_freq}, {"seed", t.seed}};
}

Texture tex_from(const json& j) {
  Texture t;
  t.base = j.at("base");
  t.noise_amp = j.at("noise_amp");
  t.noise_freq = j.at("noise_freq");
  t.stripe_amp = j.at("stripe_amp");
  t.stripe_freq = j.at("stripe_freq");
  t.seed = j.at("seed");
  return t;
}

}  // namespace

void save_scene_json(const std::string& path, const SynthScene& scene) {
  json j;
  j["resolution"] = {scene.height, scene.width};
  j["seed"] = scene.seed;
  j["light_dir"] = vec3_json(scene.light_dir);
  j["ambient"] = scene.ambient;
  j["image_noise_sigma"] = scene.image_noise_sigma;
  j["planes"] = json::array();
  for (const Plane& p : scene.planes) {
    j["planes"].push_back({{"point", vec3_json(p.point)},
                           {"normal", vec3_json(p.normal)},
                           {"u_axis", vec3_json(p.u_axis)},
                           {"v_axis", vec3_json(p.v_axis)},
                           {"half_u", p.half_u},
                           {"half_v", p.half_v},
                           {"tex", tex_json(p.tex)}});
  }
  j["spheres"] = json::array();
  for (const Sphere& s : scene.spheres) {
    j["spheres"].push_back(
        {{"center", vec3_json(s.center)}, {"radius", s.radius}, {"tex", tex_json(s.tex)}});
  }
  j["cameras"] = json::array();
  for (const TrajectoryEntry& c : scene.cameras) {
    std::vector<double> m;
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) m.push_back(c.pose.R(r, col));
      m.push_back(c.pose.t(r));
    }
    j["cameras"].push_back({{"id", c.id},
                            {"world_to_cam", m},
                            {"K", {c.K.fx, c.K.fy, c.K.cx, c.K.cy}}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_scene_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

SynthScene load_scene_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scene_json: cannot open " + path);
  json j;
  in >> j;
  SynthScene scene;
  scene.height = j.at("resolution").at(0);
  scene.width = j.at("resolution").at(1);
  scene.seed = j.at("seed");
  scene.light_dir = vec3_from(j.at("light_dir"));
  scene.ambient = j.at("ambient");
  scene.image_noise_sigma = j.value("image_noise_sigma", 0.0);
  for (const json& pj : j.at("planes")) {
    Plane p;
    p.point = vec3_from(pj.at("point"));
    p.normal = vec3_from(pj.at("normal"));
    p.u_axis = vec3_from(pj.at("u_axis"));
    p.v_axis = vec3_from(pj.at("v_axis"));
    p.half_u = pj.at("half_u");
    p.half_v = pj.at("half_v");
    p.tex = tex_from(pj.at("tex"));
    scene.planes.push_back(p);
  }
  for (const json& sj : j.at("spheres")) {
    Sphere s;
    s.center = vec3_from(sj.at("center"));
    s.radius = sj.at("radius");
    s.tex = tex_from(sj.at("tex"));
    scene.spheres.push_back(s);
  }
  for (const json& cj : j.at("cameras")) {
    TrajectoryEntry c;
    c.id = cj.at("id");
    const std::vector<double> m = cj.at("world_to_cam");
    c.pose.R << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
    c.pose.t << m[3], m[7], m[11];
    c.K = {cj.at("K").at(0), cj.at("K").at(1), cj.at("K").at(2), cj.at("K").at(3)};
    scene.cameras.push_back(c);
  }
  return scene;
}

void write_scene_dir(const SynthScene& scene, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  char name[64];
  for (int cam = 0; cam < int(scene.cameras.size()); ++cam) {
    const RenderOutput out = render(scene, cam);
    std::snprintf(name, sizeof(name), "/view_%03d.pgm", scene.cameras[cam].id);
    save_pgm8(dir + name, out.image.channels[0]);
    std::snprintf(name, sizeof(name), "/depth_%03d.pfm", scene.cameras[cam].id);
    save_pfm(dir + name, out.depth.d);
  }
  save_trajectory(dir + "/poses.txt", scene.cameras);
  save_scene_json(dir + "/scene.json", scene);
}

}  // namespace depthopt

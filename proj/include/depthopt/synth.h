#pragma once

#include <optional>
#include <string>
#include <vector>

#include "depthopt/geometry.h"
#include "depthopt/types.h"

namespace depthopt {

// Procedural texture: value noise plus stripes in surface coordinates.
struct Texture {
  double base = 0.5;
  double noise_amp = 0.25;
  double noise_freq = 4.0;
  double stripe_amp = 0.2;
  double stripe_freq = 9.0;
  std::uint32_t seed = 0;

  double sample(double u, double v) const;
};

struct Plane {
  Eigen::Vector3d point = {0, 0, 4};
  Eigen::Vector3d normal = {0, 0, -1};  // unit
  Eigen::Vector3d u_axis = {1, 0, 0};   // in-plane texture axes
  Eigen::Vector3d v_axis = {0, 1, 0};
  double half_u = 1e9;  // finite extent when small
  double half_v = 1e9;
  Texture tex;
};

struct Sphere {
  Eigen::Vector3d center = {0, 0, 4};
  double radius = 1.0;
  Texture tex;
};

struct SynthScene {
  std::vector<Plane> planes;
  std::vector<Sphere> spheres;
  std::vector<TrajectoryEntry> cameras;
  int height = 192;
  int width = 256;
  Eigen::Vector3d light_dir = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
  double ambient = 0.45;
  double image_noise_sigma = 0.0;  // optional additive Gaussian
  std::uint64_t seed = 1;
};

struct RayHit {
  double s = 0.0;    // depth along the camera z axis
  int primitive = -1;  // planes first, then spheres; -1 = miss
};

// First intersection of the world-space ray; s measured so that the camera
// depth of the hit equals s when dir has unit z in the camera frame.
RayHit raycast(const SynthScene& scene, const Eigen::Vector3d& origin,
               const Eigen::Vector3d& dir);

// Continuous ray cast through pixel (u, v) of a camera; miss -> nullopt.
std::optional<RayHit> cast_pixel(const SynthScene& scene, int cam, double u, double v);

struct RenderOutput {
  Image image;
  DepthMap depth;
  BoolGrid primitive_id_valid;
  Eigen::ArrayXXi primitive_id;  // per-pixel first-hit primitive
};

// Ray-cast render: nearest primitive per pixel, Lambertian shading with the
// procedural texture. Bit-deterministic for a fixed scene.
RenderOutput render(const SynthScene& scene, int cam);

// Fraction of pixels hitting any primitive.
double scene_coverage(const SynthScene& scene, int cam);

// Fixed verification suite:
//   a: textured plane wedge, 3 cameras
//   b: plane + occluding sphere, 3 cameras
//   c: plane slanted 86 degrees to the viewing direction (telephoto), 2 cameras
//   d: low-texture plane, 2 cameras
SynthScene benchmark_scene(char suite, int height = 192, int width = 256,
                           double texture_contrast = 1.0);

// JSON scene description round trip.
SynthScene load_scene_json(const std::string& path);
void save_scene_json(const std::string& path, const SynthScene& scene);

// Renders every camera into dir: view_###.pgm, depth_###.pfm, poses.txt,
// scene.json.
void write_scene_dir(const SynthScene& scene, const std::string& dir);

}  // namespace depthopt

// Experiment runner: matrix-model study, synthetic benchmarks, basis
// fitting, latent-code refinement, evaluation and covisibility queries.
//
// Every command reads an optional JSON config (--config); unknown keys are
// errors, and command-line flags override config values. Exit codes:
//   0 success, 2 config error, 3 data error, 4 divergence.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "depthopt/covisibility.h"
#include "depthopt/depth_codec.h"
#include "depthopt/geometry.h"
#include "depthopt/image_io.h"
#include "depthopt/latent_decoder.h"
#include "depthopt/linear_shape_model.h"
#include "depthopt/masking.h"
#include "depthopt/metrics.h"
#include "depthopt/optimizer.h"
#include "depthopt/synth.h"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace depthopt;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Divergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Loads the JSON config and rejects keys outside the command's vocabulary.
json load_config(const std::string& path, const std::set<std::string>& allowed) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw DataError("config file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object: " + path);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key '" + it.key() + "' in " + path);
  return j;
}

// Applies a config value unless the flag was given explicitly (flags win).
template <typename T>
void apply(const json& cfg, const CLI::App& app, const std::string& key, T& out) {
  if (!cfg.contains(key)) return;
  const CLI::Option* opt = app.get_option_no_throw("--" + key);
  if (opt && opt->count() > 0) return;
  try {
    out = cfg.at(key).get<T>();
  } catch (const std::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write: " + path);
  return out;
}

// ------------------------------------------------------------- matrix-model

struct MatrixModelOpts {
  std::string config, out = "matrix_model.csv", plot;
  int seeds = 10, scenes = 50, points = 20, feature_dim = 10, latent_dim = 3;
  double noise = 0.05;
};

void write_prediction_svg(const std::string& path, const LinearPredictor& pred,
                          const StackedData& test, int p, int n_objects) {
  // True scene points vs. predictions (z = 0 and best z) for scene 0.
  Eigen::RowVectorXd x = test.X_noisy.row(0);
  Eigen::RowVectorXd y = test.Y.row(0);
  Eigen::RowVectorXd z0 = Eigen::RowVectorXd::Zero(pred.latent_dim);
  Eigen::RowVectorXd y0 = predict(pred, x, z0);
  Eigen::RowVectorXd yb =
      pred.latent_dim > 0 ? predict(pred, x, best_z_for_scene(pred, x, y)) : y0;

  auto out = open_out(path);
  const double s = 60.0, ox = 300.0, oy = 300.0;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='600' height='600'>\n";
  const char* colors[] = {"black", "crimson", "royalblue"};
  const Eigen::RowVectorXd* rows[] = {&y, &y0, &yb};
  for (int k = 0; k < 3; ++k) {
    for (int obj = 0; obj < n_objects; ++obj) {
      out << "<polyline fill='none' stroke='" << colors[k] << "' points='";
      for (int i = 0; i < p; ++i) {
        double px = (*rows[k])(3 * p * obj + i);
        double py = (*rows[k])(3 * p * obj + 2 * p + i);
        out << ox + s * px << "," << oy - s * py << " ";
      }
      out << "'/>\n";
    }
  }
  out << "<text x='10' y='20'>black: truth, red: z=0, blue: best z</text>\n";
  out << "</svg>\n";
}

int cmd_matrix_model(const MatrixModelOpts& o, const CLI::App& app) {
  MatrixModelOpts opt = o;
  json cfg = load_config(opt.config, {"seeds", "scenes", "points", "noise",
                                      "feature_dim", "latent_dim", "out", "plot"});
  apply(cfg, app, "seeds", opt.seeds);
  apply(cfg, app, "scenes", opt.scenes);
  apply(cfg, app, "points", opt.points);
  apply(cfg, app, "noise", opt.noise);
  apply(cfg, app, "feature_dim", opt.feature_dim);
  apply(cfg, app, "latent_dim", opt.latent_dim);
  apply(cfg, app, "out", opt.out);
  apply(cfg, app, "plot", opt.plot);
  if (opt.seeds < 1 || opt.scenes < 1) throw ConfigError("seeds/scenes must be >= 1");

  auto out = open_out(opt.out);
  out << "# matrix-model v1: seed, config, train_ssd, test_ssd\n";
  out << "seed,config,train_ssd,test_ssd\n";
  for (int seed = 1; seed <= opt.seeds; ++seed) {
    StackedData train = generate_scenes(opt.scenes, opt.points, opt.noise, seed);
    StackedData test = generate_scenes(opt.scenes, opt.points, opt.noise, seed + 1000);

    LinearPredictor p10 = fit_without_z(train, opt.feature_dim);
    LinearPredictor p13 = fit_without_z(train, opt.feature_dim + opt.latent_dim,
                                        /*truncate_features=*/false);
    auto [pz, Z] = fit_with_z(train, opt.feature_dim, opt.latent_dim);

    char line[256];
    std::snprintf(line, sizeof(line), "%d,%dD_no_z,%.6f,%.6f\n", seed,
                  opt.feature_dim, train_residual(p10, train), test_ssd(p10, test, false));
    out << line;
    std::snprintf(line, sizeof(line), "%d,%dD_no_z,%.6e,%.6f\n", seed,
                  opt.feature_dim + opt.latent_dim, train_residual(p13, train),
                  test_ssd(p13, test, false));
    out << line;
    std::snprintf(line, sizeof(line), "%d,%d+%dD_with_z,%.6f,%.6f\n", seed,
                  opt.feature_dim, opt.latent_dim, train_residual(pz, train, Z),
                  test_ssd(pz, test, true));
    out << line;

    if (seed == 1 && !opt.plot.empty())
      write_prediction_svg(opt.plot, pz, test, opt.points, 3);
  }
  std::printf("wrote %s\n", opt.out.c_str());
  return 0;
}

// -------------------------------------------------------------------- synth

struct SynthOpts {
  std::string config, suite = "all", out = "benchmark";
  int height = 192, width = 256;
  double contrast = 1.0;
};

int cmd_synth(const SynthOpts& o, const CLI::App& app) {
  SynthOpts opt = o;
  json cfg = load_config(opt.config, {"suite", "out", "height", "width", "contrast"});
  apply(cfg, app, "suite", opt.suite);
  apply(cfg, app, "out", opt.out);
  apply(cfg, app, "height", opt.height);
  apply(cfg, app, "width", opt.width);
  apply(cfg, app, "contrast", opt.contrast);

  std::string suites = opt.suite == "all" ? "abcd" : opt.suite;
  for (char s : suites) {
    if (s < 'a' || s > 'd') throw ConfigError(std::string("unknown suite: ") + s);
    SynthScene scene = benchmark_scene(s, opt.height, opt.width, opt.contrast);
    std::string dir = opt.out + "/" + std::string(1, s);
    write_scene_dir(scene, dir);
    std::printf("wrote %s (%zu cameras)\n", dir.c_str(), scene.cameras.size());
  }
  return 0;
}

// ------------------------------------------------------------ scene loading

struct LoadedScene {
  std::vector<PosedView> views;
  std::vector<DepthMap> gt;  // empty when no ground truth present
  std::vector<int> ids;
};

LoadedScene load_scene_dir(const std::string& dir) {
  if (!fs::exists(dir + "/poses.txt"))
    throw DataError("missing trajectory file: " + dir + "/poses.txt");
  LoadedScene out;
  for (const TrajectoryEntry& e : load_trajectory(dir + "/poses.txt")) {
    char name[64];
    std::snprintf(name, sizeof(name), "/view_%03d.pgm", e.id);
    std::string img_path = dir + name;
    if (!fs::exists(img_path)) throw DataError("missing image: " + img_path);
    Image img(load_pgm8(img_path));
    out.views.push_back(make_view(std::move(img), e.pose, e.K));
    out.ids.push_back(e.id);
    std::snprintf(name, sizeof(name), "/depth_%03d.pfm", e.id);
    std::string d_path = dir + name;
    if (fs::exists(d_path)) {
      Grid d = load_pfm(d_path);
      out.gt.emplace_back(d, BoolGrid::Constant(d.rows(), d.cols(), true));
    }
  }
  if (!out.gt.empty() && out.gt.size() != out.views.size())
    throw DataError("ground truth present for only some views in " + dir);
  return out;
}

// ---------------------------------------------------------------- fit-basis

struct FitBasisOpts {
  std::string config, in, out = "basis.bin", mode = "svd";
  int latent_dim = 192, coarse_rows = 12, coarse_cols = 16;
  double alpha = 0.0;  // 0 = mean depth of the stack
};

int cmd_fit_basis(const FitBasisOpts& o, const CLI::App& app) {
  FitBasisOpts opt = o;
  json cfg = load_config(opt.config, {"in", "out", "mode", "latent_dim",
                                      "coarse_rows", "coarse_cols", "alpha"});
  apply(cfg, app, "in", opt.in);
  apply(cfg, app, "out", opt.out);
  apply(cfg, app, "mode", opt.mode);
  apply(cfg, app, "latent_dim", opt.latent_dim);
  apply(cfg, app, "coarse_rows", opt.coarse_rows);
  apply(cfg, app, "coarse_cols", opt.coarse_cols);
  apply(cfg, app, "alpha", opt.alpha);

  if (opt.mode == "coarse") {
    if (opt.in.empty()) throw ConfigError("--in required to size the coarse basis");
    LoadedScene scene = load_scene_dir(opt.in);
    ShapeBasis basis = coarse_grid_basis(scene.views[0].rows(), scene.views[0].cols(),
                                         opt.coarse_rows, opt.coarse_cols);
    basis.trained_on = opt.in;
    save_basis(opt.out, basis);
  } else if (opt.mode == "svd") {
    if (opt.in.empty()) throw ConfigError("--in training directory required");
    std::vector<Grid> depths;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(opt.in))
      if (entry.path().extension() == ".pfm") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) depths.push_back(load_pfm(f.string()));
    if (depths.empty()) throw DataError("no .pfm depth maps in " + opt.in);
    double alpha = opt.alpha;
    if (alpha <= 0) {
      alpha = 0;
      for (const Grid& d : depths) alpha += d.mean();
      alpha /= double(depths.size());
    }
    std::vector<Grid> rhos;
    for (const Grid& d : depths) {
      DepthMap dm(d, BoolGrid::Constant(d.rows(), d.cols(), true));
      rhos.push_back(encode(dm, alpha).rho);
    }
    ShapeBasis basis = fit_basis(rhos, {}, opt.latent_dim);
    basis.trained_on = opt.in;
    save_basis(opt.out, basis);
  } else {
    throw ConfigError("mode must be 'svd' or 'coarse'");
  }
  std::printf("wrote %s\n", opt.out.c_str());
  return 0;
}

// ------------------------------------------------------------------- refine

struct RefineOpts {
  std::string config, scene, basis, out = "refined";
  std::string trace = "trace.csv";
  double lr = 1e-3, rel_tol = 1e-4, alpha = 0.0, overlap_min = 0.3, voxel_size = 0.0;
  int max_iters = 500, mask_refresh = 10, threads = 1, covis_n = 0;
  int coarse_rows = 12, coarse_cols = 16;
  bool optimize_alpha = false, raw_sum = false, median_scale = false;
};

int cmd_refine(const RefineOpts& o, const CLI::App& app) {
  RefineOpts opt = o;
  json cfg = load_config(
      opt.config, {"scene", "basis", "out", "trace", "lr", "rel_tol", "alpha",
                   "max_iters", "mask_refresh", "threads", "covis_n", "overlap_min",
                   "voxel_size", "coarse_rows", "coarse_cols", "optimize_alpha",
                   "raw_sum", "median_scale"});
  apply(cfg, app, "scene", opt.scene);
  apply(cfg, app, "basis", opt.basis);
  apply(cfg, app, "out", opt.out);
  apply(cfg, app, "trace", opt.trace);
  apply(cfg, app, "lr", opt.lr);
  apply(cfg, app, "rel_tol", opt.rel_tol);
  apply(cfg, app, "alpha", opt.alpha);
  apply(cfg, app, "max_iters", opt.max_iters);
  apply(cfg, app, "mask_refresh", opt.mask_refresh);
  apply(cfg, app, "threads", opt.threads);
  apply(cfg, app, "covis_n", opt.covis_n);
  apply(cfg, app, "overlap_min", opt.overlap_min);
  apply(cfg, app, "voxel_size", opt.voxel_size);
  apply(cfg, app, "coarse_rows", opt.coarse_rows);
  apply(cfg, app, "coarse_cols", opt.coarse_cols);
  apply(cfg, app, "optimize_alpha", opt.optimize_alpha);
  apply(cfg, app, "raw_sum", opt.raw_sum);
  apply(cfg, app, "median_scale", opt.median_scale);
  if (opt.scene.empty()) throw ConfigError("--scene directory required");

  LoadedScene scene = load_scene_dir(opt.scene);
  if (scene.views.size() < 2) throw DataError("need >= 2 posed views in " + opt.scene);

  // Per-view mean depth anchors; ground truth when present, else the flag.
  std::vector<double> alphas;
  for (size_t i = 0; i < scene.views.size(); ++i) {
    if (!scene.gt.empty()) {
      alphas.push_back(scene.gt[i].d.mean());
    } else if (opt.alpha > 0) {
      alphas.push_back(opt.alpha);
    } else {
      throw ConfigError("--alpha required when the scene has no ground truth");
    }
  }

  // Co-visible subset selection when more views exist than requested.
  std::vector<int> selected(scene.views.size());
  for (size_t i = 0; i < selected.size(); ++i) selected[i] = int(i);
  if (opt.covis_n >= 2 && opt.covis_n < int(scene.views.size())) {
    std::vector<PosedDepth> pd;
    std::map<int, Pose> poses;
    double med_depth = 0;
    for (size_t i = 0; i < scene.views.size(); ++i) {
      PosedDepth v;
      v.id = int(i);
      v.pose = scene.views[i].pose;
      v.qx = scene.views[i].qx;
      v.qy = scene.views[i].qy;
      v.depth = scene.gt.empty()
                    ? DepthMap(Grid::Constant(scene.views[i].rows(),
                                              scene.views[i].cols(), alphas[i]),
                               BoolGrid::Constant(scene.views[i].rows(),
                                                  scene.views[i].cols(), true))
                    : scene.gt[i];
      med_depth += alphas[i];
      pd.push_back(std::move(v));
      poses[int(i)] = scene.views[i].pose;
    }
    med_depth /= double(scene.views.size());
    double vox = opt.voxel_size > 0 ? opt.voxel_size : med_depth / 20.0;
    VoxelMap map = build_voxel_map(pd, vox);
    CovisibleSet set = select_covisible(map, poses, 0, opt.covis_n, opt.overlap_min);
    if (int(set.members.size()) < 2)
      throw DataError("covisibility selection found no usable neighbor views");
    selected = set.members;
  }

  CovisibleViews set;
  ShapeBasis basis;
  for (int id : selected) {
    set.views.push_back(scene.views[id]);
    set.alphas.push_back(alphas[id]);
  }
  if (!opt.basis.empty()) {
    if (!fs::exists(opt.basis)) throw DataError("basis file not found: " + opt.basis);
    basis = load_basis(opt.basis);
    if (basis.rows() != set.views[0].rows() || basis.cols() != set.views[0].cols())
      throw DataError("basis resolution does not match the scene images");
  } else {
    basis = coarse_grid_basis(set.views[0].rows(), set.views[0].cols(),
                              opt.coarse_rows, opt.coarse_cols);
  }
  set.basis = &basis;

  RefineConfig rc;
  rc.lr = opt.lr;
  rc.rel_tol = opt.rel_tol;
  rc.max_iters = opt.max_iters;
  rc.mask_refresh = opt.mask_refresh;
  rc.threads = opt.threads;
  rc.optimize_alpha = opt.optimize_alpha;
  rc.weights.raw_sum = opt.raw_sum;

  std::vector<Eigen::VectorXd> init(set.views.size(),
                                    Eigen::VectorXd::Zero(basis.latent_dim()));
  RefineResult res = refine_codes(set, init, rc);

  fs::create_directories(opt.out);
  {
    auto out = open_out(opt.out + "/" + opt.trace);
    out << "# refine trace v1: iteration, photo, depth, alpha, z_reg, w_reg, total\n";
    out << "iteration,photo,depth,alpha,z_reg,w_reg,total\n";
    for (size_t i = 0; i < res.trace.size(); ++i) {
      const LossBreakdown& b = res.trace[i];
      char line[256];
      std::snprintf(line, sizeof(line), "%zu,%.10e,%.10e,%.10e,%.10e,%.10e,%.10e\n",
                    i, b.photo, b.depth, b.alpha, b.z_reg, b.w_reg, b.total);
      out << line;
    }
  }

  DecodedSet dec = decode_set(set, res.z);
  for (size_t i = 0; i < dec.depth.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "/depth_%03d.pfm", selected[i]);
    save_pfm(opt.out + name, dec.depth[i].d);
  }

  if (!scene.gt.empty()) {
    auto out = open_out(opt.out + "/metrics.csv");
    out << "# metrics v1: frame, rmse, abs_rel, sq_rel, si_rmse, d1, d2, d3, scale, n\n";
    out << "frame,rmse,abs_rel,sq_rel,si_rmse,delta1,delta2,delta3,scale,n_pixels\n";
    std::vector<MetricReport> reports;
    for (size_t i = 0; i < dec.depth.size(); ++i) {
      MetricReport r = evaluate(dec.depth[i], scene.gt[selected[i]], opt.median_scale);
      reports.push_back(r);
      char line[256];
      std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f,%.4f,%.6f,%ld\n",
                    selected[i], r.rmse, r.abs_rel, r.sq_rel, r.si_rmse, r.delta_acc[0],
                    r.delta_acc[1], r.delta_acc[2], r.scale, r.n_pixels);
      out << line;
    }
    MetricReport m = mean_report(reports);
    char line[256];
    std::snprintf(line, sizeof(line), "mean,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f,%.4f,%.6f,%ld\n",
                  m.rmse, m.abs_rel, m.sq_rel, m.si_rmse, m.delta_acc[0], m.delta_acc[1],
                  m.delta_acc[2], m.scale, m.n_pixels);
    out << line;
  } else {
    std::printf("no ground truth: metrics skipped, losses in %s\n", opt.trace.c_str());
  }

  if (res.diverged) throw Divergence("optimization diverged; trace written to " + opt.out);
  std::printf("wrote %s (%d iterations, final loss %.6e)\n", opt.out.c_str(),
              res.iterations, res.trace.empty() ? 0.0 : res.trace.back().total);
  return 0;
}

// --------------------------------------------------------------------- eval

struct EvalOpts {
  std::string config, pred, gt, out = "eval.csv";
  bool median_scale = false;
};

int cmd_eval(const EvalOpts& o, const CLI::App& app) {
  EvalOpts opt = o;
  json cfg = load_config(opt.config, {"pred", "gt", "out", "median_scale"});
  apply(cfg, app, "pred", opt.pred);
  apply(cfg, app, "gt", opt.gt);
  apply(cfg, app, "out", opt.out);
  apply(cfg, app, "median_scale", opt.median_scale);
  if (opt.pred.empty() || opt.gt.empty()) throw ConfigError("--pred and --gt required");

  auto frames_of = [](const std::string& dir) {
    std::map<std::string, fs::path> frames;
    if (!fs::exists(dir)) throw DataError("directory not found: " + dir);
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".pfm")
        frames[entry.path().stem().string()] = entry.path();
    return frames;
  };
  auto pred_frames = frames_of(opt.pred);
  auto gt_frames = frames_of(opt.gt);
  std::string missing;
  for (const auto& [id, path] : pred_frames)
    if (!gt_frames.count(id)) missing += " " + id;
  for (const auto& [id, path] : gt_frames)
    if (!pred_frames.count(id)) missing += " " + id;
  if (!missing.empty()) throw DataError("frame id mismatch:" + missing);
  if (pred_frames.empty()) throw DataError("no frames found in " + opt.pred);

  auto out = open_out(opt.out);
  out << "# eval v1: frame, rmse, abs_rel, sq_rel, si_rmse, d1, d2, d3, scale, n\n";
  out << "frame,rmse,abs_rel,sq_rel,si_rmse,delta1,delta2,delta3,scale,n_pixels\n";
  std::vector<MetricReport> reports;
  for (const auto& [id, path] : pred_frames) {
    Grid p = load_pfm(path.string());
    Grid g = load_pfm(gt_frames.at(id).string());
    DepthMap pm(p, BoolGrid::Constant(p.rows(), p.cols(), true));
    DepthMap gm(g, BoolGrid::Constant(g.rows(), g.cols(), true));
    MetricReport r = evaluate(pm, gm, opt.median_scale);
    reports.push_back(r);
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f,%.4f,%.6f,%ld\n",
                  id.c_str(), r.rmse, r.abs_rel, r.sq_rel, r.si_rmse, r.delta_acc[0],
                  r.delta_acc[1], r.delta_acc[2], r.scale, r.n_pixels);
    out << line;
  }
  MetricReport m = mean_report(reports);
  char line[256];
  std::snprintf(line, sizeof(line), "mean,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f,%.4f,%.6f,%ld\n",
                m.rmse, m.abs_rel, m.sq_rel, m.si_rmse, m.delta_acc[0], m.delta_acc[1],
                m.delta_acc[2], m.scale, m.n_pixels);
  out << line;
  std::printf("wrote %s (%zu frames)\n", opt.out.c_str(), reports.size());
  return 0;
}

// -------------------------------------------------------------------- covis

struct CovisOpts {
  std::string config, scene, out;
  double voxel_size = 0.0, overlap_min = 0.3;
  int n = 3, reference = 0;
};

int cmd_covis(const CovisOpts& o, const CLI::App& app) {
  CovisOpts opt = o;
  json cfg = load_config(opt.config,
                         {"scene", "out", "voxel_size", "overlap_min", "n", "reference"});
  apply(cfg, app, "scene", opt.scene);
  apply(cfg, app, "out", opt.out);
  apply(cfg, app, "voxel_size", opt.voxel_size);
  apply(cfg, app, "overlap_min", opt.overlap_min);
  apply(cfg, app, "n", opt.n);
  apply(cfg, app, "reference", opt.reference);
  if (opt.scene.empty()) throw ConfigError("--scene directory required");

  LoadedScene scene = load_scene_dir(opt.scene);
  if (scene.gt.empty()) throw DataError("covis needs depth maps: " + opt.scene);
  std::vector<PosedDepth> pd;
  std::map<int, Pose> poses;
  std::vector<double> depths_flat;
  for (size_t i = 0; i < scene.views.size(); ++i) {
    PosedDepth v;
    v.id = int(i);
    v.pose = scene.views[i].pose;
    v.qx = scene.views[i].qx;
    v.qy = scene.views[i].qy;
    v.depth = scene.gt[i];
    for (int k = 0; k < v.depth.d.size(); ++k)
      if (v.depth.valid.data()[k]) depths_flat.push_back(v.depth.d.data()[k]);
    pd.push_back(std::move(v));
    poses[int(i)] = scene.views[i].pose;
  }
  std::nth_element(depths_flat.begin(), depths_flat.begin() + depths_flat.size() / 2,
                   depths_flat.end());
  double vox = opt.voxel_size > 0 ? opt.voxel_size
                                  : depths_flat[depths_flat.size() / 2] / 20.0;
  VoxelMap map = build_voxel_map(pd, vox);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!opt.out.empty()) {
    file = open_out(opt.out);
    os = &file;
  }
  std::vector<int> refs;
  if (opt.reference >= 0) {
    if (opt.reference >= int(scene.views.size()))
      throw DataError("reference view out of range");
    refs.push_back(opt.reference);
  } else {
    for (size_t i = 0; i < scene.views.size(); ++i) refs.push_back(int(i));
  }
  for (int ref : refs) {
    CovisibleSet set = select_covisible(map, poses, ref, opt.n, opt.overlap_min);
    json j;
    j["reference"] = set.reference;
    j["members"] = set.members;
    j["overlaps"] = set.overlaps;
    j["parallaxes"] = set.parallaxes;
    j["complete"] = set.complete;
    (*os) << j.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent depth-map refinement experiments"};
  app.require_subcommand(1);

  MatrixModelOpts mm;
  CLI::App* c_mm = app.add_subcommand("matrix-model", "orthographic matrix-model study");
  c_mm->add_option("--config", mm.config);
  c_mm->add_option("--seeds", mm.seeds);
  c_mm->add_option("--scenes", mm.scenes);
  c_mm->add_option("--points", mm.points);
  c_mm->add_option("--noise", mm.noise);
  c_mm->add_option("--feature_dim", mm.feature_dim);
  c_mm->add_option("--latent_dim", mm.latent_dim);
  c_mm->add_option("--out", mm.out);
  c_mm->add_option("--plot", mm.plot);

  SynthOpts sy;
  CLI::App* c_sy = app.add_subcommand("synth", "render benchmark scenes");
  c_sy->add_option("--config", sy.config);
  c_sy->add_option("--suite", sy.suite);
  c_sy->add_option("--out", sy.out);
  c_sy->add_option("--height", sy.height);
  c_sy->add_option("--width", sy.width);
  c_sy->add_option("--contrast", sy.contrast);

  FitBasisOpts fb;
  CLI::App* c_fb = app.add_subcommand("fit-basis", "fit or build a shape basis");
  c_fb->add_option("--config", fb.config);
  c_fb->add_option("--in", fb.in);
  c_fb->add_option("--out", fb.out);
  c_fb->add_option("--mode", fb.mode);
  c_fb->add_option("--latent_dim", fb.latent_dim);
  c_fb->add_option("--coarse_rows", fb.coarse_rows);
  c_fb->add_option("--coarse_cols", fb.coarse_cols);
  c_fb->add_option("--alpha", fb.alpha);

  RefineOpts rf;
  CLI::App* c_rf = app.add_subcommand("refine", "refine latent codes on a scene");
  c_rf->add_option("--config", rf.config);
  c_rf->add_option("--scene", rf.scene);
  c_rf->add_option("--basis", rf.basis);
  c_rf->add_option("--out", rf.out);
  c_rf->add_option("--trace", rf.trace);
  c_rf->add_option("--lr", rf.lr);
  c_rf->add_option("--rel_tol", rf.rel_tol);
  c_rf->add_option("--alpha", rf.alpha);
  c_rf->add_option("--max_iters", rf.max_iters);
  c_rf->add_option("--mask_refresh", rf.mask_refresh);
  c_rf->add_option("--threads", rf.threads);
  c_rf->add_option("--covis_n", rf.covis_n);
  c_rf->add_option("--overlap_min", rf.overlap_min);
  c_rf->add_option("--voxel_size", rf.voxel_size);
  c_rf->add_option("--coarse_rows", rf.coarse_rows);
  c_rf->add_option("--coarse_cols", rf.coarse_cols);
  c_rf->add_flag("--optimize_alpha", rf.optimize_alpha);
  c_rf->add_flag("--raw_sum", rf.raw_sum);
  c_rf->add_flag("--median_scale", rf.median_scale);

  EvalOpts ev;
  CLI::App* c_ev = app.add_subcommand("eval", "evaluate predicted depths");
  c_ev->add_option("--config", ev.config);
  c_ev->add_option("--pred", ev.pred);
  c_ev->add_option("--gt", ev.gt);
  c_ev->add_option("--out", ev.out);
  c_ev->add_flag("--median_scale", ev.median_scale);

  CovisOpts cv;
  CLI::App* c_cv = app.add_subcommand("covis", "co-visible set selection");
  c_cv->add_option("--config", cv.config);
  c_cv->add_option("--scene", cv.scene);
  c_cv->add_option("--out", cv.out);
  c_cv->add_option("--voxel_size", cv.voxel_size);
  c_cv->add_option("--overlap_min", cv.overlap_min);
  c_cv->add_option("--n", cv.n);
  c_cv->add_option("--reference", cv.reference)->default_val(-1);

  try {
    app.parse(argc, argv);
    if (c_mm->parsed()) return cmd_matrix_model(mm, *c_mm);
    if (c_sy->parsed()) return cmd_synth(sy, *c_sy);
    if (c_fb->parsed()) return cmd_fit_basis(fb, *c_fb);
    if (c_rf->parsed()) return cmd_refine(rf, *c_rf);
    if (c_ev->parsed()) return cmd_eval(ev, *c_ev);
    if (c_cv->parsed()) return cmd_covis(cv, *c_cv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Divergence& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 4;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  }
  return 0;
}

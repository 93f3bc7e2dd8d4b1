#include "depthopt/optimizer.h"

#include <cmath>
#include <future>
#include <sstream>

#include "depthopt/depth_codec.h"
#include "depthopt/geometry.h"

namespace depthopt {

void adamax_step(AdaMaxState& state, Eigen::VectorXd& params,
                 const Eigen::VectorXd& grad) {
  require(params.size() == grad.size(), "adamax_step: shape mismatch");
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.u = Eigen::VectorXd::Zero(params.size());
  }
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad(i))) {
      std::ostringstream msg;
      msg << "adamax_step: non-finite gradient at index " << i;
      throw std::runtime_error(msg.str());
    }
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.u = (state.beta2 * state.u).cwiseMax(grad.cwiseAbs());
  const double bias = 1.0 - std::pow(state.beta1, double(state.step));
  params -= (state.lr / bias) * (state.m.array() / (state.u.array() + state.eps)).matrix();
}

DecodedSet decode_set(const CovisibleViews& set,
                      const std::vector<Eigen::VectorXd>& codes) {
  require(set.basis != nullptr, "decode_set: missing basis");
  require(codes.size() == set.views.size() && set.alphas.size() == set.views.size(),
          "decode_set: size mismatch");
  DecodedSet dec;
  for (size_t i = 0; i < set.views.size(); ++i) {
    DecodeResult d = decode(*set.basis, codes[i]);
    TransformedDepth t;
    t.rho = std::move(d.rho);
    t.alpha = set.alphas[i];
    t.valid = BoolGrid::Constant(t.rho.rows(), t.rho.cols(), true);
    dec.clamped.push_back(std::move(d.clamped));
    dec.depth.push_back(decode(t));
    dec.rho.push_back(std::move(t));
  }
  return dec;
}

namespace {

// Everything a pair term contributes, computed independently per ordered
// pair and reduced in fixed order for bit-stable results.
struct PairPartial {
  double photo = 0.0;
  double depth = 0.0;
  long kept = 0;
  Grid grad_d_i;       // dL/dD_i(p)
  Grid grad_d_j;       // dL/dD_j at sampled taps
  double grad_alpha_j = 0.0;  // explicit 1/alpha_j factor
  bool fully_masked = false;
};

struct PairGeometry {
  Grid u, v;           // pixel coordinates in camera j
  Grid d_ij;           // projected depth
  BoolGrid usable;     // chirality and all four taps inside image j
};

PairGeometry project_pair(const PosedView& vi, const PosedView& vj, const Grid& depth_i) {
  const int h = vi.rows(), w = vi.cols();
  const int hj = vj.rows(), wj = vj.cols();
  const RelativeTransform T = RelativeTransform::between(vi.pose, vj.pose);
  PairGeometry g;
  g.u = Grid::Zero(h, w);
  g.v = Grid::Zero(h, w);
  g.d_ij = Grid::Zero(h, w);
  g.usable = BoolGrid::Constant(h, w, false);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Eigen::Vector3d X(vi.qx(r, c) * depth_i(r, c), vi.qy(r, c) * depth_i(r, c),
                              depth_i(r, c));
      const Eigen::Vector3d Y = T.R * X + T.t;
      g.d_ij(r, c) = Y.z();
      if (Y.z() <= 0.0) continue;
      const double u = vj.K.fx * (Y.x() / Y.z()) + vj.K.cx;
      const double v = vj.K.fy * (Y.y() / Y.z()) + vj.K.cy;
      g.u(r, c) = u;
      g.v(r, c) = v;
      const int x0 = int(std::floor(u)), y0 = int(std::floor(v));
      g.usable(r, c) = x0 >= 0 && y0 >= 0 && x0 + 1 < wj && y0 + 1 < hj;
    }
  }
  return g;
}

// Channel-mean image, cached per view for photometric terms.
Grid mean_image(const Image& img) {
  require(img.num_channels() >= 1, "mean_image: empty image");
  Grid m = img.channels[0];
  for (int ch = 1; ch < img.num_channels(); ++ch) m += img.channels[ch];
  return m / double(img.num_channels());
}

PairPartial pair_term(const PosedView& vi, const PosedView& vj, const Grid& depth_i,
                      const Grid& mean_i, const Grid& mean_j, const Grid& depth_j,
                      double alpha_j, const BoolGrid* frozen_mask,
                      const RefineConfig& cfg, bool with_gradients) {
  const int h = vi.rows(), w = vi.cols();
  const RelativeTransform T = RelativeTransform::between(vi.pose, vj.pose);
  const LossWeights& lw = cfg.weights;

  PairPartial out;
  if (with_gradients) {
    out.grad_d_i = Grid::Zero(h, w);
    out.grad_d_j = Grid::Zero(depth_j.rows(), depth_j.cols());
  }

  // First pass: kept count (the per-pixel normalization needs it up front).
  PairGeometry g = project_pair(vi, vj, depth_i);
  long kept = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (g.usable(r, c) && (!frozen_mask || (*frozen_mask)(r, c))) ++kept;
  out.kept = kept;
  if (kept == 0) {
    out.fully_masked = true;
    return out;
  }
  const double photo_scale = lw.lambda_photo * (lw.raw_sum ? 1.0 : 1.0 / double(kept));
  const double depth_scale = lw.lambda_depth * (lw.raw_sum ? 1.0 : 1.0 / double(kept));

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!g.usable(r, c)) continue;
      if (frozen_mask && !(*frozen_mask)(r, c)) continue;
      const double u = g.u(r, c), v = g.v(r, c);
      const int x0 = int(std::floor(u)), y0 = int(std::floor(v));
      const double fx = u - x0, fy = v - y0;
      const double w00 = (1 - fy) * (1 - fx), w01 = (1 - fy) * fx;
      const double w10 = fy * (1 - fx), w11 = fy * fx;

      const double img_s = w00 * mean_j(y0, x0) + w01 * mean_j(y0, x0 + 1) +
                           w10 * mean_j(y0 + 1, x0) + w11 * mean_j(y0 + 1, x0 + 1);
      const double dep_s = w00 * depth_j(y0, x0) + w01 * depth_j(y0, x0 + 1) +
                           w10 * depth_j(y0 + 1, x0) + w11 * depth_j(y0 + 1, x0 + 1);

      const double rp = img_s - mean_i(r, c);
      const double rd = (dep_s - g.d_ij(r, c)) / alpha_j;
      out.photo += photo_scale * huber(rp, lw.huber_delta_photo);
      out.depth += depth_scale * huber(rd, lw.huber_delta_depth);

      if (!with_gradients) continue;
      const double gp = photo_scale * huber_grad(rp, lw.huber_delta_photo);
      const double gd = depth_scale * huber_grad(rd, lw.huber_delta_depth);

      // Sampled-grid derivatives with frozen taps.
      const double img_du = (1 - fy) * (mean_j(y0, x0 + 1) - mean_j(y0, x0)) +
                            fy * (mean_j(y0 + 1, x0 + 1) - mean_j(y0 + 1, x0));
      const double img_dv = (1 - fx) * (mean_j(y0 + 1, x0) - mean_j(y0, x0)) +
                            fx * (mean_j(y0 + 1, x0 + 1) - mean_j(y0, x0 + 1));
      const double dep_du = (1 - fy) * (depth_j(y0, x0 + 1) - depth_j(y0, x0)) +
                            fy * (depth_j(y0 + 1, x0 + 1) - depth_j(y0 + 1, x0));
      const double dep_dv = (1 - fx) * (depth_j(y0 + 1, x0) - depth_j(y0, x0)) +
                            fx * (depth_j(y0 + 1, x0 + 1) - depth_j(y0, x0 + 1));

      const double dL_du = gp * img_du + gd * dep_du / alpha_j;
      const double dL_dv = gp * img_dv + gd * dep_dv / alpha_j;

      // Chain to D_i(p) through Y = T * (q;1) D.
      const Eigen::Vector3d gvec = T.R * Eigen::Vector3d(vi.qx(r, c), vi.qy(r, c), 1.0);
      const double D = depth_i(r, c);
      const Eigen::Vector3d Y =
          T.R * Eigen::Vector3d(vi.qx(r, c) * D, vi.qy(r, c) * D, D) + T.t;
      const double inv_z = 1.0 / Y.z();
      const double da_dD = (gvec.x() - Y.x() * inv_z * gvec.z()) * inv_z;
      const double db_dD = (gvec.y() - Y.y() * inv_z * gvec.z()) * inv_z;
      out.grad_d_i(r, c) += dL_du * vj.K.fx * da_dD + dL_dv * vj.K.fy * db_dD;
      out.grad_d_i(r, c) += gd * (-1.0 / alpha_j) * gvec.z();

      // D_j contributes through the sampled taps.
      const double gj = gd / alpha_j;
      out.grad_d_j(y0, x0) += gj * w00;
      out.grad_d_j(y0, x0 + 1) += gj * w01;
      out.grad_d_j(y0 + 1, x0) += gj * w10;
      out.grad_d_j(y0 + 1, x0 + 1) += gj * w11;

      // Explicit 1/alpha_j factor of the depth residual.
      out.grad_alpha_j += gd * (-rd / alpha_j);
    }
  }
  return out;
}

}  // namespace

PairMasks compute_masks(const CovisibleViews& set, const DecodedSet& dec,
                        const RefineConfig& cfg) {
  const int M = int(set.views.size());
  PairMasks pm;
  pm.num_views = M;
  pm.masks.resize(size_t(M) * M);
  for (int i = 0; i < M; ++i) {
    const PosedView& vi = set.views[i];
    const PointGrid Xi = backproject(vi.qx, vi.qy, dec.depth[i]);
    const NormalGrid normals = estimate_normals(Xi);
    const BoolGrid view_angle = viewing_angle_mask(normals, Xi, cfg.viewing_angle_max_deg);
    for (int j = 0; j < M; ++j) {
      if (j == i) continue;
      const PairGeometry g = project_pair(vi, set.views[j], dec.depth[i].d);
      BoolGrid chirality(g.d_ij.rows(), g.d_ij.cols());
      for (Eigen::Index r = 0; r < g.d_ij.rows(); ++r)
        for (Eigen::Index c = 0; c < g.d_ij.cols(); ++c)
          chirality(r, c) = g.d_ij(r, c) > 0.0;
      const BoolGrid bounds = g.usable;
      const SampleResult dj = sample_bilinear(dec.depth[j].d, g.u, g.v);
      const BoolGrid valid = bounds && chirality;
      const BoolGrid occ = occlusion_mask(dj.values, g.d_ij, valid, cfg.occlusion);
      pm.masks[size_t(i) * M + j] = combine(bounds, chirality, occ, view_angle);
    }
  }
  return pm;
}

namespace {

TotalLoss evaluate_impl(const CovisibleViews& set,
                        const std::vector<Eigen::VectorXd>& codes,
                        const PairMasks& masks, const RefineConfig& cfg,
                        bool with_gradients) {
  const int M = int(set.views.size());
  require(M >= 2, "evaluate_total_loss: need at least two views");
  require(int(codes.size()) == M, "evaluate_total_loss: code count mismatch");
  require(masks.num_views == M, "evaluate_total_loss: mask set mismatch");

  const DecodedSet dec = decode_set(set, codes);
  std::vector<Grid> means;
  means.reserve(M);
  for (const PosedView& v : set.views) means.push_back(mean_image(v.image));

  // Ordered pair list, fixed order.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (i != j) pairs.emplace_back(i, j);

  std::vector<PairPartial> partials(pairs.size());
  auto run_pair = [&](size_t k) {
    const auto [i, j] = pairs[k];
    partials[k] = pair_term(set.views[i], set.views[j], dec.depth[i].d, means[i],
                            means[j], dec.depth[j].d, set.alphas[j],
                            &masks.at(i, j).combined, cfg, with_gradients);
  };
  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (size_t k = 0; k < pairs.size(); ++k) run_pair(k);
  } else {
    std::vector<std::future<void>> futs;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t)
      futs.push_back(std::async(std::launch::async, [&] {
        for (size_t k = next.fetch_add(1); k < pairs.size(); k = next.fetch_add(1))
          run_pair(k);
      }));
    for (auto& f : futs) f.get();
  }

  TotalLoss out;
  std::vector<Grid> grad_d(with_gradients ? M : 0);
  if (with_gradients) {
    for (int i = 0; i < M; ++i)
      grad_d[i] = Grid::Zero(set.views[i].rows(), set.views[i].cols());
    out.grad_alpha.assign(M, 0.0);
  }
  for (size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const PairPartial& p = partials[k];
    out.breakdown.photo += p.photo;
    out.breakdown.depth += p.depth;
    out.breakdown.pixels_used.push_back(p.kept);
    if (with_gradients && !p.fully_masked) {
      grad_d[i] += p.grad_d_i;
      grad_d[j] += p.grad_d_j;
      out.grad_alpha[j] += p.grad_alpha_j;
    }
  }

  // Per-view terms: alpha consistency and code regularization; then the
  // chain from dL/dD through the codec and decoder to z.
  for (int i = 0; i < M; ++i) {
    const Grid& rho = dec.rho[i].rho;
    const double alpha = set.alphas[i];
    const long n = rho.size();
    double la = 0.0, mean_ratio = 0.0;
    if (cfg.include_alpha_loss) {
      mean_ratio = ((1.0 - rho) / rho).sum() / double(n);
      la = (1.0 - mean_ratio) * (1.0 - mean_ratio);
      out.breakdown.alpha += la;
    }
    out.breakdown.z_reg += cfg.weights.lambda_z * codes[i].squaredNorm();
    if (!with_gradients) continue;

    Grid grad_rho = grad_d[i] * (-alpha / (rho * rho));
    if (cfg.include_alpha_loss)
      grad_rho += 2.0 * (1.0 - mean_ratio) / (double(n) * rho * rho);
    // Clamp active set is frozen: saturated pixels do not move with z.
    for (Eigen::Index r = 0; r < grad_rho.rows(); ++r)
      for (Eigen::Index c = 0; c < grad_rho.cols(); ++c)
        if (dec.clamped[i](r, c)) grad_rho(r, c) = 0.0;

    const ShapeBasis& basis = *set.basis;
    Eigen::VectorXd gz(basis.latent_dim());
    const Eigen::Map<const Eigen::VectorXd> gflat(grad_rho.data(), grad_rho.size());
    for (int k = 0; k < basis.latent_dim(); ++k) {
      const Eigen::Map<const Eigen::VectorXd> bflat(basis.basis[k].data(),
                                                    basis.basis[k].size());
      gz(k) = gflat.dot(bflat);
    }
    gz += 2.0 * cfg.weights.lambda_z * codes[i];
    out.grad_z.push_back(std::move(gz));

    // dD/dalpha = (1 - rho)/rho.
    out.grad_alpha[i] += (grad_d[i] * ((1.0 - rho) / rho)).sum();
  }

  out.breakdown.w_reg = 0.0;  // the basis is closed-form fitted, never optimized
  out.breakdown.total = out.breakdown.photo + out.breakdown.depth +
                        out.breakdown.alpha + out.breakdown.z_reg + out.breakdown.w_reg;
  return out;
}

}  // namespace

TotalLoss evaluate_total_loss(const CovisibleViews& set,
                              const std::vector<Eigen::VectorXd>& codes,
                              const PairMasks& masks, const RefineConfig& cfg,
                              bool with_gradients) {
  return evaluate_impl(set, codes, masks, cfg, with_gradients);
}

RefineResult refine_codes(const CovisibleViews& set,
                          const std::vector<Eigen::VectorXd>& init_z,
                          const RefineConfig& cfg) {
  const int M = int(set.views.size());
  require(M >= 2, "refine_codes: need a co-visible set of at least two views");
  require(set.basis != nullptr, "refine_codes: missing basis");
  require(int(init_z.size()) == M, "refine_codes: init code count mismatch");
  const int dim = set.basis->latent_dim();
  for (const auto& z : init_z)
    require(int(z.size()) == dim, "refine_codes: code dimension mismatch");

  RefineResult res;
  res.z = init_z;
  res.alphas = set.alphas;
  if (cfg.max_iters == 0) {
    // Pass-through: report the loss at the initial codes without stepping.
    PairMasks m0 = compute_masks(set, decode_set(set, init_z), cfg);
    res.trace.push_back(
        evaluate_impl(set, init_z, m0, cfg, /*with_gradients=*/false).breakdown);
    return res;
  }

  const int n_params = M * dim + (cfg.optimize_alpha ? M : 0);
  Eigen::VectorXd params(n_params);
  for (int i = 0; i < M; ++i) params.segment(size_t(i) * dim, dim) = init_z[i];
  if (cfg.optimize_alpha)
    for (int i = 0; i < M; ++i) params(size_t(M) * dim + i) = set.alphas[i];

  AdaMaxState state;
  state.lr = cfg.lr;
  state.beta1 = cfg.beta1;
  state.beta2 = cfg.beta2;
  state.eps = cfg.eps;

  CovisibleViews cur = set;
  auto unpack = [&](const Eigen::VectorXd& p, std::vector<Eigen::VectorXd>& z) {
    for (int i = 0; i < M; ++i) z[i] = p.segment(size_t(i) * dim, dim);
    if (cfg.optimize_alpha)
      for (int i = 0; i < M; ++i) cur.alphas[i] = std::max(p(size_t(M) * dim + i), 1e-6);
  };

  std::vector<Eigen::VectorXd> codes = init_z;
  PairMasks masks;
  double initial = 0.0, prev = 0.0, best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_params = params;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    unpack(params, codes);
    if (iter % std::max(1, cfg.mask_refresh) == 0)
      masks = compute_masks(cur, decode_set(cur, codes), cfg);

    TotalLoss tl = evaluate_impl(cur, codes, masks, cfg, /*with_gradients=*/true);
    const double total = tl.breakdown.total;
    res.trace.push_back(tl.breakdown);
    res.iterations = iter + 1;

    if (iter == 0) initial = total;
    if (total < best) {
      best = total;
      best_params = params;
    }
    if (!std::isfinite(total) || total > cfg.divergence_factor * std::max(initial, 1e-12)) {
      res.diverged = true;
      break;
    }
    if (iter > 0 && std::abs(total - prev) / std::max(prev, 1e-12) < cfg.rel_tol) {
      res.converged = true;
      break;
    }
    prev = total;

    Eigen::VectorXd grad(n_params);
    for (int i = 0; i < M; ++i) grad.segment(size_t(i) * dim, dim) = tl.grad_z[i];
    if (cfg.optimize_alpha)
      for (int i = 0; i < M; ++i) grad(size_t(M) * dim + i) = tl.grad_alpha[i];
    adamax_step(state, params, grad);
  }

  unpack(best_params, res.z);
  res.alphas = cur.alphas;
  if (cfg.optimize_alpha)
    for (int i = 0; i < M; ++i) res.alphas[i] = std::max(best_params(size_t(M) * dim + i), 1e-6);
  return res;
}

}  // namespace depthopt

#include "depthopt/latent_decoder.h"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "depthopt/depth_codec.h"

namespace depthopt {

DecodeResult decode(const ShapeBasis& basis, const Eigen::VectorXd& z) {
  require(int(z.size()) == basis.latent_dim(), "decode: latent dimension mismatch");
  DecodeResult out;
  out.rho = basis.mean_rho;
  for (int k = 0; k < basis.latent_dim(); ++k) out.rho += z(k) * basis.basis[k];
  out.clamped = BoolGrid::Constant(out.rho.rows(), out.rho.cols(), false);
  for (Eigen::Index r = 0; r < out.rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.rho.cols(); ++c) {
      if (out.rho(r, c) < kRhoMin) {
        out.rho(r, c) = kRhoMin;
        out.clamped(r, c) = true;
      } else if (out.rho(r, c) > 1.0) {
        out.rho(r, c) = 1.0;
        out.clamped(r, c) = true;
      }
    }
  }
  return out;
}

ShapeBasis fit_basis(const std::vector<Grid>& train_rho,
                     const std::vector<Eigen::VectorXd>& features,
                     int latent_dim) {
  require(!train_rho.empty(), "fit_basis: no training grids");
  require(latent_dim >= 0, "fit_basis: negative latent_dim");
  const int n = int(train_rho.size());
  const int h = int(train_rho[0].rows());
  const int w = int(train_rho[0].cols());
  for (const Grid& g : train_rho)
    require(g.rows() == h && g.cols() == w, "fit_basis: grid shapes differ");
  require(features.empty() || int(features.size()) == n,
          "fit_basis: feature count mismatch");

  Eigen::MatrixXd stack(n, h * w);
  for (int i = 0; i < n; ++i)
    stack.row(i) = Eigen::Map<const Eigen::VectorXd>(train_rho[i].data(), h * w);

  ShapeBasis out;
  out.mode = BasisMode::kSvd;
  out.coarse_rows = out.coarse_cols = 0;
  const Eigen::RowVectorXd mean = stack.colwise().mean();
  out.mean_rho = Eigen::Map<const Grid>(mean.data(), h, w);

  // Residual stack: centered, or with the feature-explained component
  // removed so the basis spans only the knowledge gap.
  Eigen::MatrixXd residual = stack.rowwise() - mean;
  if (!features.empty()) {
    const int fdim = int(features[0].size());
    Eigen::MatrixXd A(n, fdim);
    for (int i = 0; i < n; ++i) A.row(i) = features[i].transpose();
    A.rowwise() -= A.colwise().mean().eval();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    residual -= A * cod.solve(residual);
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(residual, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  int k = 0;
  while (k < latent_dim && k < sv.size() && sv(k) > 1e-12 * std::max(sv(0), 1e-300)) ++k;
  // Fewer samples than latent_dim: reduced rank, caller sees a smaller basis.
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd col = svd.matrixV().col(i);
    out.basis.push_back(Eigen::Map<const Grid>(col.data(), h, w));
  }
  return out;
}

ShapeBasis coarse_grid_basis(int h, int w, int coarse_rows, int coarse_cols) {
  require(h >= 2 && w >= 2 && coarse_rows >= 2 && coarse_cols >= 2,
          "coarse_grid_basis: dimensions too small");
  ShapeBasis out;
  out.mode = BasisMode::kCoarseGrid;
  out.coarse_rows = coarse_rows;
  out.coarse_cols = coarse_cols;
  out.mean_rho = Grid::Constant(h, w, 0.5);
  out.basis.assign(size_t(coarse_rows) * coarse_cols, Grid::Zero(h, w));
  for (int r = 0; r < h; ++r) {
    const double gr = double(r) * (coarse_rows - 1) / double(h - 1);
    const int r0 = std::min(int(gr), coarse_rows - 2);
    const double fr = gr - r0;
    for (int c = 0; c < w; ++c) {
      const double gc = double(c) * (coarse_cols - 1) / double(w - 1);
      const int c0 = std::min(int(gc), coarse_cols - 2);
      const double fc = gc - c0;
      out.basis[size_t(r0) * coarse_cols + c0](r, c) = (1 - fr) * (1 - fc);
      out.basis[size_t(r0) * coarse_cols + c0 + 1](r, c) = (1 - fr) * fc;
      out.basis[size_t(r0 + 1) * coarse_cols + c0](r, c) = fr * (1 - fc);
      out.basis[size_t(r0 + 1) * coarse_cols + c0 + 1](r, c) = fr * fc;
    }
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'D', 'P', 'S', 'B'};

void write_grid_f32(std::ofstream& out, const Grid& g) {
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      const float f = float(g(r, c));
      out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
  }
}

Grid read_grid_f32(std::ifstream& in, int h, int w) {
  Grid g(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      float f;
      in.read(reinterpret_cast<char*>(&f), sizeof(f));
      g(r, c) = f;
    }
  }
  return g;
}

void write_i32(std::ofstream& out, std::int32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::int32_t read_i32(std::ifstream& in) {
  std::int32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_basis(const std::string& path, const ShapeBasis& basis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_basis: cannot open " + path);
  out.write(kMagic, 4);
  write_i32(out, 1);  // version
  write_i32(out, basis.rows());
  write_i32(out, basis.cols());
  write_i32(out, basis.latent_dim());
  write_i32(out, basis.coarse_rows);
  write_i32(out, basis.coarse_cols);
  write_i32(out, basis.mode == BasisMode::kSvd ? 0 : 1);
  write_grid_f32(out, basis.mean_rho);
  for (const Grid& b : basis.basis) write_grid_f32(out, b);
  if (!out) throw std::runtime_error("save_basis: write failed for " + path);
}

ShapeBasis load_basis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_basis: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_basis: bad magic in " + path);
  const int version = read_i32(in);
  if (version != 1) throw std::runtime_error("load_basis: unsupported version");
  const int h = read_i32(in), w = read_i32(in), dim = read_i32(in);
  ShapeBasis basis;
  basis.coarse_rows = read_i32(in);
  basis.coarse_cols = read_i32(in);
  basis.mode = read_i32(in) == 0 ? BasisMode::kSvd : BasisMode::kCoarseGrid;
  basis.mean_rho = read_grid_f32(in, h, w);
  for (int k = 0; k < dim; ++k) basis.basis.push_back(read_grid_f32(in, h, w));
  if (!in) throw std::runtime_error("load_basis: truncated file " + path);
  return basis;
}

}  // namespace depthopt

#include "depthopt/linear_shape_model.h"

#include <cmath>
#include <limits>
#include <random>

#include "depthopt/types.h"

namespace depthopt {

namespace {

Eigen::BDCSVD<Eigen::MatrixXd> thin_svd(const Eigen::MatrixXd& A) {
  return Eigen::BDCSVD<Eigen::MatrixXd>(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

// Columns of U spanning the numerically significant singular directions.
int effective_rank(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0) return 0;
  const double thresh = rel_tol * sv(0);
  int r = 0;
  while (r < sv.size() && sv(r) > thresh) ++r;
  return r;
}

}  // namespace

std::vector<Eigen::Matrix3Xd> object_templates(int n_objects, int p_per_object) {
  require(n_objects >= 1 && p_per_object >= 4, "object_templates: bad dimensions");
  std::vector<Eigen::Matrix3Xd> objects;
  objects.reserve(n_objects);
  for (int k = 0; k < n_objects; ++k) {
    Eigen::Matrix3Xd S(3, p_per_object);
    // Polyline traced with object-specific frequencies so that the rows
    // s1, s2 and the all-ones vector stay linearly independent.
    const double w1 = 1.0 + 0.37 * k;
    const double w2 = 1.7 + 0.53 * k;
    const double w3 = 0.9 + 0.29 * k;
    for (int i = 0; i < p_per_object; ++i) {
      const double s = double(i) / double(p_per_object - 1);
      S(0, i) = std::cos(w1 * (2.0 * s - 1.0) + 0.3 * k) + 0.2 * s;
      S(1, i) = std::sin(w2 * (2.0 * s - 1.0) + 0.7 * k) - 0.1 * s;
      S(2, i) = 0.5 * std::sin(w3 * (2.0 * s - 1.0) + 0.2) + 0.25 * (k + 1);
    }
    objects.push_back(S);
  }
  return objects;
}

Eigen::MatrixXd object_block_matrix(const Eigen::Matrix3Xd& S) {
  const int p = int(S.cols());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(7, 3 * p);
  B.block(0, 0, 1, p) = S.row(0);
  B.block(1, 0, 1, p) = S.row(1);
  B.block(2, p, 1, p) = S.row(0);
  B.block(3, p, 1, p) = S.row(1);
  B.block(4, 2 * p, 1, p) = S.row(2);
  B.block(5, 0, 1, p).setOnes();
  B.block(6, p, 1, p).setOnes();
  return B;
}

StackedData generate_scenes(int n_scenes, int p_per_object, double noise_sigma,
                            std::uint64_t seed, int n_objects) {
  require(n_scenes >= 1, "generate_scenes: n_scenes must be >= 1");
  require(p_per_object >= 4, "generate_scenes: p_per_object must be >= 4");
  require(noise_sigma >= 0.0, "generate_scenes: negative noise_sigma");

  const auto objects = object_templates(n_objects, p_per_object);
  std::vector<Eigen::MatrixXd> blocks;
  for (const auto& S : objects) blocks.push_back(object_block_matrix(S));

  const int p = p_per_object;
  StackedData data;
  data.n_objects = n_objects;
  data.p_per_object = p;
  data.Y.resize(n_scenes, n_objects * 3 * p);
  data.X.resize(n_scenes, n_objects * 2 * p);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> trans(-1.0, 1.0);

  for (int i = 0; i < n_scenes; ++i) {
    for (int k = 0; k < n_objects; ++k) {
      const double th = angle(rng);
      const double a = std::cos(th), b = std::sin(th);
      const double t1 = trans(rng), t2 = trans(rng);
      Eigen::RowVectorXd v(7);
      v << a, -b, b, a, 1.0, t1, t2;
      const Eigen::RowVectorXd row = v * blocks[k];  // (w1 w2 w3)
      data.Y.block(i, k * 3 * p, 1, 3 * p) = row;
      // The projection drops w2 (the depth coordinates).
      data.X.block(i, k * 2 * p, 1, p) = row.segment(0, p);
      data.X.block(i, k * 2 * p + p, 1, p) = row.segment(2 * p, p);
    }
  }

  data.X_noisy = data.X;
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    for (Eigen::Index r = 0; r < data.X_noisy.rows(); ++r)
      for (Eigen::Index c = 0; c < data.X_noisy.cols(); ++c)
        data.X_noisy(r, c) += gauss(rng);
  }
  return data;
}

int numerical_rank(const Eigen::MatrixXd& A, double rel_tol) {
  const Eigen::VectorXd sv = thin_svd(A).singularValues();
  return effective_rank(sv, rel_tol);
}

double singular_gap(const Eigen::MatrixXd& A, int rank) {
  const Eigen::VectorXd sv = thin_svd(A).singularValues();
  require(rank >= 1 && rank <= sv.size(), "singular_gap: rank out of range");
  if (rank == sv.size()) return std::numeric_limits<double>::infinity();
  const double below = sv(rank);
  if (below <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(rank - 1) / below;
}

LinearPredictor fit_without_z(const StackedData& data, int feature_dim,
                              bool truncate_features) {
  const Eigen::MatrixXd& X = data.X_noisy;
  require(feature_dim >= 1, "fit_without_z: feature_dim must be >= 1");
  require(feature_dim <= std::min(X.rows(), X.cols()),
          "fit_without_z: feature_dim exceeds matrix dimensions");

  auto svd = thin_svd(X);
  const Eigen::VectorXd sv = svd.singularValues();
  const int rank_x = effective_rank(sv, 1e-12);
  require(feature_dim <= rank_x, "fit_without_z: feature_dim exceeds rank of X");

  LinearPredictor pred;
  pred.feature_dim = feature_dim;
  pred.latent_dim = 0;
  pred.Gz.resize(0, data.Y.cols());

  if (truncate_features) {
    const auto U = svd.matrixU().leftCols(feature_dim);
    const auto V = svd.matrixV().leftCols(feature_dim);
    const Eigen::VectorXd s = sv.head(feature_dim);
    pred.X10 = U * s.asDiagonal() * V.transpose();
    // pinv([X]_f) * Y
    pred.FGx = V * s.cwiseInverse().asDiagonal() * U.transpose() * data.Y;
    pred.row_basis = V;
  } else {
    // Reduced-rank regression on the raw noisy matrix: X*FGx is the best
    // rank-feature_dim approximation of the projection of Y onto col(X).
    const auto U = svd.matrixU().leftCols(rank_x);
    const auto V = svd.matrixV().leftCols(rank_x);
    const Eigen::VectorXd s = sv.head(rank_x);
    const Eigen::MatrixXd PY = U * (U.transpose() * data.Y);
    auto ysvd = thin_svd(PY);
    const int k = std::min<int>(feature_dim, int(ysvd.singularValues().size()));
    const Eigen::MatrixXd PYk = ysvd.matrixU().leftCols(k) *
                                ysvd.singularValues().head(k).asDiagonal() *
                                ysvd.matrixV().leftCols(k).transpose();
    pred.X10 = X;
    pred.FGx = V * s.cwiseInverse().asDiagonal() * U.transpose() * PYk;
    pred.row_basis = V;
  }
  return pred;
}

std::pair<LinearPredictor, Eigen::MatrixXd> fit_with_z(const StackedData& data,
                                                       int feature_dim,
                                                       int latent_dim) {
  require(latent_dim >= 0, "fit_with_z: negative latent_dim");
  require(latent_dim <= data.Y.rows(), "fit_with_z: latent_dim exceeds n_scenes");

  LinearPredictor pred = fit_without_z(data, feature_dim, /*truncate_features=*/true);
  pred.latent_dim = latent_dim;
  if (latent_dim == 0) return {pred, Eigen::MatrixXd(data.Y.rows(), 0)};

  // Remainder of Y orthogonal to the column space of [X]_f.
  auto xsvd = thin_svd(pred.X10);
  const int r = effective_rank(xsvd.singularValues(), 1e-12);
  const Eigen::MatrixXd U = xsvd.matrixU().leftCols(r);
  const Eigen::MatrixXd R = data.Y - U * (U.transpose() * data.Y);

  auto rsvd = thin_svd(R);
  const int k = std::min<int>(latent_dim, effective_rank(rsvd.singularValues(), 1e-14));
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(data.Y.rows(), latent_dim);
  pred.Gz = Eigen::MatrixXd::Zero(latent_dim, data.Y.cols());
  Z.leftCols(k) = rsvd.matrixU().leftCols(k) * rsvd.singularValues().head(k).asDiagonal();
  pred.Gz.topRows(k) = rsvd.matrixV().leftCols(k).transpose();
  return {pred, Z};
}

Eigen::RowVectorXd predict(const LinearPredictor& pred,
                           const Eigen::RowVectorXd& x,
                           const Eigen::RowVectorXd& z) {
  require(x.size() == pred.FGx.rows(), "predict: image dimension mismatch");
  require(z.size() == pred.latent_dim, "predict: latent dimension mismatch");
  const Eigen::RowVectorXd xp = (x * pred.row_basis) * pred.row_basis.transpose();
  Eigen::RowVectorXd y = xp * pred.FGx;
  if (pred.latent_dim > 0) y += z * pred.Gz;
  return y;
}

Eigen::RowVectorXd best_z_for_scene(const LinearPredictor& pred,
                                    const Eigen::RowVectorXd& x,
                                    const Eigen::RowVectorXd& y_true) {
  require(pred.latent_dim > 0, "best_z_for_scene: predictor has no latent part");
  const Eigen::RowVectorXd base =
      predict(pred, x, Eigen::RowVectorXd::Zero(pred.latent_dim));
  const Eigen::VectorXd rhs = (y_true - base).transpose();
  // Minimum-norm least squares; handles rank-deficient Gz.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(pred.Gz.transpose());
  return cod.solve(rhs).transpose();
}

double train_residual(const LinearPredictor& pred, const StackedData& data,
                      const Eigen::MatrixXd& z_train) {
  Eigen::MatrixXd fit = pred.X10 * pred.FGx;
  if (z_train.size() > 0) fit += z_train * pred.Gz;
  return (fit - data.Y).squaredNorm();
}

double test_ssd(const LinearPredictor& pred, const StackedData& test, bool with_z) {
  double ssd = 0.0;
  const Eigen::RowVectorXd z0 = Eigen::RowVectorXd::Zero(pred.latent_dim);
  for (Eigen::Index i = 0; i < test.Y.rows(); ++i) {
    const Eigen::RowVectorXd x = test.X_noisy.row(i);
    const Eigen::RowVectorXd y = test.Y.row(i);
    Eigen::RowVectorXd z = z0;
    if (with_z && pred.latent_dim > 0) z = best_z_for_scene(pred, x, y);
    ssd += (predict(pred, x, z) - y).squaredNorm();
  }
  return ssd;
}

}  // namespace depthopt

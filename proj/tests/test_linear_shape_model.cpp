#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "depthopt/linear_shape_model.h"

using namespace depthopt;

TEST_CASE("identity pose reproduces the raw templates") {
  // A scene built by hand from an identity pose must put the raw S
  // coordinates into the Y row in the documented column-stacked order.
  auto templates = object_templates(1, 6);
  const Eigen::Matrix3Xd& S = templates[0];
  Eigen::MatrixXd Shat = object_block_matrix(S);
  Eigen::RowVectorXd v(7);
  v << 1, 0, 0, 1, 1, 0, 0;  // a=1, b=0, t=0
  Eigen::RowVectorXd y = v * Shat;
  for (int k = 0; k < 6; ++k) {
    CHECK(y(k) == doctest::Approx(S(0, k)).epsilon(1e-12));
    CHECK(y(6 + k) == doctest::Approx(S(1, k)).epsilon(1e-12));
    CHECK(y(12 + k) == doctest::Approx(S(2, k)).epsilon(1e-12));
  }
}

TEST_CASE("rank identities on noiseless generic data") {
  StackedData data = generate_scenes(50, 20, 0.0, 42);
  CHECK(numerical_rank(data.Y) == 13);
  CHECK(numerical_rank(data.X) == 10);
  CHECK(singular_gap(data.Y, 13) >= 1e6);
  CHECK(singular_gap(data.X, 10) >= 1e6);
}

TEST_CASE("single object block has rank 5") {
  StackedData data = generate_scenes(50, 20, 0.0, 7, 1);
  CHECK(numerical_rank(data.Y) == 5);
}

TEST_CASE("generation is deterministic and validates inputs") {
  StackedData a = generate_scenes(5, 8, 0.1, 99);
  StackedData b = generate_scenes(5, 8, 0.1, 99);
  CHECK((a.Y - b.Y).norm() == 0.0);
  CHECK((a.X_noisy - b.X_noisy).norm() == 0.0);
  CHECK_THROWS_AS(generate_scenes(0, 8, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_scenes(5, 3, 0.0, 1), std::invalid_argument);
}

TEST_CASE("X discards exactly the depth columns of Y") {
  StackedData data = generate_scenes(4, 5, 0.0, 3);
  int p = 5;
  for (int obj = 0; obj < 3; ++obj) {
    int y0 = 3 * p * obj, x0 = 2 * p * obj;
    CHECK((data.X.middleCols(x0, p) - data.Y.middleCols(y0, p)).norm() == 0.0);
    CHECK((data.X.middleCols(x0 + p, p) - data.Y.middleCols(y0 + 2 * p, p)).norm() == 0.0);
  }
}

TEST_CASE("noiseless fit without z attains the projection residual") {
  StackedData data = generate_scenes(50, 20, 0.0, 5);
  data.X_noisy = data.X;
  LinearPredictor pred = fit_without_z(data, 10);
  // Residual must equal || P_perp Y ||_F^2 where P projects onto col(X).
  Eigen::BDCSVD<Eigen::MatrixXd> svd(data.X, Eigen::ComputeThinU);
  Eigen::MatrixXd U = svd.matrixU().leftCols(10);
  Eigen::MatrixXd Pperp = data.Y - U * (U.transpose() * data.Y);
  double oracle = Pperp.squaredNorm();
  CHECK(train_residual(pred, data) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("Y inside the column space of X gives zero residual") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(20, 8);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
  Eigen::MatrixXd C(8, 11);
  for (int i = 0; i < C.size(); ++i) C.data()[i] = g(rng);
  StackedData data;
  data.X = X;
  data.X_noisy = X;
  data.Y = X * C;
  LinearPredictor pred = fit_without_z(data, 8);
  CHECK(train_residual(pred, data) <= 1e-12 * data.Y.squaredNorm());
}

TEST_CASE("overfitting signature of the 13-dim feature space") {
  int worse = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    StackedData train = generate_scenes(50, 20, 0.05, seed);
    StackedData test = generate_scenes(50, 20, 0.05, seed + 1000);

    LinearPredictor p10 = fit_without_z(train, 10);
    LinearPredictor p13 = fit_without_z(train, 13, /*truncate_features=*/false);

    double y2 = train.Y.squaredNorm();
    CHECK(train_residual(p13, train) / y2 <= 1e-6);
    double t10 = test_ssd(p10, test, false);
    double t13 = test_ssd(p13, test, false);
    if (t13 > t10) ++worse;
  }
  CHECK(worse == 10);
}

TEST_CASE("latent variables beat the plain regression on held-out scenes") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    StackedData train = generate_scenes(50, 20, 0.05, seed);
    StackedData test = generate_scenes(50, 20, 0.05, seed + 1000);
    LinearPredictor p10 = fit_without_z(train, 10);
    auto [pz, Z] = fit_with_z(train, 10, 3);
    double no_z = test_ssd(p10, test, false);
    double with_z = test_ssd(pz, test, true);
    CHECK(with_z < 0.5 * no_z);
  }
}

TEST_CASE("latent training subspace is orthogonal to the image subspace") {
  StackedData train = generate_scenes(50, 20, 0.05, 2);
  auto [pred, Z] = fit_with_z(train, 10, 3);
  // Z columns live in the orthogonal complement of col([X]_10).
  Eigen::BDCSVD<Eigen::MatrixXd> svd(pred.X10, Eigen::ComputeThinU);
  Eigen::MatrixXd U = svd.matrixU().leftCols(10);
  Eigen::MatrixXd Zn = Z;
  for (int c = 0; c < Zn.cols(); ++c) Zn.col(c).normalize();
  CHECK((U.transpose() * Zn).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("orthogonal decomposition of the with-z training loss") {
  StackedData train = generate_scenes(40, 12, 0.05, 8);
  auto [pred, Z] = fit_with_z(train, 10, 3);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(pred.X10, Eigen::ComputeThinU);
  Eigen::MatrixXd U = svd.matrixU().leftCols(10);
  Eigen::MatrixXd PY = U * (U.transpose() * train.Y);
  Eigen::MatrixXd PpY = train.Y - PY;
  double part1 = (pred.X10 * pred.FGx - PY).squaredNorm();
  double part2 = (Z * pred.Gz - PpY).squaredNorm();
  double total = train_residual(pred, train, Z);
  CHECK(total == doctest::Approx(part1 + part2).epsilon(1e-8));
}

TEST_CASE("train residual non-increasing in latent dimension") {
  StackedData train = generate_scenes(30, 10, 0.05, 4);
  double prev = std::numeric_limits<double>::infinity();
  for (int k : {0, 1, 2, 3, 5, 8}) {
    auto [pred, Z] = fit_with_z(train, 10, k);
    double res = train_residual(pred, train, Z);
    CHECK(res <= prev + 1e-8);
    prev = res;
  }
}

TEST_CASE("latent_dim zero degenerates to the plain fit") {
  StackedData train = generate_scenes(20, 8, 0.05, 6);
  LinearPredictor plain = fit_without_z(train, 10);
  auto [pz, Z] = fit_with_z(train, 10, 0);
  CHECK((plain.FGx - pz.FGx).norm() <= 1e-10);
  CHECK(Z.cols() == 0);
}

TEST_CASE("full latent rank recovers the training scenes") {
  StackedData train = generate_scenes(30, 10, 0.0, 9);
  train.X_noisy = train.X;
  // P_perp Y has rank <= 3 here (13 - 10); latent_dim 3 recovers it exactly.
  auto [pred, Z] = fit_with_z(train, 10, 3);
  CHECK(train_residual(pred, train, Z) <= 1e-10 * train.Y.squaredNorm());
}

TEST_CASE("predict structure") {
  StackedData train = generate_scenes(30, 10, 0.05, 13);
  auto [pred, Z] = fit_with_z(train, 10, 3);

  // x = 0, z = e_k returns row k of Gz.
  Eigen::RowVectorXd x0 = Eigen::RowVectorXd::Zero(train.X.cols());
  for (int k = 0; k < 3; ++k) {
    Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(3);
    z(k) = 1.0;
    Eigen::RowVectorXd out = predict(pred, x0, z);
    CHECK((out - pred.Gz.row(k)).norm() <= 1e-10);
  }

  // Dimension mismatches are rejected.
  Eigen::RowVectorXd bad = Eigen::RowVectorXd::Zero(5);
  CHECK_THROWS_AS(predict(pred, bad, Eigen::RowVectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("best_z_for_scene inverts predictions and beats z = 0") {
  StackedData train = generate_scenes(40, 10, 0.05, 21);
  StackedData test = generate_scenes(20, 10, 0.05, 22);
  auto [pred, Z] = fit_with_z(train, 10, 3);

  // Exact interpolation: build y from a known z0 and recover it.
  Eigen::RowVectorXd x = test.X_noisy.row(0);
  Eigen::RowVectorXd z0(3);
  z0 << 0.7, -1.2, 0.4;
  Eigen::RowVectorXd y = predict(pred, x, z0);
  Eigen::RowVectorXd zr = best_z_for_scene(pred, x, y);
  CHECK((zr - z0).norm() <= 1e-8);

  // Optimal z never loses to z = 0.
  for (int s = 0; s < int(test.Y.rows()); ++s) {
    Eigen::RowVectorXd xs = test.X_noisy.row(s);
    Eigen::RowVectorXd ys = test.Y.row(s);
    Eigen::RowVectorXd zbest = best_z_for_scene(pred, xs, ys);
    double with_best = (predict(pred, xs, zbest) - ys).squaredNorm();
    double with_zero = (predict(pred, xs, Eigen::RowVectorXd::Zero(3)) - ys).squaredNorm();
    CHECK(with_best <= with_zero + 1e-9);
  }
}

TEST_CASE("best_z matches a dense grid search on a 2-dim latent toy") {
  StackedData train = generate_scenes(40, 10, 0.05, 33);
  auto [pred, Z] = fit_with_z(train, 10, 2);
  StackedData test = generate_scenes(1, 10, 0.05, 34);
  Eigen::RowVectorXd x = test.X_noisy.row(0);
  Eigen::RowVectorXd y = test.Y.row(0);
  Eigen::RowVectorXd zbest = best_z_for_scene(pred, x, y);
  double best = (predict(pred, x, zbest) - y).squaredNorm();

  // Coarse-to-fine grid refinement around the solution.
  double c0 = zbest(0), c1 = zbest(1), span = 2.0, grid_best = 1e300;
  for (int level = 0; level < 6; ++level) {
    double g0 = c0, g1 = c1;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j) {
        Eigen::RowVectorXd z(2);
        z << c0 + span * i / 10.0, c1 + span * j / 10.0;
        double v = (predict(pred, x, z) - y).squaredNorm();
        if (v < grid_best) {
          grid_best = v;
          g0 = z(0);
          g1 = z(1);
        }
      }
    c0 = g0;
    c1 = g1;
    span /= 10.0;
  }
  CHECK(best <= grid_best + 1e-6);
  CHECK(grid_best - best <= 1e-6 * (1.0 + best));
}

TEST_CASE("zero Gz returns the minimum-norm latent") {
  StackedData train = generate_scenes(20, 8, 0.05, 44);
  LinearPredictor pred = fit_without_z(train, 10);
  pred.Gz = Eigen::MatrixXd::Zero(3, train.Y.cols());
  pred.latent_dim = 3;
  Eigen::RowVectorXd z = best_z_for_scene(pred, train.X_noisy.row(0), train.Y.row(0));
  CHECK(z.norm() <= 1e-12);
}

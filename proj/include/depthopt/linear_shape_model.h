#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace depthopt {

// Orthographic-projection matrix model: scenes of rigidly moving planar
// objects, stacked into a scene matrix Y and an image matrix X, used to
// study learning a linear predictor with and without latent variables.

// One synthetic scene set. Each scene row of Y holds, per object, the
// column-stacked rows (w1, w2, w3) of W = R*S + t*1. X drops the depth
// coordinates (w2) so the per-object distance to the camera is lost.
struct StackedData {
  Eigen::MatrixXd Y;        // n_scenes x 3*p_total
  Eigen::MatrixXd X;        // n_scenes x 2*p_total, noiseless
  Eigen::MatrixXd X_noisy;  // X + Gaussian noise
  int n_objects = 0;
  int p_per_object = 0;
};

// Linear predictor y = proj(x) * FGx + z * Gz. F and G_x are never
// separated; only the product matters for the loss.
struct LinearPredictor {
  Eigen::MatrixXd FGx;  // image-dim x scene-dim
  Eigen::MatrixXd Gz;   // latent_dim x scene-dim (empty without z)
  Eigen::MatrixXd X10;  // rank-truncated (or raw) training image matrix
  int feature_dim = 0;
  int latent_dim = 0;

  // Orthonormal basis of the row space of X10, cached for projection.
  Eigen::MatrixXd row_basis;  // image-dim x r
};

// Fixed polyline templates (3 x p point matrices) for n_objects objects.
std::vector<Eigen::Matrix3Xd> object_templates(int n_objects, int p_per_object);

// Random planar rigid motions + orthographic projection, per Appendix-style
// block construction. Deterministic for a fixed seed.
StackedData generate_scenes(int n_scenes, int p_per_object, double noise_sigma,
                            std::uint64_t seed, int n_objects = 3);

// Per-object block matrix [s1 0 0; s2 0 0; 0 s1 0; 0 s2 0; 0 0 s3; 1 0 0; 0 1 0].
Eigen::MatrixXd object_block_matrix(const Eigen::Matrix3Xd& S);

// Numerical rank with relative singular-value threshold.
int numerical_rank(const Eigen::MatrixXd& A, double rel_tol = 1e-8);

// Ratio sigma_r / sigma_{r+1} around the claimed rank (inf when exact).
double singular_gap(const Eigen::MatrixXd& A, int rank);

// Fit without latent variables. With truncate_features the image matrix is
// first replaced by its best rank-feature_dim approximation (the denoised
// subspace); without it the raw noisy matrix is used and the fit is a
// reduced-rank regression (the naive, overfitting variant).
LinearPredictor fit_without_z(const StackedData& data, int feature_dim,
                              bool truncate_features = true);

// Fit with latent variables: FGx explains the projection of Y onto the
// column space of [X]_f; Z*Gz is the best rank-latent_dim approximation of
// the orthogonal remainder, computed by truncated SVD. Returns Z rows per
// training scene alongside the predictor.
std::pair<LinearPredictor, Eigen::MatrixXd> fit_with_z(const StackedData& data,
                                                       int feature_dim,
                                                       int latent_dim);

// proj(x) * FGx + z * Gz, x projected onto the row space of X10 first.
Eigen::RowVectorXd predict(const LinearPredictor& pred,
                           const Eigen::RowVectorXd& x,
                           const Eigen::RowVectorXd& z);

// argmin_z || predict(x, z) - y_true ||^2, minimum-norm when Gz is
// rank-deficient.
Eigen::RowVectorXd best_z_for_scene(const LinearPredictor& pred,
                                    const Eigen::RowVectorXd& x,
                                    const Eigen::RowVectorXd& y_true);

// Frobenius training residual ||proj-fit - Y||_F^2 for a fitted predictor,
// including the Z term when z_train is non-empty.
double train_residual(const LinearPredictor& pred, const StackedData& data,
                      const Eigen::MatrixXd& z_train = Eigen::MatrixXd());

// Sum of squared distances between predictions and true scenes over a test
// set; with_z selects per-scene least-squares latent codes.
double test_ssd(const LinearPredictor& pred, const StackedData& test, bool with_z);

}  // namespace depthopt

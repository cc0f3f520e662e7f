#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>

namespace rwgd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Full SVD a = u * diag(s) * v^T. Singular values at or below `cutoff`
// count as zero; cutoff = tol * max(s_max, 1).
struct SpectralDecomposition {
  Matrix u;
  Vector singular_values;
  Matrix v;
  Index rank = 0;
  double tol = 0.0;
  double cutoff = 0.0;
};

double default_rank_tol(Index rows, Index cols);

void require_finite(const Matrix& a, std::string_view what);

SpectralDecomposition svd(const Matrix& a, std::optional<double> tol = std::nullopt);
Matrix pseudo_inverse(const Matrix& a, std::optional<double> tol = std::nullopt);
Matrix pseudo_inverse(const SpectralDecomposition& dec);
Vector min_norm_least_squares(const Matrix& x, const Vector& y);
double spectral_norm(const Matrix& a);
// Smallest singular value above the rank cutoff.
double sigma_min_plus(const Matrix& a, std::optional<double> tol = std::nullopt);
// Orthogonal projector onto ker(x).
Matrix kernel_projector(const Matrix& x, std::optional<double> tol = std::nullopt);
Matrix hadamard(const Matrix& a, const Matrix& b);

struct Dataset {
  Matrix x;
  Vector y;
  std::optional<Vector> w_star;
  std::optional<Matrix> sigma_eps;

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }
};

void validate_dataset(const Dataset& data);

struct WeightedProblem {
  Dataset data;
  Vector m2;        // diagonal of E[D^2]
  Matrix x_hat;     // M2^{1/2} X
  Vector y_hat;     // M2^{1/2} Y
  Matrix xx_hat;    // X^T M2 X
  Vector w_hat;     // minimum-norm weighted least-squares solution
  Vector residual;  // Y - X w_hat
  Matrix ker_projector;
  Index rank = 0;
  double sigma_min_plus_xx_hat = 0.0;
  double norm_xx_hat = 0.0;
  double norm_xx = 0.0;
  double norm_x = 0.0;

  const Matrix& x() const { return data.x; }
  const Vector& y() const { return data.y; }
  Index n() const { return data.x.rows(); }
  Index d() const { return data.x.cols(); }
  bool is_unweighted() const;
};

WeightedProblem build_weighted_problem(Dataset data, const Vector& m2_diag);
WeightedProblem build_unweighted_problem(Dataset data);

}  // namespace rwgd

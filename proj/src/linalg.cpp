#include "rwgd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rwgd/errors.hpp"

namespace rwgd {

namespace {

std::string shape(const Matrix& a) { return std::to_string(a.rows()) + "x" + std::to_string(a.cols()); }

}  // namespace

double default_rank_tol(Index rows, Index cols) {
  return 1e-12 * static_cast<double>(std::max<Index>({rows, cols, 1}));
}

void require_finite(const Matrix& a, std::string_view what) {
  if (!a.allFinite()) {
    throw NumericalError(std::string(what) + " (" + shape(a) + ") contains non-finite entries");
  }
}

SpectralDecomposition svd(const Matrix& a, std::optional<double> tol) {
  if (a.size() == 0) {
    throw DimensionError("svd of empty " + shape(a) + " matrix");
  }
  require_finite(a, "svd input");
  Eigen::JacobiSVD<Matrix> jac(a, Eigen::ComputeFullU | Eigen::ComputeFullV);

  SpectralDecomposition dec;
  dec.u = jac.matrixU();
  dec.v = jac.matrixV();
  dec.singular_values = jac.singularValues();
  dec.tol = tol.value_or(default_rank_tol(a.rows(), a.cols()));
  const double smax = dec.singular_values.size() > 0 ? dec.singular_values(0) : 0.0;
  dec.cutoff = dec.tol * std::max(smax, 1.0);
  dec.rank = (dec.singular_values.array() > dec.cutoff).count();

  const Index k = dec.singular_values.size();
  const Matrix recon = dec.u.leftCols(k) * dec.singular_values.asDiagonal() * dec.v.leftCols(k).transpose();
  const double scale = std::max(smax, 1.0);
  if (!recon.allFinite() || (recon - a).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw NumericalError("svd did not converge for " + shape(a) + " matrix");
  }
  return dec;
}

Matrix pseudo_inverse(const SpectralDecomposition& dec) {
  const Index r = dec.rank;
  const Index rows = dec.v.rows();
  const Index cols = dec.u.rows();
  if (r == 0) return Matrix::Zero(rows, cols);
  const Vector inv = dec.singular_values.head(r).cwiseInverse();
  return dec.v.leftCols(r) * inv.asDiagonal() * dec.u.leftCols(r).transpose();
}

Matrix pseudo_inverse(const Matrix& a, std::optional<double> tol) { return pseudo_inverse(svd(a, tol)); }

Vector min_norm_least_squares(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) {
    throw DimensionError("least squares: X is " + shape(x) + " but Y has length " + std::to_string(y.size()));
  }
  return pseudo_inverse(x) * y;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return svd(a).singular_values(0);
}

double sigma_min_plus(const Matrix& a, std::optional<double> tol) {
  const SpectralDecomposition dec = svd(a, tol);
  if (dec.rank == 0) {
    throw NumericalError("sigma_min_plus of a numerically zero " + shape(a) + " matrix");
  }
  return dec.singular_values(dec.rank - 1);
}

Matrix kernel_projector(const Matrix& x, std::optional<double> tol) {
  const SpectralDecomposition dec = svd(x, tol);
  const Index d = x.cols();
  const Matrix vk = dec.v.rightCols(d - dec.rank);
  return vk * vk.transpose();
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("hadamard product of " + shape(a) + " and " + shape(b));
  }
  return a.cwiseProduct(b);
}

void validate_dataset(const Dataset& data) {
  if (data.x.rows() == 0 || data.x.cols() == 0) {
    throw DimensionError("design matrix is empty (" + shape(data.x) + ")");
  }
  if (data.y.size() != data.x.rows()) {
    throw DimensionError("design matrix is " + shape(data.x) + " but labels have length " +
                         std::to_string(data.y.size()));
  }
  require_finite(data.x, "design matrix");
  require_finite(data.y, "labels");
  if (data.w_star && data.w_star->size() != data.x.cols()) {
    throw DimensionError("w_star has length " + std::to_string(data.w_star->size()) + ", expected " +
                         std::to_string(data.x.cols()));
  }
  if (data.sigma_eps && (data.sigma_eps->rows() != data.x.rows() || data.sigma_eps->cols() != data.x.rows())) {
    throw DimensionError("noise covariance is " + shape(*data.sigma_eps) + ", expected " +
                         std::to_string(data.x.rows()) + "x" + std::to_string(data.x.rows()));
  }
}

bool WeightedProblem::is_unweighted() const { return (m2.array() == 1.0).all(); }

WeightedProblem build_weighted_problem(Dataset data, const Vector& m2_diag) {
  validate_dataset(data);
  if (m2_diag.size() != data.n()) {
    throw DimensionError("second-moment diagonal has length " + std::to_string(m2_diag.size()) + ", expected " +
                         std::to_string(data.n()));
  }
  require_finite(m2_diag, "second-moment diagonal");
  for (Index i = 0; i < m2_diag.size(); ++i) {
    if (!(m2_diag(i) > 0.0)) {
      throw InvalidArgument("data point " + std::to_string(i) +
                            " is never active (E[D_ii^2] = 0); remove it from the dataset");
    }
  }

  WeightedProblem wp;
  wp.m2 = m2_diag;
  const Vector root = m2_diag.cwiseSqrt();
  wp.x_hat = root.asDiagonal() * data.x;
  wp.y_hat = root.cwiseProduct(data.y);
  wp.xx_hat = data.x.transpose() * m2_diag.asDiagonal() * data.x;
  wp.xx_hat = 0.5 * (wp.xx_hat + wp.xx_hat.transpose());

  const SpectralDecomposition hat = svd(wp.x_hat);
  wp.w_hat = pseudo_inverse(hat) * wp.y_hat;
  wp.rank = hat.rank;
  if (wp.rank == 0) {
    throw NumericalError("design matrix is numerically zero");
  }
  wp.sigma_min_plus_xx_hat = hat.singular_values(hat.rank - 1) * hat.singular_values(hat.rank - 1);
  wp.norm_xx_hat = hat.singular_values(0) * hat.singular_values(0);

  const SpectralDecomposition plain = svd(data.x);
  wp.norm_x = plain.singular_values(0);
  wp.norm_xx = wp.norm_x * wp.norm_x;
  const Matrix vk = plain.v.rightCols(data.d() - plain.rank);
  wp.ker_projector = vk * vk.transpose();

  // Full row rank: consistent system.
  wp.residual = wp.rank == data.n() ? Vector::Zero(data.n()) : Vector(data.y - data.x * wp.w_hat);
  wp.data = std::move(data);
  return wp;
}

WeightedProblem build_unweighted_problem(Dataset data) {
  const Index n = data.x.rows();
  return build_weighted_problem(std::move(data), Vector::Ones(n));
}

}  // namespace rwgd

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rwgd/errors.hpp"
#include "rwgd/linalg.hpp"

using namespace rwgd;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Random matrix with a chosen rank, so the battery covers deficient cases.
Matrix random_matrix(std::mt19937_64& gen, Index rows, Index cols, Index rank) {
  std::normal_distribution<double> normal;
  Matrix a = Matrix::NullaryExpr(rows, rank, [&] { return normal(gen); });
  Matrix b = Matrix::NullaryExpr(rank, cols, [&] { return normal(gen); });
  return a * b;
}

}  // namespace

TEST(Svd, IdentityHasUnitSpectrum) {
  const SpectralDecomposition dec = svd(Matrix::Identity(2, 2));
  EXPECT_NEAR(dec.singular_values(0), 1.0, 1e-15);
  EXPECT_NEAR(dec.singular_values(1), 1.0, 1e-15);
  EXPECT_EQ(dec.rank, 2);
  EXPECT_TRUE((dec.u * dec.v.transpose()).isApprox(Matrix::Identity(2, 2)));
}

TEST(Svd, DiagonalWithZero) {
  const SpectralDecomposition dec = svd(mat({{3, 0}, {0, 0}}));
  EXPECT_DOUBLE_EQ(dec.singular_values(0), 3.0);
  EXPECT_DOUBLE_EQ(dec.singular_values(1), 0.0);
  EXPECT_EQ(dec.rank, 1);
}

TEST(Svd, RankOneColumn) {
  const SpectralDecomposition dec = svd(mat({{1, 0}, {2, 0}}));
  EXPECT_NEAR(dec.singular_values(0), std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(dec.singular_values(1), 0.0, 1e-14);
  EXPECT_EQ(dec.rank, 1);
}

TEST(Svd, RejectsNonFinite) {
  Matrix a = Matrix::Identity(2, 3);
  a(1, 2) = std::nan("");
  EXPECT_THROW(svd(a), NumericalError);
  EXPECT_THROW(svd(Matrix(0, 3)), DimensionError);
}

TEST(Svd, InvariantsOnRandomBattery) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 60; ++trial) {
    const Index r = dim(gen), c = dim(gen) + 2;
    const Index rank = std::uniform_int_distribution<Index>(1, std::min(r, c))(gen);
    const Matrix a = random_matrix(gen, r, c, rank);
    const SpectralDecomposition dec = svd(a);
    Matrix sigma = Matrix::Zero(r, c);
    for (Index i = 0; i < dec.singular_values.size(); ++i) sigma(i, i) = dec.singular_values(i);
    EXPECT_LE((dec.u * sigma * dec.v.transpose() - a).norm(), 1e-10 * a.norm());
    EXPECT_LE((dec.u.transpose() * dec.u - Matrix::Identity(r, r)).norm(), 1e-10);
    EXPECT_LE((dec.v.transpose() * dec.v - Matrix::Identity(c, c)).norm(), 1e-10);
    EXPECT_EQ(dec.rank, rank);
    for (Index i = 1; i < dec.singular_values.size(); ++i) {
      EXPECT_LE(dec.singular_values(i), dec.singular_values(i - 1));
    }
  }
}

TEST(PseudoInverse, Examples) {
  EXPECT_TRUE(pseudo_inverse(Matrix::Identity(2, 2)).isApprox(Matrix::Identity(2, 2)));
  const Matrix p = pseudo_inverse(mat({{2, 0}, {0, 0}}));
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(p.cwiseAbs().sum(), 0.5, 1e-15);
  // Rank one: A^+ = A^T / Tr(A^T A).
  const Matrix q = pseudo_inverse(mat({{1, 0}, {2, 0}}));
  EXPECT_LE((q - mat({{0.2, 0.4}, {0, 0}})).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PseudoInverse, MoorePenroseBattery) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> dim(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const Index r = std::min(dim(gen), 8), c = dim(gen);
    const Index rank = std::uniform_int_distribution<Index>(1, std::min(r, c))(gen);
    const Matrix a = random_matrix(gen, r, c, rank);
    const Matrix ap = pseudo_inverse(a);
    const double na = spectral_norm(a);
    EXPECT_LE((a.transpose() * a * ap - a.transpose()).norm(), 1e-9 * (1 + na * na * na)) << "trial " << trial;

    // A^+ v is orthogonal to ker(A).
    const SpectralDecomposition dec = svd(a);
    const Matrix kernel_basis = dec.v.rightCols(c - dec.rank);
    std::normal_distribution<double> normal;
    const Vector v = Vector::NullaryExpr(r, [&] { return normal(gen); });
    if (kernel_basis.cols() > 0) {
      EXPECT_LE((kernel_basis.transpose() * (ap * v)).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(LeastSquares, Examples) {
  EXPECT_TRUE(min_norm_least_squares(Matrix::Identity(2, 2), vec({1, 2})).isApprox(vec({1, 2})));
  const Vector w = min_norm_least_squares(mat({{1, 0}, {2, 0}}), vec({1, 2}));
  EXPECT_NEAR(w(0), 1.0, 1e-14);
  EXPECT_NEAR(w(1), 0.0, 1e-14);
  const Vector u = min_norm_least_squares(mat({{1, 1}}), vec({2}));
  EXPECT_NEAR(u(0), 1.0, 1e-14);
  EXPECT_NEAR(u(1), 1.0, 1e-14);
  EXPECT_THROW(min_norm_least_squares(Matrix::Identity(2, 2), vec({1, 2, 3})), DimensionError);
}

TEST(LeastSquares, GridSearchOracleAgreesOnRankOneDesign) {
  // Brute force over a grid: minimisers of ||Xv - Y|| are {(1, t)}; the
  // smallest-norm grid minimiser is (1, 0).
  const Matrix x = mat({{1, 0}, {2, 0}});
  const Vector y = vec({1, 2});
  double best = 1e300, best_norm = 1e300;
  Vector arg(2);
  for (int i = -60; i <= 60; ++i) {
    for (int j = -60; j <= 60; ++j) {
      const Vector v = vec({i * 0.05, j * 0.05});
      const double loss = (x * v - y).squaredNorm();
      if (loss < best - 1e-12 || (std::abs(loss - best) <= 1e-12 && v.norm() < best_norm)) {
        best = loss;
        best_norm = v.norm();
        arg = v;
      }
    }
  }
  EXPECT_TRUE(min_norm_least_squares(x, y).isApprox(arg, 1e-12));
}

TEST(SigmaMinPlus, Examples) {
  EXPECT_DOUBLE_EQ(sigma_min_plus(Matrix::Identity(3, 3)), 1.0);
  EXPECT_DOUBLE_EQ(sigma_min_plus(mat({{3, 0}, {0, 0}})), 3.0);
  EXPECT_NEAR(sigma_min_plus(mat({{1, 0}, {2, 0}})), std::sqrt(5.0), 1e-14);
  EXPECT_THROW(sigma_min_plus(Matrix::Zero(2, 2)), NumericalError);
}

TEST(KernelProjector, Examples) {
  EXPECT_LE(kernel_projector(Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LE((kernel_projector(mat({{1, 0}})) - mat({{0, 0}, {0, 1}})).norm(), 1e-15);
  EXPECT_LE((kernel_projector(mat({{1, 1}})) - mat({{0.5, -0.5}, {-0.5, 0.5}})).norm(), 1e-14);
}

TEST(KernelProjector, IdempotentSymmetricOnBattery) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = random_matrix(gen, 3, 6, 2);
    const Matrix p = kernel_projector(x);
    EXPECT_LE((p * p - p).norm(), 1e-10);
    EXPECT_LE((p - p.transpose()).norm(), 1e-10);
    EXPECT_LE((x * p).norm(), 1e-10 * (1 + x.norm()));
    EXPECT_LE((p - (Matrix::Identity(6, 6) - pseudo_inverse(x) * x)).norm(), 1e-10);
  }
}

TEST(LinalgProperties, FixedPointContraction) {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix x = random_matrix(gen, 3, 5, 3);
    x /= 1.1 * spectral_norm(x);  // ||X^T X|| < 1
    const Matrix xx = x.transpose() * x;
    const Matrix p = kernel_projector(x);
    const Vector w = (Matrix::Identity(5, 5) - p) * Vector::NullaryExpr(5, [&] { return normal(gen); });
    const Vector next = (Matrix::Identity(5, 5) - xx) * w;
    EXPECT_LE(next.norm(), (1 - sigma_min_plus(xx)) * w.norm() + 1e-12);
    EXPECT_LE((p * next).norm(), 1e-9);
  }
}

TEST(LinalgProperties, HadamardNormBound) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = Matrix::NullaryExpr(4, 4, [&] { return normal(gen); });
    const Matrix b = Matrix::NullaryExpr(4, 4, [&] { return normal(gen); });
    EXPECT_LE(spectral_norm(hadamard(a, b)), spectral_norm(a) * spectral_norm(b) + 1e-12);
  }
  EXPECT_THROW(hadamard(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), DimensionError);
}

TEST(LinalgProperties, ProductBelowExponential) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    double prod = 1.0, sum = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double c = unif(gen);
      prod *= 1.0 - c;
      sum += c;
    }
    EXPECT_LE(prod, std::exp(-sum));
  }
}

TEST(WeightedProblem, IdentityDesign) {
  const WeightedProblem wp = build_weighted_problem({Matrix::Identity(2, 2), vec({1, 1}), {}, {}}, vec({1, 1}));
  EXPECT_TRUE(wp.w_hat.isApprox(vec({1, 1})));
  EXPECT_LE(wp.residual.norm(), 1e-15);
  EXPECT_DOUBLE_EQ(wp.sigma_min_plus_xx_hat, 1.0);
  EXPECT_DOUBLE_EQ(wp.norm_x, 1.0);
}

TEST(WeightedProblem, RankOneDesign) {
  const WeightedProblem wp = build_weighted_problem({mat({{1, 0}, {2, 0}}), vec({1, 2}), {}, {}}, vec({1, 1}));
  EXPECT_NEAR(wp.w_hat(0), 1.0, 1e-14);
  EXPECT_NEAR(wp.w_hat(1), 0.0, 1e-14);
  EXPECT_LE(wp.residual.norm(), 1e-14);
  EXPECT_EQ(wp.rank, 1);
}

TEST(WeightedProblem, RankOneWeightedPseudoInverseMatchesClosedForm) {
  const double x11 = 0.3, x21 = 1.7, p1 = 0.8, p2 = 0.2;
  const WeightedProblem wp =
      build_weighted_problem({mat({{x11, 0}, {x21, 0}}), vec({1, 1}), {}, {}}, vec({p1 * p1, p2 * p2}));
  const Matrix b = pseudo_inverse(wp.x_hat) * wp.m2.cwiseSqrt().asDiagonal();
  const double den = (p1 * x11) * (p1 * x11) + (p2 * x21) * (p2 * x21);
  EXPECT_NEAR(b(0, 0), p1 * p1 * x11 / den, 1e-13);
  EXPECT_NEAR(b(0, 1), p2 * p2 * x21 / den, 1e-13);
  EXPECT_NEAR(b.row(1).norm(), 0.0, 1e-14);
}

TEST(WeightedProblem, RejectsInactivePoint) {
  try {
    build_weighted_problem({Matrix::Identity(2, 2), vec({1, 1}), {}, {}}, vec({1, 0}));
    FAIL() << "expected an error";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("data point 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("remove"), std::string::npos);
  }
}

TEST(WeightedProblem, NormalEquationsAndOrthogonalityOnBattery) {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + trial % 5, d = 1 + trial % 7;
    const Index rank = std::min<Index>(std::min(n, d), 1 + trial % 3);
    Dataset data{random_matrix(gen, n, d, rank), Vector::NullaryExpr(n, [&] { return normal(gen); }), {}, {}};
    const Vector m2 = Vector::NullaryExpr(n, [&] { return unif(gen); });
    const WeightedProblem wp = build_weighted_problem(data, m2);
    EXPECT_LE((wp.x().transpose() * m2.asDiagonal() * wp.residual).norm(), 1e-10);
    EXPECT_LE((wp.ker_projector * wp.w_hat).norm(), 1e-10);
  }
}

TEST(WeightedProblem, IndependentRowsAreRealizable) {
  std::mt19937_64 gen(41);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix x = Matrix::NullaryExpr(3, 5, [&] { return normal(gen); });
    const Vector y = Vector::NullaryExpr(3, [&] { return normal(gen); });
    const WeightedProblem wp = build_weighted_problem({x, y, {}, {}}, Vector::Constant(3, 0.3));
    EXPECT_LE(wp.residual.norm(), 1e-10);
  }
}

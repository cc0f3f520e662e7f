#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace rwgd {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Entry-wise Neumaier accumulation of equally shaped matrices.
class CompensatedMatrix {
 public:
  CompensatedMatrix() = default;
  CompensatedMatrix(Eigen::Index rows, Eigen::Index cols)
      : sum_(Eigen::MatrixXd::Zero(rows, cols)), comp_(Eigen::MatrixXd::Zero(rows, cols)) {}

  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& x) {
    for (Eigen::Index j = 0; j < sum_.cols(); ++j) {
      for (Eigen::Index i = 0; i < sum_.rows(); ++i) {
        const double s = sum_(i, j);
        const double v = x(i, j);
        const double t = s + v;
        if (std::abs(s) >= std::abs(v)) {
          comp_(i, j) += (s - t) + v;
        } else {
          comp_(i, j) += (v - t) + s;
        }
        sum_(i, j) = t;
      }
    }
  }
  void merge(const CompensatedMatrix& other) {
    add(other.sum_);
    add(other.comp_);
  }
  Eigen::MatrixXd value() const { return sum_ + comp_; }
  Eigen::Index rows() const { return sum_.rows(); }
  Eigen::Index cols() const { return sum_.cols(); }

 private:
  Eigen::MatrixXd sum_;
  Eigen::MatrixXd comp_;
};

}  // namespace rwgd

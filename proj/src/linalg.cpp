#include "svtmc/linalg.hpp"

#include <Eigen/SVD>
#include <stdexcept>
#include <string>

namespace svtmc {

IndexSet::IndexSet(int rows, int cols, bool all) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("IndexSet: dimensions must be positive");
  }
  in_.assign(static_cast<std::size_t>(rows) * cols, all ? 1 : 0);
  count_ = all ? static_cast<std::int64_t>(rows) * cols : 0;
}

void IndexSet::insert(int i, int j) {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
    throw std::invalid_argument("IndexSet::insert: index out of range");
  }
  std::uint8_t& cell = in_[flat(i, j)];
  if (!cell) {
    cell = 1;
    ++count_;
  }
}

IndexSet IndexSet::complement() const {
  IndexSet out(rows_, cols_);
  for (std::size_t k = 0; k < in_.size(); ++k) out.in_[k] = in_[k] ? 0 : 1;
  out.count_ = static_cast<std::int64_t>(rows_) * cols_ - count_;
  return out;
}

std::vector<std::pair<int, int>> IndexSet::members() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(count_));
  for_each([&](int i, int j) { out.emplace_back(i, j); });
  return out;
}

void require_finite(const Matrix& A, const char* where) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw std::invalid_argument(std::string(where) +
                                ": matrix dimensions must be positive");
  }
  if (!A.allFinite()) {
    throw std::invalid_argument(std::string(where) +
                                ": matrix has non-finite entries");
  }
}

SvdFactors svd(const Matrix& A) {
  require_finite(A, "svd");
  Eigen::BDCSVD<Matrix> dec(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw std::runtime_error("svd: decomposition did not converge");
  }
  return SvdFactors{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Vector singular_values(const Matrix& A) {
  require_finite(A, "singular_values");
  Eigen::BDCSVD<Matrix> dec(A);
  if (dec.info() != Eigen::Success) {
    throw std::runtime_error("singular_values: decomposition did not converge");
  }
  return dec.singularValues();
}

Matrix soft_threshold(const Matrix& W, double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("soft_threshold: lambda must be non-negative");
  }
  SvdFactors f = svd(W);
  Vector shrunk = (f.singular_values.array() - lambda).max(0.0).matrix();
  return f.left_vectors * shrunk.asDiagonal() * f.right_vectors.transpose();
}

double operator_norm(const Matrix& A) { return singular_values(A)(0); }

double nuclear_norm(const Matrix& A) { return singular_values(A).sum(); }

double frobenius_norm(const Matrix& A) {
  require_finite(A, "frobenius_norm");
  return A.norm();
}

double sup_norm(const Matrix& A) {
  require_finite(A, "sup_norm");
  return A.cwiseAbs().maxCoeff();
}

Matrix restrict(const Matrix& A, const IndexSet& I) {
  require_finite(A, "restrict");
  if (A.rows() != I.rows() || A.cols() != I.cols()) {
    throw std::invalid_argument("restrict: matrix and index set dimensions disagree");
  }
  Matrix out = Matrix::Zero(A.rows(), A.cols());
  I.for_each([&](int i, int j) { out(i, j) = A(i, j); });
  return out;
}

Matrix clip(const Matrix& A, double a) {
  require_finite(A, "clip");
  if (!(a > 0.0)) {
    throw std::invalid_argument("clip: bound must be positive");
  }
  return A.cwiseMax(-a).cwiseMin(a);
}

int numerical_rank(const Matrix& A, double eps) {
  Vector d = singular_values(A);
  return static_cast<int>((d.array() > eps).count());
}

}  // namespace svtmc

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace svtmc {

/// Dense real matrix, the carrier type for every operation in the toolkit.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Shared tolerance constants, sized for double-precision SVDs on matrices
// up to 500x500.
inline constexpr double kOrthonormalityTol = 1e-10;
inline constexpr double kReconstructionTol = 1e-8;
inline constexpr double kRankEps = 1e-10;

/// Thin SVD A = U diag(d) V^T with d non-increasing and non-negative.
struct SvdFactors {
  Matrix left_vectors;     // m1 x k, orthonormal columns
  Vector singular_values;  // k = min(m1, m2)
  Matrix right_vectors;    // m2 x k, orthonormal columns

  Matrix reconstruct() const {
    return left_vectors * singular_values.asDiagonal() *
           right_vectors.transpose();
  }
};

/// A set of matrix positions (an observation mask and its complement).
/// Backed by a bitmap, so membership is unique by construction.
class IndexSet {
 public:
  IndexSet(int rows, int cols, bool all = false);

  static IndexSet empty(int rows, int cols) { return IndexSet(rows, cols); }
  static IndexSet full(int rows, int cols) {
    return IndexSet(rows, cols, true);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t count() const { return count_; }
  bool is_empty() const { return count_ == 0; }
  bool is_full() const {
    return count_ == static_cast<std::int64_t>(rows_) * cols_;
  }

  bool contains(int i, int j) const { return in_[flat(i, j)] != 0; }

  /// Inserts (i, j); duplicates are absorbed (set semantics).
  void insert(int i, int j);

  IndexSet complement() const;

  /// Visits members in row-major order.
  template <class F>
  void for_each(F&& f) const {
    std::size_t idx = 0;
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j, ++idx) {
        if (in_[idx]) f(i, j);
      }
    }
  }

  std::vector<std::pair<int, int>> members() const;

  bool operator==(const IndexSet& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && in_ == other.in_;
  }

 private:
  std::size_t flat(int i, int j) const {
    return static_cast<std::size_t>(i) * cols_ + j;
  }

  int rows_;
  int cols_;
  std::int64_t count_;
  std::vector<std::uint8_t> in_;
};

/// Rejects empty shapes and non-finite entries; `where` names the caller in
/// the error message.
void require_finite(const Matrix& A, const char* where);

SvdFactors svd(const Matrix& A);

/// Singular values only (no factor matrices).
Vector singular_values(const Matrix& A);

/// Nuclear-norm proximal map: shrinks every singular value by lambda and
/// floors at zero.
Matrix soft_threshold(const Matrix& W, double lambda);

double operator_norm(const Matrix& A);   // largest singular value
double nuclear_norm(const Matrix& A);    // sum of singular values
double frobenius_norm(const Matrix& A);  // entrywise l2 norm
double sup_norm(const Matrix& A);        // largest absolute entry

/// Keeps entries of A on I, zeroes the rest.
Matrix restrict(const Matrix& A, const IndexSet& I);

/// Entrywise projection onto [-a, a].
Matrix clip(const Matrix& A, double a);

/// Count of singular values strictly above eps.
int numerical_rank(const Matrix& A, double eps = kRankEps);

}  // namespace svtmc

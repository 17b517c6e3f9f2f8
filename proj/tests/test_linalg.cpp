#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "svtmc/linalg.hpp"
#include "svtmc/rng.hpp"

using namespace svtmc;
using oracles::random_matrix;

namespace {

Matrix diag2(double d1, double d2) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = d1;
  A(1, 1) = d2;
  return A;
}

IndexSet random_mask(int m, int n, double p, Rng& rng) {
  IndexSet I(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (rng.bernoulli(p)) I.insert(i, j);
    }
  }
  return I;
}

}  // namespace

TEST_CASE("svd: diagonal and zero matrices") {
  SvdFactors f = svd(diag2(2.0, 1.0));
  CHECK(f.singular_values(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.singular_values(1) == doctest::Approx(1.0).epsilon(1e-12));

  SvdFactors z = svd(Matrix::Zero(3, 4));
  CHECK(z.singular_values.size() == 3);
  CHECK(z.singular_values.maxCoeff() == 0.0);
}

TEST_CASE("svd: reconstruction and orthonormality on random input") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix A = random_matrix(5, 5, rng);
    SvdFactors f = svd(A);
    CHECK((f.reconstruct() - A).norm() / A.norm() <= 1e-10);
    int k = static_cast<int>(f.singular_values.size());
    CHECK(k == 5);
    Matrix utu = f.left_vectors.transpose() * f.left_vectors;
    Matrix vtv = f.right_vectors.transpose() * f.right_vectors;
    CHECK((utu - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <=
          kOrthonormalityTol);
    CHECK((vtv - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <=
          kOrthonormalityTol);
    for (int i = 0; i + 1 < k; ++i) {
      CHECK(f.singular_values(i) >= f.singular_values(i + 1));
    }
    CHECK(f.singular_values(k - 1) >= 0.0);
  }
}

TEST_CASE("svd: degenerate shapes") {
  Rng rng(12);
  Matrix row = random_matrix(1, 7, rng);
  SvdFactors f = svd(row);
  CHECK(f.singular_values.size() == 1);
  CHECK(f.singular_values(0) == doctest::Approx(row.norm()).epsilon(1e-12));

  Matrix col = random_matrix(7, 1, rng);
  CHECK(svd(col).singular_values(0) ==
        doctest::Approx(col.norm()).epsilon(1e-12));

  CHECK_THROWS_AS(svd(Matrix(0, 3)), std::invalid_argument);
}

TEST_CASE("svd: non-finite input rejected") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = std::nan("");
  CHECK_THROWS_AS(svd(A), std::invalid_argument);
  A(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(operator_norm(A), std::invalid_argument);
}

TEST_CASE("soft_threshold: diagonal example and identity case") {
  Matrix out = soft_threshold(diag2(3.0, 1.0), 2.0);
  CHECK((out - diag2(1.0, 0.0)).cwiseAbs().maxCoeff() <= 1e-12);

  Rng rng(13);
  Matrix W = random_matrix(4, 6, rng);
  CHECK((soft_threshold(W, 0.0) - W).norm() <= 1e-10);

  CHECK_THROWS_AS(soft_threshold(W, -0.5), std::invalid_argument);
}

TEST_CASE("soft_threshold: output rank bounded by surviving singular values") {
  Rng rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix W = random_matrix(6, 5, rng);
    Vector d = singular_values(W);
    double lambda = d(2);  // kills at least the trailing values
    Matrix out = soft_threshold(W, lambda);
    int survivors = static_cast<int>((d.array() > lambda).count());
    CHECK(numerical_rank(out) <= survivors);
  }
}

TEST_CASE("soft_threshold: matches the prox oracle and beats perturbations") {
  Rng rng(15);
  const double lambda = 0.5;
  Matrix W = random_matrix(4, 4, rng);
  Matrix prox = soft_threshold(W, lambda);
  double f_prox = oracles::prox_objective(W, prox, lambda);

  Matrix ref = oracles::prox_subgradient_oracle(W, lambda, 40000);
  double f_ref = oracles::prox_objective(W, ref, lambda);
  CHECK(f_prox <= f_ref + 1e-6);
  // strong convexity: a small objective gap pins the minimizer
  CHECK((prox - ref).norm() <= 2e-2);

  for (int k = 0; k < 200; ++k) {
    Matrix dir = random_matrix(4, 4, rng);
    Matrix pert = prox + 0.1 * dir / dir.norm();
    CHECK(f_prox <= oracles::prox_objective(W, pert, lambda));
  }
}

TEST_CASE("soft_threshold: non-expansive in Frobenius norm") {
  Rng rng(16);
  for (double lambda : {0.1, 1.0, 10.0}) {
    for (int rep = 0; rep < 100; ++rep) {
      Matrix W1 = random_matrix(8, 6, rng);
      Matrix W2 = random_matrix(8, 6, rng);
      double lhs = (soft_threshold(W1, lambda) - soft_threshold(W2, lambda)).norm();
      CHECK(lhs <= (W1 - W2).norm() + 1e-9);
    }
  }
}

TEST_CASE("norms: diagonal and zero examples") {
  Matrix A = diag2(2.0, 1.0);
  CHECK(operator_norm(A) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(nuclear_norm(A) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(frobenius_norm(A) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(sup_norm(A) == 2.0);

  Matrix Z = Matrix::Zero(3, 2);
  CHECK(operator_norm(Z) == 0.0);
  CHECK(nuclear_norm(Z) == 0.0);
  CHECK(frobenius_norm(Z) == 0.0);
  CHECK(sup_norm(Z) == 0.0);
}

TEST_CASE("norms: ordering and chain on random matrices") {
  Rng rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    Matrix A = random_matrix(6, 4, rng);
    double op = operator_norm(A);
    double nuc = nuclear_norm(A);
    double fro = frobenius_norm(A);
    CHECK(nuc >= op - 1e-10);
    CHECK(nuc >= fro - 1e-10);
    CHECK(op <= fro + 1e-10);
    CHECK(nuc <= 2.0 * fro + 1e-10);  // sqrt(min(6,4)) = 2
  }
}

TEST_CASE("restrict: trivial masks, partition, idempotence") {
  Rng rng(18);
  Matrix A = random_matrix(5, 7, rng);

  CHECK(restrict(A, IndexSet::full(5, 7)) == A);
  CHECK(restrict(A, IndexSet::empty(5, 7)) == Matrix::Zero(5, 7));

  for (int rep = 0; rep < 20; ++rep) {
    IndexSet I = random_mask(5, 7, 0.4, rng);
    Matrix on = restrict(A, I);
    Matrix off = restrict(A, I.complement());
    CHECK(Matrix(on + off) == A);          // exact partition
    CHECK(restrict(on, I) == on);          // exact idempotence
  }

  CHECK_THROWS_AS(restrict(A, IndexSet::full(5, 6)), std::invalid_argument);
}

TEST_CASE("clip: saturation, identity, non-expansiveness") {
  Matrix A(1, 2);
  A << 5.0, -5.0;
  Matrix clipped = clip(A, 1.0);
  CHECK(clipped(0, 0) == 1.0);
  CHECK(clipped(0, 1) == -1.0);
  CHECK(sup_norm(clipped) <= 1.0);

  Rng rng(19);
  Matrix B = random_matrix(3, 3, rng);
  double bound = sup_norm(B) + 1.0;
  CHECK(clip(B, bound) == B);

  CHECK_THROWS_AS(clip(B, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(clip(B, -1.0), std::invalid_argument);

  for (int rep = 0; rep < 100; ++rep) {
    Matrix X = random_matrix(4, 5, rng);
    Matrix Y = random_matrix(4, 5, rng);
    CHECK((clip(X, 0.7) - clip(Y, 0.7)).norm() <= (X - Y).norm() + 1e-12);
  }
}

TEST_CASE("IndexSet: set semantics and complement") {
  IndexSet I(3, 4);
  I.insert(0, 0);
  I.insert(0, 0);  // absorbed
  I.insert(2, 3);
  CHECK(I.count() == 2);
  CHECK(I.contains(0, 0));
  CHECK_FALSE(I.contains(1, 1));
  CHECK(I.complement().count() == 10);
  CHECK(I.complement().complement() == I);
  CHECK_THROWS_AS(I.insert(3, 0), std::invalid_argument);
  CHECK_THROWS_AS(IndexSet(0, 4), std::invalid_argument);

  auto members = I.members();
  REQUIRE(members.size() == 2);
  CHECK(members[0] == std::pair<int, int>{0, 0});
  CHECK(members[1] == std::pair<int, int>{2, 3});
}

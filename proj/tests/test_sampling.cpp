#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "svtmc/sampling.hpp"

using namespace svtmc;
using oracles::random_matrix;

TEST_CASE("draw_mask: certainty, determinism, density concentration") {
  Rng rng(21);
  SamplingModel sure = SamplingModel::uniform(6, 9, 1.0);
  CHECK(draw_mask(sure, rng).is_full());

  SamplingModel model = SamplingModel::uniform(100, 100, 0.3);
  Rng a(77), b(77);
  CHECK(draw_mask(model, a) == draw_mask(model, b));

  // aggregate density over R replicates within 4*sqrt(p(1-p)/(R*m1*m2))
  const int reps = 500;
  Rng rng2(22);
  double total = 0.0;
  for (int k = 0; k < reps; ++k) {
    total += static_cast<double>(draw_mask(model, rng2).count());
  }
  double density = total / (reps * 100.0 * 100.0);
  double band = 4.0 * std::sqrt(0.3 * 0.7 / (reps * 100.0 * 100.0));
  CHECK(std::abs(density - 0.3) < band);
  CHECK(density > 0.29);
  CHECK(density < 0.31);
}

TEST_CASE("draw_mask: general probabilities respected at the extremes") {
  Matrix probs = Matrix::Constant(4, 4, 1e-12);
  probs.diagonal().setConstant(1.0);
  SamplingModel model = SamplingModel::general(probs);
  Rng rng(23);
  IndexSet mask = draw_mask(model, rng);
  for (int i = 0; i < 4; ++i) CHECK(mask.contains(i, i));
}

TEST_CASE("SamplingModel: validation") {
  CHECK_THROWS_AS(SamplingModel::uniform(5, 5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SamplingModel::uniform(5, 5, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(SamplingModel::uniform(0, 5, 0.5), std::invalid_argument);

  Matrix with_zero = Matrix::Constant(3, 3, 0.2);
  with_zero(1, 1) = 0.0;  // no positive floor
  CHECK_THROWS_AS(SamplingModel::general(with_zero), std::invalid_argument);
  Matrix too_big = Matrix::Constant(3, 3, 1.2);
  CHECK_THROWS_AS(SamplingModel::general(too_big), std::invalid_argument);
}

TEST_CASE("NoiseModel: hard bound holds with zero tolerance") {
  Rng rng(24);
  for (const NoiseModel& noise :
       {NoiseModel::uniform_bounded(0.7), NoiseModel::scaled_rademacher(0.7),
        NoiseModel::truncated_gaussian(0.3, 0.7)}) {
    for (int k = 0; k < 100000; ++k) {
      CHECK(std::abs(noise.draw(rng)) <= noise.bound);
    }
    CHECK(noise.sigma <= noise.bound);
  }
}

TEST_CASE("NoiseModel: moments approach the declared sigma") {
  Rng rng(25);
  for (const NoiseModel& noise :
       {NoiseModel::uniform_bounded(1.0), NoiseModel::scaled_rademacher(0.5),
        NoiseModel::truncated_gaussian(1.0, 3.0)}) {
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < n; ++k) {
      double x = noise.draw(rng);
      sum += x;
      sumsq += x * x;
    }
    double mean = sum / n;
    double sd = std::sqrt(sumsq / n - mean * mean);
    CHECK(std::abs(mean) < 0.01 * noise.bound);
    CHECK(sd == doctest::Approx(noise.sigma).epsilon(0.03));
  }
}

TEST_CASE("NoiseModel: truncated gaussian against the closed-form sd") {
  // the generator scales a cutoff-c truncated standard normal by b/c; its sd
  // must land exactly on the requested sigma
  NoiseModel noise = NoiseModel::truncated_gaussian(1.0, 3.0);
  double analytic_sd =
      (3.0 / noise.tg_cutoff) * oracles::truncated_normal_sd(noise.tg_cutoff);
  CHECK(analytic_sd == doctest::Approx(1.0).epsilon(1e-10));

  Rng rng(26);
  const int n = 100000;
  double sumsq = 0.0;
  for (int k = 0; k < n; ++k) {
    double x = noise.draw(rng);
    sumsq += x * x;
  }
  double sample_sd = std::sqrt(sumsq / n);
  CHECK(sample_sd >= 0.97 * analytic_sd);
  CHECK(sample_sd <= 1.03 * analytic_sd);
}

TEST_CASE("NoiseModel: infeasible truncated gaussian rejected") {
  // the truncated family's sd cannot reach sigma unless b > sigma*sqrt(3)
  CHECK_THROWS_AS(NoiseModel::truncated_gaussian(1.0, 1.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel::truncated_gaussian(0.0, 1.0),
                  std::invalid_argument);
  CHECK_NOTHROW(NoiseModel::truncated_gaussian(1.0, 1.7400001));
}

TEST_CASE("observe: exact values on the mask") {
  Rng rng(27);
  Matrix M0 = random_matrix(5, 6, rng);
  IndexSet mask(5, 6);
  mask.insert(0, 0);
  mask.insert(4, 5);
  mask.insert(2, 3);

  ObservationSet clean = observe(M0, NoiseModel::none(), mask, rng);
  CHECK(clean.values.size() == 3);
  Matrix filled = clean.zero_filled();
  mask.for_each([&](int i, int j) { CHECK(filled(i, j) == M0(i, j)); });

  ObservationSet pm = observe(Matrix::Zero(5, 6),
                              NoiseModel::scaled_rademacher(1.0), mask, rng);
  for (double v : pm.values) CHECK(std::abs(v) == 1.0);

  CHECK_THROWS_AS(observe(Matrix::Zero(4, 6), NoiseModel::none(), mask, rng),
                  std::invalid_argument);
}

TEST_CASE("weighted_norm_sq: closed forms and floor bound") {
  SamplingModel half = SamplingModel::uniform(2, 2, 0.5);
  CHECK(weighted_norm_sq(Matrix::Ones(2, 2), half) == doctest::Approx(2.0));

  Rng rng(28);
  Matrix A = random_matrix(6, 5, rng);
  SamplingModel certain = SamplingModel::uniform(6, 5, 1.0);
  CHECK(weighted_norm_sq(A, certain) ==
        doctest::Approx(A.squaredNorm()).epsilon(1e-13));

  SamplingModel u = SamplingModel::uniform(6, 5, 0.37);
  CHECK(weighted_norm_sq(A, u) ==
        doctest::Approx(0.37 * A.squaredNorm()).epsilon(1e-12));

  for (int rep = 0; rep < 20; ++rep) {
    Matrix probs(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) probs(i, j) = rng.uniform(0.05, 1.0);
    }
    SamplingModel g = SamplingModel::general(probs);
    Matrix B = random_matrix(4, 4, rng);
    CHECK(weighted_norm_sq(B, g) >=
          g.floor_prob() * B.squaredNorm() * (1.0 - 1e-12));
  }

  CHECK_THROWS_AS(weighted_norm_sq(Matrix::Zero(3, 3), half),
                  std::invalid_argument);
}

TEST_CASE("marginals: uniform closed form and floor inequality") {
  SamplingModel m = SamplingModel::uniform(10, 20, 0.1);
  MarginalSummary s = marginals(m);
  CHECK(s.row_marginals.size() == 10);
  CHECK(s.col_marginals.size() == 20);
  CHECK(s.row_marginals(3) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.col_marginals(7) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.L == doctest::Approx(2.0).epsilon(1e-14));

  Rng rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix probs(5, 8);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 8; ++j) probs(i, j) = rng.uniform(0.02, 1.0);
    }
    SamplingModel g = SamplingModel::general(probs);
    MarginalSummary gs = marginals(g);
    // exact sums
    for (int i = 0; i < 5; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 8; ++j) acc += probs(i, j);
      CHECK(gs.row_marginals(i) == acc);
    }
    CHECK(gs.L >= g.floor_prob() * 8 - 1e-12);
  }
}

TEST_CASE("marginals: two-level model satisfies the band detector") {
  Rng rng(30);
  const double p = 0.2, mu1 = 2.0, mu2 = 0.5;
  SamplingModel m = SamplingModel::two_level(30, 40, p, mu1, mu2, rng);
  MarginalSummary s = marginals(m);
  double min_marg =
      std::min(s.row_marginals.minCoeff(), s.col_marginals.minCoeff());
  CHECK(min_marg >= mu2 * p * 30 - 1e-9);
  CHECK(s.L <= mu1 * p * 40 + 1e-9);
  // expected count matches the uniform-rate target up to rounding
  CHECK(m.expected_observations() == doctest::Approx(p * 30 * 40).epsilon(0.01));
}

TEST_CASE("empirical_marginals: closed forms and concentration") {
  auto [rf, cf] = empirical_marginals(IndexSet::full(4, 8));
  for (int j = 0; j < 8; ++j) CHECK(cf(j) == doctest::Approx(1.0 / 8));
  for (int i = 0; i < 4; ++i) CHECK(rf(i) == doctest::Approx(1.0 / 4));
  CHECK(rf.sum() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(cf.sum() == doctest::Approx(1.0).epsilon(1e-13));

  IndexSet single(2, 2);
  single.insert(0, 0);
  auto [r1, c1] = empirical_marginals(single);
  CHECK(c1(0) == 1.0);
  CHECK(c1(1) == 0.0);

  CHECK_THROWS_AS(empirical_marginals(IndexSet::empty(3, 3)),
                  std::invalid_argument);

  // p=0.5 on 200x200: in every replicate at least 95% of the columns (and
  // rows) estimate within +-20% of 1/200; the per-column 2.8-sigma tail
  // (~0.5%) makes >5% failures astronomically unlikely
  SamplingModel model = SamplingModel::uniform(200, 200, 0.5);
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    IndexSet mask = draw_mask(model, rng);
    auto [rfreq, cfreq] = empirical_marginals(mask);
    int bad = 0;
    for (int j = 0; j < 200; ++j) {
      if (std::abs(cfreq(j) - 0.005) > 0.001) ++bad;
    }
    for (int i = 0; i < 200; ++i) {
      if (std::abs(rfreq(i) - 0.005) > 0.001) ++bad;
    }
    CHECK(bad <= 20);  // 5% of 400
  }
}

TEST_CASE("feasibility_check: closed-form thresholds") {
  SamplingModel full = SamplingModel::uniform(10, 10, 1.0);
  FeasibilityReport r1 = feasibility_check(1, full);
  CHECK(r1.expected_n == doctest::Approx(100.0));
  CHECK(r1.threshold == doctest::Approx(10.0));
  CHECK(r1.feasible);
  CHECK(r1.dense_regime);  // 100 > 10*log(20) ~ 30

  SamplingModel sparse = SamplingModel::uniform(20, 20, 0.01);
  FeasibilityReport r2 = feasibility_check(5, sparse);
  CHECK(r2.expected_n == doctest::Approx(4.0));
  CHECK(r2.threshold == doctest::Approx(100.0));
  CHECK_FALSE(r2.feasible);

  // threshold linear in r
  for (int r = 1; r <= 10; ++r) {
    CHECK(feasibility_check(r, full).threshold == doctest::Approx(10.0 * r));
  }
  CHECK_THROWS_AS(feasibility_check(0, full), std::invalid_argument);
}

TEST_CASE("observation files: round trip exact") {
  Rng rng(32);
  Matrix M0 = random_matrix(7, 5, rng);
  M0(0, 0) = 1.0 / 3.0;
  M0(1, 1) = 1e-300;
  M0(2, 2) = -12345.678901234567;
  SamplingModel model = SamplingModel::uniform(7, 5, 0.6);
  IndexSet mask = draw_mask(model, rng);
  ObservationSet obs = observe(M0, NoiseModel::none(), mask, rng);

  std::string path = "obs_roundtrip_test.txt";
  write_observations(obs, path);
  ObservationSet back = read_observations(path);
  CHECK(back.mask == obs.mask);
  REQUIRE(back.values.size() == obs.values.size());
  for (std::size_t k = 0; k < obs.values.size(); ++k) {
    CHECK(back.values[k] == obs.values[k]);  // bit-exact via 17 digits
  }
  std::filesystem::remove(path);
}

TEST_CASE("observation files: malformed input rejected") {
  std::string path = "obs_bad_test.txt";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("%%observations 2 2 2\n1 1 0.5\n1 1 0.7\n", f);  // duplicate
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_observations(path), std::invalid_argument);
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("%%wrong 2 2 0\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_observations(path), std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("sampling model files: both kinds round trip") {
  std::string path = "model_roundtrip_test.txt";
  SamplingModel u = SamplingModel::uniform(6, 4, 0.375);
  write_sampling_model(u, path);
  SamplingModel u2 = read_sampling_model(path, 6, 4);
  CHECK(u2.is_uniform());
  CHECK(u2.uniform_p() == 0.375);

  Rng rng(33);
  Matrix probs(3, 5);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 5; ++j) probs(i, j) = rng.uniform(0.01, 1.0);
  }
  SamplingModel g = SamplingModel::general(probs);
  write_sampling_model(g, path);
  SamplingModel g2 = read_sampling_model(path, 3, 5);
  CHECK_FALSE(g2.is_uniform());
  CHECK(g2.prob_matrix() == probs);

  CHECK_THROWS_AS(read_sampling_model(path, 4, 5), std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("rng: reproducible streams, distinct derived seeds") {
  Rng a(123), b(123);
  for (int k = 0; k < 100; ++k) CHECK(a.raw() == b.raw());
  CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 3, 5));
  CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 4, 3));
  CHECK(derive_seed(7, 0) != derive_seed(8, 0));
}

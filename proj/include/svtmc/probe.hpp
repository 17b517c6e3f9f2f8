#pragma once

#include <string>
#include <vector>

#include "svtmc/linalg.hpp"
#include "svtmc/sampling.hpp"

namespace svtmc {

/// One Monte Carlo draw of the mask-noise matrix (noise values on a random
/// mask) and the mask-sign matrix (fresh Rademacher signs on the same mask).
struct StochasticTermSample {
  Matrix sigma_matrix;    // noise on the mask, zero elsewhere
  Matrix sigma_r_matrix;  // {-1, 0, +1}: signs on the mask
  double opnorm_sigma = 0.0;
  double opnorm_sigma_r = 0.0;
  IndexSet mask;
};

StochasticTermSample sample_sigma(const SamplingModel& model,
                                  const NoiseModel& noise, Rng& rng);

/// Tail check of ||Sigma|| <= 3*sigma*sqrt(2L) + c_star*b*t over replicates.
struct SigmaBoundReport {
  int reps = 0;
  double t = 0.0;
  double c_star = 0.0;
  double bound = 0.0;
  int violations = 0;
  double max_opnorm = 0.0;
  /// Smallest c_star that would give zero violations on this sample set.
  double calibrated_c_star = 0.0;
};

SigmaBoundReport check_sigma_bound(const SamplingModel& model,
                                   const NoiseModel& noise, double t,
                                   double c_star, int reps, Rng& rng);

/// Monte Carlo mean of ||Sigma_R|| against sqrt(L) + sqrt(log m).
struct SigmaRReport {
  int reps = 0;
  double mean_opnorm = 0.0;
  double bound_value = 0.0;  // sqrt(L) + sqrt(log(min(m1, m2)))
  double ratio_to_bound = 0.0;
};

SigmaRReport estimate_expected_sigma_r(const SamplingModel& model, int reps,
                                       Rng& rng);

/// A family of rank-<= r matrices with entries in {0, v},
/// v = gamma * min(sigma, a) * sqrt(r / (p*m)), pairwise separated in
/// squared Frobenius distance. Contains the zero matrix.
struct PackingSet {
  std::vector<Matrix> members;
  int r = 0;
  double a = 0.0;
  double gamma = 0.0;
  double separation = 0.0;   // guaranteed pairwise squared distance
  double entry_value = 0.0;  // the nonzero entry level v
  bool shortfall = false;    // retry budget ran out before target_count
};

/// Randomized search with pairwise-distance acceptance; requires p >= r/m so
/// the entry level stays within [0, a].
PackingSet build_packing_set(int m1, int m2, int r, double p, double sigma,
                             double a, double gamma, int target_count,
                             Rng& rng, int max_tries = 0);

/// Writes member_###.csv files plus manifest.json
/// {r, a, gamma, separation, count, shortfall} into `dir`.
void write_packing_set(const PackingSet& set, const std::string& dir);

/// One-step baseline: hard-threshold the singular values of the zero-filled
/// observation matrix at eta * sqrt(max(m1,m2) * p_hat) with
/// p_hat = |mask| / (m1*m2), rescale the kept part by 1/p_hat, then clip
/// to [-a, a].
Matrix usvt_baseline(const ObservationSet& Y, double a, double eta);

std::string sigma_bound_report_json(const SigmaBoundReport& rep);
std::string sigma_r_report_json(const SigmaRReport& rep);

}  // namespace svtmc

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "svtmc/linalg.hpp"
#include "svtmc/rng.hpp"

namespace svtmc {

/// Entrywise Bernoulli observation probabilities: either a single uniform
/// rate p or a full matrix of per-entry rates, all strictly positive.
class SamplingModel {
 public:
  static SamplingModel uniform(int rows, int cols, double p);
  static SamplingModel general(Matrix probs);

  /// Two-level model with entries in {mu2*p, mu1*p} mixed so the expected
  /// observation count matches uniform sampling at rate p.
  static SamplingModel two_level(int rows, int cols, double p, double mu1,
                                 double mu2, Rng& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_uniform() const { return uniform_p_ > 0.0; }
  double uniform_p() const;

  double prob(int i, int j) const {
    return is_uniform() ? uniform_p_ : probs_(i, j);
  }

  /// Smallest entry probability (the positive floor p).
  double floor_prob() const { return floor_; }

  /// Sum of all entry probabilities (the expected observation count).
  double expected_observations() const;

  Matrix prob_matrix() const;

 private:
  SamplingModel() = default;

  int rows_ = 0;
  int cols_ = 0;
  double uniform_p_ = 0.0;  // > 0 iff uniform
  double floor_ = 0.0;
  Matrix probs_;  // empty for uniform
};

/// Zero-mean noise bounded by b with per-entry standard deviation sigma.
struct NoiseModel {
  enum class Kind { none, uniform_bounded, scaled_rademacher, truncated_gaussian };

  Kind kind = Kind::none;
  double sigma = 0.0;  // per-entry standard deviation
  double bound = 0.0;  // hard sup bound b

  static NoiseModel none();
  static NoiseModel uniform_bounded(double b);    // sigma = b / sqrt(3)
  static NoiseModel scaled_rademacher(double b);  // sigma = b
  /// Mean-zero Gaussian truncated and rescaled so the standard deviation is
  /// exactly sigma and the support is [-b, b]; requires b > sigma * sqrt(3).
  static NoiseModel truncated_gaussian(double sigma, double b);

  double draw(Rng& rng) const;

  // truncated-gaussian internals: draw is tg_scale * (standard normal
  // conditioned on |z| <= tg_cutoff)
  double tg_cutoff = 0.0;
  double tg_scale = 0.0;
};

/// The realized observations: a mask plus one value per mask member, stored
/// in row-major member order.
struct ObservationSet {
  IndexSet mask;
  std::vector<double> values;

  int rows() const { return mask.rows(); }
  int cols() const { return mask.cols(); }

  /// Dense matrix with values on the mask and zeros elsewhere.
  Matrix zero_filled() const;

  /// Dense matrix with values on the mask and `background` elsewhere.
  Matrix filled_with(const Matrix& background) const;
};

struct MarginalSummary {
  Vector row_marginals;  // sum of probabilities per row
  Vector col_marginals;  // sum of probabilities per column
  double L = 0.0;        // max over all row and column marginals
};

struct FeasibilityReport {
  double expected_n = 0.0;
  double threshold = 0.0;  // C * r * max(m1, m2)
  bool feasible = false;
  double dense_threshold = 0.0;  // min(m1, m2) * log(m1 + m2)
  bool dense_regime = false;
};

/// Includes each position independently with its model probability.
IndexSet draw_mask(const SamplingModel& model, Rng& rng);

/// y_ij = m_ij + xi_ij at each mask member, noise drawn independently.
ObservationSet observe(const Matrix& M0, const NoiseModel& noise,
                       const IndexSet& mask, Rng& rng);

/// Sum of prob(i,j) * A(i,j)^2 over all entries.
double weighted_norm_sq(const Matrix& A, const SamplingModel& model);

MarginalSummary marginals(const SamplingModel& model);

/// Observed-count fractions per row and per column; each vector sums to 1.
/// Fails on an empty mask.
std::pair<Vector, Vector> empirical_marginals(const IndexSet& mask);

/// Advisory check that the expected observation count supports rank r.
FeasibilityReport feasibility_check(int r, const SamplingModel& model,
                                    double C = 1.0);

// Plain-text coordinate files: header `%%observations m1 m2 count`, then one
// `i j value` line per observation (1-indexed, 17 significant digits).
void write_observations(const ObservationSet& obs, const std::string& path);
ObservationSet read_observations(const std::string& path);

// Sampling model files: a single line `uniform p`, or a probability matrix
// in the same coordinate layout with full count. The expected dimensions
// come from the accompanying observations.
void write_sampling_model(const SamplingModel& model, const std::string& path);
SamplingModel read_sampling_model(const std::string& path, int rows, int cols);

}  // namespace svtmc

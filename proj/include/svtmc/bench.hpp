#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svtmc/probe.hpp"
#include "svtmc/sampling.hpp"
#include "svtmc/svt.hpp"

namespace svtmc {

enum class Estimator { svt, usvt };

std::string estimator_name(Estimator e);

/// Grid description for a scaling study. Sampling is uniform at each p from
/// the grid unless mu1/mu2 describe a two-level model around p.
struct ExperimentSpec {
  int m1 = 60;
  int m2 = 60;
  std::vector<int> rank_grid;
  std::vector<double> p_grid;
  NoiseModel noise = NoiseModel::none();
  double a = 1.0;
  LambdaSpec lambda_rule = DenseLambdaRule{0.01};
  int replicates = 1;
  std::uint64_t seed = 0;
  std::vector<Estimator> estimators = {Estimator::svt};
  double usvt_eta = 1.0;
  double mu1 = 1.0;  // two-level sampling when mu1/mu2 != 1
  double mu2 = 1.0;

  void validate() const;
};

struct TrialRecord {
  int r = 0;
  double p = 0.0;
  int replicate = 0;
  Estimator estimator = Estimator::svt;
  double mse = 0.0;           // ||est - M0||_2^2 / (m1*m2)
  double weighted_err = 0.0;  // ||est - M0||^2 weighted by the sampling probs
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;  // seconds; informational, not part of reports
};

struct SlopeFit {
  std::string axis;  // "p" or "r"
  Estimator estimator = Estimator::svt;
  double fixed_value = 0.0;  // the r (for axis "p") or p (for axis "r") held fixed
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

struct GridMedian {
  int r = 0;
  double p = 0.0;
  Estimator estimator = Estimator::svt;
  double median_mse = 0.0;
  double median_weighted_err = 0.0;
  int n = 0;
};

struct ReportBundle {
  std::vector<TrialRecord> records;
  std::vector<GridMedian> medians;
  std::vector<SlopeFit> slope_fits;
};

/// Gaussian-factor product rescaled so the sup-norm equals a exactly.
Matrix generate_low_rank(int m1, int m2, int r, double a, Rng& rng);

/// One grid point: draws ground truth, mask and noise from streams derived
/// from (seed, r, p-index, replicate), runs the selected estimators on the
/// same data, and scores both error metrics.
std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, int r,
                                   int p_index, int replicate);

/// All (r, p, replicate) combinations plus per-axis log-log slope fits of
/// the median mse (axes with at least 3 grid points).
ReportBundle scaling_study(const ExperimentSpec& spec);

/// Writes records.csv and summary.json into `dir`; rejects empty bundles.
void emit_report(const ReportBundle& bundle, const std::string& dir);

/// Re-parses a records.csv written by emit_report.
std::vector<TrialRecord> read_records_csv(const std::string& path);

ExperimentSpec spec_from_json_text(const std::string& text);
std::string spec_to_json_text(const ExperimentSpec& spec);

}  // namespace svtmc

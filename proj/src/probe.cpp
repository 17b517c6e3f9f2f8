#include "svtmc/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "svtmc/svt.hpp"
#include "svtmc/util.hpp"

namespace svtmc {

StochasticTermSample sample_sigma(const SamplingModel& model,
                                  const NoiseModel& noise, Rng& rng) {
  IndexSet mask = draw_mask(model, rng);
  Matrix sigma = Matrix::Zero(model.rows(), model.cols());
  Matrix sigma_r = Matrix::Zero(model.rows(), model.cols());
  mask.for_each([&](int i, int j) {
    sigma(i, j) = noise.draw(rng);
    sigma_r(i, j) = rng.rademacher();
  });
  StochasticTermSample out{std::move(sigma), std::move(sigma_r), 0.0, 0.0,
                           std::move(mask)};
  out.opnorm_sigma = operator_norm(out.sigma_matrix);
  out.opnorm_sigma_r = operator_norm(out.sigma_r_matrix);
  return out;
}

SigmaBoundReport check_sigma_bound(const SamplingModel& model,
                                   const NoiseModel& noise, double t,
                                   double c_star, int reps, Rng& rng) {
  if (reps < 1) throw std::invalid_argument("check_sigma_bound: reps must be >= 1");
  if (!(t > 0.0)) throw std::invalid_argument("check_sigma_bound: t must be positive");
  double L = marginals(model).L;
  SigmaBoundReport rep;
  rep.reps = reps;
  rep.t = t;
  rep.c_star = c_star;
  double base = 3.0 * noise.sigma * std::sqrt(2.0 * L);
  rep.bound = base + c_star * noise.bound * t;
  double needed = 0.0;
  for (int k = 0; k < reps; ++k) {
    StochasticTermSample s = sample_sigma(model, noise, rng);
    rep.max_opnorm = std::max(rep.max_opnorm, s.opnorm_sigma);
    if (s.opnorm_sigma > rep.bound) ++rep.violations;
    if (noise.bound > 0.0) {
      needed = std::max(needed, (s.opnorm_sigma - base) / (noise.bound * t));
    }
  }
  rep.calibrated_c_star = std::max(0.0, needed);
  return rep;
}

SigmaRReport estimate_expected_sigma_r(const SamplingModel& model, int reps,
                                       Rng& rng) {
  if (reps < 30) {
    throw std::invalid_argument("estimate_expected_sigma_r: reps must be >= 30");
  }
  double L = marginals(model).L;
  int m = std::min(model.rows(), model.cols());
  NoiseModel no_noise = NoiseModel::none();
  CompensatedSum mean;
  for (int k = 0; k < reps; ++k) {
    StochasticTermSample s = sample_sigma(model, no_noise, rng);
    mean.add(s.opnorm_sigma_r);
  }
  SigmaRReport rep;
  rep.reps = reps;
  rep.mean_opnorm = mean.value() / reps;
  rep.bound_value = std::sqrt(L) + std::sqrt(std::log(static_cast<double>(m)));
  rep.ratio_to_bound = rep.mean_opnorm / rep.bound_value;
  return rep;
}

PackingSet build_packing_set(int m1, int m2, int r, double p, double sigma,
                             double a, double gamma, int target_count,
                             Rng& rng, int max_tries) {
  int m = std::min(m1, m2);
  if (m1 < 1 || m2 < 1 || r < 1 || r > m) {
    throw std::invalid_argument("build_packing_set: need 1 <= r <= min(m1, m2)");
  }
  if (!(p > 0.0) || p > 1.0 || p * m < static_cast<double>(r)) {
    throw std::invalid_argument("build_packing_set: need r/m <= p <= 1");
  }
  if (!(gamma > 0.0) || gamma > 1.0) {
    throw std::invalid_argument("build_packing_set: gamma must lie in (0, 1]");
  }
  if (!(sigma > 0.0) || !(a > 0.0)) {
    throw std::invalid_argument("build_packing_set: sigma and a must be positive");
  }
  if (target_count < 2) {
    throw std::invalid_argument("build_packing_set: target_count must be >= 2");
  }

  double level = std::min(sigma, a);
  double v = gamma * level * std::sqrt(static_cast<double>(r) / (p * m));
  if (v > a * (1.0 + 1e-12)) {
    throw std::logic_error("build_packing_set: entry level exceeds a");
  }
  PackingSet set;
  set.r = r;
  set.a = a;
  set.gamma = gamma;
  set.entry_value = v;
  set.separation = (gamma * gamma / 16.0) * level * level *
                   static_cast<double>(m1) * m2 * r / (p * m);

  // Base block: tall x r binary pattern, replicated side by side over half
  // the wide dimension; build wide-first and transpose if m1 < m2.
  const bool transposed = m1 < m2;
  const int tall = transposed ? m2 : m1;
  const int wide = transposed ? m1 : m2;
  const int blocks = wide / (2 * r);

  set.members.push_back(Matrix::Zero(m1, m2));

  if (max_tries <= 0) max_tries = 500 * target_count;
  int tries = 0;
  while (static_cast<int>(set.members.size()) < target_count &&
         tries < max_tries) {
    ++tries;
    Matrix base(tall, r);
    for (int i = 0; i < tall; ++i) {
      for (int j = 0; j < r; ++j) base(i, j) = rng.bernoulli(0.5) ? v : 0.0;
    }
    Matrix cand = Matrix::Zero(tall, wide);
    for (int blk = 0; blk < blocks; ++blk) {
      cand.block(0, blk * r, tall, r) = base;
    }
    Matrix member = transposed ? Matrix(cand.transpose()) : std::move(cand);
    bool ok = true;
    for (const Matrix& other : set.members) {
      if ((member - other).squaredNorm() < set.separation) {
        ok = false;
        break;
      }
    }
    if (ok) set.members.push_back(std::move(member));
  }
  set.shortfall = static_cast<int>(set.members.size()) < target_count;
  return set;
}

void write_packing_set(const PackingSet& set, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < set.members.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "member_%03zu.csv", k);
    write_matrix_csv(set.members[k], dir + "/" + name);
  }
  nlohmann::json j;
  j["r"] = set.r;
  j["a"] = set.a;
  j["gamma"] = set.gamma;
  j["separation"] = set.separation;
  j["count"] = set.members.size();
  j["shortfall"] = set.shortfall;
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw std::runtime_error("write_packing_set: cannot open manifest");
  out << j.dump(2) << '\n';
}

Matrix usvt_baseline(const ObservationSet& Y, double a, double eta) {
  if (Y.mask.is_empty()) {
    throw std::invalid_argument("usvt_baseline: empty observation mask");
  }
  if (!(a > 0.0) || !(eta >= 0.0)) {
    throw std::invalid_argument("usvt_baseline: need a > 0 and eta >= 0");
  }
  double p_hat = static_cast<double>(Y.mask.count()) /
                 (static_cast<double>(Y.rows()) * Y.cols());
  SvdFactors f = svd(Y.zero_filled());
  double threshold = eta * std::sqrt(std::max(Y.rows(), Y.cols()) * p_hat);
  Vector kept = f.singular_values;
  for (int i = 0; i < kept.size(); ++i) {
    if (!(kept(i) > threshold)) kept(i) = 0.0;
  }
  Matrix est = f.left_vectors * kept.asDiagonal() * f.right_vectors.transpose();
  est /= p_hat;
  return clip(est, a);
}

std::string sigma_bound_report_json(const SigmaBoundReport& rep) {
  nlohmann::json j;
  j["reps"] = rep.reps;
  j["t"] = rep.t;
  j["c_star"] = rep.c_star;
  j["bound"] = rep.bound;
  j["violations"] = rep.violations;
  j["max_opnorm"] = rep.max_opnorm;
  j["calibrated_constant"] = rep.calibrated_c_star;
  return j.dump(2);
}

std::string sigma_r_report_json(const SigmaRReport& rep) {
  nlohmann::json j;
  j["reps"] = rep.reps;
  j["mean_opnorm"] = rep.mean_opnorm;
  j["bound"] = rep.bound_value;
  j["ratio_to_bound"] = rep.ratio_to_bound;
  return j.dump(2);
}

}  // namespace svtmc

#include "svtmc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "svtmc/util.hpp"

namespace svtmc {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935274463415059;

double std_normal_pdf(double c) {
  constexpr double inv_sqrt_2pi = 0.39894228040143267793994605993438;
  return inv_sqrt_2pi * std::exp(-0.5 * c * c);
}

// sd of a standard normal conditioned on [-c, c]
double truncated_sd(double c) {
  double mass = std::erf(c / std::sqrt(2.0));  // 2*Phi(c) - 1
  return std::sqrt(1.0 - 2.0 * c * std_normal_pdf(c) / mass);
}

}  // namespace

SamplingModel SamplingModel::uniform(int rows, int cols, double p) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("SamplingModel: dimensions must be positive");
  }
  if (!(p > 0.0) || p > 1.0) {
    throw std::invalid_argument(
        "SamplingModel: uniform rate must lie in (0, 1]");
  }
  SamplingModel m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.uniform_p_ = p;
  m.floor_ = p;
  return m;
}

SamplingModel SamplingModel::general(Matrix probs) {
  require_finite(probs, "SamplingModel::general");
  double lo = probs.minCoeff();
  double hi = probs.maxCoeff();
  if (!(lo > 0.0)) {
    throw std::invalid_argument(
        "SamplingModel: every probability must be strictly positive; the "
        "observation model requires a positive floor p > 0");
  }
  if (hi > 1.0) {
    throw std::invalid_argument("SamplingModel: probabilities must be <= 1");
  }
  SamplingModel m;
  m.rows_ = static_cast<int>(probs.rows());
  m.cols_ = static_cast<int>(probs.cols());
  m.floor_ = lo;
  m.probs_ = std::move(probs);
  return m;
}

SamplingModel SamplingModel::two_level(int rows, int cols, double p,
                                       double mu1, double mu2, Rng& rng) {
  if (!(mu2 > 0.0) || mu2 > 1.0 || mu1 < 1.0) {
    throw std::invalid_argument(
        "SamplingModel::two_level: need 0 < mu2 <= 1 <= mu1");
  }
  if (!(p > 0.0) || mu1 * p > 1.0) {
    throw std::invalid_argument(
        "SamplingModel::two_level: mu1 * p must lie in (0, 1]");
  }
  if (mu1 == mu2) {
    return uniform(rows, cols, p);
  }
  // fraction of entries at mu1*p so the mean rate is exactly p
  double f = (1.0 - mu2) / (mu1 - mu2);
  std::int64_t total = static_cast<std::int64_t>(rows) * cols;
  std::int64_t n_high = std::llround(f * static_cast<double>(total));
  std::vector<std::int64_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::int64_t k = 0; k < n_high; ++k) {
    std::int64_t pick =
        k + static_cast<std::int64_t>(rng.uniform() * double(total - k));
    std::swap(idx[k], idx[pick]);
  }
  Matrix probs = Matrix::Constant(rows, cols, mu2 * p);
  for (std::int64_t k = 0; k < n_high; ++k) {
    probs(idx[k] / cols, idx[k] % cols) = mu1 * p;
  }
  return general(std::move(probs));
}

double SamplingModel::uniform_p() const {
  if (!is_uniform()) {
    throw std::logic_error("SamplingModel: not a uniform model");
  }
  return uniform_p_;
}

double SamplingModel::expected_observations() const {
  if (is_uniform()) {
    return uniform_p_ * static_cast<double>(rows_) * cols_;
  }
  CompensatedSum s;
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) s.add(probs_(i, j));
  }
  return s.value();
}

Matrix SamplingModel::prob_matrix() const {
  if (is_uniform()) return Matrix::Constant(rows_, cols_, uniform_p_);
  return probs_;
}

NoiseModel NoiseModel::none() { return NoiseModel{}; }

NoiseModel NoiseModel::uniform_bounded(double b) {
  if (!(b > 0.0)) throw std::invalid_argument("NoiseModel: bound must be positive");
  NoiseModel n;
  n.kind = Kind::uniform_bounded;
  n.bound = b;
  n.sigma = b / kSqrt3;
  return n;
}

NoiseModel NoiseModel::scaled_rademacher(double b) {
  if (!(b > 0.0)) throw std::invalid_argument("NoiseModel: bound must be positive");
  NoiseModel n;
  n.kind = Kind::scaled_rademacher;
  n.bound = b;
  n.sigma = b;
  return n;
}

NoiseModel NoiseModel::truncated_gaussian(double sigma, double b) {
  if (!(sigma > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("NoiseModel: sigma and bound must be positive");
  }
  double target = b / sigma;
  // The family's sd tops out at b/sqrt(3) (the uniform limit), so the
  // requested sd is reachable only when b/sigma exceeds sqrt(3).
  if (!(target > kSqrt3)) {
    throw std::invalid_argument(
        "NoiseModel: requested sigma is infeasible for bound b; need "
        "b > sigma * sqrt(3)");
  }
  // solve cutoff c from c / truncated_sd(c) = b / sigma (strictly increasing)
  double lo = 1e-12, hi = target;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid / truncated_sd(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double c = 0.5 * (lo + hi);
  NoiseModel n;
  n.kind = Kind::truncated_gaussian;
  n.sigma = sigma;
  n.bound = b;
  n.tg_cutoff = c;
  n.tg_scale = b / c;
  return n;
}

double NoiseModel::draw(Rng& rng) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::uniform_bounded:
      return rng.uniform(-bound, bound);
    case Kind::scaled_rademacher:
      return bound * rng.rademacher();
    case Kind::truncated_gaussian: {
      double z = rng.normal();
      while (std::abs(z) > tg_cutoff) z = rng.normal();
      return tg_scale * z;
    }
  }
  return 0.0;
}

Matrix ObservationSet::zero_filled() const {
  Matrix out = Matrix::Zero(rows(), cols());
  std::size_t k = 0;
  mask.for_each([&](int i, int j) { out(i, j) = values[k++]; });
  return out;
}

Matrix ObservationSet::filled_with(const Matrix& background) const {
  if (background.rows() != rows() || background.cols() != cols()) {
    throw std::invalid_argument(
        "ObservationSet::filled_with: dimension mismatch");
  }
  Matrix out = background;
  std::size_t k = 0;
  mask.for_each([&](int i, int j) { out(i, j) = values[k++]; });
  return out;
}

IndexSet draw_mask(const SamplingModel& model, Rng& rng) {
  IndexSet mask(model.rows(), model.cols());
  for (int i = 0; i < model.rows(); ++i) {
    for (int j = 0; j < model.cols(); ++j) {
      if (rng.bernoulli(model.prob(i, j))) mask.insert(i, j);
    }
  }
  return mask;
}

ObservationSet observe(const Matrix& M0, const NoiseModel& noise,
                       const IndexSet& mask, Rng& rng) {
  require_finite(M0, "observe");
  if (M0.rows() != mask.rows() || M0.cols() != mask.cols()) {
    throw std::invalid_argument("observe: matrix and mask dimensions disagree");
  }
  ObservationSet obs{mask, {}};
  obs.values.reserve(static_cast<std::size_t>(mask.count()));
  mask.for_each(
      [&](int i, int j) { obs.values.push_back(M0(i, j) + noise.draw(rng)); });
  return obs;
}

double weighted_norm_sq(const Matrix& A, const SamplingModel& model) {
  require_finite(A, "weighted_norm_sq");
  if (A.rows() != model.rows() || A.cols() != model.cols()) {
    throw std::invalid_argument(
        "weighted_norm_sq: matrix and model dimensions disagree");
  }
  CompensatedSum s;
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      s.add(model.prob(i, j) * A(i, j) * A(i, j));
    }
  }
  return s.value();
}

MarginalSummary marginals(const SamplingModel& model) {
  MarginalSummary out;
  out.row_marginals = Vector::Zero(model.rows());
  out.col_marginals = Vector::Zero(model.cols());
  for (int i = 0; i < model.rows(); ++i) {
    for (int j = 0; j < model.cols(); ++j) {
      double pij = model.prob(i, j);
      out.row_marginals(i) += pij;
      out.col_marginals(j) += pij;
    }
  }
  out.L = std::max(out.row_marginals.maxCoeff(), out.col_marginals.maxCoeff());
  return out;
}

std::pair<Vector, Vector> empirical_marginals(const IndexSet& mask) {
  if (mask.is_empty()) {
    throw std::invalid_argument(
        "empirical_marginals: empty mask (zero total count)");
  }
  Vector row_freq = Vector::Zero(mask.rows());
  Vector col_freq = Vector::Zero(mask.cols());
  mask.for_each([&](int i, int j) {
    row_freq(i) += 1.0;
    col_freq(j) += 1.0;
  });
  double total = static_cast<double>(mask.count());
  row_freq /= total;
  col_freq /= total;
  return {row_freq, col_freq};
}

FeasibilityReport feasibility_check(int r, const SamplingModel& model,
                                    double C) {
  if (r < 1) throw std::invalid_argument("feasibility_check: r must be >= 1");
  FeasibilityReport rep;
  rep.expected_n = model.expected_observations();
  rep.threshold = C * r * std::max(model.rows(), model.cols());
  rep.feasible = rep.expected_n >= rep.threshold;
  rep.dense_threshold = std::min(model.rows(), model.cols()) *
                        std::log(static_cast<double>(model.rows() + model.cols()));
  rep.dense_regime = rep.expected_n > rep.dense_threshold;
  return rep;
}

void write_observations(const ObservationSet& obs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_observations: cannot open " + path);
  out << "%%observations " << obs.rows() << ' ' << obs.cols() << ' '
      << obs.mask.count() << '\n';
  std::size_t k = 0;
  obs.mask.for_each([&](int i, int j) {
    out << (i + 1) << ' ' << (j + 1) << ' ' << fmt17(obs.values[k++]) << '\n';
  });
  if (!out) throw std::runtime_error("write_observations: write failed: " + path);
}

ObservationSet read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_observations: cannot open " + path);
  std::string tag;
  int m1 = 0, m2 = 0;
  std::int64_t count = 0;
  in >> tag >> m1 >> m2 >> count;
  if (!in || tag != "%%observations") {
    throw std::invalid_argument("read_observations: bad header in " + path);
  }
  if (m1 < 1 || m2 < 1 || count < 0 ||
      count > static_cast<std::int64_t>(m1) * m2) {
    throw std::invalid_argument("read_observations: bad dimensions in " + path);
  }
  IndexSet mask(m1, m2);
  Matrix vals = Matrix::Zero(m1, m2);
  for (std::int64_t k = 0; k < count; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    in >> i >> j >> v;
    if (!in) {
      throw std::invalid_argument("read_observations: truncated file " + path);
    }
    if (i < 1 || i > m1 || j < 1 || j > m2) {
      throw std::invalid_argument("read_observations: index out of range");
    }
    if (mask.contains(i - 1, j - 1)) {
      throw std::invalid_argument(
          "read_observations: duplicate entry (each position is observed at "
          "most once)");
    }
    if (!std::isfinite(v)) {
      throw std::invalid_argument("read_observations: non-finite value");
    }
    mask.insert(i - 1, j - 1);
    vals(i - 1, j - 1) = v;
  }
  ObservationSet obs{mask, {}};
  obs.values.reserve(static_cast<std::size_t>(count));
  mask.for_each([&](int i, int j) { obs.values.push_back(vals(i, j)); });
  return obs;
}

void write_sampling_model(const SamplingModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_sampling_model: cannot open " + path);
  if (model.is_uniform()) {
    out << "uniform " << fmt17(model.uniform_p()) << '\n';
  } else {
    out << "%%probabilities " << model.rows() << ' ' << model.cols() << ' '
        << static_cast<std::int64_t>(model.rows()) * model.cols() << '\n';
    Matrix probs = model.prob_matrix();
    for (int i = 0; i < model.rows(); ++i) {
      for (int j = 0; j < model.cols(); ++j) {
        out << (i + 1) << ' ' << (j + 1) << ' ' << fmt17(probs(i, j)) << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("write_sampling_model: write failed: " + path);
}

SamplingModel read_sampling_model(const std::string& path, int rows, int cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_sampling_model: cannot open " + path);
  std::string tag;
  in >> tag;
  if (tag == "uniform") {
    double p = 0.0;
    in >> p;
    if (!in) throw std::invalid_argument("read_sampling_model: bad uniform line");
    return SamplingModel::uniform(rows, cols, p);
  }
  if (tag != "%%probabilities" && tag != "%%observations") {
    throw std::invalid_argument("read_sampling_model: bad header in " + path);
  }
  int m1 = 0, m2 = 0;
  std::int64_t count = 0;
  in >> m1 >> m2 >> count;
  if (!in || m1 != rows || m2 != cols) {
    throw std::invalid_argument(
        "read_sampling_model: dimensions disagree with the observations");
  }
  if (count != static_cast<std::int64_t>(m1) * m2) {
    throw std::invalid_argument(
        "read_sampling_model: probability matrix must have full count");
  }
  Matrix probs = Matrix::Constant(m1, m2, -1.0);
  for (std::int64_t k = 0; k < count; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    in >> i >> j >> v;
    if (!in) throw std::invalid_argument("read_sampling_model: truncated file");
    if (i < 1 || i > m1 || j < 1 || j > m2) {
      throw std::invalid_argument("read_sampling_model: index out of range");
    }
    if (probs(i - 1, j - 1) >= 0.0) {
      throw std::invalid_argument("read_sampling_model: duplicate entry");
    }
    probs(i - 1, j - 1) = v;
  }
  return SamplingModel::general(std::move(probs));
}

}  // namespace svtmc

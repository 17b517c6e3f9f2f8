#include "svtmc/svt.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lambda_json.hpp"
#include "svtmc/util.hpp"

namespace svtmc {

namespace {

// 0.5 * sum of squared entries, compensated
double half_sq_norm(const Matrix& A) {
  CompensatedSum s;
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) s.add(A(i, j) * A(i, j));
  }
  return 0.5 * s.value();
}

struct ProxStep {
  Matrix M_new;
  Vector svals;  // singular values of the filled matrix
};

ProxStep prox_step(const ObservationSet& Y, const Matrix& M_old, double lambda) {
  Matrix Z = Y.filled_with(M_old);
  SvdFactors f = svd(Z);
  Vector shrunk = (f.singular_values.array() - lambda).max(0.0).matrix();
  return {f.left_vectors * shrunk.asDiagonal() * f.right_vectors.transpose(),
          f.singular_values};
}

}  // namespace

double select_lambda_general(double sigma, double b, double L, int d,
                             double c_star) {
  if (sigma < 0.0 || b < 0.0 || !(L > 0.0) || d < 2 || c_star < 0.0) {
    throw std::invalid_argument("select_lambda_general: bad arguments");
  }
  return 3.0 * (3.0 * sigma * std::sqrt(2.0 * L) +
                c_star * b * std::sqrt(2.0 * std::log(static_cast<double>(d))));
}

double select_lambda_dense(double b, double L) {
  if (!(b > 0.0) || !(L > 0.0)) {
    throw std::invalid_argument("select_lambda_dense: b and L must be positive");
  }
  return 18.0 * b * std::sqrt(2.0 * L);
}

double resolve_lambda(const LambdaSpec& spec, const MarginalSummary& marg,
                      int rows, int cols) {
  if (const double* fixed = std::get_if<double>(&spec)) {
    if (!(*fixed >= 0.0)) {
      throw std::invalid_argument("resolve_lambda: lambda must be non-negative");
    }
    return *fixed;
  }
  if (const auto* rule = std::get_if<GeneralLambdaRule>(&spec)) {
    return select_lambda_general(rule->sigma, rule->b, marg.L, rows + cols,
                                 rule->c_star);
  }
  const auto& rule = std::get<DenseLambdaRule>(spec);
  return select_lambda_dense(rule.b, marg.L);
}

Matrix impute_step(const ObservationSet& Y, const Matrix& M_old, double lambda) {
  require_finite(M_old, "impute_step");
  if (M_old.rows() != Y.rows() || M_old.cols() != Y.cols()) {
    throw std::invalid_argument("impute_step: dimension mismatch");
  }
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("impute_step: lambda must be non-negative");
  }
  return prox_step(Y, M_old, lambda).M_new;
}

bool stop_check(const Matrix& M_new, const Matrix& M_old, const IndexSet& mask,
                double lambda, double a, double extra_tol) {
  if (M_new.rows() != M_old.rows() || M_new.cols() != M_old.cols() ||
      M_new.rows() != mask.rows() || M_new.cols() != mask.cols()) {
    throw std::invalid_argument("stop_check: dimension mismatch");
  }
  Matrix delta = M_new - M_old;
  double off_mask_opnorm = operator_norm(restrict(delta, mask.complement()));
  return off_mask_opnorm < lambda / 3.0 + extra_tol && sup_norm(delta) < a;
}

double objective_f(const Matrix& M, const ObservationSet& Y,
                   const Matrix& M_old, double lambda) {
  Matrix Z = Y.filled_with(M_old);
  if (M.rows() != Z.rows() || M.cols() != Z.cols()) {
    throw std::invalid_argument("objective_f: dimension mismatch");
  }
  return half_sq_norm(Z - M) + lambda * nuclear_norm(M);
}

double q_value(const Matrix& A, const Matrix& B, const ObservationSet& Y,
               double lambda) {
  if (A.rows() != Y.rows() || A.cols() != Y.cols() || B.rows() != Y.rows() ||
      B.cols() != Y.cols()) {
    throw std::invalid_argument("q_value: dimension mismatch");
  }
  Matrix Yz = Y.zero_filled();
  CompensatedSum on_mask;
  CompensatedSum off_mask;
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      if (Y.mask.contains(i, j)) {
        double r = Yz(i, j) - B(i, j);
        on_mask.add(r * r);
      } else {
        double r = A(i, j) - B(i, j);
        off_mask.add(r * r);
      }
    }
  }
  return 0.5 * on_mask.value() + 0.5 * off_mask.value() +
         lambda * nuclear_norm(B);
}

CompletionResult run(const ObservationSet& Y, const CompletionConfig& config,
                     double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("run: lambda must be non-negative");
  }
  if (!(config.a > 0.0)) {
    throw std::invalid_argument("run: sup-norm bound a must be positive");
  }
  if (config.max_iters < 1) {
    throw std::invalid_argument("run: max_iters must be >= 1");
  }
  if (config.extra_tol < 0.0) {
    throw std::invalid_argument("run: extra_tol must be non-negative");
  }

  const int rows = Y.rows();
  const int cols = Y.cols();
  const IndexSet off_mask = Y.mask.complement();

  Matrix M_old = Matrix::Zero(rows, cols);
  if (config.warm_start) {
    require_finite(*config.warm_start, "run: warm start");
    if (config.warm_start->rows() != rows || config.warm_start->cols() != cols) {
      throw std::invalid_argument("run: warm start dimension mismatch");
    }
    M_old = clip(*config.warm_start, config.a);
  }

  CompletionResult result;
  result.trace.reserve(64);

  Matrix M_new;
  for (int k = 1; k <= config.max_iters; ++k) {
    ProxStep step = prox_step(Y, M_old, lambda);
    M_new = std::move(step.M_new);
    if (!M_new.allFinite()) {
      throw std::runtime_error("run: non-finite iterate at iteration " +
                               std::to_string(k));
    }

    Matrix delta = M_new - M_old;
    Matrix M_clipped = clip(M_new, config.a);

    IterationRecord rec;
    rec.delta_unobserved_opnorm = operator_norm(restrict(delta, off_mask));
    rec.delta_supnorm = sup_norm(delta);
    rec.delta_frobenius = frobenius_norm(M_clipped - M_old);
    rec.objective_f = objective_f(M_new, Y, M_old, lambda);
    rec.q_value = q_value(M_clipped, M_new, Y, lambda);
    rec.iterate_rank = static_cast<int>((step.svals.array() > lambda + kRankEps).count());
    result.trace.push_back(rec);

    bool stop;
    if (config.frobenius_stop) {
      stop = rec.delta_frobenius < *config.frobenius_stop;
    } else {
      stop = rec.delta_unobserved_opnorm < lambda / 3.0 + config.extra_tol &&
             rec.delta_supnorm < config.a;
    }
    if (stop) {
      result.estimate = config.post_clip ? M_clipped : M_new;
      result.iterations = k;
      result.converged = true;
      return result;
    }
    M_old = std::move(M_clipped);
  }

  result.estimate = config.post_clip ? clip(M_new, config.a) : M_new;
  result.iterations = config.max_iters;
  result.converged = false;
  return result;
}

CompletionResult run(const ObservationSet& Y, const CompletionConfig& config,
                     const SamplingModel& model) {
  if (model.rows() != Y.rows() || model.cols() != Y.cols()) {
    throw std::invalid_argument("run: model and observations dimensions disagree");
  }
  double lambda = resolve_lambda(config.lambda, marginals(model), Y.rows(), Y.cols());
  return run(Y, config, lambda);
}

void write_matrix_csv(const Matrix& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path);
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      if (j) out << ',';
      out << fmt17(A(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_matrix_csv: write failed: " + path);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      row.push_back(std::stod(cell));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("read_matrix_csv: ragged rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("read_matrix_csv: empty file " + path);
  Matrix A(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      A(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
  }
  return A;
}

void write_trace_csv(const IterationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  out << "iter,delta_opnorm_unobs,delta_sup,delta_fro,f_lambda,q_value,rank\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const IterationRecord& r = trace[k];
    out << (k + 1) << ',' << fmt17(r.delta_unobserved_opnorm) << ','
        << fmt17(r.delta_supnorm) << ',' << fmt17(r.delta_frobenius) << ','
        << fmt17(r.objective_f) << ',' << fmt17(r.q_value) << ','
        << r.iterate_rank << '\n';
  }
  if (!out) throw std::runtime_error("write_trace_csv: write failed: " + path);
}

CompletionConfig config_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CompletionConfig cfg;
  if (!j.contains("lambda")) {
    throw std::invalid_argument("config: missing lambda");
  }
  cfg.lambda = detail::lambda_from_json(j.at("lambda"));
  if (j.contains("a")) cfg.a = j.at("a").get<double>();
  if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<int>();
  if (j.contains("extra_tol")) cfg.extra_tol = j.at("extra_tol").get<double>();
  if (j.contains("post_clip")) cfg.post_clip = j.at("post_clip").get<bool>();
  return cfg;
}

}  // namespace svtmc

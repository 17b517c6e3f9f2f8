#include "svtmc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lambda_json.hpp"
#include "svtmc/util.hpp"

namespace svtmc {

std::string estimator_name(Estimator e) {
  return e == Estimator::svt ? "svt" : "usvt";
}

namespace {

Estimator estimator_from_name(const std::string& name) {
  if (name == "svt") return Estimator::svt;
  if (name == "usvt") return Estimator::usvt;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

}  // namespace

void ExperimentSpec::validate() const {
  if (m1 < 1 || m2 < 1) {
    throw std::invalid_argument("spec: dims must be positive");
  }
  if (rank_grid.empty() || p_grid.empty()) {
    throw std::invalid_argument("spec: rank_grid and p_grid must be non-empty");
  }
  for (int r : rank_grid) {
    if (r < 1 || r > std::min(m1, m2)) {
      throw std::invalid_argument("spec: every r must lie in [1, min(m1, m2)]");
    }
  }
  for (double p : p_grid) {
    if (!(p > 0.0) || p > 1.0) {
      throw std::invalid_argument("spec: every p must lie in (0, 1]");
    }
  }
  if (replicates < 1) {
    throw std::invalid_argument("spec: replicates must be >= 1");
  }
  if (!(a > 0.0)) throw std::invalid_argument("spec: a must be positive");
  if (estimators.empty()) {
    throw std::invalid_argument("spec: estimator set must be non-empty");
  }
}

Matrix generate_low_rank(int m1, int m2, int r, double a, Rng& rng) {
  if (m1 < 1 || m2 < 1 || r < 1 || r > std::min(m1, m2)) {
    throw std::invalid_argument("generate_low_rank: need 1 <= r <= min(m1, m2)");
  }
  if (!(a > 0.0)) {
    throw std::invalid_argument("generate_low_rank: a must be positive");
  }
  for (;;) {
    Matrix G1(m1, r), G2(m2, r);
    for (int i = 0; i < m1; ++i) {
      for (int j = 0; j < r; ++j) G1(i, j) = rng.normal();
    }
    for (int i = 0; i < m2; ++i) {
      for (int j = 0; j < r; ++j) G2(i, j) = rng.normal();
    }
    Matrix M = G1 * G2.transpose();
    double s = sup_norm(M);
    if (s == 0.0) continue;  // measure-zero degenerate draw
    // divide by the max first so the extremal entry lands on +-a exactly
    M /= s;
    M *= a;
    return M;
  }
}

std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, int r,
                                   int p_index, int replicate) {
  spec.validate();
  if (p_index < 0 || p_index >= static_cast<int>(spec.p_grid.size())) {
    throw std::invalid_argument("run_trial: p_index out of range");
  }
  double p = spec.p_grid[p_index];
  std::uint64_t base =
      derive_seed(spec.seed, static_cast<std::uint64_t>(r),
                  static_cast<std::uint64_t>(p_index),
                  static_cast<std::uint64_t>(replicate));
  Rng rng_model(derive_seed(base, 1));
  Rng rng_truth(derive_seed(base, 2));
  Rng rng_mask(derive_seed(base, 3));
  Rng rng_noise(derive_seed(base, 4));

  std::string context = "trial r=" + std::to_string(r) +
                        " p=" + fmt17(p) +
                        " replicate=" + std::to_string(replicate) +
                        " seed=" + std::to_string(spec.seed);
  try {
    SamplingModel model =
        (spec.mu1 == 1.0 && spec.mu2 == 1.0)
            ? SamplingModel::uniform(spec.m1, spec.m2, p)
            : SamplingModel::two_level(spec.m1, spec.m2, p, spec.mu1, spec.mu2,
                                       rng_model);
    Matrix M0 = generate_low_rank(spec.m1, spec.m2, r, spec.a, rng_truth);
    IndexSet mask = draw_mask(model, rng_mask);
    ObservationSet Y = observe(M0, spec.noise, mask, rng_noise);

    std::vector<TrialRecord> records;
    for (Estimator est : spec.estimators) {
      TrialRecord rec;
      rec.r = r;
      rec.p = p;
      rec.replicate = replicate;
      rec.estimator = est;
      auto t0 = std::chrono::steady_clock::now();
      Matrix estimate;
      if (est == Estimator::svt) {
        CompletionConfig cfg;
        cfg.lambda = spec.lambda_rule;
        cfg.a = spec.a;
        CompletionResult res = run(Y, cfg, model);
        estimate = std::move(res.estimate);
        rec.iterations = res.iterations;
        rec.converged = res.converged;
      } else {
        estimate = usvt_baseline(Y, spec.a, spec.usvt_eta);
        rec.iterations = 1;
        rec.converged = true;
      }
      auto t1 = std::chrono::steady_clock::now();
      rec.wall_time = std::chrono::duration<double>(t1 - t0).count();
      Matrix err = estimate - M0;
      rec.mse = err.squaredNorm() /
                (static_cast<double>(spec.m1) * static_cast<double>(spec.m2));
      rec.weighted_err = weighted_norm_sq(err, model);
      records.push_back(std::move(rec));
    }
    return records;
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
}

ReportBundle scaling_study(const ExperimentSpec& spec) {
  spec.validate();
  ReportBundle bundle;
  // (r, p_index, estimator) -> replicate errors
  std::map<std::tuple<int, int, int>, std::vector<double>> mse_cells;
  std::map<std::tuple<int, int, int>, std::vector<double>> werr_cells;

  for (int r : spec.rank_grid) {
    for (int pi = 0; pi < static_cast<int>(spec.p_grid.size()); ++pi) {
      for (int rep = 0; rep < spec.replicates; ++rep) {
        std::vector<TrialRecord> recs = run_trial(spec, r, pi, rep);
        for (TrialRecord& rec : recs) {
          auto key = std::make_tuple(r, pi, static_cast<int>(rec.estimator));
          mse_cells[key].push_back(rec.mse);
          werr_cells[key].push_back(rec.weighted_err);
          bundle.records.push_back(std::move(rec));
        }
      }
    }
  }

  for (Estimator est : spec.estimators) {
    for (int r : spec.rank_grid) {
      for (int pi = 0; pi < static_cast<int>(spec.p_grid.size()); ++pi) {
        auto key = std::make_tuple(r, pi, static_cast<int>(est));
        GridMedian gm;
        gm.r = r;
        gm.p = spec.p_grid[pi];
        gm.estimator = est;
        gm.median_mse = median(mse_cells.at(key));
        gm.median_weighted_err = median(werr_cells.at(key));
        gm.n = static_cast<int>(mse_cells.at(key).size());
        bundle.medians.push_back(gm);
      }
    }
  }

  auto median_at = [&](int r, int pi, Estimator est) {
    return median(mse_cells.at(std::make_tuple(r, pi, static_cast<int>(est))));
  };

  for (Estimator est : spec.estimators) {
    if (spec.p_grid.size() >= 3) {
      for (int r : spec.rank_grid) {
        std::vector<double> x, y;
        bool usable = true;
        for (int pi = 0; pi < static_cast<int>(spec.p_grid.size()); ++pi) {
          double med = median_at(r, pi, est);
          if (!(med > 0.0)) {
            usable = false;
            break;
          }
          x.push_back(std::log(spec.p_grid[pi]));
          y.push_back(std::log(med));
        }
        if (!usable) continue;
        OlsFit fit = ols_fit(x, y);
        bundle.slope_fits.push_back({"p", est, static_cast<double>(r),
                                     fit.slope, fit.stderr_slope,
                                     fit.intercept, fit.points});
      }
    }
    if (spec.rank_grid.size() >= 3) {
      for (int pi = 0; pi < static_cast<int>(spec.p_grid.size()); ++pi) {
        std::vector<double> x, y;
        bool usable = true;
        for (int r : spec.rank_grid) {
          double med = median_at(r, pi, est);
          if (!(med > 0.0)) {
            usable = false;
            break;
          }
          x.push_back(std::log(static_cast<double>(r)));
          y.push_back(std::log(med));
        }
        if (!usable) continue;
        OlsFit fit = ols_fit(x, y);
        bundle.slope_fits.push_back({"r", est, spec.p_grid[pi], fit.slope,
                                     fit.stderr_slope, fit.intercept,
                                     fit.points});
      }
    }
  }
  return bundle;
}

void emit_report(const ReportBundle& bundle, const std::string& dir) {
  if (bundle.records.empty()) {
    throw std::invalid_argument("emit_report: empty record set");
  }
  std::filesystem::create_directories(dir);

  {
    std::ofstream out(dir + "/records.csv");
    if (!out) throw std::runtime_error("emit_report: cannot open records.csv");
    out << "r,p,replicate,estimator,mse,weighted_err,iterations,converged\n";
    for (const TrialRecord& rec : bundle.records) {
      out << rec.r << ',' << fmt17(rec.p) << ',' << rec.replicate << ','
          << estimator_name(rec.estimator) << ',' << fmt17(rec.mse) << ','
          << fmt17(rec.weighted_err) << ',' << rec.iterations << ','
          << (rec.converged ? 1 : 0) << '\n';
    }
    if (!out) throw std::runtime_error("emit_report: write failed (records.csv)");
  }

  nlohmann::json j;
  j["medians"] = nlohmann::json::array();
  for (const GridMedian& gm : bundle.medians) {
    j["medians"].push_back({{"r", gm.r},
                            {"p", gm.p},
                            {"estimator", estimator_name(gm.estimator)},
                            {"median_mse", gm.median_mse},
                            {"median_weighted_err", gm.median_weighted_err},
                            {"n", gm.n}});
  }
  j["slope_fits"] = nlohmann::json::array();
  for (const SlopeFit& fit : bundle.slope_fits) {
    j["slope_fits"].push_back({{"axis", fit.axis},
                               {"estimator", estimator_name(fit.estimator)},
                               {"fixed_value", fit.fixed_value},
                               {"slope", fit.slope},
                               {"stderr", fit.stderr_slope},
                               {"intercept", fit.intercept},
                               {"points", fit.points}});
  }
  std::ofstream out(dir + "/summary.json");
  if (!out) throw std::runtime_error("emit_report: cannot open summary.json");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("emit_report: write failed (summary.json)");
}

std::vector<TrialRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_records_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("read_records_csv: empty file");
  }
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) {
      throw std::invalid_argument("read_records_csv: bad row '" + line + "'");
    }
    TrialRecord rec;
    rec.r = std::stoi(cells[0]);
    rec.p = std::stod(cells[1]);
    rec.replicate = std::stoi(cells[2]);
    rec.estimator = estimator_from_name(cells[3]);
    rec.mse = std::stod(cells[4]);
    rec.weighted_err = std::stod(cells[5]);
    rec.iterations = std::stoi(cells[6]);
    rec.converged = cells[7] == "1";
    records.push_back(rec);
  }
  return records;
}

ExperimentSpec spec_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentSpec spec;
  if (j.contains("dims")) {
    spec.m1 = j.at("dims").at(0).get<int>();
    spec.m2 = j.at("dims").at(1).get<int>();
  }
  spec.rank_grid = j.at("rank_grid").get<std::vector<int>>();
  spec.p_grid = j.at("p_grid").get<std::vector<double>>();
  if (j.contains("noise")) spec.noise = detail::noise_from_json(j.at("noise"));
  if (j.contains("a")) spec.a = j.at("a").get<double>();
  if (j.contains("lambda")) {
    spec.lambda_rule = detail::lambda_from_json(j.at("lambda"));
  }
  if (j.contains("replicates")) spec.replicates = j.at("replicates").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("estimators")) {
    spec.estimators.clear();
    for (const auto& name : j.at("estimators")) {
      spec.estimators.push_back(estimator_from_name(name.get<std::string>()));
    }
  }
  if (j.contains("usvt_eta")) spec.usvt_eta = j.at("usvt_eta").get<double>();
  if (j.contains("mu1")) spec.mu1 = j.at("mu1").get<double>();
  if (j.contains("mu2")) spec.mu2 = j.at("mu2").get<double>();
  spec.validate();
  return spec;
}

std::string spec_to_json_text(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["dims"] = {spec.m1, spec.m2};
  j["rank_grid"] = spec.rank_grid;
  j["p_grid"] = spec.p_grid;
  j["noise"] = detail::noise_to_json(spec.noise);
  j["a"] = spec.a;
  j["lambda"] = detail::lambda_to_json(spec.lambda_rule);
  j["replicates"] = spec.replicates;
  j["seed"] = spec.seed;
  j["estimators"] = nlohmann::json::array();
  for (Estimator est : spec.estimators) {
    j["estimators"].push_back(estimator_name(est));
  }
  j["usvt_eta"] = spec.usvt_eta;
  j["mu1"] = spec.mu1;
  j["mu2"] = spec.mu2;
  return j.dump(2);
}

}  // namespace svtmc

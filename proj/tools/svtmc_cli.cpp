// Command-line front end: complete a matrix from an observation file, run
// scaling studies over parameter grids, probe the stochastic-term bounds,
// and build packing sets.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "svtmc/bench.hpp"
#include "svtmc/probe.hpp"
#include "svtmc/sampling.hpp"
#include "svtmc/svt.hpp"
#include "svtmc/util.hpp"

namespace {

using namespace svtmc;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CompleteArgs {
  std::string input;
  std::string lambda_arg = "auto-dense";
  double a = 1.0;
  double sigma = 0.0;
  double b = 0.0;
  double c_star = 3.0;
  std::string out;
  std::string trace_path;
  std::string model_path;
  int max_iters = 5000;
  double extra_tol = 0.0;
  bool post_clip = false;
};

// Marginal bound L: exact when a sampling model accompanies the data,
// otherwise estimated from the observed row/column counts.
double marginal_bound(const ObservationSet& obs, const std::string& model_path) {
  if (!model_path.empty()) {
    SamplingModel model = read_sampling_model(model_path, obs.rows(), obs.cols());
    return marginals(model).L;
  }
  Vector row_counts = Vector::Zero(obs.rows());
  Vector col_counts = Vector::Zero(obs.cols());
  obs.mask.for_each([&](int i, int j) {
    row_counts(i) += 1.0;
    col_counts(j) += 1.0;
  });
  return std::max(row_counts.maxCoeff(), col_counts.maxCoeff());
}

int run_complete(const CompleteArgs& args) {
  ObservationSet obs = read_observations(args.input);

  double lambda;
  if (args.lambda_arg == "auto-dense") {
    if (!(args.b > 0.0)) {
      throw std::invalid_argument("--lambda auto-dense requires --b > 0");
    }
    lambda = select_lambda_dense(args.b, marginal_bound(obs, args.model_path));
  } else if (args.lambda_arg == "auto-general") {
    if (args.sigma < 0.0 || args.b < 0.0) {
      throw std::invalid_argument(
          "--lambda auto-general requires --sigma and --b");
    }
    lambda = select_lambda_general(args.sigma, args.b,
                                   marginal_bound(obs, args.model_path),
                                   obs.rows() + obs.cols(), args.c_star);
  } else {
    std::size_t pos = 0;
    lambda = std::stod(args.lambda_arg, &pos);
    if (pos != args.lambda_arg.size() || !(lambda >= 0.0)) {
      throw std::invalid_argument("--lambda must be a non-negative number, "
                                  "'auto-dense' or 'auto-general'");
    }
  }

  CompletionConfig cfg;
  cfg.lambda = lambda;
  cfg.a = args.a;
  cfg.max_iters = args.max_iters;
  cfg.extra_tol = args.extra_tol;
  cfg.post_clip = args.post_clip;

  CompletionResult result = run(obs, cfg, lambda);
  write_matrix_csv(result.estimate, args.out);
  if (!args.trace_path.empty()) write_trace_csv(result.trace, args.trace_path);

  std::cout << "lambda " << fmt17(lambda) << ", iterations "
            << result.iterations << ", converged "
            << (result.converged ? "yes" : "no") << '\n';
  return 0;
}

NoiseModel noise_for(double sigma, double b) {
  constexpr double kSqrt3 = 1.7320508075688772935274463415059;
  if (sigma == 0.0) return NoiseModel::none();
  if (std::abs(sigma - b) <= 1e-12 * b) return NoiseModel::scaled_rademacher(b);
  if (std::abs(sigma - b / kSqrt3) <= 1e-12 * b) {
    return NoiseModel::uniform_bounded(b);
  }
  return NoiseModel::truncated_gaussian(sigma, b);
}

int run_probe_sigma(int m1, int m2, double p, double sigma, double b, double t,
                    int reps, double c_star, std::uint64_t seed,
                    const std::string& out_path) {
  SamplingModel model = SamplingModel::uniform(m1, m2, p);
  NoiseModel noise = noise_for(sigma, b);

  Rng rng_bound(derive_seed(seed, 0xb0));
  SigmaBoundReport bound_rep =
      check_sigma_bound(model, noise, t, c_star, reps, rng_bound);
  Rng rng_mean(derive_seed(seed, 0xb1));
  SigmaRReport mean_rep = estimate_expected_sigma_r(model, reps, rng_mean);

  nlohmann::json j;
  j["reps"] = reps;
  j["bound"] = bound_rep.bound;
  j["violations"] = bound_rep.violations;
  j["mean_opnorm"] = mean_rep.mean_opnorm;
  j["ratio_to_bound"] = mean_rep.ratio_to_bound;
  j["calibrated_constant"] = bound_rep.calibrated_c_star;
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path);
  out << j.dump(2) << '\n';
  std::cout << "violations " << bound_rep.violations << "/" << reps
            << ", mean opnorm " << fmt17(mean_rep.mean_opnorm) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix completion by iterative singular value thresholding"};
  app.require_subcommand(1);

  CompleteArgs cargs;
  CLI::App* complete = app.add_subcommand(
      "complete", "complete a matrix from an observation file");
  complete->add_option("--input", cargs.input, "observation file")->required();
  complete->add_option("--lambda", cargs.lambda_arg,
                       "number, 'auto-dense' or 'auto-general'");
  complete->add_option("--a", cargs.a, "sup-norm bound on the target matrix")
      ->required();
  complete->add_option("--sigma", cargs.sigma, "noise sd (auto-general rule)");
  complete->add_option("--b", cargs.b, "noise bound (auto rules)");
  complete->add_option("--c-star", cargs.c_star,
                       "constant in the general rule (default 3)");
  complete->add_option("--out", cargs.out, "estimate CSV path")->required();
  complete->add_option("--trace", cargs.trace_path, "iteration trace CSV path");
  complete->add_option("--model", cargs.model_path,
                       "sampling model file (for exact marginals)");
  complete->add_option("--max-iters", cargs.max_iters, "iteration safeguard");
  complete->add_option("--extra-tol", cargs.extra_tol,
                       "slack added to the lambda/3 exit threshold");
  complete->add_flag("--post-clip", cargs.post_clip,
                     "clip the returned estimate to [-a, a]");

  std::string spec_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  CLI::App* simulate =
      app.add_subcommand("simulate", "run a scaling study over a grid");
  simulate->add_option("--spec", spec_path, "experiment spec JSON")->required();
  simulate->add_option("--out-dir", out_dir, "report directory")->required();
  simulate->add_option("--seed", seed, "override the spec seed")
      ->each([&](const std::string&) { seed_given = true; });

  int pm1 = 100, pm2 = 100, preps = 200;
  double pp = 0.3, psigma = 1.0, pb = 2.0, pt = 0.0, pc = 3.0;
  std::uint64_t pseed = 0;
  std::string pout;
  CLI::App* probe = app.add_subcommand("probe", "stochastic-term probes");
  CLI::App* probe_sigma = probe->add_subcommand(
      "sigma", "operator-norm concentration of the mask-noise matrix");
  probe_sigma->add_option("--m1", pm1)->required();
  probe_sigma->add_option("--m2", pm2)->required();
  probe_sigma->add_option("--p", pp)->required();
  probe_sigma->add_option("--sigma", psigma)->required();
  probe_sigma->add_option("--b", pb)->required();
  probe_sigma->add_option("--t", pt, "tail parameter (default sqrt(2 log d))");
  probe_sigma->add_option("--reps", preps)->required();
  probe_sigma->add_option("--c-star", pc, "constant in the bound (default 3)");
  probe_sigma->add_option("--seed", pseed);
  probe_sigma->add_option("--out", pout, "report JSON path")->required();

  int km1 = 16, km2 = 16, kr = 2, kcount = 20;
  double kp = 0.5, ksigma = 1.0, ka = 1.0, kgamma = 1.0;
  std::uint64_t kseed = 0;
  std::string kdir;
  CLI::App* packing = app.add_subcommand(
      "packing", "build a separated family of low-rank test matrices");
  packing->add_option("--m1", km1)->required();
  packing->add_option("--m2", km2)->required();
  packing->add_option("--r", kr)->required();
  packing->add_option("--p", kp)->required();
  packing->add_option("--sigma", ksigma)->required();
  packing->add_option("--a", ka)->required();
  packing->add_option("--gamma", kgamma)->required();
  packing->add_option("--count", kcount)->required();
  packing->add_option("--seed", kseed);
  packing->add_option("--out-dir", kdir)->required();

  try {
    app.parse(argc, argv);

    if (complete->parsed()) return run_complete(cargs);

    if (simulate->parsed()) {
      ExperimentSpec spec = spec_from_json_text(read_file(spec_path));
      if (seed_given) spec.seed = seed;
      ReportBundle bundle = scaling_study(spec);
      emit_report(bundle, out_dir);
      std::cout << bundle.records.size() << " records, "
                << bundle.slope_fits.size() << " slope fits -> " << out_dir
                << '\n';
      return 0;
    }

    if (probe_sigma->parsed()) {
      if (pt <= 0.0) pt = std::sqrt(2.0 * std::log(double(pm1 + pm2)));
      return run_probe_sigma(pm1, pm2, pp, psigma, pb, pt, preps, pc, pseed,
                             pout);
    }

    if (packing->parsed()) {
      Rng rng(derive_seed(kseed, 0xac));
      PackingSet set = build_packing_set(km1, km2, kr, kp, ksigma, ka, kgamma,
                                         kcount, rng);
      write_packing_set(set, kdir);
      std::cout << set.members.size() << " members, separation "
                << fmt17(set.separation)
                << (set.shortfall ? " (shortfall: retry budget exhausted)" : "")
                << " -> " << kdir << '\n';
      return 0;
    }

    std::cerr << "no subcommand\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

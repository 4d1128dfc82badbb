#include "dagpost/cli.hpp"

#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagpost/dag.hpp"
#include "dagpost/detector.hpp"
#include "dagpost/errors.hpp"
#include "dagpost/experiments.hpp"
#include "dagpost/io.hpp"
#include "dagpost/mcmc.hpp"
#include "dagpost/population.hpp"
#include "dagpost/posterior.hpp"
#include "dagpost/sem.hpp"

namespace dagpost {

namespace {

using nlohmann::json;

struct GlobalOptions {
  std::uint64_t seed = 0;
  double sigma = 1.0;
  double sigma_w = 1.0;
  std::string out = "-";
  std::string format = "csv";
  bool no_timestamp = false;

  PriorConfig prior() const { return PriorConfig{sigma, sigma_w}; }
};

void emit(const io::Table& table, const GlobalOptions& g) {
  io::Table stamped = table;
  if (!g.no_timestamp) stamped.timestamp = io::iso8601_now();
  const io::Format format = io::parse_format(g.format);
  if (g.out == "-") {
    io::write_table(stamped, std::cout, format);
    return;
  }
  std::ofstream file(g.out);
  if (!file) throw std::runtime_error("cannot open output file: " + g.out);
  io::write_table(stamped, file, format);
}

json base_config(const GlobalOptions& g) {
  return json{{"sigma", g.sigma}, {"sigma_w", g.sigma_w}, {"seed", g.seed}, {"rng", Rng::kAlgorithm}};
}

// Weights listed in row-major order of the adjacency's 1-entries.
WeightedSem sem_from_flags(const std::string& adj, const std::vector<double>& weights,
                           bool binary_model, double sigma) {
  const DagStructure structure = DagStructure::from_adjacency_string(adj);
  WeightMap map;
  std::size_t next = 0;
  for (int j = 0; j < structure.node_count(); ++j) {
    for (int i = 0; i < structure.node_count(); ++i) {
      if (!structure.has_edge(i, j)) continue;
      double w = 1.0;
      if (!binary_model) {
        if (next >= weights.size()) throw std::invalid_argument("fewer weights than edges");
        w = weights[next++];
      }
      map[{i, j}] = w;
    }
  }
  if (!binary_model && next != weights.size()) {
    throw std::invalid_argument("more weights than edges");
  }
  return WeightedSem(structure, std::move(map), sigma);
}

std::vector<io::Cell> curve_row(const ConvergenceCurve& curve, std::size_t k) {
  return {curve.checkpoints[k], curve.posterior_true[k], curve.log_one_minus[k],
          curve.diagnostic[k]};
}

json schedule_echo(std::int64_t n_max, double ratio) {
  return json{{"n_max", n_max}, {"ratio", ratio}, {"kind", "geometric"}};
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Exact and MCMC posterior inference over DAG structures for linear Gaussian "
               "structural equation models, with convergence-rate and edge-detection experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--sigma", g.sigma, "Noise standard deviation");
  app.add_option("--sigma-w", g.sigma_w, "Weight prior standard deviation");
  app.add_option("--out", g.out, "Output path ('-' for stdout)");
  app.add_option("--format", g.format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--no-timestamp", g.no_timestamp, "Omit the generated-at header line");

  // generate
  auto* gen = app.add_subcommand("generate", "Sample a dataset from a weighted model");
  std::string gen_adj;
  std::vector<double> gen_weights;
  bool gen_binary_model = false;
  bool gen_binary_output = false;
  std::int64_t gen_n = 1000;
  gen->add_option("--adj", gen_adj, "Row-major 0/1 adjacency string")->required();
  gen->add_option("--weights", gen_weights,
                  "Edge weights in row-major order of the adjacency's 1-entries")
      ->delimiter(',');
  gen->add_flag("--binary-model", gen_binary_model, "Fix all edge weights to 1");
  gen->add_option("--n", gen_n, "Number of observations")->required();
  gen->add_flag("--binary-output", gen_binary_output, "Write the SEMD binary format instead of CSV");

  // posterior
  auto* post = app.add_subcommand("posterior", "Exact posterior table for a dataset");
  std::string post_data;
  bool post_binary_input = false;
  bool post_binary_model = false;
  int post_cap = kDefaultEnumerationCap;
  post->add_option("--data", post_data, "Dataset file")->required();
  post->add_flag("--binary-input", post_binary_input, "Dataset file is SEMD binary");
  post->add_flag("--binary-model", post_binary_model,
                 "Score the binary model (all weights fixed at 1) instead of the general model");
  post->add_option("--cap", post_cap, "Enumeration cap");

  // mcmc
  auto* mc = app.add_subcommand("mcmc", "Metropolis-Hastings chain over DAG structures");
  std::string mc_data;
  bool mc_binary_input = false;
  std::int64_t mc_iterations = 100000;
  std::int64_t mc_burn_in = -1;
  std::int64_t mc_thin = 1;
  std::string mc_init;
  std::string mc_trace_out;
  mc->add_option("--data", mc_data, "Dataset file")->required();
  mc->add_flag("--binary-input", mc_binary_input, "Dataset file is SEMD binary");
  mc->add_option("--iterations", mc_iterations, "Chain length");
  mc->add_option("--burn-in", mc_burn_in, "Burn-in steps (default 10% of iterations)");
  mc->add_option("--thin", mc_thin, "Record every thin-th state");
  mc->add_option("--init", mc_init, "Initial state as an adjacency string (default empty graph)");
  mc->add_option("--trace-out", mc_trace_out,
                 "Also stream the recorded models as adjacency strings to this file");

  // detect
  auto* det = app.add_subcommand("detect", "Posterior-threshold edge detection");
  std::string det_data;
  bool det_binary_input = false;
  std::string det_mode = "exact";
  double det_gamma_prime = 1.0;
  double det_tau = 0.5;
  std::int64_t det_iterations = 100000;
  std::int64_t det_burn_in = -1;
  int det_cap = kDefaultEnumerationCap;
  det->add_option("--data", det_data, "Dataset file")->required();
  det->add_flag("--binary-input", det_binary_input, "Dataset file is SEMD binary");
  det->add_option("--mode", det_mode, "exact (enumerated posterior) or mcmc (chain frequencies)")
      ->check(CLI::IsMember({"exact", "mcmc"}));
  det->add_option("--gamma-prime", det_gamma_prime, "Absence-odds threshold (exact mode)");
  det->add_option("--tau", det_tau, "Absence-frequency threshold in [0,1] (mcmc mode)");
  det->add_option("--iterations", det_iterations, "Chain length (mcmc mode)");
  det->add_option("--burn-in", det_burn_in, "Burn-in steps (mcmc mode)");
  det->add_option("--cap", det_cap, "Enumeration cap (exact mode)");

  // exp-binary
  auto* eb = app.add_subcommand("exp-binary", "Convergence curves for the binary model, all truths");
  int eb_d = 3;
  std::int64_t eb_n_max = 10000;
  double eb_ratio = 1.3;
  int eb_cap = kDefaultEnumerationCap;
  eb->add_option("--d", eb_d, "Number of nodes");
  eb->add_option("--n-max", eb_n_max, "Largest sample size");
  eb->add_option("--ratio", eb_ratio, "Checkpoint ratio");
  eb->add_option("--cap", eb_cap, "Enumeration cap");

  // exp-maximal
  auto* em = app.add_subcommand("exp-maximal", "Convergence curve for a maximal truth");
  std::int64_t em_n_max = 50000;
  double em_ratio = 1.3;
  int em_cap = kDefaultEnumerationCap;
  std::string em_truth;
  std::vector<double> em_weights;
  std::string em_exponent_out;
  em->add_option("--n-max", em_n_max, "Largest sample size");
  em->add_option("--ratio", em_ratio, "Checkpoint ratio");
  em->add_option("--cap", em_cap, "Enumeration cap");
  em->add_option("--truth", em_truth, "Adjacency string (default: bundled maximal example)");
  em->add_option("--weights", em_weights, "Weights for --truth")->delimiter(',');
  em->add_option("--exponent-out", em_exponent_out, "Write the decay-exponent JSON record here");

  // exp-nonmaximal
  auto* en = app.add_subcommand("exp-nonmaximal", "Convergence curve for a non-maximal truth");
  std::int64_t en_n_max = 1000000;
  bool en_full_scale = false;
  double en_ratio = 1.3;
  int en_cap = kDefaultEnumerationCap;
  std::string en_truth;
  std::vector<double> en_weights;
  std::string en_keep_samples;
  en->add_option("--n-max", en_n_max, "Largest sample size");
  en->add_flag("--full-scale", en_full_scale, "Use the full 1.5e7-observation schedule");
  en->add_option("--ratio", en_ratio, "Checkpoint ratio");
  en->add_option("--cap", en_cap, "Enumeration cap");
  en->add_option("--truth", en_truth, "Adjacency string (default: bundled non-maximal example)");
  en->add_option("--weights", en_weights, "Weights for --truth")->delimiter(',');
  en->add_option("--keep-samples", en_keep_samples,
                 "Materialize the sample path and write it as SEMD to this file");

  // exp-detect
  auto* ed = app.add_subcommand("exp-detect", "Edge-detection benchmark with ROC sweeps");
  DetectionBenchmarkConfig ed_cfg;
  std::string ed_methods = std::string(kMethodExactPosterior) + "," + kMethodMcmc + "," +
                           kMethodNaiveCorrelation;
  ed->add_option("--d", ed_cfg.d, "Number of nodes");
  ed->add_option("--n", ed_cfg.n, "Observations per replicate");
  ed->add_option("--replicates", ed_cfg.replicates, "Number of replicates");
  ed->add_option("--methods", ed_methods, "Comma-separated method list");
  ed->add_option("--alpha", ed_cfg.alpha, "False positive tolerance");
  ed->add_option("--iterations", ed_cfg.chain_iterations, "Chain length per replicate");
  ed->add_option("--burn-in", ed_cfg.chain_burn_in, "Chain burn-in");
  ed->add_option("--cap", ed_cfg.cap, "Enumeration cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  if (gen->parsed()) {
    const WeightedSem sem = sem_from_flags(gen_adj, gen_weights, gen_binary_model, g.sigma);
    Rng rng(g.seed);
    const Dataset data = sample_dataset(sem, gen_n, rng);
    if (g.out == "-") {
      if (gen_binary_output) throw std::runtime_error("--binary-output requires --out FILE");
      io::write_dataset_csv(data.samples(), std::cout);
    } else {
      io::save_dataset(data.samples(), g.out, gen_binary_output);
    }
    return 0;
  }

  if (post->parsed()) {
    const Dataset data = io::load_dataset(post_data, post_binary_input);
    const PosteriorTable table = post_binary_model
                                     ? exact_binary_posterior_table(data.gram(), g.sigma, post_cap)
                                     : exact_posterior_table(data, g.prior(), post_cap);
    io::Table out;
    out.config = base_config(g);
    out.config["n"] = data.sample_count();
    out.config["d"] = data.dimension();
    out.config["model"] = post_binary_model ? "binary" : "general";
    out.columns = {"model", "log_unnorm", "prob"};
    for (std::size_t k = 0; k < table.size(); ++k) {
      out.rows.push_back({table.models[k].adjacency_string(), table.log_unnorm[k], table.prob(k)});
    }
    emit(out, g);
    return 0;
  }

  if (mc->parsed()) {
    const Dataset data = io::load_dataset(mc_data, mc_binary_input);
    ChainConfig cfg;
    cfg.iterations = mc_iterations;
    cfg.burn_in = mc_burn_in;
    cfg.thin = mc_thin;
    cfg.seed = g.seed;
    cfg.record_models = !mc_trace_out.empty();
    if (!mc_init.empty()) cfg.init = DagStructure::from_adjacency_string(mc_init);
    const ChainTrace trace = run_chain(data, g.prior(), cfg);
    if (!mc_trace_out.empty()) {
      std::ofstream trace_file(mc_trace_out);
      if (!trace_file) throw std::runtime_error("cannot open output file: " + mc_trace_out);
      for (const DagStructure& s : trace.visited) trace_file << s.adjacency_string() << '\n';
    }
    io::Table out;
    out.config = base_config(g);
    out.config["n"] = data.sample_count();
    out.config["iterations"] = cfg.iterations;
    out.config["burn_in"] = cfg.burn_in >= 0 ? cfg.burn_in : cfg.iterations / 10;
    out.config["thin"] = cfg.thin;
    out.config["acceptance_rate"] = trace.acceptance_rate;
    out.columns = {"pair_i", "pair_j", "absence_freq"};
    for (const EdgePair& p : all_pairs(data.dimension())) {
      out.rows.push_back({static_cast<std::int64_t>(p.i + 1), static_cast<std::int64_t>(p.j + 1),
                          trace.absence_freq(p.i, p.j)});
    }
    emit(out, g);
    return 0;
  }

  if (det->parsed()) {
    const Dataset data = io::load_dataset(det_data, det_binary_input);
    Eigen::MatrixXd scores;
    double tau = 0.0;
    DetectorConfig cfg;
    if (det_mode == "exact") {
      cfg.mode = DetectorMode::exact_posterior;
      cfg.threshold = det_gamma_prime;
      scores = absence_scores(exact_posterior_table(data, g.prior(), det_cap));
      tau = std::isinf(det_gamma_prime) ? std::numeric_limits<double>::infinity()
                                        : det_gamma_prime / (1.0 + det_gamma_prime);
    } else {
      cfg.mode = DetectorMode::mcmc;
      cfg.threshold = det_tau;
      ChainConfig chain;
      chain.iterations = det_iterations;
      chain.burn_in = det_burn_in;
      chain.seed = g.seed;
      chain.record_models = false;
      scores = absence_scores(run_chain(data, g.prior(), chain));
      tau = det_tau;
    }
    const SkeletonEstimate est = threshold_scores(scores, tau);
    std::string skeleton_string;
    for (int a = 0; a < est.dimension(); ++a)
      for (int b = 0; b < est.dimension(); ++b) skeleton_string += est.chi_hat(a, b) ? '1' : '0';
    io::Table out;
    out.config = base_config(g);
    out.config["mode"] = det_mode;
    out.config["threshold"] = cfg.threshold;
    out.config["skeleton"] = skeleton_string;
    out.columns = {"pair_i", "pair_j", "absence_score", "chi_hat"};
    for (const EdgePair& p : all_pairs(data.dimension())) {
      out.rows.push_back({static_cast<std::int64_t>(p.i + 1), static_cast<std::int64_t>(p.j + 1),
                          scores(p.i, p.j), static_cast<std::int64_t>(est.chi_hat(p.i, p.j))});
    }
    emit(out, g);
    return 0;
  }

  if (eb->parsed()) {
    BinaryExperimentConfig cfg;
    cfg.d = eb_d;
    cfg.n_max = eb_n_max;
    cfg.sigma = g.sigma;
    cfg.seed = g.seed;
    cfg.ratio = eb_ratio;
    cfg.cap = eb_cap;
    const BinaryConvergenceResult result = run_binary_convergence(cfg);
    io::Table out;
    out.config = base_config(g);
    out.config["experiment"] = "binary-convergence";
    out.config["d"] = cfg.d;
    out.config["schedule"] = schedule_echo(cfg.n_max, cfg.ratio);
    out.config["diagnostic"] = "prefix-max of log(1-pi)+n/2, scaled by (n log log n)^{-1/2}";
    out.columns = {"truth", "n", "posterior_true", "log_one_minus", "diagnostic"};
    for (std::size_t t = 0; t < result.truths.size(); ++t) {
      const std::string truth = result.truths[t].adjacency_string();
      const ConvergenceCurve& curve = result.curves[t];
      for (std::size_t k = 0; k < curve.checkpoints.size(); ++k) {
        std::vector<io::Cell> row{truth};
        for (io::Cell& cell : curve_row(curve, k)) row.push_back(std::move(cell));
        out.rows.push_back(std::move(row));
      }
    }
    emit(out, g);
    return 0;
  }

  if (em->parsed()) {
    MaximalExperimentConfig cfg;
    cfg.n_max = em_n_max;
    cfg.sigma = g.sigma;
    cfg.sigma_w = g.sigma_w;
    cfg.seed = g.seed;
    cfg.ratio = em_ratio;
    cfg.cap = em_cap;
    if (!em_truth.empty()) cfg.truth = sem_from_flags(em_truth, em_weights, false, g.sigma);
    const MaximalConvergenceResult result = run_maximal_convergence(cfg);
    const json exponent_record = {{"kind", to_string(result.rate.kind)},
                                  {"exponent", *result.rate.exponent},
                                  {"argmin_model", result.rate_argmin.adjacency_string()},
                                  {"sigma", g.sigma},
                                  {"sigma_w", g.sigma_w}};
    if (!em_exponent_out.empty()) {
      std::ofstream exp_file(em_exponent_out);
      if (!exp_file) throw std::runtime_error("cannot open output file: " + em_exponent_out);
      exp_file << exponent_record.dump(2) << '\n';
    }
    io::Table out;
    out.config = base_config(g);
    out.config["experiment"] = "maximal-convergence";
    out.config["truth"] = result.truth.structure().adjacency_string();
    out.config["schedule"] = schedule_echo(cfg.n_max, cfg.ratio);
    out.config["rate"] = exponent_record;
    out.config["diagnostic"] = "prefix-max of log(1-pi)+n*exponent";
    out.columns = {"n", "posterior_true", "log_one_minus", "diagnostic"};
    for (std::size_t k = 0; k < result.curve.checkpoints.size(); ++k) {
      out.rows.push_back(curve_row(result.curve, k));
    }
    emit(out, g);
    return 0;
  }

  if (en->parsed()) {
    NonmaximalExperimentConfig cfg;
    cfg.n_max = en_full_scale ? 15000000 : en_n_max;
    cfg.sigma = g.sigma;
    cfg.sigma_w = g.sigma_w;
    cfg.seed = g.seed;
    cfg.ratio = en_ratio;
    cfg.cap = en_cap;
    cfg.keep_samples = !en_keep_samples.empty();
    if (!en_truth.empty()) cfg.truth = sem_from_flags(en_truth, en_weights, false, g.sigma);
    const NonmaximalConvergenceResult result = run_nonmaximal_convergence(cfg);
    if (cfg.keep_samples) io::save_dataset(*result.samples, en_keep_samples, true);
    io::Table out;
    out.config = base_config(g);
    out.config["experiment"] = "nonmaximal-convergence";
    out.config["truth"] = result.truth.structure().adjacency_string();
    out.config["schedule"] = schedule_echo(cfg.n_max, cfg.ratio);
    out.config["diagnostic"] = "err_n = -2 log(1-pi) / log n";
    out.columns = {"n", "posterior_true", "log_one_minus", "diagnostic"};
    for (std::size_t k = 0; k < result.curve.checkpoints.size(); ++k) {
      out.rows.push_back(curve_row(result.curve, k));
    }
    emit(out, g);
    return 0;
  }

  if (ed->parsed()) {
    ed_cfg.sigma = g.sigma;
    ed_cfg.sigma_w = g.sigma_w;
    ed_cfg.seed = g.seed;
    ed_cfg.methods.clear();
    std::stringstream methods(ed_methods);
    std::string method;
    while (std::getline(methods, method, ',')) {
      if (!method.empty()) ed_cfg.methods.push_back(method);
    }
    const BenchmarkReport report = run_detection_benchmark(ed_cfg);
    io::Table out;
    out.config = base_config(g);
    out.config["experiment"] = "detection-benchmark";
    out.config["d"] = ed_cfg.d;
    out.config["n"] = ed_cfg.n;
    out.config["replicates"] = ed_cfg.replicates;
    out.config["alpha"] = ed_cfg.alpha;
    out.config["chain_iterations"] = ed_cfg.chain_iterations;
    json calibrated = json::object();
    for (const auto& mr : report.methods) {
      calibrated[mr.method] = {{"gamma_or_tau", mr.method == kMethodExactPosterior
                                                    ? mr.calibration.gamma_prime
                                                    : mr.calibration.tau},
                               {"eps_plus", mr.calibration.eps_plus},
                               {"eps_minus", mr.calibration.eps_minus}};
    }
    out.config["calibrated"] = calibrated;
    out.columns = {"method", "gamma_or_tau", "eps_plus", "eps_minus"};
    for (const auto& mr : report.methods) {
      for (const RocPoint& point : mr.calibration.roc) {
        out.rows.push_back({mr.method,
                            mr.method == kMethodExactPosterior ? point.gamma_prime : point.tau,
                            point.eps_plus, point.eps_minus});
      }
    }
    emit(out, g);
    return 0;
  }

  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace dagpost

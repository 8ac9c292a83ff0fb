// Command-line entry point: benchmark generation, multi-scale detection,
// evaluation against planted truth, and batch sweeps.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tmscd/benchmarks.hpp"
#include "tmscd/clustering.hpp"
#include "tmscd/io.hpp"
#include "tmscd/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tmscd;

namespace {

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage error (bad flags or missing arguments)\n"
    "  2  input parse/format error\n"
    "  3  invalid parameter or precondition\n"
    "  4  numerical solver failure\n"
    "  5  i/o failure\n"
    "  6  evaluation mismatch\n";

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const RangeError*>(&e) ||
      dynamic_cast<const ConsistencyError*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const SolverError*>(&e)) return 4;
  if (dynamic_cast<const IoError*>(&e)) return 5;
  if (dynamic_cast<const EvalError*>(&e)) return 6;
  return 3;
}

struct GenerateArgs {
  std::string family;
  std::string sp_class = "lsc";
  std::string model = "grow";
  double rho = 1.0;
  double k_bar = 16.0;
  double mixing = 0.25;
  double grow_fraction = 0.5;
  int nodes = 0;
  int layers = 0;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

GeneratedBenchmark run_generator(const GenerateArgs& args) {
  if (!args.seed) {
    throw DomainError("a seed is required; pass --seed");
  }
  if (args.family == "sp") {
    SPParams params;
    params.rho = args.rho;
    params.k_bar = args.k_bar;
    if (args.nodes > 0) params.n_nodes = args.nodes;
    params.n_layers = args.layers;
    params.seed = *args.seed;
    params.change_class = args.sp_class == "ssc"   ? SPChangeClass::SSC
                          : args.sp_class == "msc" ? SPChangeClass::MSC
                                                   : SPChangeClass::LSC;
    return generate_sp_temporal(params);
  }
  GranellParams params;
  if (args.nodes > 0) params.n_nodes = args.nodes;
  if (args.layers > 0) params.n_layers = args.layers;
  params.k_bar = args.k_bar;
  params.mixing = args.mixing;
  params.grow_fraction = args.grow_fraction;
  params.seed = *args.seed;
  params.model = args.model == "grow"    ? GranellModel::Grow
                 : args.model == "merge" ? GranellModel::Merge
                                         : GranellModel::Mixed;
  return generate_granell(params);
}

void write_benchmark(const GeneratedBenchmark& bench, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  io::write_edge_list(bench.network, out_dir / "edges.tsv");
  io::write_truth_files(bench.truth, out_dir);
  io::atomic_write(out_dir / "metadata.json", bench.metadata.dump(2) + "\n");

  double edge_ends = 0.0;
  for (const CsrMatrix& layer : bench.network.layers) edge_ends += layer.nnz();
  const double mean_degree =
      edge_ends / (static_cast<double>(bench.network.n_nodes) * bench.network.n_layers());
  std::printf("generated N=%d T=%d mean_degree=%.3f -> %s\n", bench.network.n_nodes,
              bench.network.n_layers(), mean_degree, out_dir.string().c_str());
}

struct DetectArgs {
  std::string input;
  std::string weights = "lart";
  double omega = 1.0;
  std::string weights_file;
  std::string mode = "fast";
  DetectConfig config;
  std::optional<std::uint64_t> seed;
  bool no_stability = false;
  std::string out = ".";
  std::string config_file;
};

// config file first, then flags override anything the user passed explicitly
void merge_config_file(DetectArgs& args, const CLI::App* cmd) {
  if (args.config_file.empty()) return;
  std::ifstream in(args.config_file);
  if (!in) {
    throw IoError("cannot open config file " + args.config_file);
  }
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ParseError("invalid config JSON: " + std::string(e.what()));
  }
  auto use_file = [&](const char* flag) { return cmd->count(flag) == 0; };
  if (cfg.contains("mode") && use_file("--mode")) args.mode = cfg["mode"].get<std::string>();
  if (cfg.contains("scales") && use_file("--scales")) {
    args.config.n_scales = cfg["scales"].get<int>();
  }
  if (cfg.contains("eta") && use_file("--eta")) args.config.eta = cfg["eta"].get<int>();
  if (cfg.contains("repetitions") && use_file("--reps")) {
    args.config.repetitions = cfg["repetitions"].get<int>();
  }
  if (cfg.contains("threshold") && use_file("--threshold")) {
    args.config.residual_threshold = cfg["threshold"].get<double>();
  }
  if (cfg.contains("order") && use_file("--order")) {
    args.config.cheb_order = cfg["order"].get<int>();
  }
  if (cfg.contains("threads") && use_file("--threads")) {
    args.config.threads = cfg["threads"].get<int>();
  }
  if (cfg.contains("stability") && !cmd->count("--no-stability")) {
    args.no_stability = !cfg["stability"].get<bool>();
  }
  if (cfg.contains("weights") && use_file("--weights")) {
    args.weights = cfg["weights"].get<std::string>();
  }
  if (cfg.contains("omega") && use_file("--omega")) args.omega = cfg["omega"].get<double>();
  if (cfg.contains("seed") && !args.seed) args.seed = cfg["seed"].get<std::uint64_t>();
}

json config_echo(const DetectArgs& args) {
  return json{{"mode", args.mode},
              {"weights", args.weights},
              {"omega", args.omega},
              {"scales", args.config.n_scales},
              {"eta", args.config.eta},
              {"repetitions", args.config.repetitions},
              {"threshold", args.config.residual_threshold},
              {"order", args.config.cheb_order},
              {"stability", !args.no_stability},
              {"seed", *args.seed}};
}

MultiScaleResult run_detection(const TemporalNetwork& net, DetectArgs& args) {
  if (!args.seed) {
    throw DomainError("a seed is required; pass --seed or set it in the config file");
  }
  InterLayerWeights weights;
  if (args.weights == "lart") {
    weights = lart_weights(net);
  } else if (args.weights == "constant") {
    weights = constant_weights(net, args.omega);
  } else {
    throw DomainError("weight scheme must be 'lart' or 'constant'");
  }
  if (!args.weights_file.empty()) {
    std::ifstream in(args.weights_file);
    if (!in) {
      throw IoError("cannot open weights file " + args.weights_file);
    }
    apply_weight_overrides(weights, in);
  }

  args.config.mode = args.mode == "exact" ? FeatureMode::Exact : FeatureMode::Sketch;
  if (args.mode != "exact" && args.mode != "fast") {
    throw DomainError("mode must be 'fast' or 'exact'");
  }
  args.config.seed = *args.seed;
  args.config.compute_stability = !args.no_stability;

  // spectral cache keyed by the laplacian content, enabled by TMSCD_CACHE_DIR
  const char* cache_env = std::getenv("TMSCD_CACHE_DIR");
  if (cache_env && *cache_env) {
    const fs::path cache_dir = cache_env;
    fs::create_directories(cache_dir);
    const SupraSystem keyed = build_supra_system(net, weights);
    args.config.load_basis = [cache_dir, &keyed](const EigOptions& eig, int k,
                                                 SpectralBasis& basis) {
      return io::read_spectral_cache(
          cache_dir / (io::spectral_cache_key(keyed, k, eig) + ".eig"), basis);
    };
    args.config.store_basis = [cache_dir, &keyed](const EigOptions& eig, int k,
                                                  const SpectralBasis& basis) {
      io::write_spectral_cache(basis,
                               cache_dir / (io::spectral_cache_key(keyed, k, eig) + ".eig"));
    };
    MultiScaleResult result = detect_multiscale(net, weights, args.config);
    args.config.load_basis = nullptr;
    args.config.store_basis = nullptr;
    return result;
  }
  return detect_multiscale(net, weights, args.config);
}

int cmd_detect(DetectArgs& args) {
  const TemporalNetwork net = io::read_edge_list(args.input);
  MultiScaleResult result = run_detection(net, args);
  std::printf("lambda_star=%.12g q_index=%d%s scale range [%.6g, %.6g] over %d scales\n",
              result.lambda_star, result.q_index, result.q_capped ? " (capped)" : "",
              result.grid.s_min, result.grid.s_max, result.grid.size());
  io::write_result(result, args.out, config_echo(args));
  std::printf("result written to %s\n", (fs::path(args.out) / "result.json").string().c_str());
  return 0;
}

GroundTruth read_truth_dir(const fs::path& dir, const std::string& prefix) {
  GroundTruth truth;
  for (const char* name : {"large", "medium", "small", "single"}) {
    const fs::path file = dir / (prefix + name + ".csv");
    if (fs::exists(file)) {
      truth.scales.push_back({name, io::read_labels_csv(file)});
    }
  }
  if (truth.scales.empty()) {
    throw IoError("no " + prefix + "*.csv truth files found in " + dir.string());
  }
  return truth;
}

int cmd_evaluate(const std::string& result_path, const std::string& truth_dir,
                 const std::string& truth_prefix, const std::string& out) {
  io::LoadedResult loaded = io::read_result(result_path);
  GroundTruth truth = read_truth_dir(truth_dir, truth_prefix);
  io::EvaluationReport report = io::evaluate_result(loaded.result, truth);
  io::write_evaluation(report, out);
  for (std::size_t s = 0; s < report.truth_names.size(); ++s) {
    std::printf("success_rate[%s] = %.4f\n", report.truth_names[s].c_str(),
                report.success_rates[s]);
  }
  std::printf("evaluation written to %s\n", (fs::path(out) / "evaluation.json").string().c_str());
  return 0;
}

int cmd_sweep(GenerateArgs gen, DetectArgs detect, int realizations, const std::string& out) {
  if (!gen.seed) {
    throw DomainError("a seed is required; pass --seed");
  }
  if (realizations < 1) {
    throw DomainError("need at least one realization");
  }
  fs::create_directories(out);

  std::vector<std::string> truth_names;
  std::vector<std::vector<double>> rates;  // per truth scale, per realization
  for (int r = 0; r < realizations; ++r) {
    GenerateArgs gen_r = gen;
    gen_r.seed = derive_seed(*gen.seed, 0x5EED, r);
    GeneratedBenchmark bench = run_generator(gen_r);

    DetectArgs detect_r = detect;
    detect_r.seed = derive_seed(*gen.seed, 0xDE7EC7, r);
    MultiScaleResult result = run_detection(bench.network, detect_r);

    io::EvaluationReport report = io::evaluate_result(result, bench.truth);
    if (truth_names.empty()) {
      truth_names = report.truth_names;
      rates.assign(truth_names.size(), {});
    }
    for (std::size_t s = 0; s < truth_names.size(); ++s) {
      rates[s].push_back(report.success_rates[s]);
    }
    std::printf("realization %d/%d:", r + 1, realizations);
    for (std::size_t s = 0; s < truth_names.size(); ++s) {
      std::printf(" %s=%.4f", truth_names[s].c_str(), report.success_rates[s]);
    }
    std::printf("\n");
  }

  json summary = {{"format", "tmscd-sweep"},
                  {"version", 1},
                  {"family", gen.family},
                  {"realizations", realizations}};
  std::ostringstream csv;
  csv << "truth_scale,mean_success,std_success,realizations\n";
  for (std::size_t s = 0; s < truth_names.size(); ++s) {
    double mean = 0.0;
    for (double v : rates[s]) mean += v;
    mean /= rates[s].size();
    double var = 0.0;
    for (double v : rates[s]) var += (v - mean) * (v - mean);
    const double stddev = rates[s].size() > 1 ? std::sqrt(var / (rates[s].size() - 1)) : 0.0;
    summary["success"][truth_names[s]] = {{"mean", mean},
                                          {"std", stddev},
                                          {"values", rates[s]}};
    char line[128];
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%d\n", truth_names[s].c_str(), mean, stddev,
                  realizations);
    csv << line;
    std::printf("%s: %.4f +- %.4f\n", truth_names[s].c_str(), mean, stddev);
  }
  io::atomic_write(fs::path(out) / "sweep.json", summary.dump(2) + "\n");
  io::atomic_write(fs::path(out) / "sweep.csv", csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale community detection in temporal networks via spectral graph "
               "wavelets on the supra-Laplacian"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  // generate
  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "generate a benchmark temporal network");
  generate->require_subcommand(1);
  CLI::App* gen_sp = generate->add_subcommand("sp", "time-varying hierarchical benchmark");
  gen_sp->add_option("--class", gen.sp_class, "change class: ssc, msc or lsc")
      ->required()
      ->check(CLI::IsMember({"ssc", "msc", "lsc"}));
  gen_sp->add_option("--rho", gen.rho, "scale separation parameter");
  gen_sp->add_option("--kbar", gen.k_bar, "average degree");
  gen_sp->add_option("--nodes", gen.nodes, "node count (default 640)");
  gen_sp->add_option("--layers", gen.layers, "layer count (default per class)");
  CLI::App* gen_gr = generate->add_subcommand("granell", "grow/merge/mixed benchmark");
  gen_gr->add_option("--model", gen.model, "grow, merge or mixed")
      ->required()
      ->check(CLI::IsMember({"grow", "merge", "mixed"}));
  gen_gr->add_option("--nodes", gen.nodes, "node count (default 128)");
  gen_gr->add_option("--layers", gen.layers, "layer count (default 100)");
  gen_gr->add_option("--kbar", gen.k_bar, "average degree");
  gen_gr->add_option("--mixing", gen.mixing, "fraction of degree leaving the community");
  gen_gr->add_option("--grow-fraction", gen.grow_fraction,
                     "share of the donor community absorbed by t = T");
  for (CLI::App* sub : {gen_sp, gen_gr}) {
    sub->add_option("--seed", [&gen](const CLI::results_t& r) {
         gen.seed = std::stoull(r[0]);
         return true;
       },
       "generator seed (required)")->expected(1);
    sub->add_option("--out", gen.out, "output directory");
  }

  // detect
  DetectArgs det;
  CLI::App* detect = app.add_subcommand("detect", "run multi-scale detection on an edge list");
  detect->add_option("--input", det.input, "edge list file")->required();
  detect->add_option("--weights", det.weights, "inter-layer weight scheme: lart or constant")
      ->check(CLI::IsMember({"lart", "constant"}));
  detect->add_option("--omega", det.omega, "constant weight value");
  detect->add_option("--weights-file", det.weights_file, "per-node weight overrides (t i omega)");
  detect->add_option("--mode", det.mode, "fast (sketch) or exact")
      ->check(CLI::IsMember({"fast", "exact"}));
  detect->add_option("--scales", det.config.n_scales, "number of scales M");
  detect->add_option("--eta", det.config.eta, "random signals per sketch");
  detect->add_option("--reps", det.config.repetitions, "stability repetitions R");
  detect->add_option("--threshold", det.config.residual_threshold, "lambda-star residual bound");
  detect->add_option("--order", det.config.cheb_order, "chebyshev order");
  detect->add_option("--threads", det.config.threads, "parallel scale workers (0 = auto)");
  detect->add_flag("--no-stability", det.no_stability, "skip the stability profile");
  detect->add_option("--stability-scale", det.config.stability_scales,
                     "restrict stability to these scale indices (repeatable)");
  detect->add_option("--seed", [&det](const CLI::results_t& r) {
        det.seed = std::stoull(r[0]);
        return true;
      },
      "detection seed (required unless set in --config)")->expected(1);
  detect->add_option("--config", det.config_file, "JSON config file (flags win)");
  detect->add_option("--out", det.out, "output directory");

  // evaluate
  std::string eval_result, eval_truth_dir, eval_prefix = "truth_", eval_out = ".";
  CLI::App* evaluate = app.add_subcommand("evaluate", "compare a result against planted truth");
  evaluate->add_option("--result", eval_result, "result.json from detect")->required();
  evaluate->add_option("--truth-dir", eval_truth_dir, "directory with truth_*.csv")->required();
  evaluate->add_option("--truth-prefix", eval_prefix, "truth file prefix");
  evaluate->add_option("--out", eval_out, "output directory");

  // sweep
  GenerateArgs sweep_gen;
  DetectArgs sweep_det;
  int sweep_realizations = 10;
  std::string sweep_out = ".";
  CLI::App* sweep = app.add_subcommand("sweep", "batch generate+detect+evaluate summary");
  sweep->add_option("--family", sweep_gen.family, "sp or granell")
      ->required()
      ->check(CLI::IsMember({"sp", "granell"}));
  sweep->add_option("--class", sweep_gen.sp_class, "sp change class")
      ->check(CLI::IsMember({"ssc", "msc", "lsc"}));
  sweep->add_option("--model", sweep_gen.model, "granell model")
      ->check(CLI::IsMember({"grow", "merge", "mixed"}));
  sweep->add_option("--rho", sweep_gen.rho, "sp separation");
  sweep->add_option("--kbar", sweep_gen.k_bar, "average degree");
  sweep->add_option("--mixing", sweep_gen.mixing, "granell mixing");
  sweep->add_option("--grow-fraction", sweep_gen.grow_fraction, "granell grow fraction");
  sweep->add_option("--nodes", sweep_gen.nodes, "node count");
  sweep->add_option("--layers", sweep_gen.layers, "layer count");
  sweep->add_option("--realizations", sweep_realizations, "number of realizations");
  sweep->add_option("--weights", sweep_det.weights, "lart or constant")
      ->check(CLI::IsMember({"lart", "constant"}));
  sweep->add_option("--omega", sweep_det.omega, "constant weight value");
  sweep->add_option("--mode", sweep_det.mode, "fast or exact")
      ->check(CLI::IsMember({"fast", "exact"}));
  sweep->add_option("--scales", sweep_det.config.n_scales, "number of scales M");
  sweep->add_option("--eta", sweep_det.config.eta, "random signals per sketch");
  sweep->add_option("--reps", sweep_det.config.repetitions, "stability repetitions R");
  sweep->add_option("--threshold", sweep_det.config.residual_threshold, "residual bound");
  sweep->add_option("--order", sweep_det.config.cheb_order, "chebyshev order");
  sweep->add_option("--threads", sweep_det.config.threads, "parallel scale workers");
  sweep->add_flag("--no-stability", sweep_det.no_stability, "skip stability profiles");
  sweep->add_option("--seed", [&sweep_gen](const CLI::results_t& r) {
       sweep_gen.seed = std::stoull(r[0]);
       return true;
     },
     "base seed (required)")->expected(1);
  sweep->add_option("--out", sweep_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version succeed, usage errors map to 1
  }

  try {
    if (generate->parsed()) {
      gen.family = gen_sp->parsed() ? "sp" : "granell";
      GeneratedBenchmark bench = run_generator(gen);
      write_benchmark(bench, gen.out);
      return 0;
    }
    if (detect->parsed()) {
      merge_config_file(det, detect);
      return cmd_detect(det);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_result, eval_truth_dir, eval_prefix, eval_out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_gen, sweep_det, sweep_realizations, sweep_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    const auto* as_error = dynamic_cast<const Error*>(&e);
    return as_error ? exit_code_for(e) : 3;
  }
  return 1;
}

#include "tmscd/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "tmscd/metrics.hpp"

namespace tmscd::io {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw IoError("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

TemporalNetwork read_edge_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open edge list " + path.string());
  }
  return load_temporal_network(in);
}

void write_edge_list(const TemporalNetwork& net, const fs::path& path) {
  std::ostringstream out;
  save_temporal_network(net, out);
  atomic_write(path, out.str());
}

void write_labels_csv(const std::vector<std::vector<int>>& per_layer, const fs::path& path) {
  std::ostringstream out;
  out << "node,layer,community\n";
  for (std::size_t t = 0; t < per_layer.size(); ++t) {
    for (std::size_t i = 0; i < per_layer[t].size(); ++i) {
      out << i << ',' << (t + 1) << ',' << per_layer[t][i] << '\n';
    }
  }
  atomic_write(path, out.str());
}

std::vector<std::vector<int>> read_labels_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open labels file " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("node,layer,community", 0) != 0) {
    throw ParseError("labels file " + path.string() + " lacks the node,layer,community header");
  }
  std::vector<std::vector<int>> per_layer;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    long node, layer, community;
    if (std::sscanf(line.c_str(), "%ld,%ld,%ld", &node, &layer, &community) != 3) {
      throw ParseError("malformed labels row in " + path.string() + " (line " +
                       std::to_string(line_no) + ")");
    }
    if (layer < 1 || node < 0) {
      throw RangeError("labels row out of range in " + path.string() + " (line " +
                       std::to_string(line_no) + ")");
    }
    if (per_layer.size() < static_cast<std::size_t>(layer)) {
      per_layer.resize(layer);
    }
    auto& row = per_layer[layer - 1];
    if (row.size() <= static_cast<std::size_t>(node)) {
      row.resize(node + 1, -1);
    }
    row[node] = static_cast<int>(community);
  }
  for (std::size_t t = 0; t < per_layer.size(); ++t) {
    for (int v : per_layer[t]) {
      if (v < 0) {
        throw ConsistencyError("labels file " + path.string() + " misses nodes in layer " +
                               std::to_string(t + 1));
      }
    }
  }
  return per_layer;
}

std::vector<std::vector<int>> split_by_layer(const std::vector<int>& flat, int n_nodes) {
  if (n_nodes <= 0 || flat.size() % n_nodes != 0) {
    throw DomainError("flat labeling is not a multiple of n_nodes");
  }
  const int t_count = static_cast<int>(flat.size()) / n_nodes;
  std::vector<std::vector<int>> out(t_count);
  for (int t = 0; t < t_count; ++t) {
    out[t].assign(flat.begin() + static_cast<std::size_t>(t) * n_nodes,
                  flat.begin() + static_cast<std::size_t>(t + 1) * n_nodes);
  }
  return out;
}

void write_truth_files(const GroundTruth& truth, const fs::path& directory,
                       const std::string& prefix) {
  fs::create_directories(directory);
  for (const TruthScale& scale : truth.scales) {
    write_labels_csv(scale.labels, directory / (prefix + scale.name + ".csv"));
  }
}

namespace {

std::string scale_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "labels_scale_%03d.csv", index);
  return buf;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

void write_result(const MultiScaleResult& result, const fs::path& directory,
                  const nlohmann::json& config_echo) {
  fs::create_directories(directory);
  nlohmann::json summary = {
      {"format", "tmscd-result"},
      {"version", 1},
      {"generated_at", timestamp_utc()},
      {"n_nodes", result.n_nodes},
      {"n_layers", result.n_layers},
      {"lambda_star", result.lambda_star},
      {"q_index", result.q_index},
      {"q_capped", result.q_capped},
      {"residual_norms", result.residual_norms},
      {"eigenvalues", result.eigenvalues},
      {"lambda_max", result.lambda_max},
      {"filter",
       {{"y1", result.filter.y1},
        {"y2", result.filter.y2},
        {"y3", result.filter.y3},
        {"y4", result.filter.y4},
        {"y4_fallback", result.y4_fallback}}},
      {"scales", result.grid.scales},
      {"repetitions", result.repetitions},
      {"config", config_echo},
      {"diagnostics",
       {{"binarized_weights", result.binarized_weights},
        {"clamped_heights", result.clamped_heights},
        {"synthetic_merges", result.synthetic_merges},
        {"zero_variance_rows", result.zero_variance_rows}}},
  };
  nlohmann::json per_scale = nlohmann::json::array();
  for (std::size_t si = 0; si < result.partitions.size(); ++si) {
    const Partition& p = result.partitions[si];
    nlohmann::json entry = {
        {"scale", result.grid.scales[si]},
        {"n_communities", p.n_communities},
        {"labels_file", scale_file_name(static_cast<int>(si))},
    };
    if (std::isfinite(result.gamma[si])) {
      entry["gamma_a"] = result.gamma[si];
    } else {
      entry["gamma_a"] = nullptr;
    }
    per_scale.push_back(entry);
    write_labels_csv(split_by_layer(p.labels, result.n_nodes),
                     directory / scale_file_name(static_cast<int>(si)));
  }
  summary["per_scale"] = per_scale;
  atomic_write(directory / "result.json", summary.dump(2) + "\n");
}

LoadedResult read_result(const fs::path& result_json) {
  std::ifstream in(result_json);
  if (!in) {
    throw IoError("cannot open result file " + result_json.string());
  }
  nlohmann::json summary;
  try {
    in >> summary;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid result JSON: " + std::string(e.what()));
  }
  if (summary.value("format", "") != "tmscd-result") {
    throw ParseError("not a tmscd result file: " + result_json.string());
  }

  LoadedResult out;
  out.summary = summary;
  MultiScaleResult& r = out.result;
  r.n_nodes = summary.at("n_nodes").get<int>();
  r.n_layers = summary.at("n_layers").get<int>();
  r.lambda_star = summary.at("lambda_star").get<double>();
  r.q_index = summary.at("q_index").get<int>();
  r.q_capped = summary.at("q_capped").get<bool>();
  r.residual_norms = summary.at("residual_norms").get<std::vector<double>>();
  r.eigenvalues = summary.at("eigenvalues").get<std::vector<double>>();
  r.lambda_max = summary.at("lambda_max").get<double>();
  r.filter.y1 = summary.at("filter").at("y1").get<double>();
  r.filter.y2 = summary.at("filter").at("y2").get<double>();
  r.filter.y3 = summary.at("filter").at("y3").get<double>();
  r.filter.y4 = summary.at("filter").at("y4").get<double>();
  r.y4_fallback = summary.at("filter").at("y4_fallback").get<bool>();
  r.grid.scales = summary.at("scales").get<std::vector<double>>();
  if (!r.grid.scales.empty()) {
    r.grid.s_min = r.grid.scales.front();
    r.grid.s_max = r.grid.scales.back();
  }
  r.repetitions = summary.at("repetitions").get<int>();

  const fs::path directory = result_json.parent_path();
  for (const auto& entry : summary.at("per_scale")) {
    Partition p;
    p.scale = entry.at("scale").get<double>();
    p.n_communities = entry.at("n_communities").get<int>();
    const auto per_layer = read_labels_csv(directory / entry.at("labels_file").get<std::string>());
    if (static_cast<int>(per_layer.size()) != r.n_layers) {
      throw ConsistencyError("labels file does not match the recorded layer count");
    }
    for (const auto& row : per_layer) {
      if (static_cast<int>(row.size()) != r.n_nodes) {
        throw ConsistencyError("labels file does not match the recorded node count");
      }
      p.labels.insert(p.labels.end(), row.begin(), row.end());
    }
    r.partitions.push_back(std::move(p));
    const auto& g = entry.at("gamma_a");
    r.gamma.push_back(g.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                  : g.get<double>());
  }
  return out;
}

EvaluationReport evaluate_result(const MultiScaleResult& result, const GroundTruth& truth) {
  EvaluationReport report;
  report.scales = result.grid.scales;
  report.instability.reserve(result.gamma.size());
  for (double g : result.gamma) {
    report.instability.push_back(std::isfinite(g) ? 1.0 - g
                                                  : std::numeric_limits<double>::quiet_NaN());
  }
  if (truth.scales.empty()) {
    throw EvalError("ground truth has no scales");
  }
  for (const TruthScale& scale : truth.scales) {
    if (static_cast<int>(scale.labels.size()) != result.n_layers) {
      throw EvalError("truth scale '" + scale.name + "' does not match the layer count");
    }
    for (const auto& row : scale.labels) {
      if (static_cast<int>(row.size()) != result.n_nodes) {
        throw EvalError("truth scale '" + scale.name + "' does not match the node count");
      }
    }
    report.truth_names.push_back(scale.name);
    report.curves.push_back(per_layer_similarity(result.partitions, scale.labels, result.n_nodes));
    report.success_rates.push_back(success_rate(report.curves.back().mean));
  }
  return report;
}

void write_evaluation(const EvaluationReport& report, const fs::path& directory) {
  fs::create_directories(directory);
  nlohmann::json summary = {
      {"format", "tmscd-evaluation"},
      {"version", 1},
      {"scales", report.scales},
  };
  nlohmann::json curves = nlohmann::json::object();
  for (std::size_t s = 0; s < report.truth_names.size(); ++s) {
    curves[report.truth_names[s]] = {
        {"mean", report.curves[s].mean},
        {"stddev", report.curves[s].stddev},
        {"success_rate", report.success_rates[s]},
    };
  }
  summary["curves"] = curves;
  nlohmann::json instability = nlohmann::json::array();
  for (double v : report.instability) {
    if (std::isfinite(v)) {
      instability.push_back(v);
    } else {
      instability.push_back(nullptr);
    }
  }
  summary["instability"] = instability;
  atomic_write(directory / "evaluation.json", summary.dump(2) + "\n");

  // plot-ready CSV: one row per scale
  std::ostringstream csv;
  char buf[64];
  csv << "scale_index,scale";
  for (const std::string& name : report.truth_names) {
    csv << ",mean_ari_" << name << ",std_ari_" << name;
  }
  csv << ",instability\n";
  for (std::size_t si = 0; si < report.scales.size(); ++si) {
    std::snprintf(buf, sizeof(buf), "%.17g", report.scales[si]);
    csv << si << ',' << buf;
    for (std::size_t s = 0; s < report.truth_names.size(); ++s) {
      std::snprintf(buf, sizeof(buf), "%.17g", report.curves[s].mean[si]);
      csv << ',' << buf;
      std::snprintf(buf, sizeof(buf), "%.17g", report.curves[s].stddev[si]);
      csv << ',' << buf;
    }
    if (std::isfinite(report.instability[si])) {
      std::snprintf(buf, sizeof(buf), "%.17g", report.instability[si]);
      csv << ',' << buf << '\n';
    } else {
      csv << ",\n";
    }
  }
  atomic_write(directory / "evaluation.csv", csv.str());
}

namespace {

constexpr char kCacheMagic[8] = {'T', 'M', 'S', 'C', 'D', 'E', 'C', '1'};

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t hash) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace

bool read_spectral_cache(const fs::path& path, SpectralBasis& basis) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) return false;
  std::uint32_t version = 0;
  std::uint64_t n = 0, k = 0;
  double lambda_max = 0.0;
  std::uint8_t full = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&k), sizeof(k));
  in.read(reinterpret_cast<char*>(&lambda_max), sizeof(lambda_max));
  in.read(reinterpret_cast<char*>(&full), sizeof(full));
  if (!in || version != 1 || n == 0 || k == 0 || k > n) return false;

  SpectralBasis loaded;
  loaded.n = static_cast<int>(n);
  loaded.lambda_max_estimate = lambda_max;
  loaded.full = full != 0;
  loaded.eigenvalues.resize(k);
  in.read(reinterpret_cast<char*>(loaded.eigenvalues.data()),
          static_cast<std::streamsize>(k * sizeof(double)));
  // stored row-major (node index fastest over eigenvectors), per the format
  std::vector<double> row_major(n * k);
  in.read(reinterpret_cast<char*>(row_major.data()),
          static_cast<std::streamsize>(row_major.size() * sizeof(double)));
  if (!in) return false;
  loaded.eigenvectors.resize(row_major.size());
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < k; ++j) {
      loaded.eigenvectors[j * n + i] = row_major[i * k + j];
    }
  }
  basis = std::move(loaded);
  return true;
}

void write_spectral_cache(const SpectralBasis& basis, const fs::path& path) {
  std::string blob;
  blob.reserve(64 + basis.eigenvalues.size() * 8 + basis.eigenvectors.size() * 8);
  blob.append(kCacheMagic, sizeof(kCacheMagic));
  const std::uint32_t version = 1;
  const std::uint64_t n = basis.n, k = basis.eigenvalues.size();
  const std::uint8_t full = basis.full ? 1 : 0;
  blob.append(reinterpret_cast<const char*>(&version), sizeof(version));
  blob.append(reinterpret_cast<const char*>(&n), sizeof(n));
  blob.append(reinterpret_cast<const char*>(&k), sizeof(k));
  blob.append(reinterpret_cast<const char*>(&basis.lambda_max_estimate), sizeof(double));
  blob.append(reinterpret_cast<const char*>(&full), sizeof(full));
  blob.append(reinterpret_cast<const char*>(basis.eigenvalues.data()),
              basis.eigenvalues.size() * sizeof(double));
  std::vector<double> row_major(basis.eigenvectors.size());
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < k; ++j) {
      row_major[i * k + j] = basis.eigenvectors[j * n + i];
    }
  }
  blob.append(reinterpret_cast<const char*>(row_major.data()), row_major.size() * sizeof(double));
  atomic_write(path, blob);
}

std::string spectral_cache_key(const SupraSystem& sys, int k, const EigOptions& opts) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const CsrMatrix& lap = sys.laplacian;
  h = fnv1a(lap.row_ptr.data(), lap.row_ptr.size() * sizeof(int), h);
  h = fnv1a(lap.col.data(), lap.col.size() * sizeof(int), h);
  h = fnv1a(lap.val.data(), lap.val.size() * sizeof(double), h);
  h = fnv1a(&k, sizeof(k), h);
  h = fnv1a(&opts.tol, sizeof(opts.tol), h);
  h = fnv1a(&opts.seed, sizeof(opts.seed), h);
  const int method = static_cast<int>(opts.method);
  h = fnv1a(&method, sizeof(method), h);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tmscd::io

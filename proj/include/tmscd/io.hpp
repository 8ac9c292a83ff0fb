#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmscd/benchmarks.hpp"
#include "tmscd/clustering.hpp"
#include "tmscd/spectral.hpp"
#include "tmscd/temporal_graph.hpp"

namespace tmscd::io {

// write-temp-then-rename so partial output never lands under the final name
void atomic_write(const std::filesystem::path& path, const std::string& content);

TemporalNetwork read_edge_list(const std::filesystem::path& path);
void write_edge_list(const TemporalNetwork& net, const std::filesystem::path& path);

// "node,layer,community" rows, 1-based layers
void write_labels_csv(const std::vector<std::vector<int>>& per_layer,
                      const std::filesystem::path& path);
std::vector<std::vector<int>> read_labels_csv(const std::filesystem::path& path);

// flat layer-major labels to per-layer rows
std::vector<std::vector<int>> split_by_layer(const std::vector<int>& flat, int n_nodes);

void write_truth_files(const GroundTruth& truth, const std::filesystem::path& directory,
                       const std::string& prefix = "truth_");

// Detection result: a JSON summary plus one labels CSV per scale in the same
// directory. Rereading restores everything the evaluation needs.
void write_result(const MultiScaleResult& result, const std::filesystem::path& directory,
                  const nlohmann::json& config_echo);

struct LoadedResult {
  MultiScaleResult result;
  nlohmann::json summary;
};
LoadedResult read_result(const std::filesystem::path& result_json);

// Per truth scale: the similarity curve; plus the instability profile.
struct EvaluationReport {
  std::vector<std::string> truth_names;
  std::vector<SimilarityCurve> curves;
  std::vector<double> success_rates;
  std::vector<double> scales;
  std::vector<double> instability;  // 1 - gamma_a (NaN where not computed)
};

EvaluationReport evaluate_result(const MultiScaleResult& result, const GroundTruth& truth);
void write_evaluation(const EvaluationReport& report, const std::filesystem::path& directory);

// Binary eigenpair cache (magic, version, dimensions, row-major doubles).
// Returns false on any mismatch instead of failing.
bool read_spectral_cache(const std::filesystem::path& path, SpectralBasis& basis);
void write_spectral_cache(const SpectralBasis& basis, const std::filesystem::path& path);

// cache key from the laplacian content and the solve parameters
std::string spectral_cache_key(const SupraSystem& sys, int k, const EigOptions& opts);

}  // namespace tmscd::io

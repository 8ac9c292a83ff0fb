#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tmscd {

// Error taxonomy shared by the library and the CLI (the CLI maps each kind
// to a documented exit code).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : Error {
  using Error::Error;
};
struct RangeError : Error {
  using Error::Error;
};
struct ConsistencyError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct EvalError : Error {
  using Error::Error;
};

// Layer-major flat indexing over node-time pairs: all nodes of layer 0,
// then layer 1, and so on. Layers are 0-based in memory and 1-based in the
// file formats. The layout is fixed because feature vectors are exchanged
// as flat arrays.
struct IndexMap {
  int n_nodes = 0;
  int n_layers = 0;

  int size() const { return n_nodes * n_layers; }
  int flat(int node, int layer) const { return node + layer * n_nodes; }
  int node_of(int flat_index) const { return flat_index % n_nodes; }
  int layer_of(int flat_index) const { return flat_index / n_nodes; }
};

// splitmix64 finalizer; used to derive independent RNG streams from one
// user-facing seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t sub = 0) {
  return mix64(seed ^ mix64(stream + 0x100) ^ mix64(sub + 0x10000));
}

}  // namespace tmscd

#include "tmscd/temporal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace tmscd {

namespace {

std::string at_line(int line_no) { return " (line " + std::to_string(line_no) + ")"; }

// unordered pair key within a layer
std::uint64_t edge_key(int t, int i, int j) {
  const int lo = std::min(i, j), hi = std::max(i, j);
  return (static_cast<std::uint64_t>(t) << 42) | (static_cast<std::uint64_t>(lo) << 21) |
         static_cast<std::uint64_t>(hi);
}

}  // namespace

TemporalNetwork load_temporal_network(std::istream& in) {
  std::string line;
  int line_no = 0;

  int n = -1, t_count = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream head(line);
    std::string key_n, key_t;
    if (!(head >> key_n >> n >> key_t >> t_count) || key_n != "N" || key_t != "T") {
      throw ParseError("malformed header, expected 'N <int> T <int>'" + at_line(line_no));
    }
    break;
  }
  if (n <= 0 || t_count <= 0) {
    throw ParseError("missing or invalid header: need N >= 1 and T >= 1");
  }
  if (n >= (1 << 21) || t_count >= (1 << 21)) {
    throw RangeError("network dimensions exceed supported bounds");
  }

  struct Record {
    double weight;
    int first_i, first_j;  // orientation of the first occurrence
    bool seen_reversed;
  };
  std::unordered_map<std::uint64_t, Record> seen;
  std::vector<std::vector<Triplet>> triplets(t_count);

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream row(line);
    long t, i, j;
    double w;
    if (!(row >> t >> i >> j >> w)) {
      throw ParseError("malformed record, expected 't i j w'" + at_line(line_no));
    }
    std::string trailing;
    if (row >> trailing) {
      throw ParseError("trailing tokens after record" + at_line(line_no));
    }
    if (t < 1 || t > t_count) {
      throw RangeError("layer index " + std::to_string(t) + " outside [1, " +
                       std::to_string(t_count) + "]" + at_line(line_no));
    }
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw RangeError("node index outside [0, " + std::to_string(n) + ")" + at_line(line_no));
    }
    if (i == j) {
      throw ParseError("self-loop on node " + std::to_string(i) + at_line(line_no));
    }
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ParseError("edge weight must be a positive finite real" + at_line(line_no));
    }

    const std::uint64_t key = edge_key(static_cast<int>(t), static_cast<int>(i),
                                       static_cast<int>(j));
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, Record{w, static_cast<int>(i), static_cast<int>(j), false});
      triplets[t - 1].push_back({static_cast<int>(i), static_cast<int>(j), w});
      triplets[t - 1].push_back({static_cast<int>(j), static_cast<int>(i), w});
    } else if (it->second.first_i == i && it->second.first_j == j) {
      throw ParseError("duplicate record for edge (" + std::to_string(t) + ", " +
                       std::to_string(i) + ", " + std::to_string(j) + ")" + at_line(line_no));
    } else if (it->second.weight != w) {
      throw ConsistencyError("conflicting weights for symmetric entries of edge (" +
                             std::to_string(t) + ", " + std::to_string(std::min(i, j)) + ", " +
                             std::to_string(std::max(i, j)) + ")" + at_line(line_no));
    } else if (it->second.seen_reversed) {
      throw ParseError("duplicate record for edge (" + std::to_string(t) + ", " +
                       std::to_string(i) + ", " + std::to_string(j) + ")" + at_line(line_no));
    } else {
      it->second.seen_reversed = true;  // explicit symmetric entry, same weight
    }
  }

  TemporalNetwork net;
  net.n_nodes = n;
  net.layers.reserve(t_count);
  for (int t = 0; t < t_count; ++t) {
    net.layers.push_back(csr_from_triplets(n, std::move(triplets[t])));
  }
  return net;
}

void save_temporal_network(const TemporalNetwork& net, std::ostream& out) {
  out << "N\t" << net.n_nodes << "\tT\t" << net.n_layers() << "\n";
  char buf[64];
  for (int t = 0; t < net.n_layers(); ++t) {
    const CsrMatrix& layer = net.layers[t];
    for (int i = 0; i < layer.n; ++i) {
      auto cols = layer.row_cols(i);
      auto vals = layer.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] <= i) continue;  // upper triangle only
        std::snprintf(buf, sizeof(buf), "%.17g", vals[k]);
        out << (t + 1) << '\t' << i << '\t' << cols[k] << '\t' << buf << '\n';
      }
    }
  }
}

InterLayerWeights lart_weights(const TemporalNetwork& net) {
  const int n = net.n_nodes;
  const int t_count = net.n_layers();
  InterLayerWeights weights;
  weights.n_nodes = n;
  weights.n_pairs = std::max(0, t_count - 1);
  weights.w.assign(static_cast<std::size_t>(weights.n_pairs) * n, 0.0);

  for (const CsrMatrix& layer : net.layers) {
    for (double v : layer.val) {
      if (v != 1.0) {
        weights.binarized_input = true;
        break;
      }
    }
    if (weights.binarized_input) break;
  }

  // Columns are sorted, so the intersection is a linear merge. Presence is
  // weight > 0; layers already store no explicit zeros or diagonal.
  for (int t = 0; t + 1 < t_count; ++t) {
    const CsrMatrix& a = net.layers[t];
    const CsrMatrix& b = net.layers[t + 1];
    for (int i = 0; i < n; ++i) {
      auto ca = a.row_cols(i);
      auto cb = b.row_cols(i);
      std::size_t p = 0, q = 0;
      int common = 0;
      while (p < ca.size() && q < cb.size()) {
        if (ca[p] < cb[q]) {
          ++p;
        } else if (ca[p] > cb[q]) {
          ++q;
        } else {
          ++common;
          ++p;
          ++q;
        }
      }
      weights.at(t, i) = 0.5 * common;
    }
  }
  return weights;
}

InterLayerWeights constant_weights(const TemporalNetwork& net, double omega) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw DomainError("inter-layer weight must be a non-negative finite real");
  }
  InterLayerWeights weights;
  weights.n_nodes = net.n_nodes;
  weights.n_pairs = std::max(0, net.n_layers() - 1);
  weights.w.assign(static_cast<std::size_t>(weights.n_pairs) * net.n_nodes, omega);
  return weights;
}

void apply_weight_overrides(InterLayerWeights& weights, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream row(line);
    long t, i;
    double omega;
    if (!(row >> t >> i >> omega)) {
      throw ParseError("malformed weight record, expected 't i omega'" + at_line(line_no));
    }
    if (t < 1 || t > weights.n_pairs) {
      throw RangeError("weight layer index outside [1, " + std::to_string(weights.n_pairs) +
                       "]" + at_line(line_no));
    }
    if (i < 0 || i >= weights.n_nodes) {
      throw RangeError("weight node index outside [0, " + std::to_string(weights.n_nodes) +
                       ")" + at_line(line_no));
    }
    if (!(omega >= 0.0) || !std::isfinite(omega)) {
      throw DomainError("override weight must be non-negative" + at_line(line_no));
    }
    weights.at(static_cast<int>(t) - 1, static_cast<int>(i)) = omega;
  }
}

SupraSystem build_supra_system(const TemporalNetwork& net, const InterLayerWeights& weights) {
  const int n = net.n_nodes;
  const int t_count = net.n_layers();
  if (weights.n_nodes != n || weights.n_pairs != std::max(0, t_count - 1)) {
    throw PreconditionError("inter-layer weights do not match the network dimensions");
  }
  for (double v : weights.w) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("inter-layer weights must be non-negative finite reals");
    }
  }

  SupraSystem sys;
  sys.n_nodes = n;
  sys.n_layers = t_count;
  sys.map = {n, t_count};
  const int nt = sys.map.size();

  sys.degrees.assign(nt, 0.0);
  for (int t = 0; t < t_count; ++t) {
    const CsrMatrix& layer = net.layers[t];
    for (int i = 0; i < n; ++i) {
      double d = 0.0;
      for (double v : layer.row_vals(i)) d += v;
      if (t > 0) d += weights.at(t - 1, i);
      if (t + 1 < t_count) d += weights.at(t, i);
      if (!(d > 0.0)) {
        throw DomainError("degenerate multilayer degree at node " + std::to_string(i) +
                          ", layer " + std::to_string(t + 1) +
                          "; remove isolated node-times or add couplings");
      }
      sys.degrees[sys.map.flat(i, t)] = d;
    }
  }

  // Upper-triangle entries computed once and mirrored, so symmetry is exact.
  std::vector<Triplet> adj;
  std::vector<Triplet> lap;
  std::size_t nnz_estimate = 0;
  for (const CsrMatrix& layer : net.layers) nnz_estimate += layer.col.size();
  nnz_estimate += 2u * n * std::max(0, t_count - 1) + nt;
  adj.reserve(nnz_estimate);
  lap.reserve(nnz_estimate);

  for (int f = 0; f < nt; ++f) lap.push_back({f, f, 1.0});

  auto push_pair = [&](int r, int c, double a_value) {
    adj.push_back({r, c, a_value});
    adj.push_back({c, r, a_value});
    const double l_value = -a_value / std::sqrt(sys.degrees[r] * sys.degrees[c]);
    lap.push_back({r, c, l_value});
    lap.push_back({c, r, l_value});
  };

  for (int t = 0; t < t_count; ++t) {
    const CsrMatrix& layer = net.layers[t];
    for (int i = 0; i < n; ++i) {
      auto cols = layer.row_cols(i);
      auto vals = layer.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] <= i) continue;
        push_pair(sys.map.flat(i, t), sys.map.flat(cols[k], t), vals[k]);
      }
    }
  }
  for (int t = 0; t + 1 < t_count; ++t) {
    for (int i = 0; i < n; ++i) {
      const double omega = weights.at(t, i);
      if (omega > 0.0) {
        push_pair(sys.map.flat(i, t), sys.map.flat(i, t + 1), omega);
      }
    }
  }

  sys.adjacency = csr_from_triplets(nt, std::move(adj));
  sys.laplacian = csr_from_triplets(nt, std::move(lap));
  return sys;
}

}  // namespace tmscd

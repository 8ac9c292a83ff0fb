#pragma once

#include <vector>

namespace tmscd {

// Labeling of all NT node-time pairs at one scale; labels are contiguous
// integers 0 .. n_communities-1 in order of first appearance.
struct Partition {
  std::vector<int> labels;
  double scale = 0.0;
  int n_communities = 0;
};

}  // namespace tmscd

#pragma once

#include <string>
#include <vector>

#include "jvtc/dataset.hpp"
#include "jvtc/types.hpp"

namespace jvtc {

constexpr int kNoise = -1;

/// Cluster id per sample (contiguous from 0) or kNoise. `core` records which
/// samples were density cores, mainly for determinism checks.
struct ClusterAssignment {
  std::vector<int> cluster_ids;
  std::vector<bool> core;
  int num_clusters = 0;

  Index size() const { return static_cast<Index>(cluster_ids.size()); }
};

/// Density clustering on the dissimilarity d(i,j) = 1 - sim(i,j).
/// Deterministic: seeds scan in ascending index order and neighbor lists are
/// sorted ascending, which pins border-point assignment.
ClusterAssignment dbscan(const Matrix& sim, double eps, int min_pts);

/// Positive label sets from a clustering: cluster members share labels,
/// noise points become singletons.
MultiLabels labels_from_clusters(const ClusterAssignment& assign);

struct PurityResult {
  double value = 0.0;
  bool all_noise = false;
  Index noise_count = 0;
};

/// Fraction of non-noise samples whose cluster majority identity matches
/// their own. All-noise assignments score 0 with the flag set.
PurityResult purity(const ClusterAssignment& assign, const std::vector<int>& true_ids);

void save_cluster_assignment(const ClusterAssignment& a, const std::string& path);
ClusterAssignment load_cluster_assignment(const std::string& path);

}  // namespace jvtc

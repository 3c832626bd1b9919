#pragma once

#include <string>
#include <utility>
#include <vector>

#include "jvtc/types.hpp"

namespace jvtc {

/// One gallery item: identity (or kUnknownPersonId), camera and frame number.
struct SampleMeta {
  int sample_id = 0;
  int person_id = kUnknownPersonId;
  int camera_id = 0;
  long long frame_id = 0;
};

/// Raw input features plus the embedded unit-norm view once an embedder ran.
struct FeatureStore {
  Matrix raw;        // N x D_in
  Matrix embedded;   // N x d, rows unit L2 norm; empty until an embedder runs
  bool has_embedded() const { return embedded.size() > 0; }
};

enum class DomainTag { kSource, kTarget };

struct Dataset {
  std::vector<SampleMeta> metas;
  FeatureStore features;
  int num_cameras = 0;
  DomainTag domain_tag = DomainTag::kTarget;

  Index size() const { return static_cast<Index>(metas.size()); }
  bool has_known_ids() const;
  std::vector<int> person_ids() const;

  /// Checks every documented invariant; throws ValidationError with the
  /// offending row on failure.
  void validate() const;
};

/// Per-sample sorted sets of positive indices (same predicted identity).
/// Always contains self; always symmetric.
struct MultiLabels {
  std::vector<std::vector<int>> positives;

  Index size() const { return static_cast<Index>(positives.size()); }
  void validate() const;
  /// Dense 0/1 view, mostly for tests and small instances.
  Matrix dense() const;
};

Dataset load_dataset(const std::string& meta_path, const std::string& feature_path);
void save_dataset(const Dataset& d, const std::string& meta_path, const std::string& feature_path);

/// Splits a labeled dataset into query and gallery index sets. Every returned
/// query has at least one same-person gallery image under a different camera.
/// Persons seen by a single camera are never queried; their sample count is
/// reported through `excluded_single_camera_persons` when given.
std::pair<std::vector<int>, std::vector<int>> split_query_gallery(
    const Dataset& d, double query_fraction, std::uint64_t seed,
    std::vector<int>* excluded_single_camera_persons = nullptr);

void save_multi_labels(const MultiLabels& m, const std::string& path);
MultiLabels load_multi_labels(const std::string& path);

}  // namespace jvtc

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "jvtc/dataset.hpp"
#include "jvtc/similarity.hpp"
#include "jvtc/temporal_model.hpp"
#include "jvtc/types.hpp"

namespace jvtc {

enum class EvalMode { kVisual, kJoint };

inline const char* to_string(EvalMode m) { return m == EvalMode::kVisual ? "visual" : "joint"; }

struct EvalReport {
  double mean_ap = 0.0;
  std::vector<double> cmc;       // ranks 1, 5, 10, 20
  EvalMode mode = EvalMode::kVisual;
  std::vector<std::pair<int, double>> per_query_ap;  // (query sample_id, AP)
  Index queries_evaluated = 0;
  Index queries_excluded = 0;    // queries with no cross-camera relevant item
};

inline const std::vector<int>& cmc_ranks() {
  static const std::vector<int> ranks = {1, 5, 10, 20};
  return ranks;
}

struct EvalOptions {
  FusionParams fusion;
  int num_threads = 0;
};

/// Cross-camera retrieval evaluation. Gallery items sharing both person and
/// camera with the query are excluded from ranking; AP and CMC are computed
/// over the rest. Joint mode fuses the temporal consistency of every
/// query-gallery pair into the score.
EvalReport evaluate(const std::vector<int>& query_idx, const std::vector<int>& gallery_idx,
                    const Matrix& features, const std::vector<SampleMeta>& metas,
                    const TemporalModel* tm, EvalMode mode, const EvalOptions& opts = {});

/// Descending-score gallery ranking for one query, ties broken by ascending
/// sample id. top_k beyond the gallery size returns the full ranking.
std::vector<std::pair<int, Scalar>> rank_query(int query_idx,
                                               const std::vector<int>& gallery_idx,
                                               const Matrix& features,
                                               const std::vector<SampleMeta>& metas,
                                               const TemporalModel* tm, EvalMode mode,
                                               Index top_k, const EvalOptions& opts = {});

/// Aligned text table of labeled reports, one row per configuration.
std::string ablation_report(const std::vector<std::pair<std::string, EvalReport>>& rows);

void save_eval_report_csv(const EvalReport& r, const std::string& path);

}  // namespace jvtc

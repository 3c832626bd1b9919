#include "jvtc/evaluator.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "jvtc/parallel.hpp"

namespace jvtc {

namespace {

struct QueryOutcome {
  bool excluded = false;
  double ap = 0.0;
  std::vector<char> hit_at_rank;  // one flag per cmc rank cutoff
  int query_sample_id = 0;
};

Scalar pair_score(const Matrix& features, const std::vector<SampleMeta>& metas, int qi, int gi,
                  const TemporalModel* tm, EvalMode mode, const FusionParams& fusion) {
  const Scalar vs = visual_similarity(features, qi, gi);
  if (mode == EvalMode::kVisual) return vs;
  const Scalar ts = temporal_consistency(*tm, metas[static_cast<size_t>(qi)],
                                         metas[static_cast<size_t>(gi)]);
  return joint_similarity(vs, ts, fusion);
}

/// Ranked (gallery index, score) with the standard same-person-same-camera
/// exclusion applied; deterministic tie handling.
std::vector<std::pair<int, Scalar>> ranked_gallery(int query_idx,
                                                   const std::vector<int>& gallery_idx,
                                                   const Matrix& features,
                                                   const std::vector<SampleMeta>& metas,
                                                   const TemporalModel* tm, EvalMode mode,
                                                   const FusionParams& fusion) {
  const SampleMeta& q = metas[static_cast<size_t>(query_idx)];
  std::vector<std::pair<int, Scalar>> scored;
  scored.reserve(gallery_idx.size());
  for (int gi : gallery_idx) {
    const SampleMeta& g = metas[static_cast<size_t>(gi)];
    if (g.person_id == q.person_id && g.camera_id == q.camera_id) continue;
    scored.emplace_back(gi, pair_score(features, metas, query_idx, gi, tm, mode, fusion));
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return metas[static_cast<size_t>(a.first)].sample_id <
           metas[static_cast<size_t>(b.first)].sample_id;
  });
  return scored;
}

void check_eval_inputs(const std::vector<int>& query_idx, const std::vector<int>& gallery_idx,
                       const Matrix& features, const std::vector<SampleMeta>& metas,
                       const TemporalModel* tm, EvalMode mode) {
  if (mode == EvalMode::kJoint && tm == nullptr)
    throw ValidationError("evaluate: joint mode requires a temporal model");
  if (features.rows() != static_cast<Index>(metas.size()))
    throw ValidationError("evaluate: features and metas disagree on N");
  auto check_range = [&](const std::vector<int>& idx, const char* what) {
    for (int i : idx) {
      if (i < 0 || i >= static_cast<int>(metas.size()))
        throw ValidationError(std::string("evaluate: ") + what + " index out of range");
      if (metas[static_cast<size_t>(i)].person_id == kUnknownPersonId)
        throw ValidationError(std::string("evaluate: ") + what +
                              " contains a sample with unknown person id");
    }
  };
  check_range(query_idx, "query");
  check_range(gallery_idx, "gallery");
}

}  // namespace

EvalReport evaluate(const std::vector<int>& query_idx, const std::vector<int>& gallery_idx,
                    const Matrix& features, const std::vector<SampleMeta>& metas,
                    const TemporalModel* tm, EvalMode mode, const EvalOptions& opts) {
  check_eval_inputs(query_idx, gallery_idx, features, metas, tm, mode);
  const auto& ranks = cmc_ranks();

  std::vector<QueryOutcome> outcomes(query_idx.size());
  parallel_for(static_cast<Index>(query_idx.size()), opts.num_threads, [&](Index qslot) {
    const int qi = query_idx[static_cast<size_t>(qslot)];
    QueryOutcome& out = outcomes[static_cast<size_t>(qslot)];
    out.query_sample_id = metas[static_cast<size_t>(qi)].sample_id;
    const auto ranked =
        ranked_gallery(qi, gallery_idx, features, metas, tm, mode, opts.fusion);

    Index num_relevant = 0;
    for (const auto& [gi, score] : ranked)
      if (metas[static_cast<size_t>(gi)].person_id == metas[static_cast<size_t>(qi)].person_id)
        ++num_relevant;
    if (num_relevant == 0) {
      out.excluded = true;
      return;
    }

    Index hits = 0;
    double precision_sum = 0.0;
    Index first_hit_rank = -1;
    for (size_t r = 0; r < ranked.size(); ++r) {
      const bool relevant = metas[static_cast<size_t>(ranked[r].first)].person_id ==
                            metas[static_cast<size_t>(qi)].person_id;
      if (!relevant) continue;
      ++hits;
      precision_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
      if (first_hit_rank < 0) first_hit_rank = static_cast<Index>(r);
    }
    out.ap = precision_sum / static_cast<double>(num_relevant);
    out.hit_at_rank.resize(ranks.size());
    for (size_t k = 0; k < ranks.size(); ++k)
      out.hit_at_rank[k] = first_hit_rank < static_cast<Index>(ranks[k]) ? 1 : 0;
  });

  EvalReport report;
  report.mode = mode;
  report.cmc.assign(ranks.size(), 0.0);
  for (const auto& out : outcomes) {
    if (out.excluded) {
      ++report.queries_excluded;
      continue;
    }
    ++report.queries_evaluated;
    report.mean_ap += out.ap;
    report.per_query_ap.emplace_back(out.query_sample_id, out.ap);
    for (size_t k = 0; k < ranks.size(); ++k) report.cmc[k] += out.hit_at_rank[k];
  }
  if (report.queries_evaluated > 0) {
    report.mean_ap /= static_cast<double>(report.queries_evaluated);
    for (double& c : report.cmc) c /= static_cast<double>(report.queries_evaluated);
  }
  return report;
}

std::vector<std::pair<int, Scalar>> rank_query(int query_idx,
                                               const std::vector<int>& gallery_idx,
                                               const Matrix& features,
                                               const std::vector<SampleMeta>& metas,
                                               const TemporalModel* tm, EvalMode mode,
                                               Index top_k, const EvalOptions& opts) {
  check_eval_inputs({query_idx}, gallery_idx, features, metas, tm, mode);
  auto ranked = ranked_gallery(query_idx, gallery_idx, features, metas, tm, mode, opts.fusion);
  if (top_k >= 0 && static_cast<size_t>(top_k) < ranked.size())
    ranked.resize(static_cast<size_t>(top_k));
  // report stable sample ids rather than storage indices
  for (auto& [gi, score] : ranked) gi = metas[static_cast<size_t>(gi)].sample_id;
  return ranked;
}

std::string ablation_report(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  if (rows.empty()) throw ValidationError("ablation_report: need at least one row");
  const auto& ranks = cmc_ranks();
  size_t label_width = 6;
  for (const auto& [label, report] : rows) {
    if (report.cmc.size() != ranks.size())
      throw ValidationError("ablation_report: report '" + label + "' has " +
                            std::to_string(report.cmc.size()) + " CMC entries, expected " +
                            std::to_string(ranks.size()));
    label_width = std::max(label_width, label.size());
  }

  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(label_width) + 2) << "Method" << std::right;
  os << std::setw(8) << "mAP";
  for (int r : ranks) os << std::setw(8) << ("r" + std::to_string(r));
  os << "\n";
  os << std::string(label_width + 2 + 8 * (ranks.size() + 1), '-') << "\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& [label, report] : rows) {
    os << std::left << std::setw(static_cast<int>(label_width) + 2) << label << std::right;
    os << std::setw(8) << report.mean_ap;
    for (double c : report.cmc) os << std::setw(8) << c;
    os << "\n";
  }
  return os.str();
}

void save_eval_report_csv(const EvalReport& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for write: " + path);
  os << "mode,mAP";
  for (int k : cmc_ranks()) os << ",r" << k;
  os << ",queries_evaluated,queries_excluded\n";
  os << to_string(r.mode) << "," << std::setprecision(10) << r.mean_ap;
  for (double c : r.cmc) os << "," << c;
  os << "," << r.queries_evaluated << "," << r.queries_excluded << "\n";
  if (!os) throw ValidationError("write failed: " + path);
}

}  // namespace jvtc

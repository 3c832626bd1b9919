#include "jvtc/similarity.hpp"

#include "jvtc/parallel.hpp"

namespace jvtc {

namespace {

void check_capacity(Index n, Index cap) {
  if (n > cap)
    throw CapacityError("pairwise matrix of " + std::to_string(n) + " samples exceeds cap " +
                        std::to_string(cap) + "; raise max_samples to proceed");
}

}  // namespace

Matrix pairwise_joint(const Matrix& features, const std::vector<SampleMeta>& metas,
                      const TemporalModel& tm, const FusionParams& p,
                      const PairwiseOptions& opts) {
  p.validate();
  const Index n = features.rows();
  if (static_cast<Index>(metas.size()) != n)
    throw ValidationError("pairwise_joint: features and metas disagree on N");
  check_capacity(n, opts.max_samples);

  Matrix out(n, n);
  const Scalar diag = (opts.mode == PairwiseMode::kJoint)
                          ? joint_similarity(1.0, 1.0, p)
                          : joint_similarity_visual_only(1.0, p);
  parallel_for(n, opts.num_threads, [&](Index i) {
    out(i, i) = diag;
    for (Index j = 0; j < i; ++j) {
      const Scalar vs = visual_similarity(features, i, j);
      Scalar s;
      if (opts.mode == PairwiseMode::kJoint) {
        const Scalar ts = temporal_consistency(tm, metas[static_cast<size_t>(i)],
                                               metas[static_cast<size_t>(j)]);
        s = joint_similarity(vs, ts, p);
      } else {
        s = joint_similarity_visual_only(vs, p);
      }
      out(i, j) = s;
    }
  });
  // mirror below-diagonal entries so the matrix equals its transpose exactly
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j) out(j, i) = out(i, j);
  return out;
}

Matrix pairwise_joint_visual(const Matrix& features, const FusionParams& p,
                             const PairwiseOptions& opts) {
  PairwiseOptions o = opts;
  o.mode = PairwiseMode::kVisualFactorOnly;
  static const TemporalModel unused(1, BinSpec{});
  const std::vector<SampleMeta> metas(static_cast<size_t>(features.rows()));
  return pairwise_joint(features, metas, unused, p, o);
}

Matrix pairwise_visual(const Matrix& features, const PairwiseOptions& opts) {
  const Index n = features.rows();
  check_capacity(n, opts.max_samples);
  Matrix out(n, n);
  parallel_for(n, opts.num_threads, [&](Index i) {
    out(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) out(i, j) = visual_similarity(features, i, j);
  });
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j) out(j, i) = out(i, j);
  return out;
}

}  // namespace jvtc

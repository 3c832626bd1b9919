#pragma once

#include <cmath>
#include <vector>

#include "jvtc/dataset.hpp"
#include "jvtc/temporal_model.hpp"
#include "jvtc/types.hpp"

namespace jvtc {

/// Constants of the sigmoid fusion of visual and temporal similarity.
/// lambda_* scale the sigmoids, gamma_* sharpen them.
struct FusionParams {
  double lambda_vs = 1.0;
  double gamma_vs = 5.0;
  double lambda_ts = 2.0;
  double gamma_ts = 5.0;

  void validate() const {
    for (double v : {lambda_vs, gamma_vs, lambda_ts, gamma_ts})
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError("FusionParams: all factors must be positive and finite");
  }
};

/// Cosine of two unit-norm feature rows, clamped to [-1, 1].
template <class Derived>
Scalar visual_similarity(const Eigen::MatrixBase<Derived>& features, Index i, Index j) {
  const Scalar v = features.row(i).dot(features.row(j));
  return std::min<Scalar>(1.0, std::max<Scalar>(-1.0, v));
}

/// Sigmoid-smoothed product fusing visual and temporal similarity; strictly
/// increasing in both arguments, output in (0, 1).
inline Scalar joint_similarity(Scalar vs, Scalar ts, const FusionParams& p) {
  return 1.0 / (1.0 + p.lambda_vs * std::exp(-p.gamma_vs * vs)) *
         1.0 / (1.0 + p.lambda_ts * std::exp(-p.gamma_ts * ts));
}

/// Visual-only variant used wherever the temporal factor is switched off:
/// the second sigmoid is pinned to one instead of taking a numeric limit.
inline Scalar joint_similarity_visual_only(Scalar vs, const FusionParams& p) {
  return 1.0 / (1.0 + p.lambda_vs * std::exp(-p.gamma_vs * vs));
}

enum class PairwiseMode { kJoint, kVisualFactorOnly };

struct PairwiseOptions {
  PairwiseMode mode = PairwiseMode::kJoint;
  Index max_samples = 20000;  // refuse dense matrices beyond this
  int num_threads = 0;        // 0 = hardware concurrency
};

/// Dense symmetric matrix of fused similarities; the diagonal is pinned to
/// joint_similarity(1, 1) (resp. its visual-only analog), the maximum
/// attainable value. Row blocks fill in parallel; entries do not depend on
/// the schedule.
Matrix pairwise_joint(const Matrix& features, const std::vector<SampleMeta>& metas,
                      const TemporalModel& tm, const FusionParams& p,
                      const PairwiseOptions& opts = {});

/// Visual-factor-only counterpart of pairwise_joint (temporal factor := 1).
Matrix pairwise_joint_visual(const Matrix& features, const FusionParams& p,
                             const PairwiseOptions& opts = {});

/// Raw cosine Gram matrix of unit-norm rows; diagonal exactly 1.
Matrix pairwise_visual(const Matrix& features, const PairwiseOptions& opts = {});

}  // namespace jvtc

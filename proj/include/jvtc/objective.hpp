#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "jvtc/memory_bank.hpp"
#include "jvtc/synth_world.hpp"
#include "jvtc/types.hpp"

namespace jvtc {

/// Linear map followed by L2 normalization; the pluggable feature extractor
/// every loss differentiates through.
class Embedder {
 public:
  Embedder() = default;
  explicit Embedder(Matrix weight);
  static Embedder random_init(Index embed_dim, Index input_dim, std::uint64_t seed);

  Index embed_dim() const { return weight_.rows(); }
  Index input_dim() const { return weight_.cols(); }
  const Matrix& weight() const { return weight_; }
  Matrix& weight() { return weight_; }

  Vector embed(const Vector& raw) const;
  /// Embeds every row of raw (N x D_in) into unit-norm rows (N x d).
  Matrix embed_rows(const Matrix& raw) const;

  struct Forward {
    Vector unit;     // normalized output
    Scalar norm;     // pre-normalization length
  };
  Forward embed_cached(const Vector& raw) const;

  /// Chain rule through normalization and the linear map:
  /// accumulates d(loss)/d(weight) given d(loss)/d(unit output).
  void backprop(const Vector& raw, const Forward& fwd, const Vector& grad_unit,
                Matrix* grad_weight) const;

  void save(const std::string& path) const;
  static Embedder load(const std::string& path);

 private:
  Matrix weight_;  // d x D_in
};

/// Weights and temperatures of the combined objective.
struct LossWeights {
  Scalar w_local = 1.0;
  Scalar w_global = 0.2;
  Scalar beta_local = 0.1;   // batch-classifier softmax temperature
  Scalar beta_global = 0.05; // memory-bank softmax temperature

  void validate() const {
    if (w_local < 0.0 || w_global < 0.0)
      throw ValidationError("LossWeights: loss weights must be >= 0");
    if (!(beta_local > 0.0) || !(beta_global > 0.0))
      throw ValidationError("LossWeights: temperatures must be positive");
  }
};

/// A training batch of originals plus augmented duplicates, grouped so that
/// rows [i*(k+1), (i+1)*(k+1)) all belong to original i.
struct SacBatch {
  Matrix inputs;          // (n*(k+1)) x D_in raw features
  Index n_originals = 0;
  Index augments_per_item = 0;

  Index rows() const { return n_originals * (augments_per_item + 1); }
  Index class_of(Index row) const { return row / (augments_per_item + 1); }
  void validate() const;
};

/// Mean embedded feature of each original and its duplicates, row-normalized.
/// The result acts as the batch classifier and is constant under backprop.
Matrix build_sac_classifier(const SacBatch& batch, const Embedder& emb);

struct LossGrad {
  Scalar loss = 0.0;
  Matrix grad_weight;  // d(loss)/d(embedder weight)
};

/// One-hot cross-entropy of every batch row against its own group, scored by
/// the batch classifier under a temperature softmax.
LossGrad sac_loss(const SacBatch& batch, const Matrix& classifier, const Embedder& emb,
                  Scalar beta_local);

/// Multi-label cross-entropy of one sample against the memory bank.
LossGrad global_loss(const Vector& raw, const std::vector<int>& positives, const Embedder& emb,
                     const MemoryBank& bank, Scalar beta_global);

/// Batch version: mean of per-sample losses/gradients.
LossGrad global_loss_batch(const Matrix& raw_rows, const std::vector<const std::vector<int>*>& positives,
                           const Embedder& emb, const MemoryBank& bank, Scalar beta_global);

struct SrcLossGrad {
  Scalar loss = 0.0;
  Matrix grad_weight;
  Matrix grad_classifier;  // w.r.t. the raw (pre-normalization) classifier
};

/// Labeled-source cross-entropy over a learnable class matrix whose rows are
/// L2-normalized before scoring.
SrcLossGrad src_loss(const Matrix& raw_rows, const std::vector<int>& labels, const Embedder& emb,
                     const Matrix& classifier, Scalar beta);

/// Weighted total: src + w_local * local + w_global * global. Absent parts
/// contribute zero.
Scalar total_loss(std::optional<Scalar> src, std::optional<Scalar> local,
                  std::optional<Scalar> global, const LossWeights& w);

/// k feature-space duplicates of one sample: a random other-camera style
/// transfer plus Gaussian noise of the given strength. Deterministic in seed.
Matrix augment(const Vector& raw, int camera_id, int k, double noise_strength,
               std::uint64_t seed, const CameraStyleFamily& style);

}  // namespace jvtc

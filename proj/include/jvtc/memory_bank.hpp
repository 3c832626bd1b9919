#pragma once

#include <string>

#include "jvtc/types.hpp"

namespace jvtc {

/// Per-sample feature slots acting as an N-way cosine classifier. Slots are
/// kept at unit norm through every update so dot products stay true cosines.
class MemoryBank {
 public:
  MemoryBank() = default;

  /// Slots start as the row-normalized input features.
  static MemoryBank init(const Matrix& features);

  Index size() const { return slots_.rows(); }
  Index dim() const { return slots_.cols(); }
  const Matrix& slots() const { return slots_; }

  /// Update rate currently in force (set per epoch by the schedule).
  Scalar epoch_alpha() const { return epoch_alpha_; }
  void set_epoch_alpha(Scalar alpha);

  /// Exponential slot update, renormalized: slot <- unit((1-alpha)*slot + alpha*feature).
  /// An exactly cancelling update keeps the previous slot and counts as degenerate.
  void update(Index i, const Vector& unit_feature, Scalar alpha);
  /// Same, at the current epoch_alpha.
  void update(Index i, const Vector& unit_feature) { update(i, unit_feature, epoch_alpha_); }

  long long degenerate_updates() const { return degenerate_updates_; }

  void save(const std::string& path) const;
  static MemoryBank load(const std::string& path);

 private:
  Matrix slots_;
  Scalar epoch_alpha_ = 0.0;
  long long degenerate_updates_ = 0;
};

/// Bank update rate for a given epoch: grows linearly from 0 to 1.
Scalar alpha_schedule(int epoch, int total_epochs);

}  // namespace jvtc

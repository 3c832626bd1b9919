#include "jvtc/memory_bank.hpp"

#include "jvtc/matrix_io.hpp"

namespace jvtc {

MemoryBank MemoryBank::init(const Matrix& features) {
  if (!features.allFinite()) throw ValidationError("MemoryBank::init: non-finite feature");
  MemoryBank bank;
  bank.slots_ = row_normalized(features);
  return bank;
}

void MemoryBank::set_epoch_alpha(Scalar alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("MemoryBank::set_epoch_alpha: rate outside [0,1]");
  epoch_alpha_ = alpha;
}

void MemoryBank::update(Index i, const Vector& unit_feature, Scalar alpha) {
  if (i < 0 || i >= slots_.rows())
    throw ValidationError("MemoryBank::update: slot " + std::to_string(i) + " out of range");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("MemoryBank::update: alpha outside [0,1]");
  if (unit_feature.size() != slots_.cols())
    throw ValidationError("MemoryBank::update: feature dimension mismatch");
  const Vector blended =
      (1.0 - alpha) * slots_.row(i).transpose() + alpha * unit_feature;
  const Scalar norm = blended.norm();
  if (norm < 1e-12) {
    ++degenerate_updates_;  // exactly antipodal at alpha = 0.5; keep the old slot
    return;
  }
  slots_.row(i) = blended.transpose() / norm;
}

void MemoryBank::save(const std::string& path) const { save_matrix_f32(path, slots_); }

MemoryBank MemoryBank::load(const std::string& path) {
  // float32 storage perturbs norms in the last bits; renormalize on entry
  return init(load_matrix_f32(path));
}

Scalar alpha_schedule(int epoch, int total_epochs) {
  if (total_epochs < 1) throw ValidationError("alpha_schedule: total_epochs must be >= 1");
  if (epoch < 0 || epoch > total_epochs)
    throw ValidationError("alpha_schedule: epoch outside [0, total_epochs]");
  return static_cast<Scalar>(epoch) / static_cast<Scalar>(total_epochs);
}

}  // namespace jvtc

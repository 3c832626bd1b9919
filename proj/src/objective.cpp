#include "jvtc/objective.hpp"

#include <cmath>
#include <random>

#include "jvtc/matrix_io.hpp"

namespace jvtc {

Embedder::Embedder(Matrix weight) : weight_(std::move(weight)) {
  if (weight_.size() == 0) throw ValidationError("Embedder: empty weight");
  if (!weight_.allFinite()) throw ValidationError("Embedder: non-finite weight");
}

Embedder Embedder::random_init(Index embed_dim, Index input_dim, std::uint64_t seed) {
  if (embed_dim <= 0 || input_dim <= 0)
    throw ValidationError("Embedder: dimensions must be positive");
  std::mt19937_64 rng(substream_seed(seed, 0xE4Bu));
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  Matrix w(embed_dim, input_dim);
  for (Index i = 0; i < embed_dim; ++i)
    for (Index j = 0; j < input_dim; ++j)
      w(i, j) = gauss(rng) / std::sqrt(static_cast<Scalar>(input_dim));
  return Embedder(std::move(w));
}

Vector Embedder::embed(const Vector& raw) const { return embed_cached(raw).unit; }

Embedder::Forward Embedder::embed_cached(const Vector& raw) const {
  if (raw.size() != input_dim())
    throw ValidationError("Embedder: input dimension mismatch");
  Forward f;
  Vector pre = weight_ * raw;
  f.norm = pre.norm();
  if (!(f.norm > 0.0) || !std::isfinite(f.norm))
    throw ValidationError("Embedder: degenerate pre-normalization output");
  f.unit = pre / f.norm;
  return f;
}

Matrix Embedder::embed_rows(const Matrix& raw) const {
  Matrix out(raw.rows(), embed_dim());
  for (Index i = 0; i < raw.rows(); ++i)
    out.row(i) = embed(raw.row(i).transpose()).transpose();
  return out;
}

void Embedder::backprop(const Vector& raw, const Forward& fwd, const Vector& grad_unit,
                        Matrix* grad_weight) const {
  // f = u/|u|  =>  dL/du = (g - (f.g) f)/|u|
  const Vector grad_pre = (grad_unit - fwd.unit.dot(grad_unit) * fwd.unit) / fwd.norm;
  grad_weight->noalias() += grad_pre * raw.transpose();
}

void Embedder::save(const std::string& path) const { save_matrix_f32(path, weight_); }

Embedder Embedder::load(const std::string& path) { return Embedder(load_matrix_f32(path)); }

void SacBatch::validate() const {
  if (n_originals <= 0) throw ValidationError("SacBatch: empty batch");
  if (augments_per_item < 0) throw ValidationError("SacBatch: negative augment count");
  if (inputs.rows() != rows())
    throw ValidationError("SacBatch: expected " + std::to_string(rows()) + " rows, got " +
                          std::to_string(inputs.rows()));
  if (!inputs.allFinite()) throw ValidationError("SacBatch: non-finite input");
}

Matrix build_sac_classifier(const SacBatch& batch, const Embedder& emb) {
  batch.validate();
  const Index group = batch.augments_per_item + 1;
  Matrix v(batch.n_originals, emb.embed_dim());
  for (Index i = 0; i < batch.n_originals; ++i) {
    Vector mean = Vector::Zero(emb.embed_dim());
    for (Index r = i * group; r < (i + 1) * group; ++r)
      mean += emb.embed(batch.inputs.row(r).transpose());
    mean /= static_cast<Scalar>(group);
    const Scalar norm = mean.norm();
    if (!(norm > 0.0))
      throw ValidationError("build_sac_classifier: degenerate mean for item " + std::to_string(i));
    v.row(i) = mean.transpose() / norm;
  }
  return v;
}

namespace {

void check_finite_loss(Scalar loss, const char* what) {
  if (!std::isfinite(loss))
    throw ValidationError(std::string(what) + ": non-finite loss value");
}

}  // namespace

LossGrad sac_loss(const SacBatch& batch, const Matrix& classifier, const Embedder& emb,
                  Scalar beta_local) {
  batch.validate();
  if (!(beta_local > 0.0)) throw ValidationError("sac_loss: temperature must be positive");
  if (classifier.rows() != batch.n_originals || classifier.cols() != emb.embed_dim())
    throw ValidationError("sac_loss: classifier does not match batch");

  const Index total = batch.rows();
  LossGrad out;
  out.grad_weight = Matrix::Zero(emb.embed_dim(), emb.input_dim());
  const Scalar inv_total = 1.0 / static_cast<Scalar>(total);

  for (Index r = 0; r < total; ++r) {
    const Vector x = batch.inputs.row(r).transpose();
    const Embedder::Forward fwd = emb.embed_cached(x);
    const Vector scores = classifier * fwd.unit / beta_local;
    const Vector p = softmax(scores);
    const Index cls = batch.class_of(r);
    out.loss += -std::log(std::max<Scalar>(p(cls), 1e-300)) * inv_total;
    Vector dscore = p * inv_total;
    dscore(cls) -= inv_total;
    const Vector grad_unit = classifier.transpose() * dscore / beta_local;
    emb.backprop(x, fwd, grad_unit, &out.grad_weight);
  }
  check_finite_loss(out.loss, "sac_loss");
  return out;
}

LossGrad global_loss(const Vector& raw, const std::vector<int>& positives, const Embedder& emb,
                     const MemoryBank& bank, Scalar beta_global) {
  if (positives.empty())
    throw ValidationError("global_loss: every sample needs at least its self label");
  if (!(beta_global > 0.0)) throw ValidationError("global_loss: temperature must be positive");

  LossGrad out;
  out.grad_weight = Matrix::Zero(emb.embed_dim(), emb.input_dim());
  const Embedder::Forward fwd = emb.embed_cached(raw);
  const Vector scores = bank.slots() * fwd.unit / beta_global;
  const Vector p = softmax(scores);

  const Scalar inv_m = 1.0 / static_cast<Scalar>(positives.size());
  Vector target = Vector::Zero(bank.size());
  for (int j : positives) {
    if (j < 0 || j >= bank.size())
      throw ValidationError("global_loss: positive index out of bank range");
    out.loss += -std::log(std::max<Scalar>(p(j), 1e-300)) * inv_m;
    target(j) = inv_m;
  }
  const Vector dscore = p - target;
  const Vector grad_unit = bank.slots().transpose() * dscore / beta_global;
  emb.backprop(raw, fwd, grad_unit, &out.grad_weight);
  check_finite_loss(out.loss, "global_loss");
  return out;
}

LossGrad global_loss_batch(const Matrix& raw_rows,
                           const std::vector<const std::vector<int>*>& positives,
                           const Embedder& emb, const MemoryBank& bank, Scalar beta_global) {
  if (raw_rows.rows() == 0) throw ValidationError("global_loss_batch: empty batch");
  if (static_cast<Index>(positives.size()) != raw_rows.rows())
    throw ValidationError("global_loss_batch: one positive set per row required");
  LossGrad out;
  out.grad_weight = Matrix::Zero(emb.embed_dim(), emb.input_dim());
  const Scalar inv_n = 1.0 / static_cast<Scalar>(raw_rows.rows());
  for (Index r = 0; r < raw_rows.rows(); ++r) {
    const LossGrad one =
        global_loss(raw_rows.row(r).transpose(), *positives[static_cast<size_t>(r)], emb, bank,
                    beta_global);
    out.loss += one.loss * inv_n;
    out.grad_weight += one.grad_weight * inv_n;
  }
  return out;
}

SrcLossGrad src_loss(const Matrix& raw_rows, const std::vector<int>& labels, const Embedder& emb,
                     const Matrix& classifier, Scalar beta) {
  if (raw_rows.rows() == 0) throw ValidationError("src_loss: empty batch");
  if (static_cast<Index>(labels.size()) != raw_rows.rows())
    throw ValidationError("src_loss: one label per row required");
  if (!(beta > 0.0)) throw ValidationError("src_loss: temperature must be positive");
  const Index num_classes = classifier.rows();
  for (int y : labels)
    if (y < 0 || y >= num_classes)
      throw ValidationError("src_loss: class index " + std::to_string(y) + " out of range");

  // classifier rows are normalized before scoring; gradients flow through it
  Matrix unit_rows(classifier.rows(), classifier.cols());
  Vector row_norms(classifier.rows());
  for (Index r = 0; r < classifier.rows(); ++r) {
    row_norms(r) = classifier.row(r).norm();
    if (!(row_norms(r) > 0.0)) throw ValidationError("src_loss: zero classifier row");
    unit_rows.row(r) = classifier.row(r) / row_norms(r);
  }

  SrcLossGrad out;
  out.grad_weight = Matrix::Zero(emb.embed_dim(), emb.input_dim());
  Matrix grad_unit_rows = Matrix::Zero(classifier.rows(), classifier.cols());
  const Scalar inv_n = 1.0 / static_cast<Scalar>(raw_rows.rows());

  for (Index r = 0; r < raw_rows.rows(); ++r) {
    const Vector x = raw_rows.row(r).transpose();
    const Embedder::Forward fwd = emb.embed_cached(x);
    const Vector p = softmax((unit_rows * fwd.unit / beta).eval());
    const int y = labels[static_cast<size_t>(r)];
    out.loss += -std::log(std::max<Scalar>(p(y), 1e-300)) * inv_n;
    Vector dscore = p * inv_n;
    dscore(y) -= inv_n;
    emb.backprop(x, fwd, unit_rows.transpose() * dscore / beta, &out.grad_weight);
    grad_unit_rows.noalias() += dscore / beta * fwd.unit.transpose();
  }

  out.grad_classifier = Matrix::Zero(classifier.rows(), classifier.cols());
  for (Index r = 0; r < classifier.rows(); ++r) {
    const Vector g = grad_unit_rows.row(r).transpose();
    const Vector u = unit_rows.row(r).transpose();
    out.grad_classifier.row(r) = ((g - u.dot(g) * u) / row_norms(r)).transpose();
  }
  check_finite_loss(out.loss, "src_loss");
  return out;
}

Scalar total_loss(std::optional<Scalar> src, std::optional<Scalar> local,
                  std::optional<Scalar> global, const LossWeights& w) {
  w.validate();
  for (const auto& part : {src, local, global})
    if (part && !std::isfinite(*part)) throw ValidationError("total_loss: non-finite part");
  return src.value_or(0.0) + w.w_local * local.value_or(0.0) + w.w_global * global.value_or(0.0);
}

Matrix augment(const Vector& raw, int camera_id, int k, double noise_strength,
               std::uint64_t seed, const CameraStyleFamily& style) {
  if (k < 0) throw ValidationError("augment: k must be >= 0");
  const Index dim = raw.size();
  Matrix out(k, dim);
  if (k == 0) return out;
  const int cameras = style.num_cameras();
  std::mt19937_64 rng(substream_seed(seed, 0xAu, static_cast<std::uint64_t>(camera_id)));
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  const Scalar noise_scale = noise_strength / std::sqrt(static_cast<Scalar>(dim));
  for (int j = 0; j < k; ++j) {
    int target = camera_id;
    if (cameras > 1) {
      std::uniform_int_distribution<int> pick(0, cameras - 2);
      const int other = pick(rng);
      target = other >= camera_id ? other + 1 : other;
    }
    Vector styled = style.transfer(raw, camera_id, target);
    for (Index c = 0; c < dim; ++c) styled(c) += noise_scale * gauss(rng);
    out.row(j) = styled.transpose();
  }
  return out;
}

}  // namespace jvtc

#include "jvtc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

namespace jvtc {

void TrainConfig::validate() const {
  if (total_epochs < 1) throw ValidationError("TrainConfig: total_epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("TrainConfig: learning_rate must be > 0");
  if (batch_originals < 1) throw ValidationError("TrainConfig: batch_originals must be >= 1");
  if (augments_per_item < 0) throw ValidationError("TrainConfig: augments_per_item must be >= 0");
  if (label_refresh_period < 1)
    throw ValidationError("TrainConfig: label_refresh_period must be >= 1");
  for (int e : {global_loss_start_epoch, joint_similarity_start_epoch, lr_decay_epoch})
    if (e < 0 || e > total_epochs)
      throw ValidationError("TrainConfig: schedule epochs must lie in [0, total_epochs]");
  if (embed_dim < 1) throw ValidationError("TrainConfig: embed_dim must be >= 1");
  loss_weights.validate();
  fusion.validate();
  binning.validate();
  if (!(dbscan_eps > 0.0 && dbscan_eps < 1.0))
    throw ValidationError("TrainConfig: dbscan_eps must lie in (0,1)");
  if (dbscan_min_pts < 1) throw ValidationError("TrainConfig: dbscan_min_pts must be >= 1");
}

void TrainConfig::scale_schedule_to_total() {
  const double f = static_cast<double>(total_epochs) / 100.0;
  auto scaled = [&](int paper_value, int floor_value) {
    return std::max(floor_value, static_cast<int>(std::lround(paper_value * f)));
  };
  label_refresh_period = scaled(5, 1);
  global_loss_start_epoch = std::min(total_epochs, scaled(10, 0));
  joint_similarity_start_epoch = std::min(total_epochs, scaled(30, 0));
  lr_decay_epoch = std::min(total_epochs, scaled(40, 1));
}

TrainConfig TrainConfig::from_kv(const KeyValueConfig& kv) {
  TrainConfig c;
  c.total_epochs = static_cast<int>(kv.get_int("total_epochs", c.total_epochs));
  if (kv.get_bool("scale_schedule", false)) c.scale_schedule_to_total();
  c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
  c.lr_decay_epoch = static_cast<int>(kv.get_int("lr_decay_epoch", c.lr_decay_epoch));
  c.lr_decay_factor = kv.get_double("lr_decay_factor", c.lr_decay_factor);
  c.batch_originals = static_cast<int>(kv.get_int("batch_originals", c.batch_originals));
  c.augments_per_item = static_cast<int>(kv.get_int("augments_per_item", c.augments_per_item));
  c.label_refresh_period =
      static_cast<int>(kv.get_int("label_refresh_period", c.label_refresh_period));
  c.global_loss_start_epoch =
      static_cast<int>(kv.get_int("global_loss_start_epoch", c.global_loss_start_epoch));
  c.joint_similarity_start_epoch = static_cast<int>(
      kv.get_int("joint_similarity_start_epoch", c.joint_similarity_start_epoch));
  c.loss_weights.w_local = kv.get_double("w_local", c.loss_weights.w_local);
  c.loss_weights.w_global = kv.get_double("w_global", c.loss_weights.w_global);
  c.loss_weights.beta_local = kv.get_double("beta_local", c.loss_weights.beta_local);
  c.loss_weights.beta_global = kv.get_double("beta_global", c.loss_weights.beta_global);
  c.src_beta = kv.get_double("src_beta", c.src_beta);
  c.fusion.lambda_vs = kv.get_double("lambda_vs", c.fusion.lambda_vs);
  c.fusion.gamma_vs = kv.get_double("gamma_vs", c.fusion.gamma_vs);
  c.fusion.lambda_ts = kv.get_double("lambda_ts", c.fusion.lambda_ts);
  c.fusion.gamma_ts = kv.get_double("gamma_ts", c.fusion.gamma_ts);
  c.dbscan_eps = kv.get_double("dbscan_eps", c.dbscan_eps);
  c.dbscan_min_pts = static_cast<int>(kv.get_int("dbscan_min_pts", c.dbscan_min_pts));
  c.binning.bin_width = kv.get_double("bin_width", c.binning.bin_width);
  c.binning.max_interval = kv.get_double("max_interval", c.binning.max_interval);
  c.smoothing_sigma = kv.get_double("smoothing_sigma", c.smoothing_sigma);
  c.max_normalize_ts = kv.get_bool("max_normalize_ts", c.max_normalize_ts);
  c.intra_neutral_ts = kv.get_bool("intra_neutral_ts", c.intra_neutral_ts);
  c.use_sac = kv.get_bool("use_sac", c.use_sac);
  c.use_mtc = kv.get_bool("use_mtc", c.use_mtc);
  c.use_temporal_in_cluster = kv.get_bool("use_temporal_in_cluster", c.use_temporal_in_cluster);
  c.use_src = kv.get_bool("use_src", c.use_src);
  c.embed_dim = static_cast<int>(kv.get_int("embed_dim", c.embed_dim));
  c.augment_style_strength = kv.get_double("augment_style_strength", c.augment_style_strength);
  c.augment_noise_strength = kv.get_double("augment_noise_strength", c.augment_noise_strength);
  if (kv.has("augment_style_seed"))
    c.augment_style_seed = static_cast<std::uint64_t>(kv.get_int("augment_style_seed", 0));
  c.max_pairwise = kv.get_int("max_pairwise", c.max_pairwise);
  c.num_threads = static_cast<int>(kv.get_int("num_threads", c.num_threads));
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  c.validate();
  return c;
}

std::vector<int> batch_sampler(Index population, Index count, std::uint64_t seed, int epoch,
                               int iteration) {
  if (count > population)
    throw ValidationError("batch_sampler: batch size " + std::to_string(count) +
                          " exceeds population " + std::to_string(population));
  std::vector<int> pool(static_cast<size_t>(population));
  std::iota(pool.begin(), pool.end(), 0);
  std::mt19937_64 rng(substream_seed(seed, 0xBA7C4u, static_cast<std::uint64_t>(epoch),
                                     static_cast<std::uint64_t>(iteration)));
  // partial Fisher-Yates: the first `count` slots become the batch
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, population - 1);
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(pick(rng))]);
  }
  pool.resize(static_cast<size_t>(count));
  return pool;
}

namespace {

struct SourceState {
  Matrix classifier;            // num_classes x d, learnable
  std::vector<int> class_of;    // per source sample
  int num_classes = 0;
};

SourceState init_source_state(const Dataset& source, const Embedder& emb) {
  if (!source.has_known_ids())
    throw ValidationError("train: source dataset must have known person ids");
  SourceState s;
  std::map<int, int> class_index;
  s.class_of.resize(static_cast<size_t>(source.size()));
  for (Index i = 0; i < source.size(); ++i) {
    const int pid = source.metas[static_cast<size_t>(i)].person_id;
    const auto [it, inserted] = class_index.try_emplace(pid, static_cast<int>(class_index.size()));
    s.class_of[static_cast<size_t>(i)] = it->second;
  }
  s.num_classes = static_cast<int>(class_index.size());

  // classifier rows start as embedded class means, mirroring the bank init
  Matrix sums = Matrix::Zero(s.num_classes, emb.embed_dim());
  std::vector<int> counts(static_cast<size_t>(s.num_classes), 0);
  for (Index i = 0; i < source.size(); ++i) {
    const int c = s.class_of[static_cast<size_t>(i)];
    sums.row(c) += emb.embed(source.features.raw.row(i).transpose()).transpose();
    ++counts[static_cast<size_t>(c)];
  }
  for (int c = 0; c < s.num_classes; ++c) sums.row(c) /= static_cast<Scalar>(counts[static_cast<size_t>(c)]);
  s.classifier = row_normalized(sums);
  return s;
}

}  // namespace

TrainResult train(const Dataset& target, const Dataset* source, const TrainConfig& cfg) {
  cfg.validate();
  target.validate();
  if (cfg.use_src && source == nullptr)
    throw ValidationError("train: use_src set but no source dataset given");
  if (source) source->validate();
  const Index n_target = target.size();
  if (cfg.batch_originals > n_target)
    throw ValidationError("train: batch_originals exceeds target size");

  TrainResult result;
  result.embedder = initial_embedder(cfg, target.features.raw.cols());
  Embedder& emb = result.embedder;
  result.bank = MemoryBank::init(emb.embed_rows(target.features.raw));

  const std::uint64_t style_seed =
      cfg.augment_style_seed.value_or(substream_seed(cfg.seed, 0xA6u));
  const CameraStyleFamily augment_style =
      CameraStyleFamily::generate(target.num_cameras, static_cast<int>(target.features.raw.cols()),
                                  cfg.augment_style_strength, style_seed);

  SourceState src_state;
  if (cfg.use_src) src_state = init_source_state(*source, emb);

  const bool know_ids = target.has_known_ids();
  const std::vector<int> true_ids = target.person_ids();

  PairwiseOptions pw;
  pw.max_samples = cfg.max_pairwise;
  pw.num_threads = cfg.num_threads;

  std::optional<ClusterAssignment> assignment;
  std::optional<MultiLabels> labels;
  std::optional<TemporalModel> temporal;
  double current_purity = -1.0;
  bool last_cluster_joint = false;

  auto estimate_temporal = [&](const ClusterAssignment& a) {
    TemporalModel raw = estimate_histograms(target.metas, a.cluster_ids, cfg.binning);
    TemporalModel smoothed = smooth(raw, cfg.smoothing_sigma);
    smoothed.set_max_normalize(cfg.max_normalize_ts);
    smoothed.set_intra_neutral(cfg.intra_neutral_ts);
    return smoothed;
  };

  auto refresh_labels = [&](int epoch) {
    // the previous assignment drives this round's temporal estimate, as the
    // bootstrap prescribes: visual clusters first, temporal model after
    if (assignment) temporal = estimate_temporal(*assignment);
    const bool joint = cfg.use_temporal_in_cluster && temporal.has_value() &&
                       epoch >= cfg.joint_similarity_start_epoch;
    const Matrix sim = joint
                           ? pairwise_joint(result.bank.slots(), target.metas, *temporal,
                                            cfg.fusion, pw)
                           : pairwise_joint_visual(result.bank.slots(), cfg.fusion, pw);
    assignment = dbscan(sim, cfg.dbscan_eps, cfg.dbscan_min_pts);
    labels = labels_from_clusters(*assignment);
    if (!temporal) temporal = estimate_temporal(*assignment);
    last_cluster_joint = joint;
    if (know_ids) current_purity = purity(*assignment, true_ids).value;
  };

  const int iterations = std::max<Index>(1, n_target / cfg.batch_originals);
  const Index group = cfg.augments_per_item + 1;

  for (int epoch = 0; epoch < cfg.total_epochs; ++epoch) {
    EpochLog log_row;
    log_row.epoch = epoch;
    const double lr = epoch >= cfg.lr_decay_epoch ? cfg.learning_rate * cfg.lr_decay_factor
                                                  : cfg.learning_rate;
    const Scalar alpha = alpha_schedule(epoch, cfg.total_epochs);
    result.bank.set_epoch_alpha(alpha);
    log_row.alpha = alpha;

    if (cfg.use_mtc && epoch % cfg.label_refresh_period == 0) {
      refresh_labels(epoch);
      log_row.refreshed = true;
    }
    log_row.joint_cluster = last_cluster_joint;
    log_row.num_clusters = assignment ? assignment->num_clusters : 0;
    log_row.purity = current_purity;

    double sum_src = 0.0, sum_local = 0.0, sum_global = 0.0;
    auto run_iteration = [&](int iter) {
      const std::vector<int> batch_idx =
          batch_sampler(n_target, cfg.batch_originals, cfg.seed, epoch, iter);

      SacBatch batch;
      batch.n_originals = cfg.batch_originals;
      batch.augments_per_item = cfg.augments_per_item;
      batch.inputs.resize(batch.rows(), target.features.raw.cols());
      for (Index b = 0; b < cfg.batch_originals; ++b) {
        const int idx = batch_idx[static_cast<size_t>(b)];
        const Vector raw = target.features.raw.row(idx).transpose();
        batch.inputs.row(b * group) = raw.transpose();
        if (cfg.augments_per_item > 0) {
          const Matrix dup = augment(
              raw, target.metas[static_cast<size_t>(idx)].camera_id, cfg.augments_per_item,
              cfg.augment_noise_strength,
              substream_seed(cfg.seed, static_cast<std::uint64_t>(epoch) * 1000003ULL +
                                           static_cast<std::uint64_t>(iter),
                             static_cast<std::uint64_t>(idx)),
              augment_style);
          batch.inputs.block(b * group + 1, 0, cfg.augments_per_item, raw.size()) = dup;
        }
      }

      // group means double as the batch classifier and as the bank update
      // features (the bank absorbs augmented views, not the raw original)
      const Matrix group_means = build_sac_classifier(batch, emb);

      Matrix grad = Matrix::Zero(emb.embed_dim(), emb.input_dim());
      Matrix src_grad;
      if (cfg.use_sac) {
        const LossGrad local = sac_loss(batch, group_means, emb, cfg.loss_weights.beta_local);
        sum_local += local.loss;
        grad += cfg.loss_weights.w_local * local.grad_weight;
      }
      if (cfg.use_mtc && epoch >= cfg.global_loss_start_epoch && labels.has_value()) {
        Matrix originals(cfg.batch_originals, target.features.raw.cols());
        std::vector<const std::vector<int>*> pos(static_cast<size_t>(cfg.batch_originals));
        for (Index b = 0; b < cfg.batch_originals; ++b) {
          originals.row(b) = target.features.raw.row(batch_idx[static_cast<size_t>(b)]);
          pos[static_cast<size_t>(b)] =
              &labels->positives[static_cast<size_t>(batch_idx[static_cast<size_t>(b)])];
        }
        const LossGrad global =
            global_loss_batch(originals, pos, emb, result.bank, cfg.loss_weights.beta_global);
        sum_global += global.loss;
        grad += cfg.loss_weights.w_global * global.grad_weight;
      }
      if (cfg.use_src) {
        const std::vector<int> src_idx =
            batch_sampler(source->size(), std::min<Index>(cfg.batch_originals, source->size()),
                          substream_seed(cfg.seed, 0x50CEu), epoch, iter);
        Matrix rows(static_cast<Index>(src_idx.size()), source->features.raw.cols());
        std::vector<int> ys(src_idx.size());
        for (size_t b = 0; b < src_idx.size(); ++b) {
          rows.row(static_cast<Index>(b)) = source->features.raw.row(src_idx[b]);
          ys[b] = src_state.class_of[static_cast<size_t>(src_idx[b])];
        }
        const SrcLossGrad src = src_loss(rows, ys, emb, src_state.classifier, cfg.src_beta);
        sum_src += src.loss;
        grad += src.grad_weight;
        src_grad = src.grad_classifier;
      }

      if (!grad.allFinite() || !std::isfinite(sum_src + sum_local + sum_global))
        throw ValidationError("diverged (non-finite loss or gradient)");
      emb.weight() -= lr * grad;
      if (src_grad.size() > 0) src_state.classifier -= lr * src_grad;

      for (Index b = 0; b < cfg.batch_originals; ++b)
        result.bank.update(batch_idx[static_cast<size_t>(b)], group_means.row(b).transpose());
    };
    for (int iter = 0; iter < iterations; ++iter) {
      try {
        run_iteration(iter);
      } catch (const ValidationError& e) {
        throw ValidationError("train: " + std::string(e.what()) + " at epoch " +
                              std::to_string(epoch) + " iteration " + std::to_string(iter));
      }
    }

    log_row.loss_src = sum_src / iterations;
    log_row.loss_local = sum_local / iterations;
    log_row.loss_global = sum_global / iterations;
    result.log.push_back(log_row);
  }

  if (!assignment) {
    // SAC-only runs never cluster; fall back to singleton labels so the
    // returned artifacts stay well-formed
    ClusterAssignment singletons;
    singletons.cluster_ids.assign(static_cast<size_t>(n_target), kNoise);
    singletons.core.assign(static_cast<size_t>(n_target), false);
    singletons.num_clusters = 0;
    assignment = std::move(singletons);
    labels = labels_from_clusters(*assignment);
  }
  result.final_assignment = *assignment;
  result.final_labels = *labels;
  result.temporal = estimate_temporal(*assignment);
  if (cfg.use_src) result.source_classifier = src_state.classifier;
  return result;
}

Embedder initial_embedder(const TrainConfig& cfg, Index input_dim) {
  return Embedder::random_init(cfg.embed_dim, input_dim, substream_seed(cfg.seed, 0x1417u));
}

void save_training_log(const std::vector<EpochLog>& log, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for write: " + path);
  os << "epoch,L_src,L_local,L_global,purity,num_clusters,alpha\n";
  os.precision(10);
  for (const auto& row : log)
    os << row.epoch << "," << row.loss_src << "," << row.loss_local << "," << row.loss_global
       << "," << row.purity << "," << row.num_clusters << "," << row.alpha << "\n";
  if (!os) throw ValidationError("write failed: " + path);
}

}  // namespace jvtc

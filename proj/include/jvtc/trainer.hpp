#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jvtc/config.hpp"
#include "jvtc/dataset.hpp"
#include "jvtc/label_engine.hpp"
#include "jvtc/memory_bank.hpp"
#include "jvtc/objective.hpp"
#include "jvtc/similarity.hpp"
#include "jvtc/temporal_model.hpp"
#include "jvtc/types.hpp"

namespace jvtc {

struct TrainConfig {
  int total_epochs = 100;
  double learning_rate = 0.01;
  int lr_decay_epoch = 40;
  double lr_decay_factor = 0.1;
  int batch_originals = 32;   // originals per target batch
  int augments_per_item = 3;  // duplicates per original
  int label_refresh_period = 5;
  int global_loss_start_epoch = 10;
  int joint_similarity_start_epoch = 30;

  LossWeights loss_weights;
  Scalar src_beta = 1.0;
  FusionParams fusion;
  double dbscan_eps = 0.6;
  int dbscan_min_pts = 4;
  BinSpec binning;
  double smoothing_sigma = 100.0;
  bool max_normalize_ts = true;
  bool intra_neutral_ts = false;  // neutral 0.5 for same-camera pairs

  bool use_sac = true;
  bool use_mtc = true;
  bool use_temporal_in_cluster = true;
  bool use_src = false;

  int embed_dim = 32;
  double augment_style_strength = 0.5;
  double augment_noise_strength = 0.05;
  // style family behind augment(); stands in for style-transfer models fitted
  // to the camera network. Defaults to a stream of the training seed.
  std::optional<std::uint64_t> augment_style_seed;
  Index max_pairwise = 20000;
  int num_threads = 1;
  std::uint64_t seed = 0;

  void validate() const;

  /// Desk-scale preset: rescales the schedule constants (refresh period,
  /// global/joint start, lr decay) by total_epochs/100, rounded, floor 1
  /// where a period must stay positive.
  void scale_schedule_to_total();

  static TrainConfig from_kv(const KeyValueConfig& kv);
};

struct EpochLog {
  int epoch = 0;
  double loss_src = 0.0;
  double loss_local = 0.0;
  double loss_global = 0.0;
  double purity = -1.0;  // -1 when ground-truth identities are unknown
  int num_clusters = 0;
  double alpha = 0.0;
  bool refreshed = false;
  bool joint_cluster = false;
};

struct TrainResult {
  Embedder embedder;
  MemoryBank bank;
  TemporalModel temporal;  // estimated from the final cluster labels
  ClusterAssignment final_assignment;
  MultiLabels final_labels;
  Matrix source_classifier;  // empty when no source is configured
  std::vector<EpochLog> log;
};

/// Full schedule: periodic label refresh (clustering on bank features,
/// visual-only before the joint start epoch), per-iteration SAC/global/source
/// losses with plain gradient descent, per-iteration bank updates under the
/// linear alpha schedule. Deterministic given the config seed.
TrainResult train(const Dataset& target, const Dataset* source, const TrainConfig& cfg);

/// The embedder exactly as train() initializes it, before any step.
Embedder initial_embedder(const TrainConfig& cfg, Index input_dim);

/// Uniform sample of `count` distinct indices from [0, population);
/// deterministic in (seed, epoch, iteration).
std::vector<int> batch_sampler(Index population, Index count, std::uint64_t seed, int epoch,
                               int iteration);

void save_training_log(const std::vector<EpochLog>& log, const std::string& path);

}  // namespace jvtc

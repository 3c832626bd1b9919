#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "jvtc/synth_world.hpp"
#include "jvtc/trainer.hpp"

using namespace jvtc;

namespace {

Dataset small_world(int persons, std::uint64_t seed, double style = 0.5) {
  WorldConfig cfg;
  cfg.num_persons = persons;
  cfg.num_cameras = 3;
  cfg.images_per_person_per_camera = 3;
  cfg.feature_dim = 16;
  cfg.appearance_spread = 0.25;
  cfg.twin_fraction = 0.2;
  cfg.camera_style_strength = style;
  cfg.seed = seed;
  Vector offsets(3), jitters(3);
  offsets << 600.0, 0.0, -400.0;
  jitters << 40.0, 40.0, 40.0;
  cfg.set_camera_times(offsets, jitters);
  return generate_world(cfg).first;
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.total_epochs = 6;
  cfg.batch_originals = 8;
  cfg.augments_per_item = 2;
  cfg.label_refresh_period = 2;
  cfg.global_loss_start_epoch = 2;
  cfg.joint_similarity_start_epoch = 4;
  cfg.lr_decay_epoch = 5;
  cfg.embed_dim = 12;
  cfg.dbscan_eps = 0.35;
  cfg.dbscan_min_pts = 3;
  cfg.binning.bin_width = 100.0;
  cfg.binning.max_interval = 2000.0;
  cfg.smoothing_sigma = 100.0;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("batch sampler: full-population batch is a permutation") {
  const auto batch = batch_sampler(10, 10, 3, 0, 0);
  std::set<int> seen(batch.begin(), batch.end());
  CHECK(seen.size() == 10);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 9);
}

TEST_CASE("batch sampler is deterministic per (seed, epoch, iteration)") {
  CHECK(batch_sampler(100, 16, 5, 2, 3) == batch_sampler(100, 16, 5, 2, 3));
  CHECK(batch_sampler(100, 16, 5, 2, 3) != batch_sampler(100, 16, 5, 2, 4));
  CHECK(batch_sampler(100, 16, 5, 3, 3) != batch_sampler(100, 16, 5, 2, 3));
  CHECK(batch_sampler(100, 16, 6, 2, 3) != batch_sampler(100, 16, 5, 2, 3));
}

TEST_CASE("batch sampler draws each index uniformly (3-sigma band)") {
  const Index population = 20;
  const Index count = 5;
  const int draws = 10000;
  std::vector<int> freq(population, 0);
  for (int d = 0; d < draws; ++d)
    for (int idx : batch_sampler(population, count, 99, d / 100, d % 100)) ++freq[idx];
  const double expected = static_cast<double>(draws) * count / population;
  const double p = static_cast<double>(count) / population;
  const double sigma = std::sqrt(draws * p * (1.0 - p));
  for (int idx = 0; idx < population; ++idx)
    CHECK(std::abs(freq[idx] - expected) < 3.0 * sigma);
}

TEST_CASE("batch sampler rejects oversized batches") {
  CHECK_THROWS_AS(batch_sampler(5, 6, 0, 0, 0), ValidationError);
}

TEST_CASE("sac-only mode never clusters and never computes the global loss") {
  const Dataset data = small_world(8, 21);
  TrainConfig cfg = quick_config();
  cfg.use_sac = true;
  cfg.use_mtc = false;
  const TrainResult r = train(data, nullptr, cfg);
  for (const auto& row : r.log) {
    CHECK(row.loss_global == 0.0);
    CHECK(row.num_clusters == 0);
    CHECK(!row.refreshed);
    CHECK(row.loss_local > 0.0);
  }
  // singleton fallback labels still satisfy the invariants
  CHECK_NOTHROW(r.final_labels.validate());
}

TEST_CASE("schedule gating is exact for the global loss and the joint switch") {
  const Dataset data = small_world(8, 22);
  TrainConfig cfg = quick_config();
  cfg.use_sac = false;  // isolates the global loss in the log
  const TrainResult r = train(data, nullptr, cfg);
  for (const auto& row : r.log) {
    if (row.epoch < cfg.global_loss_start_epoch)
      CHECK(row.loss_global == 0.0);
    else
      CHECK(row.loss_global > 0.0);
    // clustering mode follows the most recent refresh
    const int last_refresh =
        (row.epoch / cfg.label_refresh_period) * cfg.label_refresh_period;
    CHECK(row.joint_cluster == (last_refresh >= cfg.joint_similarity_start_epoch));
  }
  // refresh epochs are exactly the multiples of the period
  for (const auto& row : r.log)
    CHECK(row.refreshed == (row.epoch % cfg.label_refresh_period == 0));
}

TEST_CASE("baseline mode clusters on visual similarity for the whole run") {
  const Dataset data = small_world(8, 23);
  TrainConfig cfg = quick_config();
  cfg.use_sac = false;
  cfg.use_temporal_in_cluster = false;
  const TrainResult r = train(data, nullptr, cfg);
  for (const auto& row : r.log) {
    CHECK(!row.joint_cluster);
    CHECK(row.loss_local == 0.0);
  }
}

TEST_CASE("divergence aborts with the offending epoch and iteration") {
  const Dataset data = small_world(6, 29);
  TrainConfig cfg = quick_config();
  cfg.learning_rate = 1e300;  // drives the weight norm past the double range
  CHECK_THROWS_WITH_AS(train(data, nullptr, cfg), doctest::Contains("epoch"), ValidationError);
}

TEST_CASE("training twice with one seed is bit-identical; seeds differ") {
  const Dataset data = small_world(8, 24);
  const TrainConfig cfg = quick_config();
  const TrainResult a = train(data, nullptr, cfg);
  const TrainResult b = train(data, nullptr, cfg);
  CHECK(a.embedder.weight() == b.embedder.weight());
  CHECK(a.bank.slots() == b.bank.slots());
  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].loss_local == b.log[i].loss_local);
    CHECK(a.log[i].loss_global == b.log[i].loss_global);
  }

  TrainConfig other = cfg;
  other.seed = cfg.seed + 1;
  const TrainResult c = train(data, nullptr, other);
  CHECK(a.embedder.weight() != c.embedder.weight());
}

TEST_CASE("thread count does not change the result") {
  const Dataset data = small_world(8, 25);
  TrainConfig cfg = quick_config();
  cfg.num_threads = 1;
  const TrainResult a = train(data, nullptr, cfg);
  cfg.num_threads = 8;
  const TrainResult b = train(data, nullptr, cfg);
  CHECK(a.embedder.weight() == b.embedder.weight());
  CHECK(a.bank.slots() == b.bank.slots());
}

TEST_CASE("desk-scale run improves clustering purity") {
  const Dataset data = small_world(16, 27, 0.6);
  TrainConfig cfg = quick_config();
  cfg.total_epochs = 12;
  cfg.label_refresh_period = 2;
  cfg.global_loss_start_epoch = 2;
  cfg.joint_similarity_start_epoch = 4;
  cfg.lr_decay_epoch = 10;
  cfg.batch_originals = 16;
  cfg.learning_rate = 0.05;
  const TrainResult r = train(data, nullptr, cfg);

  double first_purity = -1.0, last_purity = -1.0;
  for (const auto& row : r.log) {
    if (!row.refreshed) continue;
    if (first_purity < 0.0) first_purity = row.purity;
    last_purity = row.purity;
  }
  REQUIRE(first_purity >= 0.0);
  CHECK(last_purity > first_purity);
}

TEST_CASE("source domain: loss appears from epoch zero and the classifier trains") {
  const Dataset target = small_world(8, 31);
  const Dataset source = small_world(6, 32);
  TrainConfig cfg = quick_config();
  cfg.use_src = true;
  const TrainResult r = train(target, &source, cfg);
  CHECK(r.source_classifier.rows() == 6);
  for (const auto& row : r.log) CHECK(row.loss_src > 0.0);
}

TEST_CASE("use_src without a source dataset is rejected") {
  const Dataset target = small_world(6, 33);
  TrainConfig cfg = quick_config();
  cfg.use_src = true;
  CHECK_THROWS_AS(train(target, nullptr, cfg), ValidationError);
}

TEST_CASE("desk-scale preset rescales the published schedule") {
  TrainConfig cfg;
  cfg.total_epochs = 20;
  cfg.scale_schedule_to_total();
  CHECK(cfg.label_refresh_period == 1);
  CHECK(cfg.global_loss_start_epoch == 2);
  CHECK(cfg.joint_similarity_start_epoch == 6);
  CHECK(cfg.lr_decay_epoch == 8);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("train config key-value parsing honors defaults and overrides") {
  const KeyValueConfig kv = KeyValueConfig::parse_string(
      "total_epochs = 20\nscale_schedule = 1\nseed = 9\nuse_sac = 0\n"
      "dbscan_eps = 0.45\nbeta_local = 0.2\n");
  const TrainConfig cfg = TrainConfig::from_kv(kv);
  CHECK(cfg.total_epochs == 20);
  CHECK(cfg.joint_similarity_start_epoch == 6);  // scaled
  CHECK(cfg.seed == 9);
  CHECK(!cfg.use_sac);
  CHECK(cfg.dbscan_eps == doctest::Approx(0.45));
  CHECK(cfg.loss_weights.beta_local == doctest::Approx(0.2));
  CHECK(cfg.loss_weights.w_local == doctest::Approx(1.0));   // default
  CHECK(cfg.loss_weights.w_global == doctest::Approx(0.2));  // default
}

TEST_CASE("training log CSV carries the documented columns") {
  const Dataset data = small_world(6, 41);
  TrainConfig cfg = quick_config();
  cfg.total_epochs = 2;
  cfg.global_loss_start_epoch = 1;
  cfg.joint_similarity_start_epoch = 2;
  cfg.lr_decay_epoch = 2;
  const TrainResult r = train(data, nullptr, cfg);
  const auto path = std::filesystem::temp_directory_path() / "jvtc_log_rt.csv";
  save_training_log(r.log, path.string());
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  std::filesystem::remove(path);
  CHECK(header == "epoch,L_src,L_local,L_global,purity,num_clusters,alpha");
}

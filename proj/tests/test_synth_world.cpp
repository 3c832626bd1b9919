#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "jvtc/synth_world.hpp"

using namespace jvtc;

namespace {

WorldConfig base_config() {
  WorldConfig cfg;
  cfg.num_persons = 20;
  cfg.num_cameras = 3;
  cfg.images_per_person_per_camera = 4;
  cfg.feature_dim = 16;
  cfg.appearance_spread = 0.3;
  cfg.twin_fraction = 0.0;
  cfg.camera_style_strength = 0.4;
  cfg.seed = 99;
  Vector offsets(3), jitters(3);
  offsets << 500.0, 0.0, -300.0;
  jitters << 40.0, 30.0, 35.0;
  cfg.set_camera_times(offsets, jitters);
  return cfg;
}

}  // namespace

TEST_CASE("sample count arithmetic: persons x cameras x images") {
  const auto [data, gt] = generate_world(base_config());
  CHECK(data.size() == 20 * 3 * 4);
  CHECK(data.num_cameras == 3);
  CHECK(data.has_known_ids());
  CHECK(gt.prototypes.rows() == 20);
}

TEST_CASE("twin pairs sit closer than the appearance spread") {
  WorldConfig cfg = base_config();
  cfg.twin_fraction = 0.5;
  const auto [data, gt] = generate_world(cfg);
  CHECK(gt.twin_pairs.size() == 5);  // floor(0.5 * 20 / 2)
  for (const auto& [p, q] : gt.twin_pairs) {
    const double dist = (gt.prototypes.row(p) - gt.prototypes.row(q)).norm();
    CHECK(dist < cfg.appearance_spread);
  }
}

TEST_CASE("empirical transit interval statistics match the configured normal") {
  WorldConfig cfg = base_config();
  cfg.num_persons = 60;
  cfg.images_per_person_per_camera = 5;
  Vector offsets(2), jitters(2);
  offsets << 500.0, 0.0;                         // mean interval cam0-cam1 = 500
  jitters << 50.0 / std::numbers::sqrt2, 50.0 / std::numbers::sqrt2;  // pair std 50
  cfg.num_cameras = 2;
  cfg.set_camera_times(offsets, jitters);
  const auto [data, gt] = generate_world(cfg);

  std::vector<double> intervals;
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.size(); ++j) {
      const auto& a = data.metas[static_cast<size_t>(i)];
      const auto& b = data.metas[static_cast<size_t>(j)];
      if (a.person_id != b.person_id) continue;
      if (a.camera_id != 0 || b.camera_id != 1) continue;
      intervals.push_back(static_cast<double>(a.frame_id - b.frame_id));
    }
  }
  REQUIRE(intervals.size() == 60u * 5u * 5u);
  double mean = 0.0;
  for (double v : intervals) mean += v;
  mean /= static_cast<double>(intervals.size());
  // pairs within one person share the base time, so they are correlated;
  // the bound uses the person count as the effective sample size
  const double tol = 3.0 * 50.0 / std::sqrt(60.0);
  CHECK(std::abs(mean - 500.0) < tol);
}

TEST_CASE("same seed reproduces the dataset byte for byte") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "jvtc_world_det";
  fs::create_directories(dir);
  for (int round = 0; round < 2; ++round) {
    const auto [data, gt] = generate_world(base_config());
    save_dataset(data, (dir / ("meta" + std::to_string(round) + ".csv")).string(),
                 (dir / ("feat" + std::to_string(round) + ".bin")).string());
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
  };
  CHECK(slurp(dir / "feat0.bin") == slurp(dir / "feat1.bin"));
  CHECK(slurp(dir / "meta0.csv") == slurp(dir / "meta1.csv"));
  fs::remove_all(dir);
}

TEST_CASE("degenerate configs are rejected") {
  WorldConfig cfg = base_config();
  cfg.num_persons = 0;
  CHECK_THROWS_AS(generate_world(cfg), ValidationError);
  cfg = base_config();
  cfg.num_cameras = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("inconsistent transit matrices are rejected") {
  WorldConfig cfg = base_config();
  // cycle sum 100 + 100 + 100 != 0: no camera offsets can realize this
  cfg.transit_mean.setZero();
  cfg.transit_mean(0, 1) = 100.0;
  cfg.transit_mean(1, 0) = -100.0;
  cfg.transit_mean(1, 2) = 100.0;
  cfg.transit_mean(2, 1) = -100.0;
  cfg.transit_mean(0, 2) = -100.0;
  cfg.transit_mean(2, 0) = 100.0;
  CHECK_THROWS_WITH_AS(generate_world(cfg), doctest::Contains("not realizable"),
                       ValidationError);
}

TEST_CASE("hard negatives exist: twins look alike but are temporally inconsistent") {
  WorldConfig cfg = base_config();
  cfg.twin_fraction = 0.4;
  cfg.appearance_spread = 0.25;
  const auto [data, gt] = generate_world(cfg);
  REQUIRE(!gt.twin_pairs.empty());

  // within-person median cosine similarity of raw features
  Matrix unit = row_normalized(data.features.raw);
  std::vector<double> within;
  for (Index i = 0; i < data.size(); ++i)
    for (Index j = i + 1; j < data.size(); ++j)
      if (data.metas[static_cast<size_t>(i)].person_id ==
          data.metas[static_cast<size_t>(j)].person_id)
        within.push_back(unit.row(i).dot(unit.row(j)));
  std::sort(within.begin(), within.end());
  const double median = within[within.size() / 2];

  const BinSpec bins;
  const TemporalModel truth = true_temporal_model(gt, bins);
  bool found = false;
  for (const auto& [p, q] : gt.twin_pairs) {
    for (Index i = 0; i < data.size() && !found; ++i) {
      if (data.metas[static_cast<size_t>(i)].person_id != p) continue;
      for (Index j = 0; j < data.size() && !found; ++j) {
        if (data.metas[static_cast<size_t>(j)].person_id != q) continue;
        const double vs = unit.row(i).dot(unit.row(j));
        const double ts = temporal_consistency(truth, data.metas[static_cast<size_t>(i)],
                                               data.metas[static_cast<size_t>(j)]);
        if (vs > median && ts < 0.01) found = true;
      }
    }
  }
  CHECK(found);
}

TEST_CASE("true temporal model: center bin of a unit normal is about 0.383") {
  GroundTruth gt;
  gt.camera_offset = Vector::Zero(2);
  gt.camera_jitter = Vector::Zero(2);
  gt.camera_jitter(0) = 1.0 / std::numbers::sqrt2;  // pair std exactly 1 frame
  gt.camera_jitter(1) = 1.0 / std::numbers::sqrt2;
  gt.feature_dim = 2;

  BinSpec bins;
  bins.bin_width = 1.0;
  bins.max_interval = 3.5;  // bins centered on integers, center bin [-0.5, 0.5)
  const TemporalModel truth = true_temporal_model(gt, bins);
  const IntervalHistogram& h = truth.histogram(0, 1);
  CHECK(h.values(bins.bin_index(0.0)) == doctest::Approx(0.383).epsilon(2e-3));
}

TEST_CASE("true temporal model bins renormalize to one after clipping") {
  GroundTruth gt;
  gt.camera_offset = Vector::Zero(2);
  gt.camera_offset(0) = 500.0;
  gt.camera_jitter = Vector::Constant(2, 50.0 / std::numbers::sqrt2);
  gt.feature_dim = 2;
  BinSpec bins;
  bins.bin_width = 100.0;
  bins.max_interval = 650.0;  // clips the normal at 3 sigma
  const TemporalModel truth = true_temporal_model(gt, bins);
  CHECK(truth.histogram(0, 1).values.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("true temporal model: one giant bin takes all the mass") {
  GroundTruth gt;
  gt.camera_offset = Vector::Zero(1);
  gt.camera_jitter = Vector::Constant(1, 10.0);
  gt.feature_dim = 2;
  BinSpec bins;
  bins.bin_width = 10000.0;
  bins.max_interval = 100.0;
  const TemporalModel truth = true_temporal_model(gt, bins);
  REQUIRE(bins.num_bins() == 1);
  CHECK(truth.histogram(0, 0).values(0) == doctest::Approx(1.0));
}

TEST_CASE("style transfer with zero strength plus zero noise is the identity") {
  const CameraStyleFamily style = CameraStyleFamily::generate(3, 8, 0.0, 5);
  Vector x(8);
  x << 1, -2, 3, -4, 5, -6, 7, -8;
  const Vector moved = style.transfer(x, 0, 2);
  CHECK((moved - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("style maps are exactly orthogonal affine maps") {
  const CameraStyleFamily style = CameraStyleFamily::generate(2, 12, 0.8, 17);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector a(12), b(12);
  for (Index i = 0; i < 12; ++i) {
    a(i) = gauss(rng);
    b(i) = gauss(rng);
  }
  // rotation + bias preserves distances
  const double before = (a - b).norm();
  const double after = (style.apply(1, a) - style.apply(1, b)).norm();
  CHECK(after == doctest::Approx(before).epsilon(1e-10));
  // unapply inverts apply
  CHECK((style.unapply(1, style.apply(1, a)) - a).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ground truth sidecar round-trip") {
  WorldConfig cfg = base_config();
  cfg.twin_fraction = 0.3;
  const auto [data, gt] = generate_world(cfg);
  const auto path = std::filesystem::temp_directory_path() / "jvtc_gt_rt.txt";
  save_ground_truth(gt, path.string());
  const GroundTruth loaded = load_ground_truth(path.string());
  std::filesystem::remove(path);

  CHECK(loaded.twin_pairs == gt.twin_pairs);
  CHECK(loaded.person_base_frame == gt.person_base_frame);
  CHECK((loaded.camera_offset - gt.camera_offset).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((loaded.prototypes - gt.prototypes).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(loaded.style_seed == gt.style_seed);
  // the style family reconstructs identically from the stored seed
  Vector x = Vector::LinSpaced(16, -1.0, 1.0);
  CHECK((loaded.style().apply(1, x) - gt.style().apply(1, x)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("world config from key-value text") {
  KeyValueConfig kv = KeyValueConfig::parse_string(
      "num_persons = 10\n"
      "num_cameras = 2\n"
      "images_per_person_per_camera = 3\n"
      "feature_dim = 8\n"
      "appearance_spread = 0.2\n"
      "twin_fraction = 0.1\n"
      "camera_style_strength = 0.5\n"
      "seed = 3\n"
      "camera_offsets = 400 0\n"
      "camera_jitters = 30 30\n");
  const WorldConfig cfg = world_config_from_kv(kv);
  CHECK(cfg.num_persons == 10);
  CHECK(cfg.transit_mean(0, 1) == doctest::Approx(400.0));
  CHECK(cfg.transit_std(0, 1) == doctest::Approx(std::sqrt(1800.0)));
  CHECK_NOTHROW(cfg.validate());

  KeyValueConfig kv2 = KeyValueConfig::parse_string(
      "num_persons = 4\nnum_cameras = 2\nimages_per_person_per_camera = 2\n"
      "feature_dim = 4\nseed = 1\ntransit_mean_0_1 = 250\ntransit_std_0_1 = 20\n");
  const WorldConfig cfg2 = world_config_from_kv(kv2);
  CHECK(cfg2.transit_mean(1, 0) == doctest::Approx(-250.0));
  CHECK_NOTHROW(generate_world(cfg2));
}

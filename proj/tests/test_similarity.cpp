#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "jvtc/similarity.hpp"

using namespace jvtc;

namespace {

Matrix random_unit_rows(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = gauss(rng);
    m.row(i).normalize();
  }
  return m;
}

std::vector<SampleMeta> metas_with_frames(Index n, int cams, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SampleMeta> metas(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    auto& m = metas[static_cast<size_t>(i)];
    m.sample_id = static_cast<int>(i);
    m.person_id = static_cast<int>(i % 7);
    m.camera_id = static_cast<int>(rng() % cams);
    m.frame_id = static_cast<long long>(rng() % 4000);
  }
  return metas;
}

TemporalModel toy_temporal_model(int cams) {
  std::vector<SampleMeta> metas;
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 80; ++i) {
    SampleMeta m;
    m.sample_id = i;
    m.person_id = i % 8;
    m.camera_id = static_cast<int>(rng() % cams);
    m.frame_id = static_cast<long long>((i % 8) * 700 + 100 * m.camera_id + rng() % 200);
    metas.push_back(m);
  }
  std::vector<int> labels;
  for (const auto& m : metas) labels.push_back(m.person_id);
  return smooth(estimate_histograms(metas, labels, BinSpec{}), 100.0);
}

}  // namespace

TEST_CASE("visual similarity: identity, orthogonality, dot-product oracle") {
  Matrix f(3, 4);
  f << 1, 0, 0, 0,
       1, 0, 0, 0,
       0, 1, 0, 0;
  CHECK(visual_similarity(f, 0, 1) == 1.0);
  CHECK(visual_similarity(f, 0, 2) == 0.0);

  const Matrix r = random_unit_rows(20, 6, 11);
  for (Index i = 0; i < 20; ++i) {
    for (Index j = 0; j < 20; ++j) {
      // independent accumulation in plain double
      double dot = 0.0;
      for (Index k = 0; k < 6; ++k) dot += r(i, k) * r(j, k);
      CHECK(visual_similarity(r, i, j) == doctest::Approx(dot).epsilon(1e-12));
    }
  }
}

TEST_CASE("joint similarity closed-form spot values") {
  const FusionParams p;  // lambda 1,2 gamma 5,5
  CHECK(joint_similarity(0.0, 0.0, p) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(joint_similarity(1.0, 1.0, p) == doctest::Approx(0.98010).epsilon(1e-4));
  CHECK(joint_similarity(0.5, 0.2, p) == doctest::Approx(0.53242).epsilon(1e-4));
}

TEST_CASE("joint similarity is strictly monotone and lands in (0,1)") {
  const FusionParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uvs(-1.0, 1.0), uts(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double vs = uvs(rng), ts = uts(rng);
    const double j = joint_similarity(vs, ts, p);
    CHECK(j > 0.0);
    CHECK(j < 1.0);
    CHECK(joint_similarity(vs + 0.05, ts, p) > j);
    CHECK(joint_similarity(vs, ts + 0.05, p) > j);
  }
}

TEST_CASE("pairwise_joint: single sample, symmetry, diagonal pin") {
  const FusionParams p;
  const TemporalModel tm = toy_temporal_model(3);
  const Matrix one = random_unit_rows(1, 5, 3);
  const std::vector<SampleMeta> one_meta = metas_with_frames(1, 3, 3);
  const Matrix j1 = pairwise_joint(one, one_meta, tm, p);
  REQUIRE(j1.rows() == 1);
  CHECK(j1(0, 0) == joint_similarity(1.0, 1.0, p));

  const Matrix f = random_unit_rows(40, 6, 8);
  const auto metas = metas_with_frames(40, 3, 8);
  const Matrix j = pairwise_joint(f, metas, tm, p);
  CHECK(j == j.transpose());
  for (Index i = 0; i < 40; ++i) CHECK(j(i, i) == joint_similarity(1.0, 1.0, p));
}

TEST_CASE("pairwise_joint equals entrywise recomputation") {
  const FusionParams p;
  const TemporalModel tm = toy_temporal_model(3);
  const Matrix f = random_unit_rows(50, 8, 21);
  const auto metas = metas_with_frames(50, 3, 21);
  const Matrix j = pairwise_joint(f, metas, tm, p);
  for (Index a = 0; a < 50; ++a) {
    for (Index b = 0; b < 50; ++b) {
      if (a == b) continue;
      const Scalar vs = visual_similarity(f, a, b);
      const Scalar ts = temporal_consistency(tm, metas[static_cast<size_t>(a)],
                                             metas[static_cast<size_t>(b)]);
      CHECK(j(a, b) == doctest::Approx(joint_similarity(vs, ts, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("permuting sample order permutes the matrix rows and columns") {
  const FusionParams p;
  const TemporalModel tm = toy_temporal_model(2);
  const Matrix f = random_unit_rows(12, 5, 31);
  auto metas = metas_with_frames(12, 2, 31);
  const Matrix j = pairwise_joint(f, metas, tm, p);

  std::vector<Index> perm = {4, 0, 7, 2, 11, 1, 9, 3, 10, 5, 8, 6};
  Matrix fp(12, 5);
  std::vector<SampleMeta> mp(12);
  for (Index i = 0; i < 12; ++i) {
    fp.row(i) = f.row(perm[static_cast<size_t>(i)]);
    mp[static_cast<size_t>(i)] = metas[static_cast<size_t>(perm[static_cast<size_t>(i)])];
  }
  const Matrix jp = pairwise_joint(fp, mp, tm, p);
  for (Index a = 0; a < 12; ++a)
    for (Index b = 0; b < 12; ++b)
      CHECK(jp(a, b) == j(perm[static_cast<size_t>(a)], perm[static_cast<size_t>(b)]));
}

TEST_CASE("parallel fill matches single-threaded fill bit for bit") {
  const FusionParams p;
  const TemporalModel tm = toy_temporal_model(3);
  const Matrix f = random_unit_rows(64, 8, 17);
  const auto metas = metas_with_frames(64, 3, 17);
  PairwiseOptions seq;
  seq.num_threads = 1;
  PairwiseOptions par;
  par.num_threads = 7;
  const Matrix a = pairwise_joint(f, metas, tm, p, seq);
  const Matrix b = pairwise_joint(f, metas, tm, p, par);
  CHECK(a == b);
}

TEST_CASE("pairwise_visual: identical rows give the all-ones matrix") {
  Matrix f(4, 3);
  for (Index i = 0; i < 4; ++i) f.row(i) << 0.6, 0.8, 0.0;
  const Matrix v = pairwise_visual(f);
  CHECK(v.isApprox(Matrix::Ones(4, 4)));
  CHECK(v(0, 0) == 1.0);
}

TEST_CASE("visual-factor-only mode equals the joint matrix with ts pinned to one") {
  const FusionParams p;
  const Matrix f = random_unit_rows(30, 6, 77);
  const Matrix jv = pairwise_joint_visual(f, p);
  for (Index a = 0; a < 30; ++a) {
    for (Index b = 0; b < 30; ++b) {
      const Scalar vs = a == b ? 1.0 : visual_similarity(f, a, b);
      CHECK(jv(a, b) == doctest::Approx(joint_similarity_visual_only(vs, p)).epsilon(1e-12));
    }
  }
  CHECK(jv == jv.transpose());
}

TEST_CASE("pairwise_visual of random rows is symmetric with unit diagonal") {
  const Matrix f = random_unit_rows(50, 7, 55);
  const Matrix v = pairwise_visual(f);
  CHECK(v == v.transpose());
  for (Index i = 0; i < 50; ++i) CHECK(v(i, i) == 1.0);
}

TEST_CASE("capacity cap refuses oversized dense matrices") {
  PairwiseOptions opts;
  opts.max_samples = 16;
  const Matrix f = random_unit_rows(17, 4, 9);
  CHECK_THROWS_AS(pairwise_visual(f, opts), CapacityError);
  const FusionParams p;
  CHECK_THROWS_AS(pairwise_joint_visual(f, p, opts), CapacityError);
}

TEST_CASE("fusion params validation") {
  FusionParams bad;
  bad.lambda_ts = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  FusionParams nan_p;
  nan_p.gamma_vs = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nan_p.validate(), ValidationError);
}

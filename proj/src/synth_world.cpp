#include "jvtc/synth_world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace jvtc {

namespace {

Scalar normal_cdf(Scalar x, Scalar mu, Scalar sigma) {
  return 0.5 * (1.0 + std::erf((x - mu) / (sigma * std::numbers::sqrt2)));
}

Matrix random_gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  return m;
}

}  // namespace

CameraStyleFamily CameraStyleFamily::generate(int num_cameras, int dim, double strength,
                                              std::uint64_t seed) {
  if (num_cameras <= 0 || dim <= 0)
    throw ValidationError("CameraStyleFamily: need positive camera count and dimension");
  CameraStyleFamily fam;
  fam.rotations_.reserve(static_cast<size_t>(num_cameras));
  fam.biases_.reserve(static_cast<size_t>(num_cameras));
  for (int c = 0; c < num_cameras; ++c) {
    std::mt19937_64 rng(substream_seed(seed, 0x57u, static_cast<std::uint64_t>(c)));
    const Matrix g = random_gaussian(dim, dim, rng) / std::sqrt(static_cast<Scalar>(dim));
    const Matrix skew = 0.5 * strength * (g - g.transpose());
    // Cayley map: exactly orthogonal for any skew input, identity at strength 0
    const Matrix eye = Matrix::Identity(dim, dim);
    fam.rotations_.push_back((eye - skew).lu().solve(eye + skew));
    Vector u = random_gaussian(dim, 1, rng);
    fam.biases_.push_back(0.3 * strength * u / u.norm());
  }
  return fam;
}

Vector CameraStyleFamily::apply(int camera, const Vector& x) const {
  return rotations_.at(static_cast<size_t>(camera)) * x + biases_.at(static_cast<size_t>(camera));
}

Vector CameraStyleFamily::unapply(int camera, const Vector& x) const {
  return rotations_.at(static_cast<size_t>(camera)).transpose() *
         (x - biases_.at(static_cast<size_t>(camera)));
}

Vector CameraStyleFamily::transfer(const Vector& x, int from_camera, int to_camera) const {
  return apply(to_camera, unapply(from_camera, x));
}

void WorldConfig::validate() const {
  if (num_persons <= 0) throw ValidationError("WorldConfig: num_persons must be positive");
  if (num_cameras <= 0) throw ValidationError("WorldConfig: num_cameras must be positive");
  if (images_per_person_per_camera <= 0)
    throw ValidationError("WorldConfig: images_per_person_per_camera must be positive");
  if (feature_dim <= 0) throw ValidationError("WorldConfig: feature_dim must be positive");
  if (appearance_spread < 0.0) throw ValidationError("WorldConfig: appearance_spread < 0");
  if (twin_fraction < 0.0 || twin_fraction > 1.0)
    throw ValidationError("WorldConfig: twin_fraction outside [0,1]");
  if (camera_style_strength < 0.0)
    throw ValidationError("WorldConfig: camera_style_strength < 0");
  const Index c = num_cameras;
  if (transit_mean.rows() != c || transit_mean.cols() != c || transit_std.rows() != c ||
      transit_std.cols() != c)
    throw ValidationError("WorldConfig: transit matrices must be num_cameras x num_cameras");
  for (Index a = 0; a < c; ++a) {
    for (Index b = 0; b < c; ++b) {
      if (std::abs(transit_mean(a, b) + transit_mean(b, a)) > 1e-9)
        throw ValidationError("WorldConfig: transit_mean must be antisymmetric");
      if (transit_std(a, b) < 0.0) throw ValidationError("WorldConfig: transit_std < 0");
      if (std::abs(transit_std(a, b) - transit_std(b, a)) > 1e-9)
        throw ValidationError("WorldConfig: transit_std must be symmetric");
    }
  }
}

void WorldConfig::set_camera_times(const Vector& offsets, const Vector& jitters) {
  const Index c = offsets.size();
  if (jitters.size() != c) throw ValidationError("set_camera_times: offset/jitter size mismatch");
  num_cameras = static_cast<int>(c);
  transit_mean = Matrix::Zero(c, c);
  transit_std = Matrix::Zero(c, c);
  for (Index a = 0; a < c; ++a) {
    for (Index b = 0; b < c; ++b) {
      transit_mean(a, b) = offsets(a) - offsets(b);
      transit_std(a, b) = std::sqrt(jitters(a) * jitters(a) + jitters(b) * jitters(b));
    }
  }
}

namespace {

/// Recovers per-camera arrival offsets (gauge: offset[0] = 0) and per-camera
/// jitters from the transit matrices; rejects matrices no camera-time model
/// can realize.
void decompose_transit(const Matrix& mean, const Matrix& std_mat, Vector* offsets,
                       Vector* jitters) {
  const Index c = mean.rows();
  if (c == 1) {
    *offsets = Vector::Zero(1);
    *jitters = Vector::Zero(1);
    (*jitters)(0) = std_mat(0, 0) / std::numbers::sqrt2;
    return;
  }

  // offsets: least squares of offset[a] - offset[b] = mean(a,b), gauge row 0
  Matrix lap = static_cast<Scalar>(c) * Matrix::Identity(c, c) - Matrix::Ones(c, c);
  Vector rhs = mean.rowwise().sum();
  lap.row(0).setZero();
  lap(0, 0) = 1.0;
  rhs(0) = 0.0;
  *offsets = lap.fullPivLu().solve(rhs);

  // jitters: least squares of j[a]^2 + j[b]^2 = std(a,b)^2 over a != b
  Vector var(c);
  if (c == 2) {
    var.setConstant(0.5 * std_mat(0, 1) * std_mat(0, 1));
  } else {
    Matrix m = static_cast<Scalar>(c - 2) * Matrix::Identity(c, c) + Matrix::Ones(c, c);
    Vector r = Vector::Zero(c);
    for (Index a = 0; a < c; ++a)
      for (Index b = 0; b < c; ++b)
        if (a != b) r(a) += std_mat(a, b) * std_mat(a, b);
    var = m.fullPivLu().solve(r);
  }

  const Scalar scale = std::max<Scalar>(1.0, mean.cwiseAbs().maxCoeff() +
                                                 std_mat.cwiseAbs().maxCoeff());
  for (Index a = 0; a < c; ++a) {
    if (var(a) < -1e-6 * scale * scale)
      throw ValidationError("WorldConfig: transit_std matrix is not realizable by "
                            "per-camera jitters");
    var(a) = std::max<Scalar>(var(a), 0.0);
  }
  for (Index a = 0; a < c; ++a) {
    for (Index b = 0; b < c; ++b) {
      if (a == b) continue;
      const Scalar got_mean = (*offsets)(a) - (*offsets)(b);
      if (std::abs(got_mean - mean(a, b)) > 1e-6 * scale)
        throw ValidationError("WorldConfig: transit_mean matrix is not realizable by "
                              "camera arrival offsets (inconsistent cycle sums)");
      const Scalar got_var = var(a) + var(b);
      if (std::abs(got_var - std_mat(a, b) * std_mat(a, b)) > 1e-5 * scale * scale)
        throw ValidationError("WorldConfig: transit_std matrix is not realizable by "
                              "per-camera jitters");
    }
  }
  *jitters = var.cwiseSqrt();
}

}  // namespace

std::pair<Dataset, GroundTruth> generate_world(const WorldConfig& cfg) {
  cfg.validate();
  const int P = cfg.num_persons;
  const int C = cfg.num_cameras;
  const int V = cfg.images_per_person_per_camera;
  const int D = cfg.feature_dim;

  GroundTruth gt;
  gt.transit_mean = cfg.transit_mean;
  gt.transit_std = cfg.transit_std;
  gt.camera_style_strength = cfg.camera_style_strength;
  gt.style_seed = substream_seed(cfg.seed, 0x5AFEu);
  gt.feature_dim = D;
  decompose_transit(cfg.transit_mean, cfg.transit_std, &gt.camera_offset, &gt.camera_jitter);

  const CameraStyleFamily style = gt.style();

  // appearance prototypes, unit norm; twins sit well inside the noise ball
  {
    std::mt19937_64 rng(substream_seed(cfg.seed, 0xA11u));
    gt.prototypes = random_gaussian(P, D, rng);
    for (int p = 0; p < P; ++p) gt.prototypes.row(p).normalize();
    std::vector<int> order(static_cast<size_t>(P));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int num_twin_pairs = static_cast<int>(cfg.twin_fraction * P / 2.0);
    std::normal_distribution<Scalar> gauss(0.0, 1.0);
    for (int t = 0; t < num_twin_pairs; ++t) {
      const int p = order[static_cast<size_t>(2 * t)];
      const int q = order[static_cast<size_t>(2 * t + 1)];
      Vector dir(D);
      for (int k = 0; k < D; ++k) dir(k) = gauss(rng);
      dir.normalize();
      gt.prototypes.row(q) =
          gt.prototypes.row(p) + (0.4 * cfg.appearance_spread) * dir.transpose();
      gt.twin_pairs.emplace_back(std::min(p, q), std::max(p, q));
    }
    std::sort(gt.twin_pairs.begin(), gt.twin_pairs.end());
  }

  // person base times: wide deterministic spacing (shuffled order plus jitter)
  // keeps same-person visits temporally coherent and different persons mostly
  // outside each other's transit window
  const Scalar temporal_scale =
      std::max<Scalar>(100.0, cfg.transit_mean.cwiseAbs().maxCoeff() +
                                  4.0 * cfg.transit_std.cwiseAbs().maxCoeff());
  const Scalar gap = 8.0 * temporal_scale;
  {
    std::mt19937_64 rng(substream_seed(cfg.seed, 0x71EDu));
    std::vector<int> order(static_cast<size_t>(P));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<Scalar> u(0.0, gap / 4.0);
    gt.person_base_frame.resize(static_cast<size_t>(P));
    const Scalar base_shift = gap + std::abs(gt.camera_offset.minCoeff()) +
                              8.0 * (gt.camera_jitter.size() ? gt.camera_jitter.maxCoeff() : 0.0);
    for (int p = 0; p < P; ++p) {
      const Scalar t = base_shift + gap * static_cast<Scalar>(order[static_cast<size_t>(p)]) + u(rng);
      gt.person_base_frame[static_cast<size_t>(p)] = static_cast<long long>(std::llround(t));
    }
  }

  Dataset d;
  d.num_cameras = C;
  d.domain_tag = DomainTag::kTarget;
  const Index n = static_cast<Index>(P) * C * V;
  d.features.raw.resize(n, D);
  d.metas.resize(static_cast<size_t>(n));

  std::mt19937_64 rng(substream_seed(cfg.seed, 0xDA7Au));
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  const Scalar noise_scale = cfg.appearance_spread / std::sqrt(static_cast<Scalar>(D));
  Index row = 0;
  for (int p = 0; p < P; ++p) {
    const Vector proto = gt.prototypes.row(p).transpose();
    for (int c = 0; c < C; ++c) {
      const Vector styled = style.apply(c, proto);
      for (int v = 0; v < V; ++v, ++row) {
        Vector noise(D);
        for (int k = 0; k < D; ++k) noise(k) = gauss(rng);
        d.features.raw.row(row) = (styled + noise_scale * noise).transpose();

        const Scalar visit = static_cast<Scalar>(gt.person_base_frame[static_cast<size_t>(p)]) +
                             gt.camera_offset(c) + gt.camera_jitter(c) * gauss(rng);
        SampleMeta& m = d.metas[static_cast<size_t>(row)];
        m.sample_id = static_cast<int>(row);
        m.person_id = p;
        m.camera_id = c;
        m.frame_id = std::max<long long>(0, std::llround(visit));
      }
    }
  }
  d.validate();
  return {std::move(d), std::move(gt)};
}

TemporalModel true_temporal_model(const GroundTruth& gt, const BinSpec& binning) {
  binning.validate();
  const int C = static_cast<int>(gt.camera_offset.size());
  TemporalModel model(C, binning);
  const int nbins = binning.num_bins();
  for (int a = 0; a < C; ++a) {
    for (int b = a; b < C; ++b) {
      const Scalar mu = gt.camera_offset(a) - gt.camera_offset(b);
      const Scalar var = gt.camera_jitter(a) * gt.camera_jitter(a) +
                         gt.camera_jitter(b) * gt.camera_jitter(b);
      const Scalar sigma = std::sqrt(var);
      IntervalHistogram& h = model.histogram(a, b);
      for (int k = 0; k < nbins; ++k) {
        const Scalar lo = std::max(k * binning.bin_width - binning.max_interval,
                                   -binning.max_interval);
        const Scalar hi = std::min((k + 1) * binning.bin_width - binning.max_interval,
                                   binning.max_interval);
        if (hi <= lo && !(sigma == 0.0)) {
          h.values(k) = 0.0;
          continue;
        }
        if (sigma == 0.0) {
          h.values(k) = (binning.in_support(mu) && binning.bin_index(mu) == k) ? 1.0 : 0.0;
        } else {
          h.values(k) = normal_cdf(hi, mu, sigma) - normal_cdf(lo, mu, sigma);
        }
      }
      const Scalar mass = h.values.sum();
      if (mass < 1e-12) {
        h.empty = true;
        h.values.setZero();
        h.max_value = 0.0;
      } else {
        h.empty = false;
        h.values /= mass;
        h.refresh_max();
      }
    }
  }
  return model;
}

WorldConfig world_config_from_kv(const KeyValueConfig& kv) {
  WorldConfig cfg;
  cfg.num_persons = static_cast<int>(kv.get_int("num_persons", 0));
  cfg.num_cameras = static_cast<int>(kv.get_int("num_cameras", 0));
  cfg.images_per_person_per_camera =
      static_cast<int>(kv.get_int("images_per_person_per_camera", 0));
  cfg.feature_dim = static_cast<int>(kv.get_int("feature_dim", 0));
  cfg.appearance_spread = kv.get_double("appearance_spread", 0.3);
  cfg.twin_fraction = kv.get_double("twin_fraction", 0.0);
  cfg.camera_style_strength = kv.get_double("camera_style_strength", 0.0);
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));

  if (kv.has("camera_offsets") || kv.has("camera_jitters")) {
    const auto off = kv.get_doubles("camera_offsets");
    const auto jit = kv.get_doubles("camera_jitters");
    if (static_cast<int>(off.size()) != cfg.num_cameras ||
        static_cast<int>(jit.size()) != cfg.num_cameras)
      throw ValidationError("world config: camera_offsets/camera_jitters need one value "
                            "per camera");
    Vector offsets(cfg.num_cameras), jitters(cfg.num_cameras);
    for (int c = 0; c < cfg.num_cameras; ++c) {
      offsets(c) = off[static_cast<size_t>(c)];
      jitters(c) = jit[static_cast<size_t>(c)];
    }
    cfg.set_camera_times(offsets, jitters);
  } else {
    const Index c = cfg.num_cameras;
    cfg.transit_mean = Matrix::Zero(c, c);
    cfg.transit_std = Matrix::Zero(c, c);
    for (Index a = 0; a < c; ++a) {
      for (Index b = a + 1; b < c; ++b) {
        const std::string suffix = std::to_string(a) + "_" + std::to_string(b);
        const double mean = kv.get_double("transit_mean_" + suffix, 0.0);
        const double sd = kv.get_double("transit_std_" + suffix, 0.0);
        cfg.transit_mean(a, b) = mean;
        cfg.transit_mean(b, a) = -mean;
        cfg.transit_std(a, b) = sd;
        cfg.transit_std(b, a) = sd;
      }
    }
  }
  return cfg;
}

namespace {

void write_vector(std::ostream& os, const std::string& key, const Vector& v) {
  os << key;
  for (Index i = 0; i < v.size(); ++i) os << " " << v(i);
  os << "\n";
}

}  // namespace

void save_ground_truth(const GroundTruth& gt, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for write: " + path);
  os.precision(17);
  const int C = static_cast<int>(gt.camera_offset.size());
  const int P = static_cast<int>(gt.prototypes.rows());
  os << "num_persons " << P << "\n";
  os << "num_cameras " << C << "\n";
  os << "feature_dim " << gt.feature_dim << "\n";
  os << "camera_style_strength " << gt.camera_style_strength << "\n";
  os << "style_seed " << gt.style_seed << "\n";
  write_vector(os, "camera_offset", gt.camera_offset);
  write_vector(os, "camera_jitter", gt.camera_jitter);
  for (Index a = 0; a < C; ++a) write_vector(os, "transit_mean", gt.transit_mean.row(a));
  for (Index a = 0; a < C; ++a) write_vector(os, "transit_std", gt.transit_std.row(a));
  os << "twin_pairs";
  for (const auto& [p, q] : gt.twin_pairs) os << " " << p << " " << q;
  os << "\n";
  os << "person_base_frame";
  for (long long t : gt.person_base_frame) os << " " << t;
  os << "\n";
  for (Index p = 0; p < P; ++p) write_vector(os, "prototype", gt.prototypes.row(p));
  if (!os) throw ValidationError("write failed: " + path);
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open: " + path);
  GroundTruth gt;
  int P = 0, C = 0;
  std::string key;
  auto expect = [&](const std::string& want) {
    if (!(is >> key) || key != want)
      throw ValidationError(path + ": expected key '" + want + "'");
  };
  expect("num_persons");
  is >> P;
  expect("num_cameras");
  is >> C;
  expect("feature_dim");
  is >> gt.feature_dim;
  expect("camera_style_strength");
  is >> gt.camera_style_strength;
  expect("style_seed");
  is >> gt.style_seed;
  gt.camera_offset.resize(C);
  gt.camera_jitter.resize(C);
  expect("camera_offset");
  for (int c = 0; c < C; ++c) is >> gt.camera_offset(c);
  expect("camera_jitter");
  for (int c = 0; c < C; ++c) is >> gt.camera_jitter(c);
  gt.transit_mean.resize(C, C);
  gt.transit_std.resize(C, C);
  for (int a = 0; a < C; ++a) {
    expect("transit_mean");
    for (int b = 0; b < C; ++b) is >> gt.transit_mean(a, b);
  }
  for (int a = 0; a < C; ++a) {
    expect("transit_std");
    for (int b = 0; b < C; ++b) is >> gt.transit_std(a, b);
  }
  expect("twin_pairs");
  {
    std::string rest;
    std::getline(is, rest);
    std::istringstream ls(rest);
    int p, q;
    while (ls >> p >> q) gt.twin_pairs.emplace_back(p, q);
  }
  expect("person_base_frame");
  gt.person_base_frame.resize(static_cast<size_t>(P));
  for (int p = 0; p < P; ++p) is >> gt.person_base_frame[static_cast<size_t>(p)];
  gt.prototypes.resize(P, gt.feature_dim);
  for (int p = 0; p < P; ++p) {
    expect("prototype");
    for (int k = 0; k < gt.feature_dim; ++k) is >> gt.prototypes(p, k);
  }
  if (!is) throw ValidationError(path + ": truncated ground truth file");
  return gt;
}

}  // namespace jvtc

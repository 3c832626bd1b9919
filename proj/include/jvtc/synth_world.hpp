#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jvtc/config.hpp"
#include "jvtc/dataset.hpp"
#include "jvtc/temporal_model.hpp"
#include "jvtc/types.hpp"

namespace jvtc {

/// Per-camera affine appearance maps (orthogonal rotation plus bias), the
/// stand-in for camera-specific imaging style. strength = 0 is the identity.
class CameraStyleFamily {
 public:
  CameraStyleFamily() = default;
  static CameraStyleFamily generate(int num_cameras, int dim, double strength,
                                    std::uint64_t seed);

  int num_cameras() const { return static_cast<int>(rotations_.size()); }
  Vector apply(int camera, const Vector& x) const;
  Vector unapply(int camera, const Vector& x) const;
  /// Re-styles x from one camera's domain into another's.
  Vector transfer(const Vector& x, int from_camera, int to_camera) const;

 private:
  std::vector<Matrix> rotations_;
  std::vector<Vector> biases_;
};

struct WorldConfig {
  int num_persons = 0;
  int num_cameras = 0;
  int images_per_person_per_camera = 0;
  int feature_dim = 0;
  double appearance_spread = 0.3;
  double twin_fraction = 0.0;
  Matrix transit_mean;  // C x C, antisymmetric, frames
  Matrix transit_std;   // C x C, symmetric, frames, >= 0
  double camera_style_strength = 0.0;
  std::uint64_t seed = 0;

  void validate() const;

  /// Fills consistent transit matrices from per-camera arrival offsets and
  /// per-camera frame jitters (interval(a,b) ~ Normal(offset[a]-offset[b],
  /// sqrt(jitter[a]^2 + jitter[b]^2))).
  void set_camera_times(const Vector& offsets, const Vector& jitters);
};

WorldConfig world_config_from_kv(const KeyValueConfig& kv);

struct GroundTruth {
  Matrix prototypes;  // P x D_in
  std::vector<std::pair<int, int>> twin_pairs;
  Vector camera_offset;  // frames
  Vector camera_jitter;  // frames
  Matrix transit_mean;
  Matrix transit_std;
  std::vector<long long> person_base_frame;
  double camera_style_strength = 0.0;
  std::uint64_t style_seed = 0;
  int feature_dim = 0;

  CameraStyleFamily style() const {
    return CameraStyleFamily::generate(static_cast<int>(camera_offset.size()), feature_dim,
                                       camera_style_strength, style_seed);
  }
};

/// Builds the synthetic dataset: one appearance prototype per person, images
/// as camera-styled prototypes plus noise, frame ids from simulated per-person
/// visit times whose cross-camera intervals follow the configured normals.
std::pair<Dataset, GroundTruth> generate_world(const WorldConfig& cfg);

/// Discretizes the known transit normals onto the bin grid (renormalized per
/// pair); the oracle the histogram estimator is checked against.
TemporalModel true_temporal_model(const GroundTruth& gt, const BinSpec& binning);

void save_ground_truth(const GroundTruth& gt, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

}  // namespace jvtc

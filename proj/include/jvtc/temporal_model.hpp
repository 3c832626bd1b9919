#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "jvtc/dataset.hpp"
#include "jvtc/types.hpp"

namespace jvtc {

/// Signed frame-interval binning over the symmetric support
/// [-max_interval, +max_interval]. Bin index = floor((x + max_interval) / bin_width).
struct BinSpec {
  double bin_width = 100.0;
  double max_interval = 3000.0;

  void validate() const;
  int num_bins() const;
  bool in_support(double interval) const { return std::abs(interval) <= max_interval; }
  int bin_index(double interval) const {
    return static_cast<int>(std::floor((interval + max_interval) / bin_width));
  }
  double center(int bin) const { return (bin + 0.5) * bin_width - max_interval; }
};

/// One camera pair's interval distribution. `empty` marks pairs that had no
/// same-label sample pairs within support.
struct IntervalHistogram {
  Vector values;
  bool empty = true;
  Scalar max_value = 0.0;

  void refresh_max() { max_value = values.size() ? values.maxCoeff() : 0.0; }
};

/// Per-camera-pair interval histograms, one per unordered pair (a,b) with
/// a <= b. The (b,a) direction is read as the sign-flipped (a,b) histogram.
class TemporalModel {
 public:
  TemporalModel() = default;
  TemporalModel(int num_cameras, const BinSpec& binning);

  int num_cameras() const { return num_cameras_; }
  const BinSpec& binning() const { return binning_; }
  double smoothing_sigma() const { return smoothing_sigma_; }
  bool max_normalize() const { return max_normalize_; }
  void set_max_normalize(bool on) { max_normalize_ = on; }
  void set_smoothing_sigma(double sigma) { smoothing_sigma_ = sigma; }
  /// When set, same-camera pairs score the neutral 0.5 instead of the
  /// estimated intra-camera histograms.
  bool intra_neutral() const { return intra_neutral_; }
  void set_intra_neutral(bool on) { intra_neutral_ = on; }

  const IntervalHistogram& histogram(int cam_a, int cam_b) const;
  IntervalHistogram& histogram(int cam_a, int cam_b);
  int num_pairs() const { return static_cast<int>(histograms_.size()); }

 private:
  int pair_offset(int cam_a, int cam_b) const;

  int num_cameras_ = 0;
  BinSpec binning_;
  double smoothing_sigma_ = 0.0;
  bool max_normalize_ = true;
  bool intra_neutral_ = false;
  std::vector<IntervalHistogram> histograms_;  // upper-triangular incl. diagonal
};

/// Counts same-label (i at a, j at b) interval pairs per camera pair and
/// normalizes by the pair count; intervals beyond the support are excluded
/// from both numerator and denominator. Samples with negative labels form
/// singleton identities and contribute no pairs.
TemporalModel estimate_histograms(const std::vector<SampleMeta>& metas,
                                  const std::vector<int>& labels, const BinSpec& binning);

/// Gaussian smoothing (sigma in frames, kernel truncated at 3*sigma and
/// renormalized); mass within support is preserved. sigma = 0 is the identity.
TemporalModel smooth(const TemporalModel& raw, double sigma);

struct TsDiagnostics {
  long long empty_pair_hits = 0;
  long long out_of_support_hits = 0;
};

/// Smoothed-histogram lookup of the signed frame interval between two
/// samples, max-normalized when the model says so. Symmetric in its two
/// sample arguments. Empty camera pairs score the neutral 0.5.
Scalar temporal_consistency(const TemporalModel& m, const SampleMeta& a, const SampleMeta& b,
                            TsDiagnostics* diag = nullptr);

void save_temporal_model(const TemporalModel& m, const std::string& path);
TemporalModel load_temporal_model(const std::string& path);

}  // namespace jvtc

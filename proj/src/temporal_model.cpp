#include "jvtc/temporal_model.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace jvtc {

void BinSpec::validate() const {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width))
    throw ValidationError("BinSpec: bin_width must be positive");
  if (!(max_interval > 0.0) || !std::isfinite(max_interval))
    throw ValidationError("BinSpec: max_interval must be positive");
}

int BinSpec::num_bins() const {
  // the final bin catches the +max_interval edge exactly
  return static_cast<int>(std::floor(2.0 * max_interval / bin_width)) + 1;
}

TemporalModel::TemporalModel(int num_cameras, const BinSpec& binning)
    : num_cameras_(num_cameras), binning_(binning) {
  binning_.validate();
  if (num_cameras <= 0) throw ValidationError("TemporalModel: need at least one camera");
  const int pairs = num_cameras * (num_cameras + 1) / 2;
  histograms_.resize(static_cast<size_t>(pairs));
  for (auto& h : histograms_) h.values = Vector::Zero(binning_.num_bins());
}

int TemporalModel::pair_offset(int cam_a, int cam_b) const {
  if (cam_a > cam_b) std::swap(cam_a, cam_b);
  if (cam_a < 0 || cam_b >= num_cameras_)
    throw ValidationError("TemporalModel: camera pair (" + std::to_string(cam_a) + "," +
                          std::to_string(cam_b) + ") out of range");
  // row-wise packing of the upper triangle including the diagonal
  return cam_a * num_cameras_ - cam_a * (cam_a - 1) / 2 + (cam_b - cam_a);
}

const IntervalHistogram& TemporalModel::histogram(int cam_a, int cam_b) const {
  return histograms_[static_cast<size_t>(pair_offset(cam_a, cam_b))];
}

IntervalHistogram& TemporalModel::histogram(int cam_a, int cam_b) {
  return histograms_[static_cast<size_t>(pair_offset(cam_a, cam_b))];
}

TemporalModel estimate_histograms(const std::vector<SampleMeta>& metas,
                                  const std::vector<int>& labels, const BinSpec& binning) {
  binning.validate();
  if (metas.size() < 2) throw ValidationError("estimate_histograms: need at least two samples");
  if (labels.size() != metas.size())
    throw ValidationError("estimate_histograms: one label per sample required");
  int num_cameras = 0;
  for (const auto& m : metas) num_cameras = std::max(num_cameras, m.camera_id + 1);

  TemporalModel model(num_cameras, binning);

  // group by label, then by camera within the label
  std::map<int, std::map<int, std::vector<const SampleMeta*>>> groups;
  for (size_t i = 0; i < metas.size(); ++i) {
    if (labels[i] < 0) continue;  // singleton identity, no pairs
    groups[labels[i]][metas[i].camera_id].push_back(&metas[i]);
  }

  const int nbins = binning.num_bins();
  std::vector<Eigen::VectorXi> counts(static_cast<size_t>(model.num_pairs()),
                                      Eigen::VectorXi::Zero(nbins));
  std::vector<long long> totals(static_cast<size_t>(model.num_pairs()), 0);

  auto pair_slot = [&](int a, int b) {
    return a * num_cameras - a * (a - 1) / 2 + (b - a);
  };

  for (const auto& [label, by_cam] : groups) {
    (void)label;
    for (auto ita = by_cam.begin(); ita != by_cam.end(); ++ita) {
      for (auto itb = ita; itb != by_cam.end(); ++itb) {
        const int a = ita->first, b = itb->first;
        const int slot = pair_slot(a, b);
        for (const SampleMeta* mi : ita->second) {
          for (const SampleMeta* mj : itb->second) {
            if (mi == mj) continue;
            // ordered (i at a, j at b); for a == b both orientations of each
            // unordered pair are enumerated, once per role assignment
            const double interval = static_cast<double>(mi->frame_id - mj->frame_id);
            if (!binning.in_support(interval)) continue;
            counts[static_cast<size_t>(slot)](binning.bin_index(interval)) += 1;
            totals[static_cast<size_t>(slot)] += 1;
          }
        }
      }
    }
  }

  for (int a = 0; a < num_cameras; ++a) {
    for (int b = a; b < num_cameras; ++b) {
      const int slot = pair_slot(a, b);
      IntervalHistogram& h = model.histogram(a, b);
      const long long total = totals[static_cast<size_t>(slot)];
      if (total == 0) {
        h.empty = true;
        h.values.setZero();
        h.max_value = 0.0;
        continue;
      }
      h.empty = false;
      for (int k = 0; k < nbins; ++k)
        h.values(k) = static_cast<Scalar>(counts[static_cast<size_t>(slot)](k)) /
                      static_cast<Scalar>(total);
      h.refresh_max();
    }
  }
  return model;
}

TemporalModel smooth(const TemporalModel& raw, double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma))
    throw ValidationError("smooth: sigma must be finite and non-negative");
  TemporalModel out = raw;
  out.set_smoothing_sigma(sigma);
  if (sigma == 0.0) return out;

  const double w = raw.binning().bin_width;
  const int radius = static_cast<int>(std::floor(3.0 * sigma / w));
  if (radius == 0) return out;

  Vector kernel(2 * radius + 1);
  for (int j = -radius; j <= radius; ++j)
    kernel(j + radius) = std::exp(-0.5 * (j * w) * (j * w) / (sigma * sigma));
  kernel /= kernel.sum();

  const int nbins = raw.binning().num_bins();
  for (int a = 0; a < raw.num_cameras(); ++a) {
    for (int b = a; b < raw.num_cameras(); ++b) {
      const IntervalHistogram& src = raw.histogram(a, b);
      IntervalHistogram& dst = out.histogram(a, b);
      if (src.empty) continue;
      dst.values.setZero();
      // scatter each source bin; taps falling off the support are folded back
      // by renormalizing over the in-range taps, which keeps the mass intact
      for (int s = 0; s < nbins; ++s) {
        const Scalar mass = src.values(s);
        if (mass == 0.0) continue;
        const int lo = std::max(-radius, -s);
        const int hi = std::min(radius, nbins - 1 - s);
        Scalar in_range = 0.0;
        for (int j = lo; j <= hi; ++j) in_range += kernel(j + radius);
        for (int j = lo; j <= hi; ++j) dst.values(s + j) += mass * kernel(j + radius) / in_range;
      }
      dst.refresh_max();
    }
  }
  return out;
}

Scalar temporal_consistency(const TemporalModel& m, const SampleMeta& a, const SampleMeta& b,
                            TsDiagnostics* diag) {
  const int cam_lo = std::min(a.camera_id, b.camera_id);
  const int cam_hi = std::max(a.camera_id, b.camera_id);
  if (cam_lo == cam_hi && m.intra_neutral()) return 0.5;
  const IntervalHistogram& h = m.histogram(cam_lo, cam_hi);
  if (h.empty) {
    if (diag) ++diag->empty_pair_hits;
    return 0.5;
  }

  // interval is oriented as (sample at cam_lo) minus (sample at cam_hi)
  const SampleMeta& first = (a.camera_id <= b.camera_id) ? a : b;
  const SampleMeta& second = (a.camera_id <= b.camera_id) ? b : a;
  const double interval = static_cast<double>(first.frame_id - second.frame_id);
  const BinSpec& bins = m.binning();

  auto value_at = [&](double x) -> Scalar {
    if (!bins.in_support(x)) {
      if (diag) ++diag->out_of_support_hits;
      return 0.0;
    }
    return h.values(bins.bin_index(x));
  };

  Scalar v;
  if (cam_lo == cam_hi) {
    // same-camera pairs have no natural orientation; the symmetric read keeps
    // ts(a,b) == ts(b,a) exact even when a bin edge splits +x from -x
    v = 0.5 * (value_at(interval) + value_at(-interval));
  } else {
    v = value_at(interval);
  }
  if (m.max_normalize() && h.max_value > 0.0) v /= h.max_value;
  return v;
}

void save_temporal_model(const TemporalModel& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for write: " + path);
  os.precision(17);
  os << "num_cameras " << m.num_cameras() << "\n";
  os << "bin_width " << m.binning().bin_width << "\n";
  os << "max_interval " << m.binning().max_interval << "\n";
  os << "smoothing_sigma " << m.smoothing_sigma() << "\n";
  os << "max_normalize " << (m.max_normalize() ? 1 : 0) << "\n";
  os << "intra_neutral " << (m.intra_neutral() ? 1 : 0) << "\n";
  const int nbins = m.binning().num_bins();
  for (int a = 0; a < m.num_cameras(); ++a) {
    for (int b = a; b < m.num_cameras(); ++b) {
      const IntervalHistogram& h = m.histogram(a, b);
      os << "pair " << a << " " << b << " " << (h.empty ? "empty" : "ok") << "\n";
      if (h.empty) continue;
      for (int k = 0; k < nbins; ++k)
        os << m.binning().center(k) << " " << h.values(k) << "\n";
    }
  }
  if (!os) throw ValidationError("write failed: " + path);
}

TemporalModel load_temporal_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open: " + path);
  std::string key;
  int num_cameras = 0;
  BinSpec bins;
  double sigma = 0.0;
  int max_norm = 1;
  is >> key >> num_cameras;
  if (key != "num_cameras") throw ValidationError(path + ": expected num_cameras");
  is >> key >> bins.bin_width;
  if (key != "bin_width") throw ValidationError(path + ": expected bin_width");
  is >> key >> bins.max_interval;
  if (key != "max_interval") throw ValidationError(path + ": expected max_interval");
  is >> key >> sigma;
  if (key != "smoothing_sigma") throw ValidationError(path + ": expected smoothing_sigma");
  is >> key >> max_norm;
  if (key != "max_normalize") throw ValidationError(path + ": expected max_normalize");
  int intra_neutral = 0;
  is >> key >> intra_neutral;
  if (key != "intra_neutral") throw ValidationError(path + ": expected intra_neutral");

  TemporalModel m(num_cameras, bins);
  m.set_smoothing_sigma(sigma);
  m.set_max_normalize(max_norm != 0);
  m.set_intra_neutral(intra_neutral != 0);
  const int nbins = bins.num_bins();
  while (is >> key) {
    if (key != "pair") throw ValidationError(path + ": expected pair record, got " + key);
    int a = 0, b = 0;
    std::string status;
    is >> a >> b >> status;
    IntervalHistogram& h = m.histogram(a, b);
    if (status == "empty") {
      h.empty = true;
      continue;
    }
    h.empty = false;
    for (int k = 0; k < nbins; ++k) {
      double center, value;
      if (!(is >> center >> value))
        throw ValidationError(path + ": truncated histogram for pair " + std::to_string(a) + "," +
                              std::to_string(b));
      h.values(k) = value;
    }
    h.refresh_max();
  }
  return m;
}

}  // namespace jvtc

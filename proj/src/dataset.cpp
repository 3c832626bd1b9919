#include "jvtc/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "jvtc/matrix_io.hpp"

namespace jvtc {

bool Dataset::has_known_ids() const {
  return std::all_of(metas.begin(), metas.end(),
                     [](const SampleMeta& m) { return m.person_id != kUnknownPersonId; });
}

std::vector<int> Dataset::person_ids() const {
  std::vector<int> ids(metas.size());
  for (size_t i = 0; i < metas.size(); ++i) ids[i] = metas[i].person_id;
  return ids;
}

void Dataset::validate() const {
  const Index n = size();
  if (features.raw.rows() != n)
    throw ValidationError("dataset: " + std::to_string(metas.size()) + " metadata rows but " +
                          std::to_string(features.raw.rows()) + " feature rows");
  if (num_cameras <= 0) throw ValidationError("dataset: num_cameras must be positive");
  std::set<int> seen_ids;
  for (Index i = 0; i < n; ++i) {
    const SampleMeta& m = metas[static_cast<size_t>(i)];
    const std::string where = "metadata row " + std::to_string(i);
    if (!seen_ids.insert(m.sample_id).second)
      throw ValidationError(where + ": duplicate sample_id " + std::to_string(m.sample_id));
    if (m.sample_id < 0 || m.sample_id >= n)
      throw ValidationError(where + ": sample_id " + std::to_string(m.sample_id) +
                            " outside [0, " + std::to_string(n) + ")");
    if (m.camera_id < 0 || m.camera_id >= num_cameras)
      throw ValidationError(where + ": camera_id " + std::to_string(m.camera_id) +
                            " outside [0, " + std::to_string(num_cameras) + ")");
    if (m.frame_id < 0)
      throw ValidationError(where + ": negative frame_id " + std::to_string(m.frame_id));
    if (m.person_id < kUnknownPersonId)
      throw ValidationError(where + ": person_id " + std::to_string(m.person_id));
  }
  if (!features.raw.allFinite()) {
    for (Index i = 0; i < features.raw.rows(); ++i)
      if (!features.raw.row(i).allFinite())
        throw ValidationError("feature row " + std::to_string(i) + ": non-finite value");
  }
  if (features.has_embedded()) {
    if (features.embedded.rows() != n)
      throw ValidationError("dataset: embedded view row count mismatch");
    for (Index i = 0; i < n; ++i) {
      const Scalar norm = features.embedded.row(i).norm();
      if (std::abs(norm - 1.0) > 1e-6)
        throw ValidationError("embedded row " + std::to_string(i) + ": norm " +
                              std::to_string(norm) + " not unit");
    }
  }
}

void MultiLabels::validate() const {
  const int n = static_cast<int>(positives.size());
  for (int i = 0; i < n; ++i) {
    const auto& p = positives[static_cast<size_t>(i)];
    if (!std::is_sorted(p.begin(), p.end()))
      throw ValidationError("multi-labels: positives of " + std::to_string(i) + " not sorted");
    if (!std::binary_search(p.begin(), p.end(), i))
      throw ValidationError("multi-labels: sample " + std::to_string(i) + " missing self");
    for (int j : p) {
      if (j < 0 || j >= n)
        throw ValidationError("multi-labels: index " + std::to_string(j) + " out of range");
      const auto& q = positives[static_cast<size_t>(j)];
      if (!std::binary_search(q.begin(), q.end(), i))
        throw ValidationError("multi-labels: asymmetric pair (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
    }
  }
}

Matrix MultiLabels::dense() const {
  const Index n = size();
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (int j : positives[static_cast<size_t>(i)]) m(i, j) = 1.0;
  return m;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  return cells;
}

long long parse_ll(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": expected integer, got '" + s + "'");
  }
}

}  // namespace

Dataset load_dataset(const std::string& meta_path, const std::string& feature_path) {
  std::ifstream is(meta_path);
  if (!is) throw ValidationError("cannot open: " + meta_path);

  Dataset d;
  std::string line;
  int lineno = 0;
  int declared_cameras = -1;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      // optional directives ahead of the column header
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = line.substr(1, eq - 1);
        const std::string val = line.substr(eq + 1);
        if (key.find("num_cameras") != std::string::npos)
          declared_cameras = static_cast<int>(parse_ll(val, meta_path + ":" + std::to_string(lineno)));
        else if (key.find("domain") != std::string::npos)
          d.domain_tag = (val == "source") ? DomainTag::kSource : DomainTag::kTarget;
      }
      continue;
    }
    if (!header_seen) {
      if (line != "sample_id,person_id,camera_id,frame_id")
        throw ValidationError(meta_path + ":" + std::to_string(lineno) +
                              ": bad header, expected sample_id,person_id,camera_id,frame_id");
      header_seen = true;
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != 4)
      throw ValidationError(meta_path + ":" + std::to_string(lineno) + ": expected 4 columns, got " +
                            std::to_string(cells.size()));
    const std::string where = meta_path + ":" + std::to_string(lineno);
    SampleMeta m;
    m.sample_id = static_cast<int>(parse_ll(cells[0], where));
    m.person_id = static_cast<int>(parse_ll(cells[1], where));
    m.camera_id = static_cast<int>(parse_ll(cells[2], where));
    m.frame_id = parse_ll(cells[3], where);
    d.metas.push_back(m);
  }
  if (!header_seen) throw ValidationError(meta_path + ": missing header row");

  d.features.raw = load_matrix_f32(feature_path);
  int max_cam = -1;
  for (const auto& m : d.metas) max_cam = std::max(max_cam, m.camera_id);
  d.num_cameras = declared_cameras >= 0 ? declared_cameras : max_cam + 1;
  d.validate();
  return d;
}

void save_dataset(const Dataset& d, const std::string& meta_path,
                  const std::string& feature_path) {
  d.validate();
  std::ofstream os(meta_path);
  if (!os) throw ValidationError("cannot open for write: " + meta_path);
  os << "# num_cameras=" << d.num_cameras << "\n";
  os << "# domain=" << (d.domain_tag == DomainTag::kSource ? "source" : "target") << "\n";
  os << "sample_id,person_id,camera_id,frame_id\n";
  for (const auto& m : d.metas)
    os << m.sample_id << "," << m.person_id << "," << m.camera_id << "," << m.frame_id << "\n";
  if (!os) throw ValidationError("write failed: " + meta_path);
  save_matrix_f32(feature_path, d.features.raw);
}

std::pair<std::vector<int>, std::vector<int>> split_query_gallery(
    const Dataset& d, double query_fraction, std::uint64_t seed,
    std::vector<int>* excluded_single_camera_persons) {
  if (!(query_fraction > 0.0 && query_fraction < 1.0))
    throw ValidationError("query_fraction must lie strictly inside (0,1)");
  if (!d.has_known_ids())
    throw ValidationError("split_query_gallery: dataset contains unknown person ids");

  std::map<int, std::vector<int>> by_person;  // ordered => deterministic iteration
  for (Index i = 0; i < d.size(); ++i)
    by_person[d.metas[static_cast<size_t>(i)].person_id].push_back(static_cast<int>(i));

  std::vector<int> query;
  std::set<int> query_set;
  if (excluded_single_camera_persons) excluded_single_camera_persons->clear();

  for (const auto& [pid, samples] : by_person) {
    std::set<int> cams;
    for (int s : samples) cams.insert(d.metas[static_cast<size_t>(s)].camera_id);
    if (cams.size() < 2) {
      if (excluded_single_camera_persons) excluded_single_camera_persons->push_back(pid);
      continue;
    }
    const int want = std::max(1, static_cast<int>(query_fraction * static_cast<double>(samples.size())));
    std::vector<int> shuffled = samples;
    std::mt19937_64 rng(substream_seed(seed, 0x51u, static_cast<std::uint64_t>(pid)));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    std::vector<int> chosen;
    for (int cand : shuffled) {
      if (static_cast<int>(chosen.size()) >= want) break;
      // accept only if the rest of this person's images still cover another camera
      const int cam = d.metas[static_cast<size_t>(cand)].camera_id;
      bool cross_left = false;
      for (int s : samples) {
        if (s == cand) continue;
        if (std::find(chosen.begin(), chosen.end(), s) != chosen.end()) continue;
        if (d.metas[static_cast<size_t>(s)].camera_id != cam) {
          cross_left = true;
          break;
        }
      }
      if (cross_left) chosen.push_back(cand);
    }
    for (int c : chosen) {
      query.push_back(c);
      query_set.insert(c);
    }
  }

  std::vector<int> gallery;
  for (Index i = 0; i < d.size(); ++i)
    if (!query_set.count(static_cast<int>(i))) gallery.push_back(static_cast<int>(i));
  std::sort(query.begin(), query.end());
  return {query, gallery};
}

void save_multi_labels(const MultiLabels& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for write: " + path);
  for (size_t i = 0; i < m.positives.size(); ++i) {
    os << i;
    for (int j : m.positives[i]) os << " " << j;
    os << "\n";
  }
}

MultiLabels load_multi_labels(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open: " + path);
  MultiLabels m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long idx;
    ls >> idx;
    if (static_cast<size_t>(idx) != m.positives.size())
      throw ValidationError(path + ": rows must be consecutive sample indices");
    std::vector<int> pos;
    int j;
    while (ls >> j) pos.push_back(j);
    m.positives.push_back(std::move(pos));
  }
  m.validate();
  return m;
}

}  // namespace jvtc

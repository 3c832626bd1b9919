#include "jvtc/label_engine.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

namespace jvtc {

ClusterAssignment dbscan(const Matrix& sim, double eps, int min_pts) {
  const Index n = sim.rows();
  if (sim.cols() != n) throw ValidationError("dbscan: similarity matrix must be square");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("dbscan: eps must lie in (0,1)");
  if (min_pts < 1) throw ValidationError("dbscan: min_pts must be >= 1");

  // neighborhoods under d = 1 - sim, inclusive of eps and of the point itself
  std::vector<std::vector<int>> neighbors(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    auto& ni = neighbors[static_cast<size_t>(i)];
    for (Index j = 0; j < n; ++j)
      if (1.0 - sim(i, j) <= eps) ni.push_back(static_cast<int>(j));
  }

  constexpr int kUnvisited = -2;
  ClusterAssignment out;
  out.cluster_ids.assign(static_cast<size_t>(n), kUnvisited);
  out.core.assign(static_cast<size_t>(n), false);
  for (Index i = 0; i < n; ++i)
    out.core[static_cast<size_t>(i)] =
        static_cast<int>(neighbors[static_cast<size_t>(i)].size()) >= min_pts;

  int next_cluster = 0;
  for (Index seed = 0; seed < n; ++seed) {
    auto& label = out.cluster_ids[static_cast<size_t>(seed)];
    if (label != kUnvisited) continue;
    if (!out.core[static_cast<size_t>(seed)]) {
      label = kNoise;
      continue;
    }
    const int cluster = next_cluster++;
    label = cluster;
    std::deque<int> frontier(neighbors[static_cast<size_t>(seed)].begin(),
                             neighbors[static_cast<size_t>(seed)].end());
    while (!frontier.empty()) {
      const int q = frontier.front();
      frontier.pop_front();
      int& ql = out.cluster_ids[static_cast<size_t>(q)];
      if (ql == kNoise) ql = cluster;  // border point, previously unreachable
      if (ql != kUnvisited) continue;
      ql = cluster;
      if (out.core[static_cast<size_t>(q)]) {
        const auto& nq = neighbors[static_cast<size_t>(q)];
        frontier.insert(frontier.end(), nq.begin(), nq.end());
      }
    }
  }
  out.num_clusters = next_cluster;
  return out;
}

MultiLabels labels_from_clusters(const ClusterAssignment& assign) {
  const Index n = assign.size();
  std::map<int, std::vector<int>> members;
  for (Index i = 0; i < n; ++i) {
    const int c = assign.cluster_ids[static_cast<size_t>(i)];
    if (c >= 0) members[c].push_back(static_cast<int>(i));
  }
  MultiLabels out;
  out.positives.resize(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int c = assign.cluster_ids[static_cast<size_t>(i)];
    if (c >= 0)
      out.positives[static_cast<size_t>(i)] = members[c];
    else
      out.positives[static_cast<size_t>(i)] = {static_cast<int>(i)};
  }
  return out;
}

PurityResult purity(const ClusterAssignment& assign, const std::vector<int>& true_ids) {
  if (true_ids.size() != assign.cluster_ids.size())
    throw ValidationError("purity: one true id per sample required");
  PurityResult r;
  std::map<int, std::map<int, Index>> tally;  // cluster -> id -> count
  Index clustered = 0;
  for (size_t i = 0; i < true_ids.size(); ++i) {
    const int c = assign.cluster_ids[i];
    if (c < 0) {
      ++r.noise_count;
      continue;
    }
    ++tally[c][true_ids[i]];
    ++clustered;
  }
  if (clustered == 0) {
    r.all_noise = true;
    r.value = 0.0;
    return r;
  }
  Index majority_total = 0;
  for (const auto& [c, by_id] : tally) {
    (void)c;
    Index best = 0;
    for (const auto& [id, count] : by_id) {
      (void)id;
      best = std::max(best, count);
    }
    majority_total += best;
  }
  r.value = static_cast<double>(majority_total) / static_cast<double>(clustered);
  return r;
}

void save_cluster_assignment(const ClusterAssignment& a, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for write: " + path);
  os << "sample_id,cluster_id\n";
  for (size_t i = 0; i < a.cluster_ids.size(); ++i) os << i << "," << a.cluster_ids[i] << "\n";
}

ClusterAssignment load_cluster_assignment(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open: " + path);
  ClusterAssignment a;
  std::string line;
  if (!std::getline(is, line) || line.rfind("sample_id,cluster_id", 0) != 0)
    throw ValidationError(path + ": expected sample_id,cluster_id header");
  int max_cluster = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string sid, cid;
    if (!std::getline(ls, sid, ',') || !std::getline(ls, cid))
      throw ValidationError(path + ": malformed row '" + line + "'");
    try {
      if (std::stoll(sid) != static_cast<long long>(a.cluster_ids.size()))
        throw ValidationError(path + ": rows must be consecutive sample ids");
      const int c = static_cast<int>(std::stoll(cid));
      a.cluster_ids.push_back(c);
      max_cluster = std::max(max_cluster, c);
    } catch (const std::invalid_argument&) {
      throw ValidationError(path + ": malformed row '" + line + "'");
    } catch (const std::out_of_range&) {
      throw ValidationError(path + ": malformed row '" + line + "'");
    }
  }
  a.core.assign(a.cluster_ids.size(), false);
  a.num_clusters = max_cluster + 1;
  return a;
}

}  // namespace jvtc

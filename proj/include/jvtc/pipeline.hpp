#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "jvtc/types.hpp"

namespace jvtc {

// Command implementations behind the CLI, callable directly from tests.
// Each writes its artifacts plus a manifest and throws on invalid input.

struct SynthCommand {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
};
void run_synth(const SynthCommand& cmd);

struct HistCommand {
  std::string data_dir;
  std::string config_path;       // binning + smoothing keys
  std::string labels_path;       // cluster assignment CSV; empty = person ids
  std::string out_path;
};
void run_hist(const HistCommand& cmd);

struct ClusterCommand {
  std::string data_dir;
  std::string config_path;
  std::string out_dir;
  std::string mode = "joint";    // "visual" | "joint"
  std::string hist_path;         // required for joint mode
  std::string embedder_path;     // optional checkpoint; empty = normalized raw
  std::string sim_dump_path;     // optional binary dump of the similarity matrix
};
void run_cluster(const ClusterCommand& cmd);

struct TrainCommand {
  std::string data_dir;
  std::string config_path;
  std::string out_dir;
  std::string source_dir;        // optional labeled source dataset
};
void run_train(const TrainCommand& cmd);

struct EvalCommand {
  std::string data_dir;
  std::string run_dir;
  std::string mode = "visual";
  std::string out_path;
  double query_fraction = 0.25;
  std::uint64_t split_seed = 7;
  std::string feature_source = "embedder";  // "embedder" | "bank"
  std::string config_path;                  // optional fusion/threading overrides
};
void run_eval(const EvalCommand& cmd);

struct RankCommand {
  std::string data_dir;
  std::string run_dir;
  int query_sample_id = 0;
  int top_k = 5;
  std::string mode = "visual";
  std::string out_path;          // empty = stdout only
};
void run_rank(const RankCommand& cmd);

}  // namespace jvtc

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "jvtc/dataset.hpp"
#include "jvtc/evaluator.hpp"
#include "jvtc/objective.hpp"
#include "jvtc/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("jvtc_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& body) {
  std::ofstream os(path);
  os << body;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return std::string(std::istreambuf_iterator<char>(is), {});
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(JVTC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

const char* kWorldCfg =
    "num_persons = 12\n"
    "num_cameras = 3\n"
    "images_per_person_per_camera = 3\n"
    "feature_dim = 16\n"
    "appearance_spread = 0.25\n"
    "twin_fraction = 0.2\n"
    "camera_style_strength = 0.5\n"
    "seed = 5\n"
    "camera_offsets = 600 0 -400\n"
    "camera_jitters = 40 40 40\n";

const char* kTrainCfg =
    "total_epochs = 4\n"
    "batch_originals = 8\n"
    "augments_per_item = 2\n"
    "label_refresh_period = 2\n"
    "global_loss_start_epoch = 1\n"
    "joint_similarity_start_epoch = 2\n"
    "lr_decay_epoch = 3\n"
    "embed_dim = 12\n"
    "dbscan_eps = 0.35\n"
    "dbscan_min_pts = 3\n"
    "bin_width = 100\n"
    "max_interval = 2000\n"
    "smoothing_sigma = 100\n"
    "seed = 17\n";

}  // namespace

TEST_CASE("synth -> train -> eval -> rank pipeline produces every artifact") {
  TempDir tmp;
  write_file(tmp.file("world.cfg"), kWorldCfg);
  write_file(tmp.file("train.cfg"), kTrainCfg);

  REQUIRE(run_cli("synth --config " + tmp.file("world.cfg") + " --out " + tmp.file("data")) == 0);
  for (const char* f : {"meta.csv", "features.bin", "ground_truth.txt", "manifest.txt"})
    CHECK(fs::exists(tmp.path / "data" / f));

  REQUIRE(run_cli("train --data " + tmp.file("data") + " --config " + tmp.file("train.cfg") +
                  " --out " + tmp.file("run")) == 0);
  for (const char* f : {"embedder.bin", "bank.bin", "temporal_model.txt", "clusters.csv",
                        "multilabels.txt", "log.csv", "manifest.txt"})
    CHECK(fs::exists(tmp.path / "run" / f));

  REQUIRE(run_cli("eval --data " + tmp.file("data") + " --run " + tmp.file("run") +
                  " --mode joint --out " + tmp.file("report.csv")) == 0);
  const std::string report = slurp(tmp.file("report.csv"));
  CHECK(report.find("mAP") != std::string::npos);
  CHECK(report.rfind("joint,", 0) == std::string::npos);  // header first
  CHECK(report.find("joint,") != std::string::npos);
  CHECK(fs::exists(tmp.file("report.csv") + ".txt"));  // aligned table alongside

  REQUIRE(run_cli("eval --data " + tmp.file("data") + " --run " + tmp.file("run") +
                  " --mode visual --features bank --out " + tmp.file("report_bank.csv")) == 0);

  REQUIRE(run_cli("rank --data " + tmp.file("data") + " --run " + tmp.file("run") +
                  " --query 3 --topk 5 --mode visual --out " + tmp.file("rank_vis.csv")) == 0);
  REQUIRE(run_cli("rank --data " + tmp.file("data") + " --run " + tmp.file("run") +
                  " --query 3 --topk 5 --mode joint --out " + tmp.file("rank_joint.csv")) == 0);
  // both lists: header plus five rows
  for (const char* f : {"rank_vis.csv", "rank_joint.csv"}) {
    const std::string body = slurp(tmp.file(f));
    CHECK(std::count(body.begin(), body.end(), '\n') == 6);
  }

  // the emitted visual list must agree with a direct library-side ranking
  {
    const jvtc::Dataset data =
        jvtc::load_dataset(tmp.file("data/meta.csv"), tmp.file("data/features.bin"));
    const jvtc::Embedder emb = jvtc::Embedder::load(tmp.file("run/embedder.bin"));
    const jvtc::Matrix features = emb.embed_rows(data.features.raw);
    std::vector<int> gallery;
    int query_idx = -1;
    for (jvtc::Index i = 0; i < data.size(); ++i) {
      if (data.metas[static_cast<size_t>(i)].sample_id == 3)
        query_idx = static_cast<int>(i);
      else
        gallery.push_back(static_cast<int>(i));
    }
    const auto expected = jvtc::rank_query(query_idx, gallery, features, data.metas, nullptr,
                                           jvtc::EvalMode::kVisual, 5);
    std::istringstream body(slurp(tmp.file("rank_vis.csv")));
    std::string line;
    std::getline(body, line);  // header
    for (const auto& [sid, score] : expected) {
      REQUIRE(std::getline(body, line));
      std::istringstream cells(line);
      std::string rank_cell, sid_cell;
      std::getline(cells, rank_cell, ',');
      std::getline(cells, sid_cell, ',');
      CHECK(std::stoi(sid_cell) == sid);
    }
  }
}

TEST_CASE("hist and cluster subcommands run standalone") {
  TempDir tmp;
  write_file(tmp.file("world.cfg"), kWorldCfg);
  write_file(tmp.file("train.cfg"), kTrainCfg);
  REQUIRE(run_cli("synth --config " + tmp.file("world.cfg") + " --out " + tmp.file("data")) == 0);

  // histogram from true person ids
  REQUIRE(run_cli("hist --data " + tmp.file("data") + " --config " + tmp.file("train.cfg") +
                  " --out " + tmp.file("tm.txt")) == 0);
  CHECK(fs::exists(tmp.file("tm.txt")));
  CHECK(fs::exists(tmp.file("tm.txt") + ".manifest"));

  REQUIRE(run_cli("cluster --data " + tmp.file("data") + " --config " + tmp.file("train.cfg") +
                  " --out " + tmp.file("cl") + " --mode visual --dump-sim " +
                  tmp.file("sim.bin")) == 0);
  CHECK(fs::exists(tmp.path / "cl" / "clusters.csv"));
  CHECK(fs::exists(tmp.path / "cl" / "multilabels.txt"));
  CHECK(fs::exists(tmp.file("sim.bin")));

  REQUIRE(run_cli("cluster --data " + tmp.file("data") + " --config " + tmp.file("train.cfg") +
                  " --out " + tmp.file("cl_joint") + " --mode joint --hist " +
                  tmp.file("tm.txt")) == 0);
  CHECK(fs::exists(tmp.path / "cl_joint" / "clusters.csv"));

  // labels file feeds back into hist
  REQUIRE(run_cli("hist --data " + tmp.file("data") + " --config " + tmp.file("train.cfg") +
                  " --labels " + (tmp.path / "cl" / "clusters.csv").string() + " --out " +
                  tmp.file("tm2.txt")) == 0);
}

TEST_CASE("identical runs produce identical manifests and artifacts") {
  TempDir tmp;
  write_file(tmp.file("world.cfg"), kWorldCfg);
  write_file(tmp.file("train.cfg"), kTrainCfg);
  REQUIRE(run_cli("synth --config " + tmp.file("world.cfg") + " --out " + tmp.file("dataA")) == 0);
  REQUIRE(run_cli("synth --config " + tmp.file("world.cfg") + " --out " + tmp.file("dataB")) == 0);
  CHECK(slurp(tmp.file("dataA/manifest.txt")) == slurp(tmp.file("dataB/manifest.txt")));
  CHECK(slurp(tmp.file("dataA/features.bin")) == slurp(tmp.file("dataB/features.bin")));

  REQUIRE(run_cli("train --data " + tmp.file("dataA") + " --config " + tmp.file("train.cfg") +
                  " --out " + tmp.file("runA")) == 0);
  REQUIRE(run_cli("train --data " + tmp.file("dataA") + " --config " + tmp.file("train.cfg") +
                  " --out " + tmp.file("runB")) == 0);
  CHECK(slurp(tmp.file("runA/manifest.txt")) == slurp(tmp.file("runB/manifest.txt")));
  CHECK(slurp(tmp.file("runA/embedder.bin")) == slurp(tmp.file("runB/embedder.bin")));
  CHECK(slurp(tmp.file("runA/bank.bin")) == slurp(tmp.file("runB/bank.bin")));

  // a different seed changes the artifacts
  REQUIRE(run_cli("synth --config " + tmp.file("world.cfg") + " --seed 99 --out " +
                  tmp.file("dataC")) == 0);
  CHECK(slurp(tmp.file("dataA/features.bin")) != slurp(tmp.file("dataC/features.bin")));
}

TEST_CASE("bad invocations exit nonzero") {
  TempDir tmp;
  CHECK(run_cli("frobnicate") != 0);
  CHECK(run_cli("synth --no-such-flag x") != 0);
  CHECK(run_cli("synth --config " + tmp.file("missing.cfg") + " --out " + tmp.file("d")) != 0);
  CHECK(run_cli("eval --data " + tmp.file("nope") + " --run " + tmp.file("nope") +
                " --out " + tmp.file("r.csv")) != 0);
  write_file(tmp.file("broken.cfg"), "this is not a key value line\n");
  CHECK(run_cli("synth --config " + tmp.file("broken.cfg") + " --out " + tmp.file("d2")) != 0);
}

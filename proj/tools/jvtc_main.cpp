#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jvtc/pipeline.hpp"
#include "jvtc/types.hpp"

int main(int argc, char** argv) {
  CLI::App app{"jvtc: camera-network retrieval pipeline (synthetic-world scale)"};
  app.require_subcommand(1);

  jvtc::SynthCommand synth_cmd;
  std::int64_t synth_seed = -1;
  auto* synth = app.add_subcommand("synth", "generate a synthetic camera-network dataset");
  synth->add_option("--config", synth_cmd.config_path, "world config file")->required();
  synth->add_option("--out", synth_cmd.out_dir, "output directory")->required();
  synth->add_option("--seed", synth_seed, "override the config seed");

  jvtc::HistCommand hist_cmd;
  auto* hist = app.add_subcommand("hist", "estimate and smooth interval histograms");
  hist->add_option("--data", hist_cmd.data_dir, "dataset directory")->required();
  hist->add_option("--config", hist_cmd.config_path, "config with binning keys")->required();
  hist->add_option("--labels", hist_cmd.labels_path,
                   "cluster assignment CSV (default: dataset person ids)");
  hist->add_option("--out", hist_cmd.out_path, "output model file")->required();

  jvtc::ClusterCommand cluster_cmd;
  auto* cluster = app.add_subcommand("cluster", "density-cluster a dataset into pseudo labels");
  cluster->add_option("--data", cluster_cmd.data_dir, "dataset directory")->required();
  cluster->add_option("--config", cluster_cmd.config_path, "config file")->required();
  cluster->add_option("--out", cluster_cmd.out_dir, "output directory")->required();
  cluster->add_option("--mode", cluster_cmd.mode, "visual|joint (default joint)");
  cluster->add_option("--hist", cluster_cmd.hist_path, "temporal model (joint mode)");
  cluster->add_option("--embedder", cluster_cmd.embedder_path, "embedder checkpoint");
  cluster->add_option("--dump-sim", cluster_cmd.sim_dump_path,
                      "also write the similarity matrix (binary f32)");

  jvtc::TrainCommand train_cmd;
  auto* train = app.add_subcommand("train", "run the full training schedule");
  train->add_option("--data", train_cmd.data_dir, "target dataset directory")->required();
  train->add_option("--config", train_cmd.config_path, "training config file")->required();
  train->add_option("--out", train_cmd.out_dir, "run output directory")->required();
  train->add_option("--source", train_cmd.source_dir, "labeled source dataset directory");

  jvtc::EvalCommand eval_cmd;
  auto* eval = app.add_subcommand("eval", "cross-camera retrieval evaluation");
  eval->add_option("--data", eval_cmd.data_dir, "dataset directory")->required();
  eval->add_option("--run", eval_cmd.run_dir, "training run directory")->required();
  eval->add_option("--mode", eval_cmd.mode, "visual|joint (default visual)");
  eval->add_option("--out", eval_cmd.out_path, "report CSV path")->required();
  eval->add_option("--query-fraction", eval_cmd.query_fraction, "query fraction (default 0.25)");
  eval->add_option("--seed", eval_cmd.split_seed, "query/gallery split seed (default 7)");
  eval->add_option("--features", eval_cmd.feature_source, "embedder|bank (default embedder)");
  eval->add_option("--config", eval_cmd.config_path, "optional fusion/threading overrides");

  jvtc::RankCommand rank_cmd;
  auto* rank = app.add_subcommand("rank", "top-k gallery ranking for one query");
  rank->add_option("--data", rank_cmd.data_dir, "dataset directory")->required();
  rank->add_option("--run", rank_cmd.run_dir, "training run directory")->required();
  rank->add_option("--query", rank_cmd.query_sample_id, "query sample id")->required();
  rank->add_option("--topk", rank_cmd.top_k, "list length (default 5)");
  rank->add_option("--mode", rank_cmd.mode, "visual|joint (default visual)");
  rank->add_option("--out", rank_cmd.out_path, "write CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      if (synth_seed >= 0) synth_cmd.seed_override = static_cast<std::uint64_t>(synth_seed);
      jvtc::run_synth(synth_cmd);
    } else if (*hist) {
      jvtc::run_hist(hist_cmd);
    } else if (*cluster) {
      jvtc::run_cluster(cluster_cmd);
    } else if (*train) {
      jvtc::run_train(train_cmd);
    } else if (*eval) {
      jvtc::run_eval(eval_cmd);
    } else if (*rank) {
      jvtc::run_rank(rank_cmd);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "jvtc/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "jvtc/config.hpp"
#include "jvtc/dataset.hpp"
#include "jvtc/evaluator.hpp"
#include "jvtc/label_engine.hpp"
#include "jvtc/manifest.hpp"
#include "jvtc/matrix_io.hpp"
#include "jvtc/objective.hpp"
#include "jvtc/similarity.hpp"
#include "jvtc/synth_world.hpp"
#include "jvtc/temporal_model.hpp"
#include "jvtc/trainer.hpp"

namespace jvtc {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create directory " + dir + ": " + ec.message());
}

Dataset load_data_dir(const std::string& dir) {
  return load_dataset(join(dir, "meta.csv"), join(dir, "features.bin"));
}

std::uint64_t config_hash_of(const KeyValueConfig& kv) { return fnv1a64(kv.canonical()); }

Matrix eval_features(const EvalCommand& cmd, const Dataset& data) {
  if (cmd.feature_source == "bank") {
    return MemoryBank::load(join(cmd.run_dir, "bank.bin")).slots();
  }
  if (cmd.feature_source == "embedder") {
    const Embedder emb = Embedder::load(join(cmd.run_dir, "embedder.bin"));
    return emb.embed_rows(data.features.raw);
  }
  throw ValidationError("eval: feature source must be 'embedder' or 'bank', got '" +
                        cmd.feature_source + "'");
}

EvalMode parse_mode(const std::string& mode) {
  if (mode == "visual") return EvalMode::kVisual;
  if (mode == "joint") return EvalMode::kJoint;
  throw ValidationError("mode must be 'visual' or 'joint', got '" + mode + "'");
}

FusionParams fusion_from_kv(const KeyValueConfig& kv) {
  FusionParams p;
  p.lambda_vs = kv.get_double("lambda_vs", p.lambda_vs);
  p.gamma_vs = kv.get_double("gamma_vs", p.gamma_vs);
  p.lambda_ts = kv.get_double("lambda_ts", p.lambda_ts);
  p.gamma_ts = kv.get_double("gamma_ts", p.gamma_ts);
  return p;
}

BinSpec binning_from_kv(const KeyValueConfig& kv) {
  BinSpec b;
  b.bin_width = kv.get_double("bin_width", b.bin_width);
  b.max_interval = kv.get_double("max_interval", b.max_interval);
  return b;
}

}  // namespace

void run_synth(const SynthCommand& cmd) {
  KeyValueConfig kv = KeyValueConfig::parse_file(cmd.config_path);
  if (cmd.seed_override) kv.set("seed", std::to_string(*cmd.seed_override));
  WorldConfig cfg = world_config_from_kv(kv);
  ensure_dir(cmd.out_dir);

  auto [data, gt] = generate_world(cfg);
  save_dataset(data, join(cmd.out_dir, "meta.csv"), join(cmd.out_dir, "features.bin"));
  save_ground_truth(gt, join(cmd.out_dir, "ground_truth.txt"));

  Manifest m;
  m.command = "synth";
  m.config_hash = config_hash_of(kv);
  m.seed = cfg.seed;
  m.add_file("meta.csv", join(cmd.out_dir, "meta.csv"));
  m.add_file("features.bin", join(cmd.out_dir, "features.bin"));
  m.add_file("ground_truth.txt", join(cmd.out_dir, "ground_truth.txt"));
  m.write(join(cmd.out_dir, "manifest.txt"));
  std::cout << "synth: wrote " << data.size() << " samples to " << cmd.out_dir << "\n";
}

void run_hist(const HistCommand& cmd) {
  const KeyValueConfig kv = KeyValueConfig::parse_file(cmd.config_path);
  const Dataset data = load_data_dir(cmd.data_dir);

  std::vector<int> labels;
  if (cmd.labels_path.empty()) {
    if (!data.has_known_ids())
      throw ValidationError("hist: dataset has unknown ids; provide a labels file");
    labels = data.person_ids();
  } else {
    const ClusterAssignment a = load_cluster_assignment(cmd.labels_path);
    if (a.size() != data.size())
      throw ValidationError("hist: labels file size does not match dataset");
    labels = a.cluster_ids;
  }

  TemporalModel model = estimate_histograms(data.metas, labels, binning_from_kv(kv));
  model = smooth(model, kv.get_double("smoothing_sigma", 100.0));
  model.set_max_normalize(kv.get_bool("max_normalize_ts", true));
  model.set_intra_neutral(kv.get_bool("intra_neutral_ts", false));
  save_temporal_model(model, cmd.out_path);

  Manifest m;
  m.command = "hist";
  m.config_hash = config_hash_of(kv);
  m.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  m.add_file(fs::path(cmd.out_path).filename().string(), cmd.out_path);
  m.write(cmd.out_path + ".manifest");
  std::cout << "hist: wrote " << cmd.out_path << "\n";
}

void run_cluster(const ClusterCommand& cmd) {
  const KeyValueConfig kv = KeyValueConfig::parse_file(cmd.config_path);
  const Dataset data = load_data_dir(cmd.data_dir);
  ensure_dir(cmd.out_dir);

  Matrix features;
  if (cmd.embedder_path.empty())
    features = row_normalized(data.features.raw);
  else
    features = Embedder::load(cmd.embedder_path).embed_rows(data.features.raw);

  PairwiseOptions pw;
  pw.max_samples = kv.get_int("max_pairwise", pw.max_samples);
  pw.num_threads = static_cast<int>(kv.get_int("num_threads", 0));
  const FusionParams fusion = fusion_from_kv(kv);

  Matrix sim;
  if (cmd.mode == "visual") {
    sim = pairwise_joint_visual(features, fusion, pw);
  } else if (cmd.mode == "joint") {
    if (cmd.hist_path.empty())
      throw ValidationError("cluster: joint mode requires --hist");
    const TemporalModel tm = load_temporal_model(cmd.hist_path);
    sim = pairwise_joint(features, data.metas, tm, fusion, pw);
  } else {
    throw ValidationError("cluster: mode must be 'visual' or 'joint'");
  }

  const ClusterAssignment assign =
      dbscan(sim, kv.get_double("dbscan_eps", 0.6),
             static_cast<int>(kv.get_int("dbscan_min_pts", 4)));
  const MultiLabels labels = labels_from_clusters(assign);
  save_cluster_assignment(assign, join(cmd.out_dir, "clusters.csv"));
  save_multi_labels(labels, join(cmd.out_dir, "multilabels.txt"));
  if (!cmd.sim_dump_path.empty()) save_matrix_f32(cmd.sim_dump_path, sim);

  Manifest m;
  m.command = "cluster";
  m.config_hash = config_hash_of(kv);
  m.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  m.add_file("clusters.csv", join(cmd.out_dir, "clusters.csv"));
  m.add_file("multilabels.txt", join(cmd.out_dir, "multilabels.txt"));
  if (!cmd.sim_dump_path.empty())
    m.add_file(fs::path(cmd.sim_dump_path).filename().string(), cmd.sim_dump_path);
  m.write(join(cmd.out_dir, "manifest.txt"));
  std::cout << "cluster: " << assign.num_clusters << " clusters over " << data.size()
            << " samples\n";
}

void run_train(const TrainCommand& cmd) {
  const KeyValueConfig kv = KeyValueConfig::parse_file(cmd.config_path);
  TrainConfig cfg = TrainConfig::from_kv(kv);
  const Dataset target = load_data_dir(cmd.data_dir);
  std::optional<Dataset> source;
  if (!cmd.source_dir.empty()) {
    source = load_data_dir(cmd.source_dir);
    cfg.use_src = true;
  }
  ensure_dir(cmd.out_dir);

  const TrainResult result = train(target, source ? &*source : nullptr, cfg);

  result.embedder.save(join(cmd.out_dir, "embedder.bin"));
  result.bank.save(join(cmd.out_dir, "bank.bin"));
  save_temporal_model(result.temporal, join(cmd.out_dir, "temporal_model.txt"));
  save_cluster_assignment(result.final_assignment, join(cmd.out_dir, "clusters.csv"));
  save_multi_labels(result.final_labels, join(cmd.out_dir, "multilabels.txt"));
  save_training_log(result.log, join(cmd.out_dir, "log.csv"));

  Manifest m;
  m.command = "train";
  m.config_hash = config_hash_of(kv);
  m.seed = cfg.seed;
  for (const char* name : {"embedder.bin", "bank.bin", "temporal_model.txt", "clusters.csv",
                           "multilabels.txt", "log.csv"})
    m.add_file(name, join(cmd.out_dir, name));
  m.write(join(cmd.out_dir, "manifest.txt"));
  std::cout << "train: finished " << cfg.total_epochs << " epochs, final clusters "
            << result.final_assignment.num_clusters << "\n";
}

void run_eval(const EvalCommand& cmd) {
  const Dataset data = load_data_dir(cmd.data_dir);
  const EvalMode mode = parse_mode(cmd.mode);
  const Matrix features = eval_features(cmd, data);

  const auto [query, gallery] = split_query_gallery(data, cmd.query_fraction, cmd.split_seed);

  std::optional<TemporalModel> tm;
  EvalOptions opts;
  if (!cmd.config_path.empty()) {
    const KeyValueConfig kv = KeyValueConfig::parse_file(cmd.config_path);
    opts.fusion = fusion_from_kv(kv);
    opts.num_threads = static_cast<int>(kv.get_int("num_threads", 0));
  }
  if (mode == EvalMode::kJoint)
    tm = load_temporal_model(join(cmd.run_dir, "temporal_model.txt"));

  const EvalReport report =
      evaluate(query, gallery, features, data.metas, tm ? &*tm : nullptr, mode, opts);
  save_eval_report_csv(report, cmd.out_path);
  {
    std::ofstream table(cmd.out_path + ".txt");
    table << ablation_report({{cmd.mode, report}});
  }

  Manifest m;
  m.command = "eval";
  m.config_hash = fnv1a64(cmd.mode + "|" + cmd.feature_source + "|" +
                          std::to_string(cmd.query_fraction));
  m.seed = cmd.split_seed;
  m.add_file(fs::path(cmd.out_path).filename().string(), cmd.out_path);
  m.write(cmd.out_path + ".manifest");
  std::cout << "eval(" << cmd.mode << "): mAP=" << report.mean_ap << " r1=" << report.cmc[0]
            << " over " << report.queries_evaluated << " queries\n";
}

void run_rank(const RankCommand& cmd) {
  const Dataset data = load_data_dir(cmd.data_dir);
  const Embedder emb = Embedder::load(join(cmd.run_dir, "embedder.bin"));
  const Matrix features = emb.embed_rows(data.features.raw);
  const EvalMode mode = parse_mode(cmd.mode);

  int query_idx = -1;
  std::vector<int> gallery;
  for (Index i = 0; i < data.size(); ++i) {
    if (data.metas[static_cast<size_t>(i)].sample_id == cmd.query_sample_id)
      query_idx = static_cast<int>(i);
    else
      gallery.push_back(static_cast<int>(i));
  }
  if (query_idx < 0)
    throw ValidationError("rank: no sample with id " + std::to_string(cmd.query_sample_id));

  std::optional<TemporalModel> tm;
  if (mode == EvalMode::kJoint)
    tm = load_temporal_model(join(cmd.run_dir, "temporal_model.txt"));

  const auto ranked = rank_query(query_idx, gallery, features, data.metas,
                                 tm ? &*tm : nullptr, mode, cmd.top_k);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!cmd.out_path.empty()) {
    file.open(cmd.out_path);
    if (!file) throw ValidationError("cannot open for write: " + cmd.out_path);
    out = &file;
  }
  std::map<int, const SampleMeta*> by_sample_id;
  for (const auto& meta : data.metas) by_sample_id[meta.sample_id] = &meta;
  (*out) << "rank,sample_id,score,person_id,camera_id\n";
  for (size_t r = 0; r < ranked.size(); ++r) {
    const auto& [sid, score] = ranked[r];
    const SampleMeta* meta = by_sample_id.at(sid);
    (*out) << (r + 1) << "," << sid << "," << score << "," << meta->person_id << ","
           << meta->camera_id << "\n";
  }
  if (!cmd.out_path.empty()) {
    Manifest m;
    m.command = "rank";
    m.config_hash = fnv1a64(cmd.mode + "|" + std::to_string(cmd.query_sample_id) + "|" +
                            std::to_string(cmd.top_k));
    m.seed = 0;
    m.add_file(fs::path(cmd.out_path).filename().string(), cmd.out_path);
    m.write(cmd.out_path + ".manifest");
  }
}

}  // namespace jvtc

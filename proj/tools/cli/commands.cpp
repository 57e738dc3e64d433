#include "commands.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>

#include "cola/checkpoint.hpp"
#include "cola/error.hpp"
#include "cola/evalkit.hpp"
#include "cola/graph_io.hpp"
#include "cola/injection.hpp"
#include "cola/rounds_io.hpp"
#include "options.hpp"

namespace cola::cli {

namespace {

using nlohmann::json;

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_json(const json& doc, const fs::path& path) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot open for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError(tmp.string(), "write failed");
  }
  fs::rename(tmp, path);
}

/// manifest.json in the output directory. Rewritten after every stage, so
/// an interrupted command leaves status "incomplete" behind. Stages run by
/// earlier commands in the same directory are kept.
class Manifest {
public:
  Manifest(const Options& o, std::string command) : path_(o.out_dir / "manifest.json") {
    if (fs::exists(path_)) {
      std::ifstream in(path_);
      doc_ = json::parse(in, nullptr, false);
      if (doc_.is_discarded() || !doc_.is_object()) doc_ = json::object();
    }
    doc_["command"] = std::move(command);
    doc_["config"] = o.snapshot();
    doc_["config_hash"] = o.model_hash();
    doc_["seeds"] = {{"inject", o.inject_seed()}, {"train", o.train_seed()}, {"infer", o.infer_seed()}};
    doc_["status"] = "incomplete";
    doc_["started_at"] = now_utc();
    doc_.erase("finished_at");
    doc_.erase("error");
    save();
  }

  void dataset(const std::string& role, const fs::path& path) {
    doc_["datasets"][role] = {{"path", path.string()}, {"fnv1a", hex64(file_fingerprint(path))}};
  }

  void stage(const std::string& name, const std::string& started, const std::vector<fs::path>& outputs) {
    json files = json::array();
    for (const auto& p : outputs) files.push_back(p.string());
    doc_["stages"][name] = {{"started_at", started}, {"finished_at", now_utc()}, {"outputs", files}};
    save();
  }

  void set(const std::string& key, json value) { doc_[key] = std::move(value); }

  void complete() {
    doc_["status"] = "complete";
    doc_["finished_at"] = now_utc();
    save();
  }

  void fail(const std::string& message) {
    doc_["status"] = "incomplete";
    doc_["error"] = message;
    save();
  }

private:
  void save() const { write_json(doc_, path_); }

  fs::path path_;
  json doc_;
};

struct Context {
  const Options& opts;
  Manifest& manifest;
  std::ostream& out;
  std::ostream& err;
};

AttributedGraph load_input_graph(Context& ctx, bool with_labels) {
  const auto edges = ctx.opts.edges_path();
  const auto attrs = ctx.opts.attributes_path();
  const auto labels = with_labels ? ctx.opts.labels_path() : std::nullopt;
  auto loaded = load_graph(edges, attrs, labels);
  ctx.manifest.dataset("edges", edges);
  ctx.manifest.dataset("attributes", attrs);
  if (labels) ctx.manifest.dataset("labels", *labels);
  const auto s = graph_stats(loaded.graph);
  ctx.err << "graph: n=" << s.n << " m=" << s.m << " f=" << s.f << " (" << loaded.report.raw_edge_lines
          << " edge lines)\n";
  return std::move(loaded.graph);
}

InjectionResult stage_inject(Context& ctx, const AttributedGraph& g) {
  const auto started = now_utc();
  InjectionConfig cfg = ctx.opts.inject;
  cfg.seed = ctx.opts.inject_seed();
  auto result = inject_combined(g, cfg);

  const fs::path dir = ctx.opts.graph_dir();
  fs::create_directories(dir);
  const std::vector<fs::path> outputs{dir / "edges.txt", dir / "attributes.csv", dir / "labels.txt",
                                      dir / "injection.json"};
  save_edges(result.graph, outputs[0]);
  save_attributes(result.graph, outputs[1]);
  save_labels(result.labels, outputs[2]);

  json anomalies = json::array();
  for (std::size_t i = 0; i < result.labels.size(); ++i)
    if (result.labels[i]) anomalies.push_back(i);
  json swaps = json::array();
  for (const auto& s : result.swaps) swaps.push_back({{"target", s.target}, {"donor", s.donor}});
  const json record = {{"p", cfg.clique_size},      {"q", cfg.clique_count}, {"k", cfg.candidates},
                       {"seed", cfg.seed},          {"disjoint_cliques", true}, {"anomalies", anomalies},
                       {"cliques", result.cliques}, {"contextual", swaps}};
  write_json(record, outputs[3]);
  ctx.manifest.stage("inject", started, outputs);
  ctx.err << "inject: " << anomalies.size() << " anomalies\n";
  return result;
}

void dump_pairs(const AttributedGraph& g, const TrainConfig& cfg, const fs::path& path) {
  json pairs = json::array();
  for (const auto& pair : first_training_batch(g, cfg)) {
    json adj = json::array();
    for (Index i = 0; i < pair.adjacency.rows(); ++i) {
      json row = json::array();
      for (Index j = 0; j < pair.adjacency.cols(); ++j) row.push_back(static_cast<int>(pair.adjacency(i, j)));
      adj.push_back(row);
    }
    pairs.push_back({{"target", pair.target}, {"label", pair.label}, {"sub_nodes", pair.sub_nodes}, {"adjacency", adj}});
  }
  write_json(pairs, path);
}

ModelParams<double> stage_train(Context& ctx, const AttributedGraph& g) {
  const auto started = now_utc();
  TrainConfig cfg = ctx.opts.train;
  cfg.seed = ctx.opts.train_seed();
  std::vector<fs::path> outputs;
  if (ctx.opts.dump_pairs) {
    dump_pairs(g, cfg, *ctx.opts.dump_pairs);
    outputs.push_back(*ctx.opts.dump_pairs);
  }
  const Index per_epoch = (g.node_count() + cfg.batch_size - 1) / cfg.batch_size;
  const auto result = train(g, cfg, [&](Index it, Index epoch, double loss) {
    if ((it + 1) % per_epoch == 0 && ((epoch + 1) % 10 == 0 || epoch + 1 == cfg.epochs))
      ctx.err << "train: epoch " << epoch + 1 << "/" << cfg.epochs << " loss " << loss << '\n';
  });

  const fs::path ckpt = ctx.opts.checkpoint_path();
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  save_checkpoint(result.params, ckpt);
  const fs::path sidecar = ckpt.string() + ".json";
  write_json({{"config_hash", ctx.opts.model_hash()},
              {"activation", to_string(result.params.activation)},
              {"activate_output", result.params.activate_output},
              {"readout", to_string(cfg.readout)},
              {"f", result.params.input_dim()},
              {"d", result.params.embedding_dim()},
              {"layers", result.params.layer_count()}},
             sidecar);
  const fs::path log = ctx.opts.out_dir / "train_log.csv";
  save_train_log(result.loss_log, log);
  outputs.insert(outputs.end(), {ckpt, sidecar, log});
  ctx.manifest.stage("train", started, outputs);
  return result.params;
}

ModelParams<double> load_model(Context& ctx) {
  const fs::path ckpt = ctx.opts.checkpoint_path();
  if (!fs::exists(ckpt)) throw IoError(ckpt.string(), "checkpoint not found; run `cola train` first or pass --checkpoint");
  auto params = load_checkpoint(ckpt);
  ctx.manifest.dataset("checkpoint", ckpt);
  const fs::path sidecar = ckpt.string() + ".json";
  if (fs::exists(sidecar)) {
    std::ifstream in(sidecar);
    const json meta = json::parse(in);
    params.activation = parse_activation(meta.at("activation").get<std::string>());
    params.activate_output = meta.at("activate_output").get<bool>();
    if (meta.value("config_hash", "") != ctx.opts.model_hash())
      ctx.err << "warning: checkpoint was trained under a different config\n";
    if (meta.value("readout", "") != to_string(ctx.opts.train.readout))
      ctx.err << "warning: checkpoint was trained with readout " << meta.value("readout", "?") << '\n';
  } else {
    params.activation = ctx.opts.train.activation;
    params.activate_output = ctx.opts.train.activate_output;
  }
  return params;
}

std::vector<double> stage_score(Context& ctx, const AttributedGraph& g, const ModelParams<double>& params) {
  const auto started = now_utc();
  TrainConfig cfg = ctx.opts.train;
  cfg.seed = ctx.opts.infer_seed();
  const Index n = g.node_count();
  fs::create_directories(ctx.opts.out_dir);
  const fs::path rounds_path = ctx.opts.out_dir / "rounds.bin";
  const fs::path scores_path = ctx.opts.out_dir / "scores.csv";
  std::vector<double> scores(static_cast<std::size_t>(n));
  RoundsFileWriter writer(rounds_path, n, cfg.rounds);
  Index done = 0;
  infer_rounds(g, params, cfg, [&](NodeId v, std::span<const double> pos, std::span<const double> neg) {
    writer.write(v, pos, neg);
    scores[static_cast<std::size_t>(v)] = estimate(pos, neg, cfg.estimation, cfg.source);
    if (++done % 10000 == 0) ctx.err << "score: " << done << "/" << n << " nodes\n";
  });
  writer.close();
  save_scores_csv(scores, scores_path);
  ctx.manifest.stage("score", started, {scores_path, rounds_path});
  return scores;
}

double stage_eval(Context& ctx, std::span<const double> scores, const Labels& labels) {
  const auto started = now_utc();
  if (labels.size() != scores.size())
    throw std::invalid_argument("eval: " + std::to_string(scores.size()) + " scores but " +
                                std::to_string(labels.size()) + " labels");
  const auto roc = roc_curve(scores, labels);
  const double value = auc(scores, labels);
  const fs::path roc_path = ctx.opts.out_dir / "roc.csv";
  const fs::path auc_path = ctx.opts.out_dir / "auc.txt";
  save_roc_csv(roc, roc_path);
  std::ofstream(auc_path) << shortest(value) << '\n';
  std::vector<fs::path> outputs{roc_path, auc_path};

  // Every estimation mode and score source from the stored rounds.
  const fs::path rounds_path = ctx.opts.out_dir / "rounds.bin";
  if (fs::exists(rounds_path)) {
    RowMatrixXd pos, neg;
    load_rounds(rounds_path, pos, neg);
    if (pos.rows() == static_cast<Index>(labels.size())) {
      const fs::path ablation = ctx.opts.out_dir / "ablation.csv";
      std::ofstream table(ablation);
      table << "estimation_mode,score_source,auc\n";
      for (auto source : {ScoreSource::both, ScoreSource::positive_only, ScoreSource::negative_only})
        for (auto mode : all_estimation_modes()) {
          const VectorXd k = estimate_all(pos, neg, mode, source);
          table << to_string(mode) << ',' << to_string(source) << ','
                << shortest(auc({k.data(), static_cast<std::size_t>(k.size())}, labels)) << '\n';
        }
      outputs.push_back(ablation);
    }
  }
  ctx.manifest.set("auc", value);
  ctx.manifest.stage("eval", started, outputs);
  ctx.out << "AUC " << shortest(value) << '\n';
  return value;
}

Labels require_labels(Context& ctx, Index n) {
  const auto path = ctx.opts.labels_path();
  if (!path) throw IoError((ctx.opts.graph_dir() / "labels.txt").string(), "no labels; pass --labels");
  ctx.manifest.dataset("labels", *path);
  return load_labels(*path, n);
}

void dispatch(Context& ctx) {
  const auto& cmd = ctx.opts.command;
  if (cmd == "inject") {
    stage_inject(ctx, load_input_graph(ctx, false));
  } else if (cmd == "train") {
    stage_train(ctx, load_input_graph(ctx, false));
  } else if (cmd == "score") {
    const auto params = load_model(ctx);
    stage_score(ctx, load_input_graph(ctx, false), params);
  } else if (cmd == "eval") {
    const fs::path scores_path = ctx.opts.out_dir / "scores.csv";
    const auto scores = load_scores_csv(scores_path);
    ctx.manifest.dataset("scores", scores_path);
    stage_eval(ctx, scores, require_labels(ctx, static_cast<Index>(scores.size())));
  } else if (cmd == "run") {
    const auto injected = stage_inject(ctx, load_input_graph(ctx, false));
    const auto params = stage_train(ctx, injected.graph);
    const auto scores = stage_score(ctx, injected.graph, params);
    stage_eval(ctx, scores, injected.labels);
  } else if (cmd == "sweep") {
    const auto started = now_utc();
    auto g = load_input_graph(ctx, true);
    if (!g.labels()) g = g.with_labels(require_labels(ctx, g.node_count()));
    TrainConfig base = ctx.opts.train;
    base.seed = ctx.opts.train_seed();
    const auto values = ctx.opts.sweep_values();
    const auto result = sweep(g, base, ctx.opts.axis, values, ctx.opts.runs);
    const fs::path csv = ctx.opts.out_dir / ("sweep_" + std::string(to_string(ctx.opts.axis)) + ".csv");
    save_sweep_csv(result, csv);
    for (const auto& row : result.rows)
      ctx.out << to_string(ctx.opts.axis) << '=' << row.value << " AUC " << shortest(row.mean_auc) << " +- "
              << shortest(row.std_auc) << '\n';
    ctx.manifest.stage("sweep", started, {csv});
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::optional<Options> opts;
  try {
    opts = parse_options(args, out);
  } catch (const UsageError& e) {
    err << "cola: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const std::exception& e) {
    err << "cola: " << e.what() << '\n';
    return 1;
  }
  if (!opts) return 0;

  std::optional<Manifest> manifest;
  try {
    fs::create_directories(opts->out_dir);
    manifest.emplace(*opts, opts->command);
    Context ctx{*opts, *manifest, out, err};
    dispatch(ctx);
    manifest->complete();
    return 0;
  } catch (const std::exception& e) {
    err << "cola " << opts->command << ": " << e.what() << '\n';
    if (manifest) {
      try {
        manifest->fail(e.what());
      } catch (const std::exception&) {
      }
    }
    return 1;
  }
}

}  // namespace cola::cli

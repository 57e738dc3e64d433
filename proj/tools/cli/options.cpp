#include "options.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "CLI11.hpp"
#include "cola/error.hpp"
#include "cola/graph_io.hpp"

namespace cola::cli {

namespace {

using nlohmann::json;

enum class Kind { integer, real, boolean, text, integer_list };

struct Key {
  std::string name;                 ///< canonical config key
  std::vector<std::string> aliases; ///< other accepted config keys
  std::string flags;                ///< CLI11 option names
  Kind kind;
  std::function<void(Options&, const json&)> apply;
  std::string help;
};

Index as_index(const json& v) { return v.get<Index>(); }

std::vector<Key> make_keys() {
  std::vector<Key> k;
  auto add = [&k](std::string name, std::vector<std::string> aliases, std::string flags, Kind kind,
                  std::function<void(Options&, const json&)> apply, std::string help) {
    k.push_back({std::move(name), std::move(aliases), std::move(flags), kind, std::move(apply), std::move(help)});
  };
  add("epochs", {"T"}, "--T,--epochs", Kind::integer, [](Options& o, const json& v) { o.train.epochs = as_index(v); },
      "training epochs");
  add("batch_size", {"B"}, "--B,--batch-size", Kind::integer,
      [](Options& o, const json& v) { o.train.batch_size = as_index(v); }, "nodes per training batch");
  add("lr", {"learning_rate"}, "--lr,--learning-rate", Kind::real,
      [](Options& o, const json& v) { o.train.learning_rate = v.get<double>(); }, "Adam learning rate");
  add("c", {"subgraph_size"}, "--c,--subgraph-size", Kind::integer,
      [](Options& o, const json& v) { o.train.subgraph_size = as_index(v); }, "nodes per sampled subgraph");
  add("d", {"embedding_dim"}, "--d,--embedding-dim", Kind::integer,
      [](Options& o, const json& v) { o.train.embedding_dim = as_index(v); }, "embedding width");
  add("layers", {}, "--layers", Kind::integer, [](Options& o, const json& v) { o.train.layers = as_index(v); },
      "GCN layers");
  add("rounds", {"R"}, "--R,--rounds", Kind::integer, [](Options& o, const json& v) { o.train.rounds = as_index(v); },
      "inference rounds per node");
  add("restart_prob", {}, "--restart-prob", Kind::real,
      [](Options& o, const json& v) { o.train.restart_prob = v.get<double>(); }, "random-walk restart probability");
  add("max_steps", {}, "--max-steps", Kind::integer,
      [](Options& o, const json& v) { o.train.max_steps = as_index(v); }, "random-walk step cap (0 = 64c)");
  add("seed", {}, "--seed", Kind::integer,
      [](Options& o, const json& v) {
        if (v.get<std::int64_t>() < 0) throw std::invalid_argument("must be >= 0");
        o.train.seed = v.get<std::uint64_t>();
      },
      "base seed; inject, train and score use seed, seed+1 and seed+2");
  add("readout", {}, "--readout", Kind::text,
      [](Options& o, const json& v) { o.train.readout = parse_readout(v.get<std::string>()); },
      "average, max, min or weighted_average");
  add("estimation_mode", {}, "--estimation-mode", Kind::text,
      [](Options& o, const json& v) { o.train.estimation = parse_estimation_mode(v.get<std::string>()); },
      "mean, min, max, std, mean+min, mean+max, mean+std, -std or mean-std");
  add("score_source", {}, "--score-source", Kind::text,
      [](Options& o, const json& v) { o.train.source = parse_score_source(v.get<std::string>()); },
      "both, positive_only or negative_only");
  add("activation", {}, "--activation", Kind::text,
      [](Options& o, const json& v) { o.train.activation = parse_activation(v.get<std::string>()); },
      "relu, tanh or identity");
  add("activate_output", {}, "--activate-output", Kind::boolean,
      [](Options& o, const json& v) { o.train.activate_output = v.get<bool>(); }, "activate the last layer");
  add("workers", {}, "--workers", Kind::integer, [](Options& o, const json& v) { o.train.workers = as_index(v); },
      "inference threads");
  add("projection", {}, "--projection", Kind::text,
      [](Options& o, const json& v) {
        const auto s = v.get<std::string>();
        if (s == "automatic") o.train.projection = ProjectionPolicy::automatic;
        else if (s == "full") o.train.projection = ProjectionPolicy::full;
        else if (s == "blockwise") o.train.projection = ProjectionPolicy::blockwise;
        else throw std::invalid_argument("expected automatic, full or blockwise");
      },
      "first-layer projection during scoring: automatic, full or blockwise");
  add("p", {"clique_size"}, "--p,--clique-size", Kind::integer,
      [](Options& o, const json& v) { o.inject.clique_size = as_index(v); }, "injected clique size");
  add("q", {"clique_count"}, "--q,--clique-count", Kind::integer,
      [](Options& o, const json& v) { o.inject.clique_count = as_index(v); }, "injected clique count");
  add("k", {"candidates"}, "--k,--candidates", Kind::integer,
      [](Options& o, const json& v) { o.inject.candidates = as_index(v); }, "donor candidates per contextual anomaly");
  add("edges", {}, "--edges", Kind::text, [](Options& o, const json& v) { o.edges = v.get<std::string>(); },
      "edge list");
  add("attributes", {}, "--attributes", Kind::text,
      [](Options& o, const json& v) { o.attributes = v.get<std::string>(); }, "attribute CSV");
  add("labels", {}, "--labels", Kind::text, [](Options& o, const json& v) { o.labels = v.get<std::string>(); },
      "anomaly labels, one 0/1 per line");
  add("checkpoint", {}, "--checkpoint", Kind::text,
      [](Options& o, const json& v) { o.checkpoint = v.get<std::string>(); }, "model checkpoint");
  add("out", {}, "--out", Kind::text, [](Options& o, const json& v) { o.out_dir = v.get<std::string>(); },
      "output directory (default $COLA_OUT_DIR or cola_out)");
  add("axis", {}, "--axis", Kind::text,
      [](Options& o, const json& v) { o.axis = parse_sweep_axis(v.get<std::string>()); }, "sweep axis: R, c or d");
  add("values", {}, "--values", Kind::integer_list,
      [](Options& o, const json& v) { o.values = v.get<std::vector<Index>>(); }, "comma-separated sweep values");
  add("runs", {}, "--runs", Kind::integer, [](Options& o, const json& v) { o.runs = as_index(v); },
      "seeded runs per sweep value");
  add("dump_pairs", {}, "--dump-pairs", Kind::text,
      [](Options& o, const json& v) { o.dump_pairs = v.get<std::string>(); },
      "write sampled instance pairs of the first batch as JSON");
  return k;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = make_keys();
  return table;
}

bool kind_matches(Kind kind, const json& v) {
  switch (kind) {
    case Kind::integer: return v.is_number_integer();
    case Kind::real: return v.is_number();
    case Kind::boolean: return v.is_boolean();
    case Kind::text: return v.is_string();
    case Kind::integer_list:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_number_integer()) return false;
      return true;
  }
  return false;
}

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::integer: return "an integer";
    case Kind::real: return "a number";
    case Kind::boolean: return "true or false";
    case Kind::text: return "a string";
    case Kind::integer_list: return "a list of integers";
  }
  return "?";
}

void apply_value(Options& o, const Key& key, const std::string& shown_as, const json& v) {
  if (!kind_matches(key.kind, v)) throw UsageError(shown_as + ": expected " + kind_name(key.kind));
  try {
    key.apply(o, v);
  } catch (const std::invalid_argument& e) {
    throw UsageError(shown_as + ": " + e.what());
  }
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

/// Flag text to the JSON value the config file would have carried.
json flag_to_json(const Key& key, const std::string& text) {
  const std::string shown = "--" + key.name;
  auto fail = [&] { return UsageError(shown + ": expected " + kind_name(key.kind) + ", got '" + text + "'"); };
  switch (key.kind) {
    case Kind::integer:
      if (auto v = parse_number<std::int64_t>(text)) return *v;
      throw fail();
    case Kind::real:
      if (auto v = parse_number<double>(text)) return *v;
      throw fail();
    case Kind::boolean:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw fail();
    case Kind::text: return text;
    case Kind::integer_list: {
      json list = json::array();
      std::string_view rest = text;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = rest.substr(0, comma);
        const auto v = parse_number<std::int64_t>(item);
        if (!v) throw fail();
        list.push_back(*v);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
      return list;
    }
  }
  throw fail();
}

void apply_config_file(Options& o, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config " + path.string() + ": expected a JSON object");
  for (const auto& [name, value] : doc.items()) {
    const Key* match = nullptr;
    for (const auto& key : keys())
      if (key.name == name || std::find(key.aliases.begin(), key.aliases.end(), name) != key.aliases.end())
        match = &key;
    if (!match) throw UsageError("config: unknown key '" + name + "'");
    apply_value(o, *match, name, value);
  }
}

void validate(const Options& o) {
  try {
    o.train.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.inject.clique_size < 2) throw UsageError("p must be >= 2");
  if (o.inject.clique_count < 0) throw UsageError("q must be >= 0");
  if (o.inject.candidates < 1) throw UsageError("k must be >= 1");
  if (o.runs < 1) throw UsageError("runs must be >= 1");
  for (Index v : o.values)
    if (v < 1) throw UsageError("values must all be >= 1");
}

}  // namespace

std::optional<fs::path> Options::labels_path() const {
  if (labels) return labels;
  auto fallback = graph_dir() / "labels.txt";
  if (!edges && fs::exists(fallback)) return fallback;
  return std::nullopt;
}

std::vector<Index> Options::sweep_values() const {
  if (!values.empty()) return values;
  switch (axis) {
    case SweepAxis::rounds: return {1, 2, 4, 8, 16, 32, 64, 128, 256};
    case SweepAxis::subgraph_size: return {2, 3, 4, 5, 6, 8};
    case SweepAxis::embedding_dim: return {1, 2, 4, 8, 16, 32, 64, 128};
  }
  return {};
}

json Options::snapshot() const {
  const auto& t = train;
  json j = {
      {"epochs", t.epochs},
      {"batch_size", t.batch_size},
      {"lr", t.learning_rate},
      {"c", t.subgraph_size},
      {"d", t.embedding_dim},
      {"layers", t.layers},
      {"rounds", t.rounds},
      {"restart_prob", t.restart_prob},
      {"max_steps", t.max_steps},
      {"seed", t.seed},
      {"readout", to_string(t.readout)},
      {"estimation_mode", to_string(t.estimation)},
      {"score_source", to_string(t.source)},
      {"activation", to_string(t.activation)},
      {"activate_output", t.activate_output},
      {"workers", t.workers},
      {"projection", t.projection == ProjectionPolicy::automatic ? "automatic"
                     : t.projection == ProjectionPolicy::full    ? "full"
                                                                 : "blockwise"},
      {"p", inject.clique_size},
      {"q", inject.clique_count},
      {"k", inject.candidates},
      {"out", out_dir.string()},
      {"axis", to_string(axis)},
      {"values", sweep_values()},
      {"runs", runs},
  };
  if (edges) j["edges"] = edges->string();
  if (attributes) j["attributes"] = attributes->string();
  if (labels) j["labels"] = labels->string();
  if (checkpoint) j["checkpoint"] = checkpoint->string();
  if (dump_pairs) j["dump_pairs"] = dump_pairs->string();
  return j;
}

std::string Options::model_hash() const {
  const auto full = snapshot();
  json model;
  for (const char* key : {"epochs", "batch_size", "lr", "c", "d", "layers", "restart_prob", "max_steps", "seed",
                          "readout", "activation", "activate_output"})
    model[key] = full[key];
  return hex64(fnv1a(model.dump()));
}

std::optional<Options> parse_options(const std::vector<std::string>& args, std::ostream& out) {
  Options o;
  if (const char* env = std::getenv("COLA_OUT_DIR"); env && *env) o.out_dir = env;

  CLI::App app{"Contrastive anomaly detection on attributed graphs", "cola"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  for (const char* name : {"inject", "train", "score", "eval", "run", "sweep"}) app.add_subcommand(name);
  app.get_subcommand("inject")->description("inject structural and contextual anomalies");
  app.get_subcommand("train")->description("train the contrastive model");
  app.get_subcommand("score")->description("multi-round anomaly scoring");
  app.get_subcommand("eval")->description("ROC and AUC against labels");
  app.get_subcommand("run")->description("inject, train, score and eval in sequence");
  app.get_subcommand("sweep")->description("parameter study over R, c or d");

  std::string config_path;
  app.add_option("--config", config_path, "flat JSON config; flags override it");
  std::vector<std::pair<const Key*, CLI::Option*>> flag_options;
  std::map<std::string, std::string> flag_text;
  for (const auto& key : keys())
    flag_options.emplace_back(&key, app.add_option(key.flags, flag_text[key.name], key.help));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  for (auto* sub : app.get_subcommands()) o.command = sub->get_name();

  if (!config_path.empty()) apply_config_file(o, config_path);
  for (const auto& [key, option] : flag_options)
    if (option->count() > 0) apply_value(o, *key, "--" + key->name, flag_to_json(*key, flag_text[key->name]));
  validate(o);
  return o;
}

}  // namespace cola::cli

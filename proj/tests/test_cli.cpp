#include <cstdlib>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/options.hpp"
#include "cola/rounds_io.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cola;
using namespace cola::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixture = COLA_FIXTURE_DIR;

struct Outcome {
  int status;
  std::string out, err;
};

Outcome cola_cmd(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

std::vector<std::string> fixture_args(const std::string& command, const fs::path& out) {
  return {command, "--edges", (kFixture / "edges.txt").string(), "--attributes", (kFixture / "attributes.csv").string(),
          "--p", "5", "--q", "2", "--k", "10", "--T", "20", "--R", "32", "--out", out.string()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_CASE("config defaults and precedence") {
  std::ostringstream sink;
  const auto defaults = cli::parse_options({"train"}, sink);
  REQUIRE(defaults);
  CHECK(defaults->command == "train");
  CHECK(defaults->train.subgraph_size == 4);
  CHECK(defaults->train.embedding_dim == 64);
  CHECK(defaults->train.batch_size == 300);
  CHECK(defaults->train.rounds == 256);
  CHECK(defaults->train.restart_prob == 0.5);
  CHECK(defaults->train.epochs == 100);
  CHECK(defaults->train.learning_rate == 1e-3);

  const auto dir = scratch_dir("cli_config");
  write_text(dir / "cfg.json", R"({"R": 256, "c": 5, "lr": 0.003, "estimation_mode": "mean+std"})");
  const auto o = cli::parse_options({"score", "--config", (dir / "cfg.json").string(), "--R", "8"}, sink);
  REQUIRE(o);
  CHECK(o->train.rounds == 8);
  CHECK(o->train.subgraph_size == 5);
  CHECK(o->train.learning_rate == 0.003);
  CHECK(o->train.estimation == EstimationMode::mean_plus_std);

  const auto aliases = cli::parse_options({"train", "--epochs", "7", "--batch-size", "9", "--values", "1,4"}, sink);
  CHECK(aliases->train.epochs == 7);
  CHECK(aliases->train.batch_size == 9);
  CHECK(aliases->values == std::vector<Index>{1, 4});

  const auto first = cli::parse_options({"train", "--seed", "3"}, sink);
  CHECK(first->inject_seed() == 3);
  CHECK(first->train_seed() == 4);
  CHECK(first->infer_seed() == 5);
}

TEST_CASE("usage errors exit with status 2 and name the key") {
  const auto dir = scratch_dir("cli_usage");
  auto r = cola_cmd({"train", "--c", "0"});
  CHECK(r.status == 2);
  CHECK(r.err.find("c must be") != std::string::npos);

  write_text(dir / "unknown.json", R"({"rounds": 4, "colour": "blue"})");
  r = cola_cmd({"train", "--config", (dir / "unknown.json").string()});
  CHECK(r.status == 2);
  CHECK(r.err.find("colour") != std::string::npos);

  write_text(dir / "type.json", R"({"d": "wide"})");
  r = cola_cmd({"train", "--config", (dir / "type.json").string()});
  CHECK(r.status == 2);
  CHECK(r.err.find("d: expected an integer") != std::string::npos);

  r = cola_cmd({"train", "--readout", "median"});
  CHECK(r.status == 2);
  CHECK(r.err.find("readout") != std::string::npos);

  CHECK(cola_cmd({"train", "--B", "abc"}).status == 2);
  CHECK(cola_cmd({"fly"}).status == 2);
  CHECK(cola_cmd({}).status == 2);
  CHECK(cola_cmd({"run", "--p", "1"}).status == 2);
  CHECK(cola_cmd({"--help"}).status == 0);
}

TEST_CASE("run on the bundled fixture") {
  const auto dir = scratch_dir("cli_run");
  auto args = fixture_args("run", dir / "a");
  args.insert(args.end(), {"--dump-pairs", (dir / "a" / "pairs.json").string()});
  const auto r = cola_cmd(args);
  REQUIRE_MESSAGE(r.status == 0, r.err);
  CHECK(r.out.rfind("AUC ", 0) == 0);

  const auto manifest = read_json(dir / "a" / "manifest.json");
  CHECK(manifest["status"] == "complete");
  CHECK(manifest["command"] == "run");
  CHECK(manifest["seeds"]["train"] == 1);
  for (const char* stage : {"inject", "train", "score", "eval"}) {
    REQUIRE(manifest["stages"].contains(stage));
    for (const auto& file : manifest["stages"][stage]["outputs"]) CHECK(fs::exists(file.get<std::string>()));
  }
  CHECK(manifest["datasets"]["edges"]["fnv1a"].get<std::string>().size() == 16);
  CHECK(read_json(dir / "a" / "model.ckpt.json")["config_hash"] == manifest["config_hash"]);
  const double reported = std::stod(slurp(dir / "a" / "auc.txt"));
  CHECK(manifest["auc"].get<double>() == reported);

  const auto injection = read_json(dir / "a" / "graph" / "injection.json");
  CHECK(injection["anomalies"].size() == 20);
  CHECK(injection["cliques"].size() == 2);
  CHECK(read_json(dir / "a" / "pairs.json").size() == 200);

  const auto scores = load_scores_csv(dir / "a" / "scores.csv");
  CHECK(scores.size() == 100);

  SUBCASE("re-running reproduces the outputs") {
    auto again = fixture_args("run", dir / "b");
    REQUIRE(cola_cmd(again).status == 0);
    for (const char* f : {"scores.csv", "rounds.bin", "model.ckpt", "train_log.csv", "roc.csv", "auc.txt",
                          "ablation.csv", "graph/attributes.csv", "graph/edges.txt"})
      CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
  }

  SUBCASE("stage commands compose to run") {
    const auto out = dir / "c";
    REQUIRE(cola_cmd(fixture_args("inject", out)).status == 0);
    const std::vector<std::string> rest{"--p", "5", "--q", "2", "--k", "10", "--T", "20", "--R", "32",
                                        "--out", out.string()};
    for (const char* stage : {"train", "score", "eval"}) {
      std::vector<std::string> a{stage};
      a.insert(a.end(), rest.begin(), rest.end());
      REQUIRE_MESSAGE(cola_cmd(a).status == 0, stage);
    }
    for (const char* f : {"scores.csv", "rounds.bin", "model.ckpt", "auc.txt", "graph/labels.txt"})
      CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(out / f), f);
    const auto m = read_json(out / "manifest.json");
    CHECK(m["status"] == "complete");
    CHECK(m["stages"].size() == 4);
  }

  SUBCASE("worker count does not change scores") {
    const std::vector<std::string> a{"score", "--workers", "3", "--R", "32", "--out", (dir / "a").string()};
    REQUIRE(cola_cmd(a).status == 0);
    CHECK(load_scores_csv(dir / "a" / "scores.csv") == scores);
  }

  SUBCASE("re-estimation and sweep") {
    const auto ablation = slurp(dir / "a" / "ablation.csv");
    CHECK(std::count(ablation.begin(), ablation.end(), '\n') == 1 + 27);
    const std::vector<std::string> a{"sweep", "--axis", "R", "--values", "1,4,32", "--T", "5",
                                     "--out", (dir / "a").string()};
    const auto s = cola_cmd(a);
    REQUIRE_MESSAGE(s.status == 0, s.err);
    const auto csv = slurp(dir / "a" / "sweep_R.csv");
    CHECK(csv.rfind("R,mean_auc,std_auc\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  }
}

TEST_CASE("runtime failures exit with status 1") {
  const auto dir = scratch_dir("cli_fail");

  auto r = cola_cmd({"score", "--out", (dir / "empty").string(), "--edges", (kFixture / "edges.txt").string(),
                     "--attributes", (kFixture / "attributes.csv").string()});
  CHECK(r.status == 1);
  CHECK(r.err.find("model.ckpt") != std::string::npos);
  CHECK(read_json(dir / "empty" / "manifest.json")["status"] == "incomplete");

  r = cola_cmd({"train", "--edges", (dir / "absent.txt").string(), "--attributes",
                (kFixture / "attributes.csv").string(), "--out", (dir / "x").string()});
  CHECK(r.status == 1);
  CHECK(r.err.find("absent.txt") != std::string::npos);

  // Single-class labels make AUC undefined.
  fs::create_directories(dir / "eval");
  save_scores_csv(std::vector<double>{0.1, 0.2, 0.3}, dir / "eval" / "scores.csv");
  write_text(dir / "ones.txt", "1\n1\n1\n");
  r = cola_cmd({"eval", "--labels", (dir / "ones.txt").string(), "--out", (dir / "eval").string()});
  CHECK(r.status == 1);
  CHECK(r.err.find("single class") != std::string::npos);
  const auto m = read_json(dir / "eval" / "manifest.json");
  CHECK(m["status"] == "incomplete");
  CHECK(m["error"].get<std::string>().find("AUC") != std::string::npos);

  r = cola_cmd({"run", "--config", (dir / "missing.json").string()});
  CHECK(r.status == 1);
}

TEST_CASE("output directory from the environment") {
  const auto dir = scratch_dir("cli_env");
  ::setenv("COLA_OUT_DIR", (dir / "env_out").string().c_str(), 1);
  std::ostringstream sink;
  const auto o = cli::parse_options({"eval"}, sink);
  CHECK(o->out_dir == dir / "env_out");
  const auto flagged = cli::parse_options({"eval", "--out", "elsewhere"}, sink);
  CHECK(flagged->out_dir == "elsewhere");
  ::unsetenv("COLA_OUT_DIR");
}

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cola/detector.hpp"
#include "cola/evalkit.hpp"
#include "cola/injection.hpp"
#include "json.hpp"

namespace cola::cli {

namespace fs = std::filesystem;

/// Bad flags, config keys or values. Maps to exit status 2.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  TrainConfig train;        ///< train.seed holds the base seed
  InjectionConfig inject;
  std::optional<fs::path> edges, attributes, labels, checkpoint, dump_pairs;
  fs::path out_dir = "cola_out";
  SweepAxis axis = SweepAxis::rounds;
  std::vector<Index> values;  ///< empty = axis default
  Index runs = 1;

  // Stage seeds are fixed offsets from the base seed.
  std::uint64_t inject_seed() const { return train.seed; }
  std::uint64_t train_seed() const { return train.seed + 1; }
  std::uint64_t infer_seed() const { return train.seed + 2; }

  fs::path graph_dir() const { return out_dir / "graph"; }
  fs::path edges_path() const { return edges.value_or(graph_dir() / "edges.txt"); }
  fs::path attributes_path() const { return attributes.value_or(graph_dir() / "attributes.csv"); }
  std::optional<fs::path> labels_path() const;
  fs::path checkpoint_path() const { return checkpoint.value_or(out_dir / "model.ckpt"); }
  std::vector<Index> sweep_values() const;

  /// Flat JSON of every setting, in the same keys the config file accepts.
  nlohmann::json snapshot() const;
  /// Hash over the settings that shape the trained weights.
  std::string model_hash() const;
};

/// Defaults, then the --config file, then flags. `args` excludes argv[0].
/// Throws UsageError naming the offending key; a missing config file is an
/// IoError. Returns nullopt when help was requested (text goes to `out`).
std::optional<Options> parse_options(const std::vector<std::string>& args, std::ostream& out);

}  // namespace cola::cli

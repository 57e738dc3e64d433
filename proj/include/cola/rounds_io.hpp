#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "cola/detector.hpp"

namespace cola {

namespace fs = std::filesystem;

/// rounds.bin: "COLARNDS", u32 version, u64 n, u64 R, then the n x R
/// positive-round matrix and the n x R negative-round matrix, row-major
/// little-endian f64.
void save_rounds(const RowMatrixXd& pos, const RowMatrixXd& neg, const fs::path& path);
void load_rounds(const fs::path& path, RowMatrixXd& pos, RowMatrixXd& neg);

/// Writes rounds.bin node by node in any order, so scoring can stream to
/// disk without holding the matrices.
class RoundsFileWriter {
public:
  RoundsFileWriter(const fs::path& path, Index n, Index rounds);
  void write(NodeId node, std::span<const double> pos, std::span<const double> neg);
  /// Throws IoError unless every node was written exactly once.
  void close();

private:
  fs::path path_;
  std::ofstream out_;
  Index n_, rounds_;
  std::vector<bool> written_;
};

/// scores.csv: header `node_id,score`, one row per node.
void save_scores_csv(std::span<const double> scores, const fs::path& path);
std::vector<double> load_scores_csv(const fs::path& path);

/// train_log.csv: header `iteration,loss`.
void save_train_log(std::span<const double> losses, const fs::path& path);

}  // namespace cola

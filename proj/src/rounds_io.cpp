#include "cola/rounds_io.hpp"

#include <charconv>
#include <string>

#include "cola/binary_io.hpp"

namespace cola {

namespace {

constexpr std::string_view kMagic = "COLARNDS";
constexpr std::uint32_t kVersion = 1;
constexpr std::streamoff kHeaderBytes = 8 + 4 + 8 + 8;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_header(std::ostream& out, Index n, Index rounds) {
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  binary::put(out, kVersion);
  binary::put(out, static_cast<std::uint64_t>(n));
  binary::put(out, static_cast<std::uint64_t>(rounds));
}

}  // namespace

void save_rounds(const RowMatrixXd& pos, const RowMatrixXd& neg, const fs::path& path) {
  if (pos.rows() != neg.rows() || pos.cols() != neg.cols())
    throw std::invalid_argument("save_rounds: round matrices differ in shape");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  write_header(out, pos.rows(), pos.cols());
  binary::put_span(out, std::span<const double>(pos.data(), static_cast<std::size_t>(pos.size())));
  binary::put_span(out, std::span<const double>(neg.data(), static_cast<std::size_t>(neg.size())));
  if (!out) throw IoError(path.string(), "write failed");
}

void load_rounds(const fs::path& path, RowMatrixXd& pos, RowMatrixXd& neg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  const std::string p = path.string();
  binary::expect_magic(in, kMagic, p);
  if (const auto v = binary::get<std::uint32_t>(in, p); v != kVersion)
    throw ParseError(p, 0, "unsupported rounds version " + std::to_string(v));
  const auto n = static_cast<Index>(binary::get<std::uint64_t>(in, p));
  const auto R = static_cast<Index>(binary::get<std::uint64_t>(in, p));
  pos.resize(n, R);
  neg.resize(n, R);
  binary::get_span(in, std::span<double>(pos.data(), static_cast<std::size_t>(pos.size())), p);
  binary::get_span(in, std::span<double>(neg.data(), static_cast<std::size_t>(neg.size())), p);
}

RoundsFileWriter::RoundsFileWriter(const fs::path& path, Index n, Index rounds)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), n_(n), rounds_(rounds),
      written_(static_cast<std::size_t>(n), false) {
  if (!out_) throw IoError(path.string(), "cannot open for writing");
  write_header(out_, n, rounds);
}

void RoundsFileWriter::write(NodeId node, std::span<const double> pos, std::span<const double> neg) {
  if (node < 0 || node >= n_ || static_cast<Index>(pos.size()) != rounds_ || static_cast<Index>(neg.size()) != rounds_)
    throw std::invalid_argument("RoundsFileWriter: bad node or round count");
  const std::streamoff row_bytes = static_cast<std::streamoff>(rounds_) * 8;
  out_.seekp(kHeaderBytes + node * row_bytes);
  binary::put_span(out_, pos);
  out_.seekp(kHeaderBytes + (n_ + node) * row_bytes);
  binary::put_span(out_, neg);
  written_[static_cast<std::size_t>(node)] = true;
}

void RoundsFileWriter::close() {
  for (bool w : written_)
    if (!w) throw IoError(path_.string(), "rounds file closed before every node was written");
  out_.close();
  if (!out_) throw IoError(path_.string(), "write failed");
}

void save_scores_csv(std::span<const double> scores, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "node_id,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) out << i << ',' << format_double(scores[i]) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<double> load_scores_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::string line;
  std::getline(in, line);
  if (line.rfind("node_id,", 0) != 0) throw ParseError(path.string(), 1, "expected header node_id,score");
  std::vector<double> scores;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::size_t id = 0;
    double value = 0.0;
    const char* end = line.data() + line.size();
    if (comma == std::string::npos ||
        std::from_chars(line.data(), line.data() + comma, id).ec != std::errc() ||
        std::from_chars(line.data() + comma + 1, end, value).ec != std::errc())
      throw ParseError(path.string(), lineno, "expected node_id,score");
    if (id != scores.size()) throw ParseError(path.string(), lineno, "node ids must be consecutive from 0");
    scores.push_back(value);
  }
  return scores;
}

void save_train_log(std::span<const double> losses, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "iteration,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out << i << ',' << format_double(losses[i]) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace cola

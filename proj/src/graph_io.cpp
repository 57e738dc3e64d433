#include "cola/graph_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cola/binary_io.hpp"
#include "cola/error.hpp"

namespace cola {

namespace {

constexpr std::string_view kGraphMagic = "COLAGRPH";
constexpr std::uint32_t kGraphVersion = 1;

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool is_blank_or_comment(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && !token.empty();
}

RowMatrixXd read_attributes(const fs::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Index count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const auto token = rest.substr(0, comma);
      double v = 0.0;
      if (!parse_number(token, v))
        throw ParseError(path.string(), lineno, "not a real number: '" + std::string(trim(token)) + "'");
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols < 0) cols = count;
    if (count != cols)
      throw ParseError(path.string(), lineno,
                       "row has " + std::to_string(count) + " values, expected " + std::to_string(cols));
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string(), 0, "no attribute rows");
  return Eigen::Map<RowMatrixXd>(values.data(), rows, cols);
}

}  // namespace

Labels load_labels(const fs::path& path, std::optional<Index> expected_count) {
  auto in = open_in(path);
  Labels labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    int v = 0;
    if (!parse_number(std::string_view(line), v) || (v != 0 && v != 1))
      throw ParseError(path.string(), lineno, "label must be 0 or 1");
    labels.push_back(static_cast<std::uint8_t>(v));
  }
  if (expected_count && static_cast<Index>(labels.size()) != *expected_count)
    throw ParseError(path.string(), 0,
                     "has " + std::to_string(labels.size()) + " labels, expected " + std::to_string(*expected_count));
  return labels;
}

LoadedGraph load_graph(const fs::path& edge_path, const fs::path& attr_path,
                       const std::optional<fs::path>& label_path) {
  RowMatrixXd attributes = read_attributes(attr_path);
  const Index n = attributes.rows();

  auto in = open_in(edge_path);
  std::vector<AttributedGraph::Edge> edges;
  LoadReport report;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    std::istringstream fields(line);
    std::string a_tok, b_tok, extra;
    fields >> a_tok >> b_tok;
    std::int64_t a = 0, b = 0;
    if (!parse_number(std::string_view(a_tok), a) || !parse_number(std::string_view(b_tok), b) || (fields >> extra))
      throw ParseError(edge_path.string(), lineno, "expected two integer node ids");
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw ParseError(edge_path.string(), lineno,
                       "node id out of range [0, " + std::to_string(n) + "): " + std::to_string(a >= n || a < 0 ? a : b));
    ++report.raw_edge_lines;
    if (a == b) {
      ++report.self_loops_dropped;
      continue;
    }
    edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
  }

  std::optional<Labels> labels;
  if (label_path) labels = load_labels(*label_path, n);

  LoadedGraph out{AttributedGraph::from_edges(n, edges, std::move(attributes), std::move(labels)), report};
  out.report.undirected_edges = out.graph.edge_count();
  return out;
}

void save_edges(const AttributedGraph& g, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& [a, b] : g.edge_list()) out << a << ' ' << b << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

void save_attributes(const AttributedGraph& g, const fs::path& path) {
  auto out = open_out(path);
  const auto& x = g.attributes();
  std::string row;
  char buf[64];
  for (Index i = 0; i < x.rows(); ++i) {
    row.clear();
    for (Index j = 0; j < x.cols(); ++j) {
      if (j) row.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), x(i, j));
      row.append(buf, res.ptr);
    }
    row.push_back('\n');
    out << row;
  }
  if (!out) throw IoError(path.string(), "write failed");
}

void save_labels(const Labels& labels, const fs::path& path) {
  auto out = open_out(path);
  for (auto l : labels) out << static_cast<int>(l) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

void save_graph_binary(const AttributedGraph& g, const fs::path& path) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(kGraphMagic.data(), static_cast<std::streamsize>(kGraphMagic.size()));
  binary::put(out, kGraphVersion);
  binary::put(out, static_cast<std::uint64_t>(g.node_count()));
  binary::put(out, static_cast<std::uint64_t>(g.attribute_dim()));
  binary::put(out, static_cast<std::uint64_t>(g.columns().size()));
  binary::put(out, static_cast<std::uint8_t>(g.labels() ? 1 : 0));
  binary::put_span(out, std::span<const std::int64_t>(g.offsets()));
  binary::put_span(out, std::span<const NodeId>(g.columns()));
  binary::put_span(out, std::span<const double>(g.attributes().data(), static_cast<std::size_t>(g.attributes().size())));
  if (g.labels()) binary::put_span(out, std::span<const std::uint8_t>(*g.labels()));
  if (!out) throw IoError(path.string(), "write failed");
}

AttributedGraph load_graph_binary(const fs::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const std::string p = path.string();
  binary::expect_magic(in, kGraphMagic, p);
  if (const auto version = binary::get<std::uint32_t>(in, p); version != kGraphVersion)
    throw ParseError(p, 0, "unsupported graph cache version " + std::to_string(version));
  const auto n = binary::get<std::uint64_t>(in, p);
  const auto f = binary::get<std::uint64_t>(in, p);
  const auto nnz = binary::get<std::uint64_t>(in, p);
  const auto has_labels = binary::get<std::uint8_t>(in, p);

  std::vector<std::int64_t> offsets(n + 1);
  std::vector<NodeId> columns(nnz);
  RowMatrixXd attributes(static_cast<Index>(n), static_cast<Index>(f));
  binary::get_span(in, std::span<std::int64_t>(offsets), p);
  binary::get_span(in, std::span<NodeId>(columns), p);
  binary::get_span(in, std::span<double>(attributes.data(), static_cast<std::size_t>(attributes.size())), p);
  std::optional<Labels> labels;
  if (has_labels) {
    labels.emplace(n);
    binary::get_span(in, std::span<std::uint8_t>(*labels), p);
  }
  try {
    return AttributedGraph::from_csr(std::move(offsets), std::move(columns), std::move(attributes), std::move(labels));
  } catch (const std::invalid_argument& e) {
    throw ParseError(p, 0, e.what());
  }
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) {
  for (unsigned char ch : bytes) {
    state ^= ch;
    state *= 0x100000001b3ull;
  }
  return state;
}

std::uint64_t file_fingerprint(const fs::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  std::uint64_t state = 0xcbf29ce484222325ull;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    state = fnv1a(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), state);
  }
  return state;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace cola

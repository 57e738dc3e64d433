#include "cola/checkpoint.hpp"

#include <fstream>

#include "cola/binary_io.hpp"

namespace cola {

namespace {

constexpr std::string_view kMagic = "COLACKPT";
constexpr std::uint32_t kVersion = 1;

void put_matrix(std::ostream& out, const MatrixXd& w) {
  const RowMatrixXd row_major = w;
  binary::put_span(out, std::span<const double>(row_major.data(), static_cast<std::size_t>(row_major.size())));
}

MatrixXd get_matrix(std::istream& in, Index rows, Index cols, const std::string& path) {
  RowMatrixXd w(rows, cols);
  binary::get_span(in, std::span<double>(w.data(), static_cast<std::size_t>(w.size())), path);
  return w;
}

}  // namespace

void save_checkpoint(const ModelParams<double>& params, const std::filesystem::path& path) {
  const Index d = params.embedding_dim();
  for (Index l = 1; l < params.layer_count(); ++l)
    if (params.layers[l].rows() != d || params.layers[l].cols() != d)
      throw std::invalid_argument("save_checkpoint: hidden layers must all be d x d");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  binary::put(out, kVersion);
  binary::put(out, static_cast<std::uint64_t>(params.input_dim()));
  binary::put(out, static_cast<std::uint64_t>(d));
  binary::put(out, static_cast<std::uint64_t>(params.layer_count()));
  for (const auto& w : params.layers) put_matrix(out, w);
  put_matrix(out, params.discriminator);
  if (!out) throw IoError(path.string(), "write failed");
}

ModelParams<double> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  const std::string p = path.string();
  binary::expect_magic(in, kMagic, p);
  if (const auto v = binary::get<std::uint32_t>(in, p); v != kVersion)
    throw ParseError(p, 0, "unsupported checkpoint version " + std::to_string(v));
  const auto f = static_cast<Index>(binary::get<std::uint64_t>(in, p));
  const auto d = static_cast<Index>(binary::get<std::uint64_t>(in, p));
  const auto L = static_cast<Index>(binary::get<std::uint64_t>(in, p));
  if (f < 1 || d < 1 || L < 1) throw ParseError(p, 0, "invalid checkpoint dimensions");
  ModelParams<double> params;
  for (Index l = 0; l < L; ++l) params.layers.push_back(get_matrix(in, l == 0 ? f : d, d, p));
  params.discriminator = get_matrix(in, d, d, p);
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(p, 0, "trailing bytes after checkpoint");
  if (!params.all_finite()) throw ParseError(p, 0, "checkpoint contains non-finite weights");
  return params;
}

}  // namespace cola

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace cola {

using NodeId = std::int32_t;
using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using RowMatrixXd = RowMatrix<double>;
using VectorXd = Vector<double>;
using RowVectorXd = RowVector<double>;

using Labels = std::vector<std::uint8_t>;

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream). Streams let workers and stages
/// draw reproducibly no matter how work is scheduled.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x436f4c41u};
  return Rng(seq);
}

}  // namespace cola

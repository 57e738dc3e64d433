#pragma once

#include <filesystem>

#include "cola/model.hpp"

namespace cola {

/// "COLACKPT", u32 version, u64 f, u64 d, u64 L, then W^(0..L-1) and W^(d),
/// each row-major little-endian f64. Hidden widths all equal d. Activation
/// settings are not part of the binary and come back as defaults.
void save_checkpoint(const ModelParams<double>& params, const std::filesystem::path& path);
ModelParams<double> load_checkpoint(const std::filesystem::path& path);

}  // namespace cola

#pragma once

#include <string>

#include "jvtc/types.hpp"

namespace jvtc {

// Binary matrix format shared by feature files, bank/embedder checkpoints and
// similarity dumps: header of two little-endian uint32 (rows, cols), then
// rows*cols float32 values, row-major.

void save_matrix_f32(const std::string& path, const Matrix& m);
Matrix load_matrix_f32(const std::string& path);

}  // namespace jvtc

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "brainalign/types.hpp"

// NPY v1.0 interchange for 2-D float matrices. Only little-endian '<f8' and
// '<f4' C-ordered payloads are accepted; 4-byte floats are widened on read.
namespace brainalign::npy {

Matrix decode(std::string_view bytes);
std::string encode(const Matrix& m);

Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

}  // namespace brainalign::npy

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "slam3d/tensor.hpp"

namespace slam3d {

// Tensor snapshot: little-endian, four uint32 dims (batch, channels, height,
// width) followed by the float64 payload in row-major order.

void write_snapshot(std::ostream& out, const Tensor& t);
Tensor read_snapshot(std::istream& in);

std::string encode_snapshot(const Tensor& t);
Tensor decode_snapshot(const std::string& bytes);

void save_snapshot(const std::filesystem::path& path, const Tensor& t);
Tensor load_snapshot(const std::filesystem::path& path);

}  // namespace slam3d

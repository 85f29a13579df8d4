#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>

namespace slam3d {

using GrayImage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Interleaved 8-bit RGB; row r holds width*3 bytes.
struct RgbImage {
  Eigen::Index width = 0;
  Eigen::Index height = 0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> data;
};

/// Binary P5 writer, header "P5\n<w> <h>\n255\n".
void write_graymap(std::ostream& out, const GrayImage& img);

/// Binary P5 reader. With `require_maxval_255` any other maxval is a
/// FormatError; otherwise any 8-bit maxval (1..255) is accepted. Comments
/// ('#' to end of line) are allowed between header fields.
GrayImage read_graymap(std::istream& in, bool require_maxval_255 = true);

void write_pixmap(std::ostream& out, const RgbImage& img);
RgbImage read_pixmap(std::istream& in);

}  // namespace slam3d

#include "slam3d/netpbm.hpp"

#include <cctype>
#include <istream>
#include <ostream>
#include <string>

#include "slam3d/error.hpp"

namespace slam3d {

namespace {

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
    } else if (c != std::char_traits<char>::eof() && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

long read_header_int(std::istream& in, const char* what) {
  skip_space_and_comments(in);
  long v = -1;
  if (!(in >> v) || v < 0) throw FormatError(std::string("netpbm: bad ") + what);
  return v;
}

struct Header {
  long width;
  long height;
  long maxval;
};

Header read_header(std::istream& in, const char* magic) {
  char m[2] = {};
  if (!in.read(m, 2) || m[0] != magic[0] || m[1] != magic[1])
    throw FormatError(std::string("netpbm: expected magic ") + magic);
  Header h{read_header_int(in, "width"), read_header_int(in, "height"), read_header_int(in, "maxval")};
  if (h.width == 0 || h.height == 0) throw FormatError("netpbm: empty image");
  // exactly one whitespace byte separates the header from the payload
  if (!std::isspace(in.get())) throw FormatError("netpbm: missing separator after maxval");
  return h;
}

void read_payload(std::istream& in, std::uint8_t* dst, std::size_t bytes) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes)
    throw TruncatedData("netpbm: payload has " + std::to_string(in.gcount()) + " of " +
                        std::to_string(bytes) + " bytes");
}

}  // namespace

void write_graymap(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  if (!out) throw Error("graymap write failed");
}

GrayImage read_graymap(std::istream& in, bool require_maxval_255) {
  const Header h = read_header(in, "P5");
  if (require_maxval_255 ? h.maxval != 255 : (h.maxval < 1 || h.maxval > 255))
    throw FormatError("netpbm: unsupported maxval " + std::to_string(h.maxval));
  GrayImage img(h.height, h.width);
  read_payload(in, img.data(), static_cast<std::size_t>(img.size()));
  return img;
}

void write_pixmap(std::ostream& out, const RgbImage& img) {
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!out) throw Error("pixmap write failed");
}

RgbImage read_pixmap(std::istream& in) {
  const Header h = read_header(in, "P6");
  if (h.maxval != 255) throw FormatError("netpbm: unsupported maxval " + std::to_string(h.maxval));
  RgbImage img{h.width, h.height, {}};
  img.data.resize(h.height, h.width * 3);
  read_payload(in, img.data.data(), static_cast<std::size_t>(img.data.size()));
  return img;
}

}  // namespace slam3d

#include "slam3d/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "slam3d/atomic_file.hpp"

namespace slam3d {

std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << '(' << s.batch << ',' << s.channels << ',' << s.height << ',' << s.width << ')';
  return os.str();
}

namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    std::reverse(b.begin(), b.end());
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
  }
}

template <typename T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) return false;
  v = to_little(v);
  return true;
}

}  // namespace

void write_snapshot(std::ostream& out, const Tensor& t) {
  const Shape& s = t.shape();
  for (Index d : {s.batch, s.channels, s.height, s.width}) {
    if (d > static_cast<Index>(UINT32_MAX)) throw FormatError("snapshot dimension exceeds uint32");
    put(out, static_cast<std::uint32_t>(d));
  }
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.data().size_bytes()));
  } else {
    for (double v : t.data()) put(out, v);
  }
  if (!out) throw Error("snapshot write failed");
}

Tensor read_snapshot(std::istream& in) {
  std::array<std::uint32_t, 4> dims{};
  for (auto& d : dims)
    if (!get(in, d)) throw TruncatedData("snapshot header shorter than 16 bytes");
  Tensor t({dims[0], dims[1], dims[2], dims[3]});
  for (double& v : t.data())
    if (!get(in, v)) throw TruncatedData("snapshot payload shorter than " + to_string(t.shape()));
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after snapshot");
  return t;
}

std::string encode_snapshot(const Tensor& t) {
  std::ostringstream os(std::ios::binary);
  write_snapshot(os, t);
  return os.str();
}

Tensor decode_snapshot(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return read_snapshot(is);
}

void save_snapshot(const std::filesystem::path& path, const Tensor& t) {
  write_file_atomic(path, encode_snapshot(t));
}

Tensor load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace slam3d

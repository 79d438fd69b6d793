#ifndef SCC_RASTER_IO_HPP
#define SCC_RASTER_IO_HPP

// Raster container format.
//
// Binary variant (all integers/floats little-endian):
//
//   offset  size  field
//   0       4     magic "SCCR"
//   4       4     u32 format version (1)
//   8       12    u32 nx, ny, nz
//   20      24    f64 origin x, y, z   (min corner of cell (0,0,0)) [m]
//   44      8     f64 cell size [m]
//   52      4     u32 value encoding (1 = float32)
//   56      4*N   float32 values, N = nx*ny*nz, x-fastest then y then z
//
// Text variant (whitespace separated, '#' starts a comment):
//
//   scc-raster 1
//   dims <nx> <ny> <nz>
//   origin <x> <y> <z>
//   cell_size <c>
//   values
//   <N numbers, x-fastest>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scc/occupancy.hpp"

namespace scc {

class RasterFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v)
{
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline void put_u64(std::string& out, std::uint64_t v)
{
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline std::uint32_t get_u32(const unsigned char* p)
{
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}
inline std::uint64_t get_u64(const unsigned char* p)
{
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace detail

inline constexpr std::uint32_t raster_format_version = 1;
inline constexpr std::uint32_t raster_encoding_float32 = 1;
inline constexpr std::size_t raster_header_size = 56;

inline std::string encode_raster_binary(const RasterField& r)
{
  std::string out = "SCCR";
  detail::put_u32(out, raster_format_version);
  for (auto d : r.dims()) detail::put_u32(out, static_cast<std::uint32_t>(d));
  for (int a = 0; a < 3; ++a) detail::put_u64(out, std::bit_cast<std::uint64_t>(r.origin()[a]));
  detail::put_u64(out, std::bit_cast<std::uint64_t>(r.cell_size()));
  detail::put_u32(out, raster_encoding_float32);
  out.reserve(out.size() + 4 * r.cell_count());
  for (float v : r.values()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline std::string encode_raster_text(const RasterField& r)
{
  std::ostringstream os;
  os.precision(9);
  os << "scc-raster 1\n";
  os << "dims " << r.dims()[0] << ' ' << r.dims()[1] << ' ' << r.dims()[2] << '\n';
  os.precision(17);
  os << "origin " << r.origin().x() << ' ' << r.origin().y() << ' ' << r.origin().z() << '\n';
  os << "cell_size " << r.cell_size() << '\n';
  os << "values\n";
  os.precision(9);
  const std::size_t nx = r.dims()[0];
  for (std::size_t c = 0; c < r.cell_count(); ++c) os << r.values()[c] << ((c + 1) % nx == 0 ? '\n' : ' ');
  return os.str();
}

inline RasterField decode_raster_binary(const std::string& bytes)
{
  if (bytes.size() < raster_header_size || bytes.compare(0, 4, "SCCR") != 0)
    throw RasterFormatError("raster: missing SCCR header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (detail::get_u32(p + 4) != raster_format_version) throw RasterFormatError("raster: unsupported version");
  RasterField::Dims dims{detail::get_u32(p + 8), detail::get_u32(p + 12), detail::get_u32(p + 16)};
  Vec3 origin;
  for (int a = 0; a < 3; ++a) origin[a] = std::bit_cast<double>(detail::get_u64(p + 20 + 8 * a));
  const double cell = std::bit_cast<double>(detail::get_u64(p + 44));
  if (detail::get_u32(p + 52) != raster_encoding_float32) throw RasterFormatError("raster: unsupported value encoding");
  const std::size_t n = dims[0] * dims[1] * dims[2];
  if (bytes.size() != raster_header_size + 4 * n) throw RasterFormatError("raster: payload size does not match dims");
  std::vector<float> values(n);
  for (std::size_t c = 0; c < n; ++c) values[c] = std::bit_cast<float>(detail::get_u32(p + raster_header_size + 4 * c));
  try {
    return RasterField(origin, cell, dims, std::move(values));
  } catch (const std::invalid_argument& e) {
    throw RasterFormatError(std::string("raster: ") + e.what());
  }
}

inline RasterField decode_raster_text(const std::string& text)
{
  std::istringstream lines(text);
  std::string cleaned, line;
  while (std::getline(lines, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    cleaned += line;
    cleaned += '\n';
  }
  std::istringstream is(cleaned);
  auto expect = [&](const char* kw) {
    std::string tok;
    if (!(is >> tok) || tok != kw) throw RasterFormatError(std::string("raster text: expected '") + kw + "'");
  };
  expect("scc-raster");
  unsigned version = 0;
  if (!(is >> version) || version != raster_format_version) throw RasterFormatError("raster text: unsupported version");
  RasterField::Dims dims{};
  Vec3 origin;
  double cell = 0.0;
  expect("dims");
  if (!(is >> dims[0] >> dims[1] >> dims[2])) throw RasterFormatError("raster text: bad dims");
  expect("origin");
  if (!(is >> origin.x() >> origin.y() >> origin.z())) throw RasterFormatError("raster text: bad origin");
  expect("cell_size");
  if (!(is >> cell)) throw RasterFormatError("raster text: bad cell_size");
  expect("values");
  const std::size_t n = dims[0] * dims[1] * dims[2];
  std::vector<float> values;
  values.reserve(n);
  double v = 0.0;
  while (is >> v) values.push_back(static_cast<float>(v));
  if (!is.eof()) throw RasterFormatError("raster text: non-numeric value");
  if (values.size() != n) throw RasterFormatError("raster text: expected " + std::to_string(n) + " values, got " + std::to_string(values.size()));
  try {
    return RasterField(origin, cell, dims, std::move(values));
  } catch (const std::invalid_argument& e) {
    throw RasterFormatError(std::string("raster text: ") + e.what());
  }
}

/// Detects the variant from the leading bytes.
inline RasterField decode_raster(const std::string& bytes)
{
  if (bytes.size() >= 4 && bytes.compare(0, 4, "SCCR") == 0) return decode_raster_binary(bytes);
  return decode_raster_text(bytes);
}

inline std::string read_file_bytes(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, const std::string& bytes)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline RasterField load_raster(const std::string& path) { return decode_raster(read_file_bytes(path)); }

inline void save_raster(const std::string& path, const RasterField& r, bool text = false)
{
  write_file_bytes(path, text ? encode_raster_text(r) : encode_raster_binary(r));
}

}  // namespace scc

#endif  // SCC_RASTER_IO_HPP

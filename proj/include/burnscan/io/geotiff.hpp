#pragma once

// Minimal GeoTIFF reader/writer. Covers what this pipeline produces
// (little-endian, strip-based, uncompressed or deflate) and enough of the
// wider format to read externally produced rasters: big-endian files,
// tiled layouts, LZW/PackBits/Deflate compression, horizontal-differencing
// predictor, chunky or planar multi-band layouts, 8/16/32-bit integer and
// 32/64-bit float samples. Georeferencing via ModelPixelScale+ModelTiepoint
// or ModelTransformation, CRS via the EPSG GeoKeys, nodata via GDAL_NODATA.

#include <zlib.h>

#include "burnscan/util/bits.hpp"
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "burnscan/geo/grid.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::io {

enum class PixelType { u8, u16, u32, i8, i16, i32, f32, f64 };

inline int pixel_type_bytes(PixelType t) {
  switch (t) {
    case PixelType::u8:
    case PixelType::i8: return 1;
    case PixelType::u16:
    case PixelType::i16: return 2;
    case PixelType::u32:
    case PixelType::i32:
    case PixelType::f32: return 4;
    case PixelType::f64: return 8;
  }
  return 0;
}

inline bool pixel_type_integral(PixelType t) {
  return t != PixelType::f32 && t != PixelType::f64;
}

struct GeoTiffInfo {
  geo::RasterGrid grid;
  int samples = 1;
  PixelType type = PixelType::u8;
  std::optional<double> nodata;
};

// Planar (band-major) pixel storage: band b occupies
// data[b*width*height, (b+1)*width*height).
template <typename T>
struct TypedImage {
  GeoTiffInfo info;
  std::vector<T> data;

  std::span<const T> band(int b) const {
    const std::size_t n = std::size_t(info.grid.width) * info.grid.height;
    return {data.data() + std::size_t(b) * n, n};
  }
  std::span<T> band(int b) {
    const std::size_t n = std::size_t(info.grid.width) * info.grid.height;
    return {data.data() + std::size_t(b) * n, n};
  }
};

namespace tiff {

// ---- tag ids ----
constexpr std::uint16_t kImageWidth = 256, kImageLength = 257, kBitsPerSample = 258,
                        kCompression = 259, kPhotometric = 262, kStripOffsets = 273,
                        kOrientation = 274, kSamplesPerPixel = 277, kRowsPerStrip = 278,
                        kStripByteCounts = 279, kPlanarConfig = 284, kPredictor = 317,
                        kTileWidth = 322, kTileLength = 323, kTileOffsets = 324,
                        kTileByteCounts = 325, kSampleFormat = 339,
                        kModelPixelScale = 33550, kModelTiepoint = 33922,
                        kModelTransformation = 34264, kGeoKeyDirectory = 34735,
                        kGeoDoubleParams = 34736, kGeoAsciiParams = 34737,
                        kGdalNodata = 42113;

constexpr std::uint16_t kCompNone = 1, kCompLzw = 5, kCompPackBits = 32773,
                        kCompDeflate = 8, kCompDeflateAdobe = 32946;

struct Entry {
  std::uint16_t type = 0;
  std::vector<double> nums;   // numeric payloads
  std::string ascii;          // ASCII payloads
};

inline std::size_t type_size(std::uint16_t t) {
  switch (t) {
    case 1: case 2: case 6: case 7: return 1;
    case 3: case 8: return 2;
    case 4: case 9: case 11: return 4;
    case 5: case 10: case 12: return 8;
  }
  return 0;
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size, const std::string& path)
      : d_(data), n_(size), path_(path) {
    if (n_ < 8) fail("file too small for a TIFF header");
    if (d_[0] == 'I' && d_[1] == 'I') big_endian_ = false;
    else if (d_[0] == 'M' && d_[1] == 'M') big_endian_ = true;
    else fail("not a TIFF file (bad byte-order mark)");
    const auto magic = u16(2);
    if (magic == 43) fail("BigTIFF is not supported");
    if (magic != 42) fail("not a TIFF file (bad magic)");
    parse_ifd(u32(4));
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::read_failure, path_ + ": " + msg);
  }

  std::uint16_t u16(std::size_t off) const {
    check(off, 2);
    std::uint16_t v;
    std::memcpy(&v, d_ + off, 2);
    return big_endian_ ? burnscan::bswap(v) : v;
  }
  std::uint32_t u32(std::size_t off) const {
    check(off, 4);
    std::uint32_t v;
    std::memcpy(&v, d_ + off, 4);
    return big_endian_ ? burnscan::bswap(v) : v;
  }

  const Entry* find(std::uint16_t tag) const {
    auto it = entries_.find(tag);
    return it == entries_.end() ? nullptr : &it->second;
  }

  double num(std::uint16_t tag, double fallback) const {
    const Entry* e = find(tag);
    return (e && !e->nums.empty()) ? e->nums[0] : fallback;
  }

  bool big_endian() const { return big_endian_; }
  const std::uint8_t* data() const { return d_; }
  std::size_t size() const { return n_; }
  std::span<const std::uint8_t> bytes(std::size_t off, std::size_t len) const {
    check(off, len);
    return {d_ + off, len};
  }

 private:
  void check(std::size_t off, std::size_t len) const {
    if (off + len > n_ || off + len < off) fail("truncated file");
  }

  void parse_ifd(std::uint32_t ifd_off) {
    const std::uint16_t count = u16(ifd_off);
    for (std::uint16_t i = 0; i < count; ++i) {
      const std::size_t eoff = ifd_off + 2 + std::size_t(i) * 12;
      const std::uint16_t tag = u16(eoff);
      Entry e;
      e.type = u16(eoff + 2);
      const std::uint32_t n = u32(eoff + 4);
      const std::size_t sz = type_size(e.type);
      if (sz == 0) continue;  // unknown field type; skip
      const std::size_t total = sz * n;
      const std::size_t voff = total <= 4 ? eoff + 8 : u32(eoff + 8);
      check(voff, total);
      if (e.type == 2) {
        e.ascii.assign(reinterpret_cast<const char*>(d_ + voff), n);
        while (!e.ascii.empty() && e.ascii.back() == '\0') e.ascii.pop_back();
      } else {
        e.nums.reserve(n);
        for (std::uint32_t k = 0; k < n; ++k) {
          const std::size_t o = voff + std::size_t(k) * sz;
          switch (e.type) {
            case 1: case 7: e.nums.push_back(d_[o]); break;
            case 6: e.nums.push_back(std::int8_t(d_[o])); break;
            case 3: e.nums.push_back(u16(o)); break;
            case 8: e.nums.push_back(std::int16_t(u16(o))); break;
            case 4: e.nums.push_back(u32(o)); break;
            case 9: e.nums.push_back(std::int32_t(u32(o))); break;
            case 5: e.nums.push_back(double(u32(o)) / double(u32(o + 4))); break;
            case 10: e.nums.push_back(double(std::int32_t(u32(o))) /
                                      double(std::int32_t(u32(o + 4)))); break;
            case 11: {
              const std::uint32_t raw = u32(o);
              float f;
              std::memcpy(&f, &raw, 4);
              e.nums.push_back(f);
              break;
            }
            case 12: {
              std::uint64_t raw;
              check(o, 8);
              std::memcpy(&raw, d_ + o, 8);
              if (big_endian_) raw = burnscan::bswap(raw);
              double f;
              std::memcpy(&f, &raw, 8);
              e.nums.push_back(f);
              break;
            }
          }
        }
      }
      entries_[tag] = std::move(e);
    }
  }

  const std::uint8_t* d_;
  std::size_t n_;
  std::string path_;
  bool big_endian_ = false;
  std::map<std::uint16_t, Entry> entries_;
};

// ---- decompressors ----

inline void inflate_into(std::span<const std::uint8_t> src, std::uint8_t* dst,
                         std::size_t dst_len, const std::string& path) {
  uLongf out_len = uLongf(dst_len);
  const int rc = ::uncompress(dst, &out_len, src.data(), uLong(src.size()));
  if (rc != Z_OK)
    throw Error(Errc::read_failure, path + ": deflate strip failed to decompress");
}

inline void unpackbits_into(std::span<const std::uint8_t> src, std::uint8_t* dst,
                            std::size_t dst_len, const std::string& path) {
  std::size_t si = 0, di = 0;
  while (si < src.size() && di < dst_len) {
    const auto n = std::int8_t(src[si++]);
    if (n >= 0) {
      const std::size_t run = std::size_t(n) + 1;
      if (si + run > src.size() || di + run > dst_len) break;
      std::memcpy(dst + di, src.data() + si, run);
      si += run;
      di += run;
    } else if (n != -128) {
      const std::size_t run = std::size_t(-n) + 1;
      if (si >= src.size() || di + run > dst_len) break;
      std::memset(dst + di, src[si++], run);
      di += run;
    }
  }
  if (di != dst_len)
    throw Error(Errc::read_failure, path + ": PackBits strip ended short");
}

// TIFF-flavor LZW: MSB-first variable-width codes, clear=256, EOI=257,
// code width bumps one step early.
inline void unlzw_into(std::span<const std::uint8_t> src, std::uint8_t* dst,
                       std::size_t dst_len, const std::string& path) {
  struct Dict {
    std::vector<std::uint32_t> prev;
    std::vector<std::uint8_t> tail;
    void reset() {
      prev.assign(258, 0xffffffffu);
      tail.assign(258, 0);
      for (int i = 0; i < 256; ++i) tail[std::size_t(i)] = std::uint8_t(i);
    }
    std::uint32_t size() const { return std::uint32_t(prev.size()); }
    void add(std::uint32_t p, std::uint8_t t) {
      prev.push_back(p);
      tail.push_back(t);
    }
  } dict;
  dict.reset();

  std::size_t bitpos = 0, di = 0;
  int width = 9;
  std::uint32_t prev_code = 0xffffffffu;
  std::vector<std::uint8_t> scratch;

  auto read_code = [&]() -> std::uint32_t {
    std::uint32_t code = 0;
    for (int b = 0; b < width; ++b) {
      const std::size_t byte = bitpos >> 3;
      if (byte >= src.size()) return 257;  // treat exhaustion as EOI
      code = (code << 1) | ((src[byte] >> (7 - (bitpos & 7))) & 1);
      ++bitpos;
    }
    return code;
  };
  auto expand = [&](std::uint32_t code) {
    scratch.clear();
    while (code != 0xffffffffu) {
      scratch.push_back(dict.tail[code]);
      code = dict.prev[code];
    }
    for (std::size_t i = scratch.size(); i-- > 0 && di < dst_len;)
      dst[di++] = scratch[i];
  };

  while (di < dst_len) {
    const std::uint32_t code = read_code();
    if (code == 257) break;
    if (code == 256) {
      dict.reset();
      width = 9;
      prev_code = 0xffffffffu;
      continue;
    }
    if (prev_code == 0xffffffffu) {
      if (code > 255) throw Error(Errc::read_failure, path + ": bad LZW stream");
      expand(code);
    } else {
      if (code < dict.size()) {
        expand(code);
        std::uint32_t first = code;
        while (dict.prev[first] != 0xffffffffu) first = dict.prev[first];
        dict.add(prev_code, dict.tail[first]);
      } else if (code == dict.size()) {
        std::uint32_t first = prev_code;
        while (dict.prev[first] != 0xffffffffu) first = dict.prev[first];
        dict.add(prev_code, dict.tail[first]);
        expand(code);
      } else {
        throw Error(Errc::read_failure, path + ": bad LZW code");
      }
    }
    prev_code = code;
    // decoder table lags the encoder's by one entry, so the width bump
    // lands one entry early (TIFF "early change")
    if (dict.size() + 2 >= (1u << width) && width < 12) ++width;
  }
  if (di != dst_len) throw Error(Errc::read_failure, path + ": LZW strip ended short");
}

inline void decompress_into(std::uint16_t comp, std::span<const std::uint8_t> src,
                            std::uint8_t* dst, std::size_t dst_len,
                            const std::string& path) {
  switch (comp) {
    case kCompNone:
      if (src.size() < dst_len)
        throw Error(Errc::read_failure, path + ": strip shorter than expected");
      std::memcpy(dst, src.data(), dst_len);
      break;
    case kCompDeflate:
    case kCompDeflateAdobe: inflate_into(src, dst, dst_len, path); break;
    case kCompLzw: unlzw_into(src, dst, dst_len, path); break;
    case kCompPackBits: unpackbits_into(src, dst, dst_len, path); break;
    default:
      throw Error(Errc::read_failure,
                  path + ": unsupported TIFF compression " + std::to_string(comp));
  }
}

// Undo horizontal differencing in place over one decoded row.
inline void undo_predictor2(std::uint8_t* row, int width, int samples, int sample_bytes) {
  const int stride = samples;
  if (sample_bytes == 1) {
    for (int i = stride; i < width * samples; ++i) row[i] = std::uint8_t(row[i] + row[i - stride]);
  } else if (sample_bytes == 2) {
    auto* p = reinterpret_cast<std::uint16_t*>(row);
    for (int i = stride; i < width * samples; ++i) p[i] = std::uint16_t(p[i] + p[i - stride]);
  } else if (sample_bytes == 4) {
    auto* p = reinterpret_cast<std::uint32_t*>(row);
    for (int i = stride; i < width * samples; ++i) p[i] += p[i - stride];
  }
}

}  // namespace tiff

namespace detail {

inline PixelType classify_pixel_type(int bits, int fmt, const std::string& path) {
  if (fmt == 3) {
    if (bits == 32) return PixelType::f32;
    if (bits == 64) return PixelType::f64;
  } else if (fmt == 2) {
    if (bits == 8) return PixelType::i8;
    if (bits == 16) return PixelType::i16;
    if (bits == 32) return PixelType::i32;
  } else {
    if (bits == 8) return PixelType::u8;
    if (bits == 16) return PixelType::u16;
    if (bits == 32) return PixelType::u32;
  }
  throw Error(Errc::read_failure, path + ": unsupported sample layout (" +
                                      std::to_string(bits) + "-bit, format " +
                                      std::to_string(fmt) + ")");
}

template <typename T>
inline T convert_sample(double v) {
  if constexpr (std::is_integral_v<T>) return T(std::llround(v));
  else return T(v);
}

// Reads one decoded sample (native endianness already restored).
inline double fetch_sample(const std::uint8_t* p, PixelType t) {
  switch (t) {
    case PixelType::u8: return *p;
    case PixelType::i8: return *reinterpret_cast<const std::int8_t*>(p);
    case PixelType::u16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case PixelType::i16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case PixelType::u32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case PixelType::i32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case PixelType::f32: { float v; std::memcpy(&v, p, 4); return v; }
    case PixelType::f64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

inline void byteswap_buffer(std::uint8_t* buf, std::size_t count, int sample_bytes) {
  if (sample_bytes == 2) {
    auto* p = reinterpret_cast<std::uint16_t*>(buf);
    for (std::size_t i = 0; i < count; ++i) p[i] = burnscan::bswap(p[i]);
  } else if (sample_bytes == 4) {
    auto* p = reinterpret_cast<std::uint32_t*>(buf);
    for (std::size_t i = 0; i < count; ++i) p[i] = burnscan::bswap(p[i]);
  } else if (sample_bytes == 8) {
    auto* p = reinterpret_cast<std::uint64_t*>(buf);
    for (std::size_t i = 0; i < count; ++i) p[i] = burnscan::bswap(p[i]);
  }
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(Errc::read_failure, "cannot open " + path);
  const auto size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(size));
  if (!in.read(reinterpret_cast<char*>(buf.data()), size))
    throw Error(Errc::read_failure, "cannot read " + path);
  return buf;
}

}  // namespace detail

// Grid/CRS/nodata metadata from an in-memory TIFF (also used for the
// degenerate GeoTIFF embedded in GeoJP2 boxes).
inline GeoTiffInfo parse_geotiff_info(const std::uint8_t* data, std::size_t size,
                                      const std::string& path) {
  tiff::Reader r(data, size, path);
  GeoTiffInfo info;
  info.grid.width = int(r.num(tiff::kImageWidth, 0));
  info.grid.height = int(r.num(tiff::kImageLength, 0));
  info.samples = int(r.num(tiff::kSamplesPerPixel, 1));

  const int bits = int(r.num(tiff::kBitsPerSample, 1));
  const int fmt = int(r.num(tiff::kSampleFormat, 1));
  info.type = detail::classify_pixel_type(bits, fmt, path);

  if (const auto* e = r.find(tiff::kModelTransformation); e && e->nums.size() >= 16) {
    info.grid.transform = {e->nums[3], e->nums[0], e->nums[1],
                           e->nums[7], e->nums[4], e->nums[5]};
  } else {
    const auto* scale = r.find(tiff::kModelPixelScale);
    const auto* tie = r.find(tiff::kModelTiepoint);
    if (scale && scale->nums.size() >= 2 && tie && tie->nums.size() >= 6) {
      const double sx = scale->nums[0], sy = scale->nums[1];
      // tiepoint: raster (i, j) pinned to world (x, y)
      const double ox = tie->nums[3] - tie->nums[0] * sx;
      const double oy = tie->nums[4] + tie->nums[1] * sy;
      info.grid.transform = {ox, sx, 0.0, oy, 0.0, -sy};
    }
  }

  if (const auto* gk = r.find(tiff::kGeoKeyDirectory); gk && gk->nums.size() >= 4) {
    const auto& k = gk->nums;
    const std::size_t nkeys = std::size_t(k[3]);
    int epsg = 0;
    for (std::size_t i = 1; i <= nkeys && 4 * i + 3 < k.size(); ++i) {
      const int key = int(k[4 * i]), loc = int(k[4 * i + 1]), value = int(k[4 * i + 3]);
      if (loc != 0) continue;  // only inline SHORT values matter for EPSG ids
      if (key == 3072 && value > 0 && value < 32767) epsg = value;          // projected
      if (key == 2048 && epsg == 0 && value > 0 && value < 32767) epsg = value;  // geographic
    }
    if (epsg > 0) info.grid.crs_id = "EPSG:" + std::to_string(epsg);
  }

  if (const auto* nd = r.find(tiff::kGdalNodata); nd && !nd->ascii.empty()) {
    try {
      info.nodata = std::stod(nd->ascii);
    } catch (...) {
      // malformed nodata string: leave unset
    }
  }
  return info;
}

inline GeoTiffInfo read_geotiff_info(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  return parse_geotiff_info(bytes.data(), bytes.size(), path);
}

template <typename T>
TypedImage<T> read_geotiff(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  tiff::Reader r(bytes.data(), bytes.size(), path);
  TypedImage<T> img;
  img.info = parse_geotiff_info(bytes.data(), bytes.size(), path);

  const int width = img.info.grid.width, height = img.info.grid.height;
  const int samples = img.info.samples;
  if (width <= 0 || height <= 0) r.fail("missing image dimensions");
  if (int(r.num(tiff::kOrientation, 1)) != 1) r.fail("unsupported orientation");

  const auto comp = std::uint16_t(r.num(tiff::kCompression, 1));
  const int planar = int(r.num(tiff::kPlanarConfig, 1));
  const int predictor = int(r.num(tiff::kPredictor, 1));
  if (predictor == 3) r.fail("floating-point predictor is not supported");
  const PixelType type = img.info.type;
  const int sb = pixel_type_bytes(type);

  img.data.assign(std::size_t(width) * height * samples, T{});

  const bool tiled = r.find(tiff::kTileOffsets) != nullptr;
  const auto* offsets = r.find(tiled ? tiff::kTileOffsets : tiff::kStripOffsets);
  const auto* counts = r.find(tiled ? tiff::kTileByteCounts : tiff::kStripByteCounts);
  if (!offsets || offsets->nums.empty()) r.fail("missing strip/tile offsets");

  const std::size_t plane = std::size_t(width) * height;
  // chunk geometry: strips are width x rows_per_strip, tiles are tw x th
  const int tw = tiled ? int(r.num(tiff::kTileWidth, 0)) : width;
  const int th = tiled ? int(r.num(tiff::kTileLength, 0))
                       : int(r.num(tiff::kRowsPerStrip, double(height)));
  if (tw <= 0 || th <= 0) r.fail("bad strip/tile geometry");
  const int chunks_across = (width + tw - 1) / tw;
  const int chunks_down = (height + th - 1) / th;
  const int chunk_samples = planar == 2 ? 1 : samples;
  const int chunks_per_plane = chunks_across * chunks_down;
  const int planes = planar == 2 ? samples : 1;

  std::vector<std::uint8_t> chunk(std::size_t(tw) * th * chunk_samples * sb);
  for (int p = 0; p < planes; ++p) {
    for (int cy = 0; cy < chunks_down; ++cy) {
      for (int cx = 0; cx < chunks_across; ++cx) {
        const std::size_t idx =
            std::size_t(p) * chunks_per_plane + std::size_t(cy) * chunks_across + cx;
        if (idx >= offsets->nums.size()) r.fail("strip/tile index out of range");
        const auto off = std::size_t(offsets->nums[idx]);
        std::size_t len = counts && idx < counts->nums.size()
                              ? std::size_t(counts->nums[idx])
                              : chunk.size();
        const int rows_here = tiled ? th : std::min(th, height - cy * th);
        const std::size_t decoded =
            std::size_t(tw) * (tiled ? th : rows_here) * chunk_samples * sb;
        if (off >= r.size()) r.fail("strip/tile offset out of range");
        tiff::decompress_into(comp, r.bytes(off, std::min(len, r.size() - off)),
                              chunk.data(), decoded, path);
        if (r.big_endian())
          detail::byteswap_buffer(chunk.data(), decoded / std::size_t(sb), sb);
        if (predictor == 2)
          for (int row = 0; row < (tiled ? th : rows_here); ++row)
            tiff::undo_predictor2(chunk.data() + std::size_t(row) * tw * chunk_samples * sb,
                                  tw, chunk_samples, sb);

        const int copy_rows = std::min(rows_here, height - cy * th);
        const int copy_cols = std::min(tw, width - cx * tw);
        for (int row = 0; row < copy_rows; ++row) {
          const std::uint8_t* src =
              chunk.data() + (std::size_t(row) * tw) * chunk_samples * sb;
          const long gy = long(cy) * th + row;
          for (int col = 0; col < copy_cols; ++col) {
            const long gx = long(cx) * tw + col;
            for (int s = 0; s < chunk_samples; ++s) {
              const double v = detail::fetch_sample(
                  src + (std::size_t(col) * chunk_samples + s) * sb, type);
              const int band = planar == 2 ? p : s;
              img.data[std::size_t(band) * plane + std::size_t(gy) * width + gx] =
                  detail::convert_sample<T>(v);
            }
          }
        }
      }
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// writer
// ---------------------------------------------------------------------------

enum class TiffCompression { none, deflate };

namespace detail {

struct TagEntry {
  std::uint16_t tag, type;
  std::uint32_t count;
  std::uint32_t inline_value = 0;  // used when payload fits in 4 bytes
  std::vector<std::uint8_t> payload;  // external payload otherwise
};

inline void put16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(std::uint8_t(x & 0xff));
  v.push_back(std::uint8_t(x >> 8));
}
inline void put32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back(std::uint8_t((x >> (8 * i)) & 0xff));
}
inline void put64f(std::vector<std::uint8_t>& v, double x) {
  std::uint64_t raw;
  std::memcpy(&raw, &x, 8);
  for (int i = 0; i < 8; ++i) v.push_back(std::uint8_t((raw >> (8 * i)) & 0xff));
}

template <typename T>
constexpr std::pair<int, int> tiff_sample_desc() {  // {bits, format}
  if constexpr (std::is_same_v<T, std::uint8_t>) return {8, 1};
  else if constexpr (std::is_same_v<T, std::uint16_t>) return {16, 1};
  else if constexpr (std::is_same_v<T, std::uint32_t>) return {32, 1};
  else if constexpr (std::is_same_v<T, std::int16_t>) return {16, 2};
  else if constexpr (std::is_same_v<T, std::int32_t>) return {32, 2};
  else if constexpr (std::is_same_v<T, float>) return {32, 3};
  else if constexpr (std::is_same_v<T, double>) return {64, 3};
  else static_assert(sizeof(T) == 0, "unsupported TIFF sample type");
}

}  // namespace detail

// Writes a little-endian planar GeoTIFF; deterministic byte-for-byte for
// identical inputs.
template <typename T>
void write_geotiff(const std::string& path, const geo::RasterGrid& grid, int samples,
                   std::span<const T> planar_data, std::optional<double> nodata = {},
                   TiffCompression comp = TiffCompression::deflate) {
  grid.validate();
  if (grid.transform.rotated())
    throw Error(Errc::write_failure, "GeoTIFF writer requires a north-up grid");
  const std::size_t plane = std::size_t(grid.width) * grid.height;
  if (planar_data.size() != plane * std::size_t(samples))
    throw Error(Errc::write_failure, "band data size does not match grid dimensions");

  using detail::put16;
  using detail::put32;
  const auto [bits, fmt] = detail::tiff_sample_desc<T>();
  const int sb = bits / 8;

  // strip rows chosen so one strip stays near 1 MiB
  const std::size_t row_bytes = std::size_t(grid.width) * sb;
  const int rows_per_strip =
      int(std::clamp<std::size_t>((1u << 20) / std::max<std::size_t>(row_bytes, 1), 1,
                                  std::size_t(grid.height)));
  const int strips_per_band = (grid.height + rows_per_strip - 1) / rows_per_strip;
  const int n_strips = strips_per_band * samples;

  // compress strips
  std::vector<std::vector<std::uint8_t>> strips;
  strips.reserve(std::size_t(n_strips));
  for (int b = 0; b < samples; ++b) {
    for (int s = 0; s < strips_per_band; ++s) {
      const int row0 = s * rows_per_strip;
      const int rows = std::min(rows_per_strip, grid.height - row0);
      const auto* src = reinterpret_cast<const std::uint8_t*>(
          planar_data.data() + std::size_t(b) * plane + std::size_t(row0) * grid.width);
      const std::size_t raw_len = std::size_t(rows) * row_bytes;
      if (comp == TiffCompression::none) {
        strips.emplace_back(src, src + raw_len);
      } else {
        uLongf bound = compressBound(uLong(raw_len));
        std::vector<std::uint8_t> out(bound);
        if (::compress2(out.data(), &bound, src, uLong(raw_len), 6) != Z_OK)
          throw Error(Errc::write_failure, path + ": deflate failed");
        out.resize(bound);
        strips.push_back(std::move(out));
      }
    }
  }

  // data area: header(8) + strips, then tag payloads, then the IFD
  std::vector<std::uint8_t> out;
  out.reserve(1 << 16);
  out.push_back('I');
  out.push_back('I');
  put16(out, 42);
  put32(out, 0);  // IFD offset patched later

  std::vector<std::uint32_t> strip_offsets, strip_counts;
  for (const auto& s : strips) {
    strip_offsets.push_back(std::uint32_t(out.size()));
    strip_counts.push_back(std::uint32_t(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }
  if (out.size() & 1) out.push_back(0);  // keep offsets word-aligned

  std::vector<detail::TagEntry> tags;
  auto add_shorts = [&](std::uint16_t tag, std::span<const std::uint16_t> vals) {
    detail::TagEntry e{tag, 3, std::uint32_t(vals.size())};
    if (vals.size() <= 2) {
      e.inline_value = vals[0] | (vals.size() > 1 ? std::uint32_t(vals[1]) << 16 : 0);
    } else {
      for (auto v : vals) put16(e.payload, v);
    }
    tags.push_back(std::move(e));
  };
  auto add_short = [&](std::uint16_t tag, std::uint16_t v) {
    add_shorts(tag, std::span<const std::uint16_t>(&v, 1));
  };
  auto add_long = [&](std::uint16_t tag, std::uint32_t v) {
    tags.push_back({tag, 4, 1, v, {}});
  };
  auto add_longs = [&](std::uint16_t tag, std::span<const std::uint32_t> vals) {
    detail::TagEntry e{tag, 4, std::uint32_t(vals.size())};
    if (vals.size() == 1) e.inline_value = vals[0];
    else
      for (auto v : vals) put32(e.payload, v);
    tags.push_back(std::move(e));
  };
  auto add_doubles = [&](std::uint16_t tag, std::span<const double> vals) {
    detail::TagEntry e{tag, 12, std::uint32_t(vals.size())};
    for (auto v : vals) detail::put64f(e.payload, v);
    tags.push_back(std::move(e));
  };
  auto add_ascii = [&](std::uint16_t tag, const std::string& s) {
    detail::TagEntry e{tag, 2, std::uint32_t(s.size() + 1)};
    e.payload.assign(s.begin(), s.end());
    e.payload.push_back(0);
    if (e.payload.size() <= 4) {
      std::uint32_t v = 0;
      for (std::size_t i = 0; i < e.payload.size(); ++i)
        v |= std::uint32_t(e.payload[i]) << (8 * i);
      e.inline_value = v;
      e.payload.clear();
    }
    tags.push_back(std::move(e));
  };

  add_long(tiff::kImageWidth, std::uint32_t(grid.width));
  add_long(tiff::kImageLength, std::uint32_t(grid.height));
  {
    const auto v = std::vector<std::uint16_t>(std::size_t(samples), std::uint16_t(bits));
    add_shorts(tiff::kBitsPerSample, v);
  }
  add_short(tiff::kCompression,
            comp == TiffCompression::none ? tiff::kCompNone : tiff::kCompDeflateAdobe);
  add_short(tiff::kPhotometric, 1);
  add_longs(tiff::kStripOffsets, strip_offsets);
  add_short(tiff::kSamplesPerPixel, std::uint16_t(samples));
  add_long(tiff::kRowsPerStrip, std::uint32_t(rows_per_strip));
  add_longs(tiff::kStripByteCounts, strip_counts);
  add_short(tiff::kPlanarConfig, samples > 1 ? 2 : 1);
  {
    const auto v = std::vector<std::uint16_t>(std::size_t(samples), std::uint16_t(fmt));
    add_shorts(tiff::kSampleFormat, v);
  }
  add_doubles(tiff::kModelPixelScale,
              std::vector<double>{grid.transform.pixel_width,
                                  std::abs(grid.transform.pixel_height), 0.0});
  add_doubles(tiff::kModelTiepoint,
              std::vector<double>{0, 0, 0, grid.transform.origin_x,
                                  grid.transform.origin_y, 0});
  if (grid.crs_id.starts_with("EPSG:")) {
    const int epsg = std::stoi(grid.crs_id.substr(5));
    const bool geographic = epsg >= 4000 && epsg < 5000;
    std::vector<std::uint16_t> keys{1, 1, 0, 3,
                                    1024, 0, 1, std::uint16_t(geographic ? 2 : 1),
                                    1025, 0, 1, 1};
    if (geographic) {
      keys.insert(keys.end(), {2048, 0, 1, std::uint16_t(epsg)});
    } else {
      keys.insert(keys.end(), {3072, 0, 1, std::uint16_t(epsg)});
    }
    add_shorts(tiff::kGeoKeyDirectory, keys);
  }
  if (nodata) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", *nodata);
    add_ascii(tiff::kGdalNodata, buf);
  }

  // place external payloads
  for (auto& t : tags) {
    if (t.payload.empty()) continue;
    if (out.size() & 1) out.push_back(0);
    t.inline_value = std::uint32_t(out.size());
    out.insert(out.end(), t.payload.begin(), t.payload.end());
  }
  if (out.size() & 1) out.push_back(0);

  // IFD (tags are already appended in ascending tag order)
  const std::uint32_t ifd_off = std::uint32_t(out.size());
  put16(out, std::uint16_t(tags.size()));
  for (const auto& t : tags) {
    put16(out, t.tag);
    put16(out, t.type);
    put32(out, t.count);
    put32(out, t.inline_value);
  }
  put32(out, 0);  // no next IFD
  out[4] = std::uint8_t(ifd_off & 0xff);
  out[5] = std::uint8_t((ifd_off >> 8) & 0xff);
  out[6] = std::uint8_t((ifd_off >> 16) & 0xff);
  out[7] = std::uint8_t((ifd_off >> 24) & 0xff);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::write_failure, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
  if (!f) throw Error(Errc::write_failure, "short write to " + path);
}

template <typename T>
void write_geotiff(const std::string& path, const geo::RasterGrid& grid, int samples,
                   const std::vector<T>& planar_data, std::optional<double> nodata = {},
                   TiffCompression comp = TiffCompression::deflate) {
  write_geotiff(path, grid, samples, std::span<const T>(planar_data), nodata, comp);
}

}  // namespace burnscan::io

#pragma once

// JPEG2000 band decode (Sentinel-2 distribution format). Pixel decode is
// delegated to OpenCV; georeferencing comes from the GeoJP2 UUID box, which
// wraps a degenerate GeoTIFF holding only the grid metadata. Builds without
// OpenCV omit jp2 support and the loaders report the format as unreadable.

#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "burnscan/io/geotiff.hpp"
#include "burnscan/util/error.hpp"

#ifdef BURNSCAN_HAS_OPENCV
#include <opencv2/imgcodecs.hpp>
#endif

namespace burnscan::io {

constexpr bool jp2_supported() {
#ifdef BURNSCAN_HAS_OPENCV
  return true;
#else
  return false;
#endif
}

namespace detail {

// GeoTIFF-in-JP2 box identifier
inline constexpr std::uint8_t kGeoJp2Uuid[16] = {0xb1, 0x4b, 0xf8, 0xbd, 0x08, 0x3d,
                                                 0x4b, 0x43, 0xa5, 0xae, 0x8c, 0xd7,
                                                 0xd5, 0xa6, 0xce, 0x03};

inline std::uint32_t jp2_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}
inline std::uint64_t jp2_be64(const std::uint8_t* p) {
  return (std::uint64_t(jp2_be32(p)) << 32) | jp2_be32(p + 4);
}

}  // namespace detail

// Scans the JP2 box tree for a GeoJP2 UUID box and parses the grid out of it.
inline std::optional<GeoTiffInfo> parse_geojp2_info(const std::uint8_t* data,
                                                    std::size_t size,
                                                    const std::string& path) {
  std::size_t off = 0;
  while (off + 8 <= size) {
    std::uint64_t box_len = detail::jp2_be32(data + off);
    const std::uint8_t* type = data + off + 4;
    std::size_t header = 8;
    if (box_len == 1) {
      if (off + 16 > size) break;
      box_len = detail::jp2_be64(data + off + 8);
      header = 16;
    } else if (box_len == 0) {
      box_len = size - off;
    }
    if (box_len < header || off + box_len > size) break;
    if (std::memcmp(type, "uuid", 4) == 0 && box_len >= header + 16 &&
        std::memcmp(data + off + header, detail::kGeoJp2Uuid, 16) == 0) {
      const std::uint8_t* tiff = data + off + header + 16;
      const std::size_t tiff_len = std::size_t(box_len - header - 16);
      return parse_geotiff_info(tiff, tiff_len, path + " (GeoJP2 box)");
    }
    off += std::size_t(box_len);
  }
  return std::nullopt;
}

#ifdef BURNSCAN_HAS_OPENCV

inline TypedImage<std::uint16_t> read_jp2(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  const auto geo_info = parse_geojp2_info(bytes.data(), bytes.size(), path);
  if (!geo_info)
    throw Error(Errc::read_failure, path + ": no GeoJP2 georeferencing box");

  const cv::Mat encoded(1, int(bytes.size()), CV_8UC1,
                        const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat m = cv::imdecode(encoded, cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH);
  if (m.empty()) throw Error(Errc::read_failure, path + ": JPEG2000 decode failed");
  if (m.channels() != 1)
    throw Error(Errc::read_failure, path + ": expected a single-band JPEG2000 image");

  TypedImage<std::uint16_t> img;
  img.info = *geo_info;
  img.info.samples = 1;
  img.info.type = PixelType::u16;
  img.info.grid.width = m.cols;
  img.info.grid.height = m.rows;
  img.data.resize(std::size_t(m.cols) * m.rows);
  if (m.type() == CV_16UC1) {
    for (int r = 0; r < m.rows; ++r)
      std::memcpy(img.data.data() + std::size_t(r) * m.cols, m.ptr<std::uint16_t>(r),
                  std::size_t(m.cols) * 2);
  } else if (m.type() == CV_8UC1) {
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < m.cols; ++c)
        img.data[std::size_t(r) * m.cols + c] = m.at<std::uint8_t>(r, c);
  } else {
    throw Error(Errc::read_failure, path + ": unsupported JPEG2000 sample type");
  }
  return img;
}

#else

inline TypedImage<std::uint16_t> read_jp2(const std::string& path) {
  throw Error(Errc::read_failure,
              path + ": built without JPEG2000 support (enable BURNSCAN_WITH_JP2)");
}

#endif

}  // namespace burnscan::io

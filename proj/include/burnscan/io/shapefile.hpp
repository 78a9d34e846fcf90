#pragma once

// ESRI Shapefile reader, polygons only (shape type 5, plus null shapes).
// Attributes come from the sibling .dbf; CRS from the sibling .prj when it
// carries an EPSG authority code. Ring roles follow shapefile winding:
// clockwise rings are exteriors, counter-clockwise rings are holes, and each
// hole attaches to the exterior that contains its first vertex.

#include "burnscan/util/bits.hpp"
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "burnscan/geo/polygon.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::io {

namespace detail {

inline std::uint32_t be32(const std::uint8_t* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return burnscan::bswap(v);
}
inline std::uint32_t le32(const std::uint8_t* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}
inline std::uint16_t le16(const std::uint8_t* p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}
inline double lef64(const std::uint8_t* p) {
  double v;
  std::memcpy(&v, p, 8);
  return v;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\0", 0, 3);
  const auto e = s.find_last_not_of(" \t\0", std::string::npos, 3);
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

struct DbfField {
  std::string name;
  char type = 'C';
  int length = 0;
};

inline std::vector<std::map<std::string, std::string>> read_dbf(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) return {};  // attributes are optional
  std::vector<std::uint8_t> buf(std::size_t(in.tellg()));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (buf.size() < 32) throw Error(Errc::read_failure, path + ": truncated dBASE file");

  const std::uint32_t n_records = le32(buf.data() + 4);
  const std::uint16_t header_size = le16(buf.data() + 8);
  const std::uint16_t record_size = le16(buf.data() + 10);

  std::vector<DbfField> fields;
  for (std::size_t off = 32; off + 32 <= header_size && buf[off] != 0x0d; off += 32) {
    DbfField f;
    const char* name = reinterpret_cast<const char*>(buf.data() + off);
    f.name.assign(name, strnlen(name, 11));
    f.type = char(buf[off + 11]);
    f.length = buf[off + 16];
    fields.push_back(std::move(f));
  }

  std::vector<std::map<std::string, std::string>> rows;
  rows.reserve(n_records);
  for (std::uint32_t r = 0; r < n_records; ++r) {
    const std::size_t off = std::size_t(header_size) + std::size_t(r) * record_size;
    if (off + record_size > buf.size()) break;
    if (buf[off] == '*') continue;  // deleted record
    std::map<std::string, std::string> row;
    std::size_t fo = off + 1;
    for (const auto& f : fields) {
      std::string raw(reinterpret_cast<const char*>(buf.data() + fo),
                      std::size_t(f.length));
      fo += std::size_t(f.length);
      std::string v = trim(raw);
      if (v.empty()) continue;
      if (f.type == 'D' && v.size() == 8)
        v = v.substr(0, 4) + "-" + v.substr(4, 2) + "-" + v.substr(6, 2);
      if (f.type == 'L') v = (v == "T" || v == "t" || v == "Y" || v == "y") ? "true" : "false";
      row[f.name] = v;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string read_prj_crs(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "";
  std::string wkt((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  // the last AUTHORITY["EPSG","..."] names the full CRS
  const auto pos = wkt.rfind("AUTHORITY[\"EPSG\",\"");
  if (pos == std::string::npos) return "";
  const auto start = pos + std::strlen("AUTHORITY[\"EPSG\",\"");
  const auto end = wkt.find('"', start);
  if (end == std::string::npos) return "";
  return "EPSG:" + wkt.substr(start, end - start);
}

}  // namespace detail

inline std::vector<geo::Polygon> read_shapefile(const std::string& shp_path) {
  std::ifstream in(shp_path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(Errc::read_failure, "cannot open " + shp_path);
  std::vector<std::uint8_t> buf(std::size_t(in.tellg()));
  in.seekg(0);
  if (!in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size())))
    throw Error(Errc::read_failure, "cannot read " + shp_path);
  if (buf.size() < 100 || detail::be32(buf.data()) != 9994)
    throw Error(Errc::read_failure, shp_path + ": not a shapefile");

  const std::filesystem::path base(shp_path);
  auto sibling = [&](const char* ext) {
    return (std::filesystem::path(base).replace_extension(ext)).string();
  };
  const auto attrs = detail::read_dbf(sibling(".dbf"));
  const std::string crs = detail::read_prj_crs(sibling(".prj"));

  std::vector<geo::Polygon> out;
  std::size_t off = 100, record_index = 0;
  while (off + 12 <= buf.size()) {
    const std::size_t content_words = detail::be32(buf.data() + off + 4);
    const std::size_t content_bytes = content_words * 2;
    const std::size_t body = off + 8;
    if (body + content_bytes > buf.size())
      throw Error(Errc::read_failure, shp_path + ": truncated record");
    const std::uint32_t shape_type = detail::le32(buf.data() + body);

    if (shape_type == 5) {
      if (content_bytes < 44 + 8)
        throw Error(Errc::read_failure, shp_path + ": short polygon record");
      const std::uint32_t n_parts = detail::le32(buf.data() + body + 36);
      const std::uint32_t n_points = detail::le32(buf.data() + body + 40);
      const std::size_t parts_off = body + 44;
      const std::size_t points_off = parts_off + std::size_t(n_parts) * 4;
      if (points_off + std::size_t(n_points) * 16 > body + content_bytes)
        throw Error(Errc::read_failure, shp_path + ": polygon record overruns");

      std::vector<geo::Ring> rings;
      for (std::uint32_t p = 0; p < n_parts; ++p) {
        const std::uint32_t start = detail::le32(buf.data() + parts_off + p * 4);
        const std::uint32_t stop = p + 1 < n_parts
                                       ? detail::le32(buf.data() + parts_off + (p + 1) * 4)
                                       : n_points;
        geo::Ring ring;
        for (std::uint32_t i = start; i < stop; ++i) {
          const std::size_t po = points_off + std::size_t(i) * 16;
          ring.pts.push_back(
              {detail::lef64(buf.data() + po), detail::lef64(buf.data() + po + 8)});
        }
        if (ring.pts.size() >= 3 &&
            (ring.pts.front().x != ring.pts.back().x ||
             ring.pts.front().y != ring.pts.back().y))
          ring.pts.push_back(ring.pts.front());
        rings.push_back(std::move(ring));
      }

      // split winding: CW exteriors, CCW holes
      std::vector<geo::Polygon> polys;
      std::vector<geo::Ring> holes;
      for (auto& ring : rings) {
        if (ring.signed_area() <= 0.0) {
          geo::Polygon poly;
          poly.exterior = std::move(ring);
          poly.crs_id = crs;
          if (record_index < attrs.size()) poly.attributes = attrs[record_index];
          polys.push_back(std::move(poly));
        } else {
          holes.push_back(std::move(ring));
        }
      }
      for (auto& hole : holes) {
        bool placed = false;
        for (auto& poly : polys) {
          if (!hole.pts.empty() &&
              geo::ring_crossings_odd(poly.exterior, hole.pts[0].x,
                                      hole.pts[0].y)) {
            poly.holes.push_back(std::move(hole));
            placed = true;
            break;
          }
        }
        if (!placed && !polys.empty()) polys[0].holes.push_back(std::move(hole));
      }
      for (auto& p : polys) out.push_back(std::move(p));
    } else if (shape_type != 0) {
      throw Error(Errc::read_failure, shp_path + ": unsupported shape type " +
                                          std::to_string(shape_type));
    }
    off = body + content_bytes;
    ++record_index;
  }
  return out;
}

}  // namespace burnscan::io

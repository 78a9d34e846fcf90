#pragma once

// Weight container: magic, format version, config JSON, named float32
// blobs (parameters and batch-norm running statistics), trailing CRC-32 of
// everything before it. Fixed little-endian layout, written in one buffer so
// identical state produces identical bytes.

#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "burnscan/seg/network.hpp"
#include "burnscan/util/checksum.hpp"

namespace burnscan::seg {

constexpr char kWeightsMagic[4] = {'B', 'S', 'C', 'W'};
constexpr std::uint32_t kWeightsVersion = 1;

namespace detail {

inline void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}

class WeightsReader {
 public:
  WeightsReader(std::string bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<float> floats(std::size_t n) {
    need(n * 4);
    std::vector<float> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * 4);
    pos_ += n * 4;
    return v;
  }
  std::size_t pos() const { return pos_; }
  const std::string& bytes() const { return bytes_; }

  [[noreturn]] void corrupt(const std::string& why) const {
    throw Error(Errc::corrupt_file, path_ + ": " + why);
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) corrupt("truncated weight file");
  }
  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline void save_weights(Network<float>& net, const std::string& path) {
  std::string buf;
  buf.append(kWeightsMagic, 4);
  detail::put_u32(buf, kWeightsVersion);
  const std::string cfg = to_json(net.config()).dump();
  detail::put_u64(buf, cfg.size());
  buf += cfg;

  auto st = net.state();
  detail::put_u64(buf, st.params.size() + st.buffers.size());
  const auto blob = [&buf](const std::string& name, const std::vector<float>& v) {
    detail::put_u64(buf, name.size());
    buf += name;
    detail::put_u64(buf, v.size());
    const std::size_t at = buf.size();
    buf.resize(at + v.size() * 4);
    std::memcpy(buf.data() + at, v.data(), v.size() * 4);
  };
  for (auto& [name, p] : st.params) blob(name, p->val.v);
  for (auto& [name, b] : st.buffers) blob(name, b->v);

  detail::put_u32(buf, crc32_bytes(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::write_failure, "cannot open " + path + " for writing");
  out.write(buf.data(), long(buf.size()));
  if (!out) throw Error(Errc::write_failure, "short write to " + path);
}

inline Network<float> load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::read_failure, "cannot open " + path);
  std::string bytes{std::istreambuf_iterator<char>(in),
                    std::istreambuf_iterator<char>()};
  detail::WeightsReader r(std::move(bytes), path);

  if (r.str(4) != std::string(kWeightsMagic, 4))
    r.corrupt("not a weight file (bad magic)");
  const auto version = r.u32();
  if (version != kWeightsVersion)
    throw Error(Errc::version_mismatch,
                path + ": weight format version " + std::to_string(version) +
                    ", expected " + std::to_string(kWeightsVersion));

  // checksum covers everything before the trailing 4 bytes
  if (r.bytes().size() < r.pos() + 4) r.corrupt("truncated weight file");
  const std::size_t body = r.bytes().size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i)
    stored |= std::uint32_t(std::uint8_t(r.bytes()[body + i])) << (8 * i);
  if (crc32_bytes(r.bytes().data(), body) != stored)
    r.corrupt("checksum mismatch");

  ModelConfig cfg;
  try {
    cfg = config_from_json(nlohmann::json::parse(r.str(r.u64())));
  } catch (const nlohmann::json::exception& e) {
    r.corrupt(std::string("bad embedded config: ") + e.what());
  }
  Network<float> net(cfg);
  auto st = net.state();

  std::map<std::string, std::vector<float>*> slots;
  for (auto& [name, p] : st.params) slots[name] = &p->val.v;
  for (auto& [name, b] : st.buffers) slots[name] = &b->v;

  const auto n_entries = r.u64();
  if (n_entries != slots.size())
    r.corrupt("expected " + std::to_string(slots.size()) + " blobs, found " +
              std::to_string(n_entries));
  for (std::uint64_t i = 0; i < n_entries; ++i) {
    const std::string name = r.str(r.u64());
    const auto numel = r.u64();
    const auto it = slots.find(name);
    if (it == slots.end()) r.corrupt("unknown blob \"" + name + "\"");
    if (it->second->size() != numel)
      r.corrupt("blob \"" + name + "\" holds " + std::to_string(numel) +
                " values, model wants " + std::to_string(it->second->size()));
    *it->second = r.floats(numel);
    slots.erase(it);
  }
  if (!slots.empty())
    r.corrupt("missing blob \"" + slots.begin()->first + "\"");
  if (r.pos() != body) r.corrupt("trailing bytes after blobs");
  return net;
}

}  // namespace burnscan::seg

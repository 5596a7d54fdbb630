#pragma once

// Checkpoint layout (all integers and floats little-endian):
//
//   offset 0   "HBCL"               magic
//   offset 4   u32 version          = 1
//   offset 8   u32 R                rows (neurons)
//   offset 12  u32 D                input dimension
//   offset 16  f32[R*D]             weights, row-major
//   ...        u8[R]                frozen flags (0/1)
//   ...        i32[R]               class groups, -1 = none

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "hebbcl/errors.hpp"
#include "hebbcl/network.hpp"

namespace hebbcl {

inline constexpr std::array<char, 4> kCheckpointMagic = {'H', 'B', 'C', 'L'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace detail

inline std::vector<unsigned char> serialize_checkpoint(const Network& net) {
  const std::size_t r = net.size();
  const std::size_t d = net.input_dim();
  std::vector<unsigned char> out;
  out.reserve(16 + r * d * 4 + r * 5);
  out.insert(out.end(), kCheckpointMagic.begin(), kCheckpointMagic.end());
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(r));
  detail::put_u32(out, static_cast<std::uint32_t>(d));
  for (float w : net.weights().data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(w));
  for (bool f : net.frozen_flags()) out.push_back(f ? 1 : 0);
  for (ClassId c : net.class_groups()) detail::put_u32(out, static_cast<std::uint32_t>(c));
  return out;
}

inline Network deserialize_checkpoint(std::span<const unsigned char> bytes) {
  auto need = [&](std::size_t offset, std::size_t n, const char* what) {
    if (bytes.size() < offset + n) {
      throw FormatError(std::string("checkpoint truncated while reading ") + what, bytes.size());
    }
  };
  need(0, 16, "header");
  if (std::memcmp(bytes.data(), kCheckpointMagic.data(), 4) != 0) {
    throw FormatError("bad checkpoint magic (expected \"HBCL\")", 0);
  }
  const std::uint32_t version = detail::get_u32(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  }
  const std::size_t r = detail::get_u32(bytes.data() + 8);
  const std::size_t d = detail::get_u32(bytes.data() + 12);
  if (r == 0) throw FormatError("checkpoint has zero rows", 8);
  if (d == 0) throw FormatError("checkpoint has zero input dimension", 12);

  std::size_t off = 16;
  need(off, r * d * 4, "weights");
  RowMatrix<float> w(r, d);
  auto wd = w.data();
  for (std::size_t i = 0; i < r * d; ++i, off += 4) {
    wd[i] = std::bit_cast<float>(detail::get_u32(bytes.data() + off));
  }
  need(off, r, "frozen flags");
  std::vector<bool> frozen(r);
  for (std::size_t i = 0; i < r; ++i, ++off) {
    const unsigned char b = bytes[off];
    if (b > 1) throw FormatError("frozen flag must be 0 or 1", off);
    frozen[i] = b == 1;
  }
  need(off, r * 4, "class groups");
  std::vector<ClassId> groups(r);
  for (std::size_t i = 0; i < r; ++i, off += 4) {
    groups[i] = static_cast<ClassId>(detail::get_u32(bytes.data() + off));
    if (groups[i] < kNoClass) throw FormatError("class group must be >= -1", off);
  }
  if (off != bytes.size()) throw FormatError("trailing bytes after checkpoint payload", off);

  auto net = Network::from_parts(std::move(w), std::move(frozen), std::move(groups));
  // The generator state is not persisted; derive it from the content so that
  // growth after a reload is still deterministic.
  net.reseed(net.hash());
  return net;
}

inline void save_checkpoint(const Network& net, const std::string& path) {
  const auto bytes = serialize_checkpoint(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline Network load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace hebbcl

// Copyright 2026 The SciSumm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary checkpoint of named float64 tensors.
//
// Layout (all integers little-endian):
//   magic "SCSMCKPT" | u32 format_version | u64 seed | u64 config_hash |
//   u32 record_count | records...
//   record: u32 name_len | name bytes | u32 rank | u64 dims[rank] |
//           f64 data[prod(dims)]

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scisumm/errors.hpp"
#include "scisumm/nn.hpp"

namespace scisumm {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::array<char, 8> kCheckpointMagic = {'S', 'C', 'S', 'M', 'C', 'K', 'P', 'T'};

struct CheckpointHeader {
  std::uint32_t format_version = kCheckpointVersion;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

inline std::string hash_hex(std::uint64_t h) {
  std::ostringstream oss;
  oss << std::hex << std::setw(16) << std::setfill('0') << h;
  return oss.str();
}

namespace detail {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    v = to_little(v);
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get(const std::string& what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(v);
  }
  std::string get_string(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const std::string& what) {
    if (n > remaining()) {
      throw CheckpointError("corrupt checkpoint: " + what + " truncated at byte offset " +
                            std::to_string(pos_) + " (file has " + std::to_string(bytes_.size()) +
                            " bytes)");
    }
  }

  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<char> encode_checkpoint(const ParamStore& params, const CheckpointHeader& header) {
  detail::ByteWriter w;
  w.put_bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.put(header.format_version);
  w.put(header.seed);
  w.put(header.config_hash);
  w.put(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    w.put(static_cast<std::uint32_t>(name.size()));
    w.put_bytes(name.data(), name.size());
    w.put(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t dim : t.shape()) w.put(static_cast<std::uint64_t>(dim));
    for (double v : t.data()) w.put(v);
  }
  return w.bytes();
}

struct LoadedCheckpoint {
  CheckpointHeader header;
  ParamStore params;
};

// Decodes a checkpoint. When `expected_hash` is given, a different stored
// config hash is refused.
inline LoadedCheckpoint decode_checkpoint(std::vector<char> bytes,
                                          std::optional<std::uint64_t> expected_hash = {}) {
  detail::ByteReader r(std::move(bytes));
  if (r.get_string(kCheckpointMagic.size(), "magic") !=
      std::string(kCheckpointMagic.begin(), kCheckpointMagic.end())) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  LoadedCheckpoint out;
  out.header.format_version = r.get<std::uint32_t>("format version");
  if (out.header.format_version != kCheckpointVersion) {
    throw CheckpointError("checkpoint format version " + std::to_string(out.header.format_version) +
                          " is not supported (expected version " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  out.header.seed = r.get<std::uint64_t>("seed");
  out.header.config_hash = r.get<std::uint64_t>("config hash");
  if (expected_hash && *expected_hash != out.header.config_hash) {
    throw CheckpointError("config hash mismatch: checkpoint has " +
                          hash_hex(out.header.config_hash) + ", current config is " +
                          hash_hex(*expected_hash));
  }
  const auto count = r.get<std::uint32_t>("record count");
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::size_t start = r.offset();
    const std::string tag = "record " + std::to_string(k) + " (starting at offset " +
                            std::to_string(start) + ")";
    const auto name_len = r.get<std::uint32_t>(tag + " name length");
    std::string name = r.get_string(name_len, tag + " name");
    const auto rank = r.get<std::uint32_t>(tag + " rank");
    if (rank > 8) {
      throw CheckpointError("corrupt checkpoint: " + tag + " claims rank " + std::to_string(rank));
    }
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i)
      shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>(tag + " shape")));
    const std::size_t numel = shape_numel(shape);
    if (numel > r.remaining() / sizeof(double)) {
      throw CheckpointError("corrupt checkpoint: " + tag + " data truncated at byte offset " +
                            std::to_string(r.offset()));
    }
    std::vector<double> values(numel);
    for (double& v : values) v = r.get<double>(tag + " data");
    try {
      out.params.add(name, Tensor::from(std::move(shape), values, true));
    } catch (const ArgumentError& e) {
      throw CheckpointError("corrupt checkpoint: " + tag + ": " + e.what());
    }
  }
  if (r.remaining() != 0) {
    throw CheckpointError("corrupt checkpoint: " + std::to_string(r.remaining()) +
                          " trailing bytes at offset " + std::to_string(r.offset()));
  }
  return out;
}

inline void save_checkpoint(const ParamStore& params, const CheckpointHeader& header,
                            const std::string& path) {
  const auto bytes = encode_checkpoint(params, header);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline LoadedCheckpoint load_checkpoint(const std::string& path,
                                        std::optional<std::uint64_t> expected_hash = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(std::move(bytes), expected_hash);
}

}  // namespace scisumm

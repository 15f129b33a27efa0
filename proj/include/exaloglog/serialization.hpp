/*
 * Copyright 2026 The exaloglog-cpp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef EXALOGLOG_SERIALIZATION_HPP
#define EXALOGLOG_SERIALIZATION_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "exaloglog/sketch.hpp"

namespace exaloglog {

/// Raised when a byte sequence is not a well-formed serialized sketch or
/// token set.
class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sketch wire format:
//   byte 0      magic 'X' (0x58)
//   bytes 1..3  t, d, p
//   payload     ceil(2^p * (6 + t + d) / 8) bytes; register i occupies bits
//               [i*w, (i+1)*w) of the payload bit stream, stream bit j is bit
//               (j mod 8) of payload byte j / 8, values stored LSB first.
inline constexpr std::uint8_t kSketchMagic = 0x58;
inline constexpr std::size_t kSketchHeaderSize = 4;

inline std::vector<std::uint8_t> serialize(const Sketch& sketch) {
  const Params& params = sketch.params();
  const PackedArray& registers = sketch.packed_registers();
  std::vector<std::uint8_t> bytes(kSketchHeaderSize + registers.byte_size());
  bytes[0] = kSketchMagic;
  bytes[1] = static_cast<std::uint8_t>(params.t());
  bytes[2] = static_cast<std::uint8_t>(params.d());
  bytes[3] = static_cast<std::uint8_t>(params.p());
  registers.write_bytes(std::span(bytes).subspan(kSketchHeaderSize));
  return bytes;
}

inline Sketch deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSketchHeaderSize) throw format_error("truncated sketch header");
  if (bytes[0] != kSketchMagic) throw format_error("bad sketch magic");
  Params params = [&] {
    try {
      // t > 3 is accepted on input: it can only have been written by a
      // producer that enabled the override.
      return Params::create(bytes[1], bytes[2], bytes[3], true);
    } catch (const std::domain_error& e) {
      throw format_error(std::string("invalid sketch parameters: ") + e.what());
    }
  }();
  const auto payload = bytes.subspan(kSketchHeaderSize);
  // a payload of 2^48 bytes or more cannot be in memory; avoids overflow below
  if (params.p() > 48) throw format_error("truncated sketch payload");
  const std::size_t expected =
      (static_cast<std::size_t>(params.num_registers()) * params.register_bits() + 7) / 8;
  if (payload.size() < expected) throw format_error("truncated sketch payload");
  if (payload.size() > expected) throw format_error("trailing bytes after sketch payload");
  try {
    return Sketch::from_packed(
        params, PackedArray::read_bytes(payload, params.num_registers(), params.register_bits()));
  } catch (const std::exception& e) {
    throw format_error(std::string("invalid sketch payload: ") + e.what());
  }
}

}  // namespace exaloglog

#endif  // EXALOGLOG_SERIALIZATION_HPP

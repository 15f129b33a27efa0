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

#ifndef EXALOGLOG_PACKED_ARRAY_HPP
#define EXALOGLOG_PACKED_ARRAY_HPP

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace exaloglog {

// Fixed-width unsigned integers packed LSB-first into a contiguous bit
// stream without padding. Element i occupies stream bits [i*w, (i+1)*w);
// stream bit j lives in bit (j mod 64) of word j / 64, so the little-endian
// byte image of the words is the serialized form.
class PackedArray {
 public:
  PackedArray() = default;

  PackedArray(std::size_t size, int width)
      : size_(size), width_(width), words_(word_count(size, width), 0) {
    if (width < 1 || width > 64) throw std::invalid_argument("packed width must be in [1, 64]");
  }

  std::size_t size() const noexcept { return size_; }
  int width() const noexcept { return width_; }

  std::uint64_t get(std::size_t i) const noexcept {
    assert(i < size_);
    const std::size_t bit = i * static_cast<std::size_t>(width_);
    const std::size_t word = bit >> 6;
    const int offset = static_cast<int>(bit & 63);
    std::uint64_t value = words_[word] >> offset;
    if (offset + width_ > 64) value |= words_[word + 1] << (64 - offset);
    return value & mask();
  }

  void set(std::size_t i, std::uint64_t value) noexcept {
    assert(i < size_);
    assert((value & ~mask()) == 0);
    const std::size_t bit = i * static_cast<std::size_t>(width_);
    const std::size_t word = bit >> 6;
    const int offset = static_cast<int>(bit & 63);
    words_[word] = (words_[word] & ~(mask() << offset)) | (value << offset);
    if (offset + width_ > 64) {
      const int spill = offset + width_ - 64;
      const std::uint64_t high_mask = (std::uint64_t{1} << spill) - 1;
      words_[word + 1] = (words_[word + 1] & ~high_mask) | (value >> (64 - offset));
    }
  }

  /// Number of bytes of the serialized bit stream: ceil(size * width / 8).
  std::size_t byte_size() const noexcept {
    return (size_ * static_cast<std::size_t>(width_) + 7) / 8;
  }

  void write_bytes(std::span<std::uint8_t> out) const {
    if (out.size() != byte_size()) throw std::invalid_argument("output span has wrong size");
    for (std::size_t b = 0; b < out.size(); ++b)
      out[b] = static_cast<std::uint8_t>(words_[b >> 3] >> ((b & 7) * 8));
  }

  static PackedArray read_bytes(std::span<const std::uint8_t> in, std::size_t size, int width) {
    PackedArray array(size, width);
    if (in.size() != array.byte_size()) throw std::invalid_argument("input span has wrong size");
    for (std::size_t b = 0; b < in.size(); ++b)
      array.words_[b >> 3] |= static_cast<std::uint64_t>(in[b]) << ((b & 7) * 8);
    // bits beyond the last element must stay clear for equality to be structural
    const std::size_t used = size * static_cast<std::size_t>(width);
    if (used % 64 != 0) {
      const std::uint64_t tail = array.words_.back() >> (used % 64);
      if (tail != 0) throw std::invalid_argument("nonzero padding bits");
    }
    return array;
  }

  friend bool operator==(const PackedArray&, const PackedArray&) = default;

 private:
  static std::size_t word_count(std::size_t size, int width) {
    return (size * static_cast<std::size_t>(width) + 63) / 64;
  }

  std::uint64_t mask() const noexcept {
    return width_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width_) - 1;
  }

  std::size_t size_ = 0;
  int width_ = 1;
  std::vector<std::uint64_t> words_;
};

}  // namespace exaloglog

#endif  // EXALOGLOG_PACKED_ARRAY_HPP

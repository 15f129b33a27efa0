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

#ifndef EXALOGLOG_TOKENS_HPP
#define EXALOGLOG_TOKENS_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "exaloglog/coefficients.hpp"
#include "exaloglog/ml_solver.hpp"
#include "exaloglog/serialization.hpp"

namespace exaloglog {

// Hash tokens: a lossy (r+6)-bit form of a 64-bit hash that keeps the lowest
// r bits and the number of leading zeros of the remaining 64 - r bits. It
// holds everything an insertion into a sketch with p + t <= r needs.
// Tokens are stored in 32 bits, hence r <= 26.
inline constexpr int kMinTokenParameter = 1;
inline constexpr int kMaxTokenParameter = 26;

using Token = std::uint32_t;

inline void check_token_parameter(int r) {
  if (r < kMinTokenParameter || r > kMaxTokenParameter)
    throw std::domain_error("token parameter r must be in [1, 26]");
}

inline Token to_token(std::uint64_t hash, int r) {
  check_token_parameter(r);
  const std::uint64_t low_mask = (std::uint64_t{1} << r) - 1;
  const auto nlz = static_cast<std::uint64_t>(std::countl_zero(hash | low_mask));
  return static_cast<Token>(((hash & low_mask) << 6) + nlz);
}

/// Tokens whose leading-zero field exceeds 64 - r cannot be produced.
inline bool is_valid_token(Token token, int r) noexcept {
  if (r < kMinTokenParameter || r > kMaxTokenParameter) return false;
  return (std::uint64_t{token} >> (r + 6)) == 0 && static_cast<int>(token & 63) <= 64 - r;
}

/// Representative hash 2^(64 - nlz) - 2^r + low (mod 2^64). Inserting it
/// touches the same register with the same update value as any hash that
/// maps to `token`, for every sketch with p + t <= r.
inline std::uint64_t from_token(Token token, int r) {
  if (!is_valid_token(token, r)) throw std::domain_error("invalid token");
  const int nlz = static_cast<int>(token & 63);
  const std::uint64_t leading = nlz == 0 ? 0 : std::uint64_t{1} << (64 - nlz);
  return leading - (std::uint64_t{1} << r) + (token >> 6);
}

/// Probability of a token: 2^-min(r + 1 + nlz, 64) if nlz <= 64 - r, else 0.
inline double token_pmf(Token token, int r) {
  check_token_parameter(r);
  if ((std::uint64_t{token} >> (r + 6)) != 0) throw std::domain_error("token out of range");
  const int nlz = static_cast<int>(token & 63);
  if (nlz > 64 - r) return 0.0;
  return std::ldexp(1.0, -std::min(r + 1 + nlz, 64));
}

/// Deduplicated set of tokens for one parameter r, kept as a sorted sequence.
class TokenSet {
 public:
  explicit TokenSet(int r) : r_(r) { check_token_parameter(r); }

  int r() const noexcept { return r_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  std::span<const Token> tokens() const noexcept { return tokens_; }

  /// Returns true if the token was not yet present.
  bool insert(Token token) {
    if (!is_valid_token(token, r_)) throw std::domain_error("invalid token");
    const auto it = std::lower_bound(tokens_.begin(), tokens_.end(), token);
    if (it != tokens_.end() && *it == token) return false;
    tokens_.insert(it, token);
    return true;
  }

  bool insert_hash(std::uint64_t hash) { return insert(to_token(hash, r_)); }

  /// Bulk insertion: append, sort, deduplicate.
  void insert_all(std::span<const Token> tokens) {
    for (Token token : tokens)
      if (!is_valid_token(token, r_)) throw std::domain_error("invalid token");
    tokens_.insert(tokens_.end(), tokens.begin(), tokens.end());
    std::sort(tokens_.begin(), tokens_.end());
    tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
  }

  bool contains(Token token) const {
    return std::binary_search(tokens_.begin(), tokens_.end(), token);
  }

  /// Inserts the representative hashes of all tokens into a sketch.
  /// Requires p + t <= r.
  void insert_into(Sketch& sketch) const {
    const Params& params = sketch.params();
    if (params.p() + params.t() > r_)
      throw std::invalid_argument("token parameter r is smaller than p + t");
    for (Token token : tokens_) sketch.insert_hash(from_token(token, r_));
  }

  friend bool operator==(const TokenSet&, const TokenSet&) = default;

 private:
  int r_;
  std::vector<Token> tokens_;
};

/// Log-likelihood coefficients of a token set. The result has the shape of a
/// sketch likelihood with p = 0 and t = r; solve it with m = 1.
inline Coefficients token_coefficients(const TokenSet& set) {
  Coefficients c;
  c.t = set.r();
  c.p = 0;
  c.a_scaled = 0;  // 2^64, wraps
  for (Token token : set.tokens()) {
    const int j = std::min(set.r() + 1 + static_cast<int>(token & 63), 64);
    c.b[j] += 1;
    c.a_scaled -= std::uint64_t{1} << (64 - j);
  }
  return c;
}

/// ML estimate from a token set. No bias correction is applied.
inline MlSolution token_ml_estimate(const TokenSet& set) {
  return solve_ml(token_coefficients(set), 1.0);
}

inline double estimate_from_tokens(const TokenSet& set) { return token_ml_estimate(set).estimate; }

// Token set wire format: byte 0 magic 'T' (0x54), byte 1 r, 4-byte
// little-endian count, then count little-endian 32-bit tokens ascending.
inline constexpr std::uint8_t kTokenMagic = 0x54;

inline std::vector<std::uint8_t> serialize_tokens(const TokenSet& set) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(6 + 4 * set.size());
  bytes.push_back(kTokenMagic);
  bytes.push_back(static_cast<std::uint8_t>(set.r()));
  auto put32 = [&bytes](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put32(static_cast<std::uint32_t>(set.size()));
  for (Token token : set.tokens()) put32(token);
  return bytes;
}

inline TokenSet deserialize_tokens(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) throw format_error("truncated token set header");
  if (bytes[0] != kTokenMagic) throw format_error("bad token set magic");
  const int r = bytes[1];
  if (r < kMinTokenParameter || r > kMaxTokenParameter)
    throw format_error("invalid token parameter " + std::to_string(r));
  auto get32 = [&bytes](std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
    return v;
  };
  const std::uint64_t count = get32(2);
  if (bytes.size() < 6 + 4 * count) throw format_error("truncated token list");
  if (bytes.size() > 6 + 4 * count) throw format_error("trailing bytes after token list");
  std::vector<Token> tokens(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    tokens[i] = get32(6 + 4 * i);
    if (!is_valid_token(tokens[i], r)) throw format_error("invalid token at position " + std::to_string(i));
    if (i > 0 && tokens[i] <= tokens[i - 1]) throw format_error("tokens not strictly ascending");
  }
  TokenSet set(r);
  set.insert_all(tokens);
  return set;
}

}  // namespace exaloglog

#endif  // EXALOGLOG_TOKENS_HPP

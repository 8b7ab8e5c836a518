// Copyright 2026 The gmedian Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace gmedian {

/// SplitMix64 finalizer (Stafford mix 13). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a, used to fold string identifiers into stream keys.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based pseudo-random stream.
///
/// Word number c of the stream with key k is mix64(k + (c + 1) * G) where G
/// is the golden-ratio increment 0x9e3779b97f4a7c15. The output depends only
/// on (k, c), so streams are reproducible on every platform and any word can
/// be computed directly. Keys for experiment sub-streams are derived by
/// hashing (base_seed, distribution id, p, replicate) with derive_key().
///
/// A stream is single-owner; share keys, not streams.
class RngStream {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit RngStream(std::uint64_t key) noexcept : key_(key) {}

  static std::uint64_t derive_key(std::uint64_t base_seed, std::string_view dist_id,
                                  std::uint64_t p, std::uint64_t replicate) noexcept {
    std::uint64_t h = mix64(base_seed ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ fnv1a(dist_id));
    h = mix64(h + p * kGamma);
    h = mix64(h ^ (replicate * 0xd1b54a32d192ed03ULL));
    return h;
  }

  static RngStream keyed(std::uint64_t base_seed, std::string_view dist_id, std::uint64_t p,
                         std::uint64_t replicate) noexcept {
    return RngStream(derive_key(base_seed, dist_id, p, replicate));
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Word at an absolute counter position; does not advance the stream.
  std::uint64_t at(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * kGamma);
  }

  /// Maps a 64-bit word to the open interval (0, 1).
  static double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform() noexcept { return to_open_unit(next_u64()); }

  void fill_uniform(Eigen::Ref<Eigen::ArrayXd> out) noexcept {
    const std::uint64_t base = key_ + counter_ * kGamma;
    const auto n = static_cast<std::uint64_t>(out.size());
    double* data = out.data();
    for (std::uint64_t k = 0; k < n; ++k) data[k] = to_open_unit(mix64(base + (k + 1) * kGamma));
    counter_ += n;
  }

  /// Standard normal by the Marsaglia-Tsang ziggurat (128 layers). The
  /// layer index and the signed abscissa come from disjoint bits of one word.
  double normal() noexcept;

  void fill_normal(Eigen::Ref<Eigen::ArrayXd> out) noexcept {
    for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = normal();
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gmedian

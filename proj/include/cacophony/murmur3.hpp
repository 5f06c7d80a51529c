#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace cacophony {

/// MurmurHash3_x64_128 (Austin Appleby's public-domain reference algorithm).
/// Returns {h1, h2}; the canonical byte rendering is h1 then h2, each
/// little-endian.
std::array<std::uint64_t, 2> murmur3_x64_128(std::string_view data, std::uint32_t seed = 0);

/// Incremental front end over the same algorithm, used where the input is
/// naturally split (salt followed by identifier) and copying is wasteful.
class Murmur3x64_128 {
 public:
  explicit Murmur3x64_128(std::uint32_t seed = 0);
  void update(std::string_view data);
  std::array<std::uint64_t, 2> finish() const;

 private:
  void mix_block(const unsigned char* block);

  std::uint64_t h1_;
  std::uint64_t h2_;
  std::array<unsigned char, 16> tail_{};
  std::size_t tail_len_ = 0;
  std::uint64_t total_len_ = 0;
};

}  // namespace cacophony

#include "cacophony/murmur3.hpp"

#include <algorithm>
#include <cstring>

namespace cacophony {

namespace {

constexpr std::uint64_t kC1 = 0x87c37b91114253d5ULL;
constexpr std::uint64_t kC2 = 0x4cf5ad432745937fULL;

constexpr std::uint64_t rotl(std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

constexpr std::uint64_t fmix(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

std::uint64_t load_le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

Murmur3x64_128::Murmur3x64_128(std::uint32_t seed) : h1_(seed), h2_(seed) {}

void Murmur3x64_128::mix_block(const unsigned char* block) {
  std::uint64_t k1 = load_le64(block);
  std::uint64_t k2 = load_le64(block + 8);

  k1 *= kC1;
  k1 = rotl(k1, 31);
  k1 *= kC2;
  h1_ ^= k1;
  h1_ = rotl(h1_, 27);
  h1_ += h2_;
  h1_ = h1_ * 5 + 0x52dce729;

  k2 *= kC2;
  k2 = rotl(k2, 33);
  k2 *= kC1;
  h2_ ^= k2;
  h2_ = rotl(h2_, 31);
  h2_ += h1_;
  h2_ = h2_ * 5 + 0x38495ab5;
}

void Murmur3x64_128::update(std::string_view data) {
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  std::size_t n = data.size();
  total_len_ += n;

  if (tail_len_ > 0) {
    const std::size_t take = std::min(n, 16 - tail_len_);
    std::memcpy(tail_.data() + tail_len_, p, take);
    tail_len_ += take;
    p += take;
    n -= take;
    if (tail_len_ < 16) return;
    mix_block(tail_.data());
    tail_len_ = 0;
  }
  for (; n >= 16; p += 16, n -= 16) mix_block(p);
  std::memcpy(tail_.data(), p, n);
  tail_len_ = n;
}

std::array<std::uint64_t, 2> Murmur3x64_128::finish() const {
  std::uint64_t h1 = h1_;
  std::uint64_t h2 = h2_;
  const unsigned char* tail = tail_.data();
  std::uint64_t k1 = 0;
  std::uint64_t k2 = 0;

  switch (tail_len_) {
    case 15: k2 ^= std::uint64_t{tail[14]} << 48; [[fallthrough]];
    case 14: k2 ^= std::uint64_t{tail[13]} << 40; [[fallthrough]];
    case 13: k2 ^= std::uint64_t{tail[12]} << 32; [[fallthrough]];
    case 12: k2 ^= std::uint64_t{tail[11]} << 24; [[fallthrough]];
    case 11: k2 ^= std::uint64_t{tail[10]} << 16; [[fallthrough]];
    case 10: k2 ^= std::uint64_t{tail[9]} << 8; [[fallthrough]];
    case 9:
      k2 ^= std::uint64_t{tail[8]};
      k2 *= kC2;
      k2 = rotl(k2, 33);
      k2 *= kC1;
      h2 ^= k2;
      [[fallthrough]];
    case 8: k1 ^= std::uint64_t{tail[7]} << 56; [[fallthrough]];
    case 7: k1 ^= std::uint64_t{tail[6]} << 48; [[fallthrough]];
    case 6: k1 ^= std::uint64_t{tail[5]} << 40; [[fallthrough]];
    case 5: k1 ^= std::uint64_t{tail[4]} << 32; [[fallthrough]];
    case 4: k1 ^= std::uint64_t{tail[3]} << 24; [[fallthrough]];
    case 3: k1 ^= std::uint64_t{tail[2]} << 16; [[fallthrough]];
    case 2: k1 ^= std::uint64_t{tail[1]} << 8; [[fallthrough]];
    case 1:
      k1 ^= std::uint64_t{tail[0]};
      k1 *= kC1;
      k1 = rotl(k1, 31);
      k1 *= kC2;
      h1 ^= k1;
      break;
    default:
      break;
  }

  h1 ^= total_len_;
  h2 ^= total_len_;
  h1 += h2;
  h2 += h1;
  h1 = fmix(h1);
  h2 = fmix(h2);
  h1 += h2;
  h2 += h1;
  return {h1, h2};
}

std::array<std::uint64_t, 2> murmur3_x64_128(std::string_view data, std::uint32_t seed) {
  Murmur3x64_128 h(seed);
  h.update(data);
  return h.finish();
}

}  // namespace cacophony

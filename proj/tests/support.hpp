#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cacophony/chatlog.hpp"
#include "cacophony/time.hpp"
#include "cacophony/utf8.hpp"

namespace testing {

using namespace cacophony;

// Same generator as tests/oracles/murmur_golden.py.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : x_(seed) {}
  std::uint64_t next() {
    x_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t x_;
};

inline std::string random_alnum(SplitMix64& rng, std::size_t n) {
  static constexpr std::string_view kAlnum =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += kAlnum[rng.next() % kAlnum.size()];
  return s;
}

inline constexpr std::string_view kHundredChars =
    "the quick brown fox jumps over the lazy dog while chat spams emotes "
    "and asks what is going on here o";

inline Timestamp at(std::string_view iso) { return parse_iso8601(iso).value(); }

inline ChatMessage msg(std::string_view iso, std::string user, std::string text,
                       std::string channel = "chan") {
  return {at(iso), std::move(channel), std::move(user), std::move(text)};
}

inline ChannelStream stream_of(std::vector<ChatMessage> messages, std::string channel = "chan") {
  return {std::move(channel), std::move(messages)};
}

/// Every distinct substring of 1..k_max code points, by direct enumeration.
inline std::set<std::string> brute_force_shingles(std::string_view text, std::size_t k_max) {
  const std::u32string cps = utf8::decode(text);
  std::set<std::string> out;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    for (std::size_t len = 1; len <= k_max && i + len <= cps.size(); ++len) {
      out.insert(utf8::encode(cps.substr(i, len)));
    }
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("cacophony-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::filesystem::path& p, std::string_view content) {
  std::ofstream(p, std::ios::binary) << content;
}

}  // namespace testing

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cacophony {

inline constexpr std::size_t kMaxEmoteLength = 24;

class EmptyLexicon : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Emote codes, matched case-sensitively. Lengths are in code points.
struct EmoteLexicon {
  std::vector<std::string> entries;
  std::size_t max_len = kMaxEmoteLength;

  /// One code per line; blank lines are ignored. Throws std::invalid_argument
  /// for invalid UTF-8 or codes longer than `max_len`.
  static EmoteLexicon parse(std::istream& in, std::size_t max_len = kMaxEmoteLength);
  static EmoteLexicon load(const std::filesystem::path& path,
                           std::size_t max_len = kMaxEmoteLength);
  /// A small list of common global emotes and ASCII emoticons.
  static EmoteLexicon builtin();
};

/// Lowercase discourse-marker phrases; multi-word phrases are space-separated.
struct MarkerLexicon {
  std::vector<std::string> entries;

  static MarkerLexicon parse(std::istream& in);
  static MarkerLexicon load(const std::filesystem::path& path);
  /// oh, well, of course, you know, i mean, so, actually, anyway, like, now.
  static MarkerLexicon builtin();
};

/// Byte trie over emote codes. Because both codes and texts are valid
/// UTF-8, every byte-level match starts and ends on a code point boundary.
class EmoteMatcher {
 public:
  /// Codes longer than `k_max` code points can never be a shingle and are
  /// left out. Throws EmptyLexicon when `lex` has no entries.
  explicit EmoteMatcher(const EmoteLexicon& lex, std::size_t k_max = kMaxEmoteLength);

  /// Calls on_match(entry_id) for every occurrence of a code in `text`.
  template <typename F>
  void scan(std::string_view text, F&& on_match) const {
    const auto* p = reinterpret_cast<const unsigned char*>(text.data());
    const std::size_t n = text.size();
    for (std::size_t start = 0; start < n; ++start) {
      std::int32_t node = root_[p[start]];
      std::size_t pos = start + 1;
      while (node >= 0) {
        const Node& nd = nodes_[static_cast<std::size_t>(node)];
        if (nd.entry >= 0) on_match(static_cast<std::uint32_t>(nd.entry));
        if (pos == n) break;
        node = child(nd, p[pos++]);
      }
    }
  }

  std::size_t entry_count() const { return entries_.size(); }
  const std::string& entry(std::uint32_t id) const { return entries_[id]; }

 private:
  struct Node {
    std::uint32_t edge_begin = 0;
    std::uint32_t edge_end = 0;
    std::int32_t entry = -1;
  };
  struct Edge {
    unsigned char byte;
    std::int32_t target;
  };

  std::int32_t child(const Node& nd, unsigned char b) const {
    for (std::uint32_t e = nd.edge_begin; e < nd.edge_end; ++e) {
      if (edges_[e].byte == b) return edges_[e].target;
    }
    return -1;
  }

  std::vector<std::string> entries_;
  std::int32_t root_[256];
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

/// Greedy longest-match counter over lowercase whitespace tokens.
class MarkerMatcher {
 public:
  /// Throws EmptyLexicon when `lex` has no entries.
  explicit MarkerMatcher(const MarkerLexicon& lex);

  struct Count {
    std::size_t matched = 0;
    std::size_t tokens = 0;
  };

  /// Tokens of one message, and how many of them markers consume. Phrases
  /// never span two messages.
  Count count(std::string_view text) const;

 private:
  // First token -> phrases (as token lists) starting with it, longest first.
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> by_first_;
};

/// ASCII lowercase; other bytes are left untouched.
std::string ascii_lower(std::string_view s);

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// Splits on runs of ASCII whitespace.
std::vector<std::string_view> split_whitespace(std::string_view s);

}  // namespace cacophony

#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cacophony/lexicon.hpp"

namespace cacophony {

/// Generalized suffix automaton over the code points of a bag of texts.
/// Every distinct substring of any added text is exactly one path from the
/// root, so distinct shingle counts come out in one pass over the states
/// instead of materializing every substring. clear() keeps capacity, so one
/// instance per worker can be reused across chunks.
class ShingleAutomaton {
 public:
  ShingleAutomaton();

  void clear();
  /// Adds one text (valid UTF-8). Substrings never span two texts.
  void add(std::string_view text);

  /// Distinct substrings of length 1..k_max over all added texts.
  std::uint64_t count_distinct(std::size_t k_max) const;

  /// The same substrings, as UTF-8 strings, by walking every root path of
  /// length <= k_max.
  std::set<std::string> enumerate(std::size_t k_max) const;

  std::size_t state_count() const { return states_.size(); }

 private:
  struct State {
    std::int32_t len = 0;
    std::int32_t link = -1;
    std::int32_t first_edge = -1;
  };
  struct Edge {
    char32_t symbol;
    std::int32_t target;
    std::int32_t next;
  };
  // Open-addressing index from (state, symbol) to edge. Slots from an older
  // generation count as empty, so clear() is O(1).
  struct Slot {
    std::uint64_t key;
    std::int32_t edge;
    std::uint32_t generation;
  };

  std::int32_t find_edge(std::int32_t state, char32_t c) const;
  void add_edge(std::int32_t state, char32_t c, std::int32_t target);
  void grow_index();
  std::int32_t find(std::int32_t state, char32_t c) const;
  void set_target(std::int32_t state, char32_t c, std::int32_t target);
  std::int32_t clone(std::int32_t q, std::int32_t len);
  std::int32_t extend(std::int32_t last, char32_t c);

  std::vector<State> states_;
  std::vector<Edge> edges_;
  std::vector<Slot> index_;
  std::uint32_t generation_ = 0;
  std::u32string scratch_;
};

/// All distinct substrings of `text` of 1..min(k_max, |text|) code points.
std::set<std::string> shingle_set(std::string_view text, std::size_t k_max = kMaxEmoteLength);

}  // namespace cacophony

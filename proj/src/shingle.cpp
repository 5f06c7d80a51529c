#include "cacophony/shingle.hpp"

#include <algorithm>

#include "cacophony/utf8.hpp"

namespace cacophony {

ShingleAutomaton::ShingleAutomaton() { clear(); }

namespace {

std::uint64_t edge_key(std::int32_t state, char32_t c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(state)) << 32) | c;
}

std::size_t slot_of(std::uint64_t key, std::size_t mask) {
  return static_cast<std::size_t>((key * 0x9E3779B97F4A7C15ULL) >> 29) & mask;
}

}  // namespace

void ShingleAutomaton::clear() {
  states_.clear();
  edges_.clear();
  if (++generation_ == 0) {
    std::fill(index_.begin(), index_.end(), Slot{0, -1, 0});
    generation_ = 1;
  }
  if (index_.empty()) index_.assign(1024, Slot{0, -1, 0});
  states_.push_back({});
}

std::int32_t ShingleAutomaton::find_edge(std::int32_t state, char32_t c) const {
  const std::uint64_t key = edge_key(state, c);
  const std::size_t mask = index_.size() - 1;
  for (std::size_t i = slot_of(key, mask);; i = (i + 1) & mask) {
    const Slot& s = index_[i];
    if (s.generation != generation_) return -1;
    if (s.key == key) return s.edge;
  }
}

void ShingleAutomaton::grow_index() {
  std::vector<Slot> old(index_.size() * 2, Slot{0, -1, 0});
  old.swap(index_);
  const std::size_t mask = index_.size() - 1;
  for (const Slot& s : old) {
    if (s.generation != generation_) continue;
    std::size_t i = slot_of(s.key, mask);
    while (index_[i].generation == generation_) i = (i + 1) & mask;
    index_[i] = s;
  }
}

void ShingleAutomaton::add_edge(std::int32_t state, char32_t c, std::int32_t target) {
  auto& st = states_[static_cast<std::size_t>(state)];
  edges_.push_back({c, target, st.first_edge});
  st.first_edge = static_cast<std::int32_t>(edges_.size() - 1);
  if (edges_.size() * 2 > index_.size()) grow_index();
  const std::uint64_t key = edge_key(state, c);
  const std::size_t mask = index_.size() - 1;
  std::size_t i = slot_of(key, mask);
  while (index_[i].generation == generation_) i = (i + 1) & mask;
  index_[i] = {key, st.first_edge, generation_};
}

std::int32_t ShingleAutomaton::find(std::int32_t state, char32_t c) const {
  const std::int32_t e = find_edge(state, c);
  return e < 0 ? -1 : edges_[static_cast<std::size_t>(e)].target;
}

void ShingleAutomaton::set_target(std::int32_t state, char32_t c, std::int32_t target) {
  if (const std::int32_t e = find_edge(state, c); e >= 0) {
    edges_[static_cast<std::size_t>(e)].target = target;
  } else {
    add_edge(state, c, target);
  }
}

std::int32_t ShingleAutomaton::clone(std::int32_t q, std::int32_t len) {
  const State src = states_[static_cast<std::size_t>(q)];
  states_.push_back({len, src.link, -1});
  const auto id = static_cast<std::int32_t>(states_.size() - 1);
  for (std::int32_t e = src.first_edge; e >= 0; e = edges_[static_cast<std::size_t>(e)].next) {
    const Edge edge = edges_[static_cast<std::size_t>(e)];
    add_edge(id, edge.symbol, edge.target);
  }
  return id;
}

std::int32_t ShingleAutomaton::extend(std::int32_t last, char32_t c) {
  const auto len_of = [this](std::int32_t s) { return states_[static_cast<std::size_t>(s)].len; };

  // The transition already exists when a previous text shares this prefix.
  if (const std::int32_t q = find(last, c); q >= 0) {
    if (len_of(last) + 1 == len_of(q)) return q;
    const std::int32_t cl = clone(q, len_of(last) + 1);
    states_[static_cast<std::size_t>(q)].link = cl;
    for (std::int32_t p = last; p >= 0 && find(p, c) == q;
         p = states_[static_cast<std::size_t>(p)].link) {
      set_target(p, c, cl);
    }
    return cl;
  }

  states_.push_back({len_of(last) + 1, -1, -1});
  const auto cur = static_cast<std::int32_t>(states_.size() - 1);
  std::int32_t p = last;
  while (p >= 0 && find(p, c) < 0) {
    set_target(p, c, cur);
    p = states_[static_cast<std::size_t>(p)].link;
  }
  if (p < 0) {
    states_[static_cast<std::size_t>(cur)].link = 0;
    return cur;
  }
  const std::int32_t q = find(p, c);
  if (len_of(p) + 1 == len_of(q)) {
    states_[static_cast<std::size_t>(cur)].link = q;
    return cur;
  }
  const std::int32_t cl = clone(q, len_of(p) + 1);
  states_[static_cast<std::size_t>(q)].link = cl;
  states_[static_cast<std::size_t>(cur)].link = cl;
  for (; p >= 0 && find(p, c) == q; p = states_[static_cast<std::size_t>(p)].link) {
    set_target(p, c, cl);
  }
  return cur;
}

void ShingleAutomaton::add(std::string_view text) {
  scratch_ = utf8::decode(text);
  std::int32_t last = 0;
  for (const char32_t c : scratch_) last = extend(last, c);
}

std::uint64_t ShingleAutomaton::count_distinct(std::size_t k_max) const {
  // State s holds the substrings with lengths in (len(link(s)), len(s)].
  const auto k = static_cast<std::int64_t>(k_max);
  std::uint64_t total = 0;
  for (std::size_t s = 1; s < states_.size(); ++s) {
    const std::int64_t hi = std::min<std::int64_t>(states_[s].len, k);
    const std::int64_t lo = states_[static_cast<std::size_t>(states_[s].link)].len;
    if (hi > lo) total += static_cast<std::uint64_t>(hi - lo);
  }
  return total;
}

std::set<std::string> ShingleAutomaton::enumerate(std::size_t k_max) const {
  std::set<std::string> out;
  std::u32string path;
  struct Frame {
    std::int32_t state;
    std::int32_t edge;
  };
  std::vector<Frame> stack{{0, states_[0].first_edge}};
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.edge < 0 || path.size() >= k_max) {
      stack.pop_back();
      if (!path.empty()) path.pop_back();
      continue;
    }
    const Edge& e = edges_[static_cast<std::size_t>(top.edge)];
    top.edge = e.next;
    path.push_back(e.symbol);
    out.insert(utf8::encode(path));
    stack.push_back({e.target, states_[static_cast<std::size_t>(e.target)].first_edge});
  }
  return out;
}

std::set<std::string> shingle_set(std::string_view text, std::size_t k_max) {
  ShingleAutomaton sam;
  sam.add(text);
  return sam.enumerate(k_max);
}

}  // namespace cacophony

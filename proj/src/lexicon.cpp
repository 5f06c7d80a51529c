#include "cacophony/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "cacophony/utf8.hpp"

namespace cacophony {

namespace {

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(std::move(line));
  }
  return out;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open lexicon file {}", path.string()));
  return in;
}

}  // namespace

EmoteLexicon EmoteLexicon::parse(std::istream& in, std::size_t max_len) {
  EmoteLexicon lex;
  lex.max_len = max_len;
  for (auto& line : read_lines(in)) {
    if (!utf8::is_valid(line)) throw std::invalid_argument("emote lexicon is not valid UTF-8");
    if (utf8::length(line) > max_len) {
      throw std::invalid_argument(
          fmt::format("emote '{}' is longer than {} characters", line, max_len));
    }
    lex.entries.push_back(std::move(line));
  }
  return lex;
}

EmoteLexicon EmoteLexicon::load(const std::filesystem::path& path, std::size_t max_len) {
  auto in = open_or_throw(path);
  return parse(in, max_len);
}

EmoteLexicon EmoteLexicon::builtin() {
  EmoteLexicon lex;
  lex.entries = {
      "Kappa",        "PogChamp",    "Kreygasm",      "BibleThump",  "FrankerZ",
      "ResidentSleeper", "4Head",    "DansGame",      "SwiftRage",   "BabyRage",
      "WutFace",      "EleGiggle",   "SMOrc",         "OpieOP",      "NotLikeThis",
      "TriHard",      "MrDestructoid", "BloodTrail",  "Keepo",       "HeyGuys",
      "SeemsGood",    "LUL",         "CoolStoryBob",  "VoHiYo",      "KappaPride",
      "PJSalt",       "DatSheffy",   "FailFish",      "BrokeBack",   "ANELE",
      ":)",           ":(",          ":D",            ":-)",         ":-(",
      ";)",           ":P",          "<3",            ":O",          "B)",
  };
  return lex;
}

MarkerLexicon MarkerLexicon::parse(std::istream& in) {
  MarkerLexicon lex;
  for (auto& line : read_lines(in)) {
    if (ascii_lower(line) != line) {
      throw std::invalid_argument(fmt::format("marker '{}' is not lowercase", line));
    }
    lex.entries.push_back(std::move(line));
  }
  return lex;
}

MarkerLexicon MarkerLexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in);
}

MarkerLexicon MarkerLexicon::builtin() {
  return {{"oh", "well", "of course", "you know", "i mean", "so", "actually", "anyway", "like",
           "now"}};
}

EmoteMatcher::EmoteMatcher(const EmoteLexicon& lex, std::size_t k_max) {
  if (lex.entries.empty()) throw EmptyLexicon("emote lexicon is empty");

  // Build with ordered maps, then flatten into sorted edge ranges.
  struct Build {
    std::map<unsigned char, std::int32_t> children;
    std::int32_t entry = -1;
  };
  std::vector<Build> build(1);
  std::set<std::string> seen;
  for (const auto& code : lex.entries) {
    if (code.empty() || utf8::length(code) > k_max || !seen.insert(code).second) continue;
    std::int32_t node = 0;
    for (const char c : code) {
      const auto b = static_cast<unsigned char>(c);
      auto it = build[static_cast<std::size_t>(node)].children.find(b);
      if (it == build[static_cast<std::size_t>(node)].children.end()) {
        build.emplace_back();
        const auto id = static_cast<std::int32_t>(build.size() - 1);
        build[static_cast<std::size_t>(node)].children.emplace(b, id);
        node = id;
      } else {
        node = it->second;
      }
    }
    build[static_cast<std::size_t>(node)].entry = static_cast<std::int32_t>(entries_.size());
    entries_.push_back(code);
  }

  // Node i of the flat trie is build node i + 1; the build root becomes root_.
  std::fill(std::begin(root_), std::end(root_), -1);
  for (const auto& [b, id] : build[0].children) root_[b] = id - 1;
  nodes_.resize(build.size() - 1);
  for (std::size_t i = 1; i < build.size(); ++i) {
    Node& nd = nodes_[i - 1];
    nd.entry = build[i].entry;
    nd.edge_begin = static_cast<std::uint32_t>(edges_.size());
    for (const auto& [b, id] : build[i].children) edges_.push_back({b, id - 1});
    nd.edge_end = static_cast<std::uint32_t>(edges_.size());
  }
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    const std::size_t begin = i;
    while (i < s.size() && !is_ascii_space(s[i])) ++i;
    if (i > begin) out.push_back(s.substr(begin, i - begin));
  }
  return out;
}

MarkerMatcher::MarkerMatcher(const MarkerLexicon& lex) {
  if (lex.entries.empty()) throw EmptyLexicon("marker lexicon is empty");
  std::set<std::vector<std::string>> unique;
  for (const auto& phrase : lex.entries) {
    std::vector<std::string> tokens;
    for (const auto t : split_whitespace(ascii_lower(phrase))) tokens.emplace_back(t);
    if (!tokens.empty()) unique.insert(std::move(tokens));
  }
  if (unique.empty()) throw EmptyLexicon("marker lexicon has no tokens");
  for (const auto& tokens : unique) by_first_[tokens.front()].push_back(tokens);
  for (auto& [first, phrases] : by_first_) {
    std::stable_sort(phrases.begin(), phrases.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
  }
}

MarkerMatcher::Count MarkerMatcher::count(std::string_view text) const {
  const std::string lower = ascii_lower(text);
  const auto tokens = split_whitespace(lower);
  Count c;
  c.tokens = tokens.size();
  std::string key;
  for (std::size_t i = 0; i < tokens.size();) {
    key.assign(tokens[i]);
    const auto it = by_first_.find(key);
    std::size_t consumed = 0;
    if (it != by_first_.end()) {
      for (const auto& phrase : it->second) {
        if (i + phrase.size() > tokens.size()) continue;
        bool ok = true;
        for (std::size_t k = 1; k < phrase.size() && ok; ++k) ok = tokens[i + k] == phrase[k];
        if (ok) {
          consumed = phrase.size();
          break;
        }
      }
    }
    if (consumed > 0) {
      c.matched += consumed;
      i += consumed;
    } else {
      ++i;
    }
  }
  return c;
}

}  // namespace cacophony

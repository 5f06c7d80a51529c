#include "cacophony/metrics.hpp"

#include <algorithm>

#include "cacophony/utf8.hpp"

namespace cacophony {

namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

void finish_chunk(Chunk& c, std::vector<std::string_view>& authors) {
  std::sort(authors.begin(), authors.end());
  for (std::size_t i = 0; i < authors.size();) {
    std::size_t j = i;
    while (j < authors.size() && authors[j] == authors[i]) ++j;
    c.per_user_counts.emplace_back(authors[i], static_cast<std::int64_t>(j - i));
    i = j;
  }
  authors.clear();
}

}  // namespace

std::vector<Chunk> chunk(const ChannelStream& stream, const BotSet& bots, Duration dt) {
  std::vector<Chunk> out;
  std::vector<std::string_view> authors;
  for (const auto& m : stream.messages) {
    const Timestamp slot = floor_to_grid(m.timestamp, dt);
    if (out.empty() || out.back().t_start != slot) {
      if (!out.empty()) finish_chunk(out.back(), authors);
      out.push_back({stream.channel, slot, 0, {}, {}});
    }
    Chunk& c = out.back();
    ++c.volume;
    if (!bots.contains(m.user)) {
      c.messages.push_back(&m);
      authors.push_back(m.user);
    }
  }
  if (!out.empty()) finish_chunk(out.back(), authors);
  return out;
}

std::optional<double> messages_per_user(const Chunk& c) {
  if (c.users() == 0) return std::nullopt;
  return static_cast<double>(c.messages.size()) / static_cast<double>(c.users());
}

double question_fraction(const Chunk& c) {
  if (c.messages.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto* m : c.messages) {
    std::string_view t = m->text;
    while (!t.empty() && is_ascii_space(t.back())) t.remove_suffix(1);
    hits += !t.empty() && t.back() == '?';
  }
  return static_cast<double>(hits) / static_cast<double>(c.messages.size());
}

double mention_fraction(const Chunk& c) {
  if (c.messages.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto* m : c.messages) {
    const std::string_view t = m->text;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const bool token_start = i == 0 || is_ascii_space(t[i - 1]);
      if (token_start && t[i] == '@' && is_word_char(t[i + 1])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(c.messages.size());
}

double marker_fraction(const Chunk& c, const MarkerMatcher& markers) {
  std::size_t matched = 0;
  std::size_t tokens = 0;
  for (const auto* m : c.messages) {
    const auto n = markers.count(m->text);
    matched += n.matched;
    tokens += n.tokens;
  }
  return tokens == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(tokens);
}

double emote_fraction(const Chunk& c, const EmoteMatcher& emotes, std::size_t k_max,
                      ShingleAutomaton& sam) {
  sam.clear();
  std::vector<bool> seen(emotes.entry_count(), false);
  std::size_t emote_shingles = 0;
  for (const auto* m : c.messages) {
    sam.add(m->text);
    emotes.scan(m->text, [&](std::uint32_t id) {
      if (!seen[id]) {
        seen[id] = true;
        ++emote_shingles;
      }
    });
  }
  const std::uint64_t total = sam.count_distinct(k_max);
  return total == 0 ? 0.0 : static_cast<double>(emote_shingles) / static_cast<double>(total);
}

std::optional<double> block_compression(const Chunk& c, DeflateCompressor& z) {
  if (c.messages.empty()) return std::nullopt;
  std::vector<std::string_view> texts;
  texts.reserve(c.messages.size());
  for (const auto* m : c.messages) texts.push_back(m->text);
  return compression_ratio(texts, z);
}

std::optional<double> mean_length(const Chunk& c) {
  if (c.messages.empty()) return std::nullopt;
  std::size_t total = 0;
  for (const auto* m : c.messages) total += utf8::length(m->text);
  return static_cast<double>(total) / static_cast<double>(c.messages.size());
}

MetricsEngine::MetricsEngine(const EmoteMatcher& emotes, const MarkerMatcher& markers,
                             std::size_t k_max)
    : emotes_(emotes), markers_(markers), k_max_(k_max) {}

ChunkMetrics MetricsEngine::compute(const Chunk& c) {
  ChunkMetrics out;
  if (c.messages.empty()) return out;
  out.messages_per_user = messages_per_user(c);
  out.mean_length = mean_length(c);
  out.p_question = question_fraction(c);
  out.p_mention = mention_fraction(c);
  out.p_marker = marker_fraction(c, markers_);
  out.p_emote = emote_fraction(c, emotes_, k_max_, sam_);
  out.rho_c = block_compression(c, z_);
  return out;
}

}  // namespace cacophony

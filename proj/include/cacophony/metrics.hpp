#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cacophony/botfilter.hpp"
#include "cacophony/chatlog.hpp"
#include "cacophony/deflate.hpp"
#include "cacophony/lexicon.hpp"
#include "cacophony/shingle.hpp"

namespace cacophony {

/// All messages of one channel inside one grid window. Views into the
/// ChannelStream it was cut from, which must outlive it.
struct Chunk {
  std::string_view channel;
  Timestamp t_start;
  std::int64_t volume = 0;                    // V: every message, bots included
  std::vector<const ChatMessage*> messages;   // non-bot messages, stream order
  std::vector<std::pair<std::string_view, std::int64_t>> per_user_counts;  // sorted by user

  std::size_t users() const { return per_user_counts.size(); }
};

/// Cuts a stream on the epoch-aligned `dt` grid. Empty windows yield no chunk.
std::vector<Chunk> chunk(const ChannelStream& stream, const BotSet& bots,
                         Duration dt = std::chrono::minutes(5));

/// Human messages over distinct human authors; empty when U = 0.
std::optional<double> messages_per_user(const Chunk& c);

/// Fraction of messages ending in '?' after trailing whitespace is stripped.
double question_fraction(const Chunk& c);

/// Fraction of messages with a token of the form @ followed by a word
/// character ([A-Za-z0-9_]).
double mention_fraction(const Chunk& c);

/// Marker-consumed tokens over all tokens; 0 for a chunk without tokens.
double marker_fraction(const Chunk& c, const MarkerMatcher& markers);

/// Distinct emote shingles over distinct shingles, 0 when there are none.
/// `sam` is scratch space.
double emote_fraction(const Chunk& c, const EmoteMatcher& emotes, std::size_t k_max,
                      ShingleAutomaton& sam);

/// DEFLATE ratio of the chunk's human messages; empty without messages.
std::optional<double> block_compression(const Chunk& c, DeflateCompressor& z);

/// Mean length in code points; empty without messages.
std::optional<double> mean_length(const Chunk& c);

struct ChunkMetrics {
  std::optional<double> messages_per_user;
  std::optional<double> mean_length;
  std::optional<double> p_question;
  std::optional<double> p_mention;
  std::optional<double> p_marker;
  std::optional<double> p_emote;
  std::optional<double> rho_c;
};

/// Per-worker bundle of lexicon matchers and scratch state.
class MetricsEngine {
 public:
  MetricsEngine(const EmoteMatcher& emotes, const MarkerMatcher& markers,
                std::size_t k_max = kMaxEmoteLength);

  /// Every field is empty for a chunk without human messages.
  ChunkMetrics compute(const Chunk& c);

 private:
  const EmoteMatcher& emotes_;
  const MarkerMatcher& markers_;
  std::size_t k_max_;
  ShingleAutomaton sam_;
  DeflateCompressor z_;
};

}  // namespace cacophony

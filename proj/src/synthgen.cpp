#include "cacophony/synthgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "cacophony/chatlog.hpp"
#include "cacophony/lexicon.hpp"
#include "cacophony/murmur3.hpp"
#include "cacophony/parallel.hpp"

namespace cacophony {

double ResponseModel::expected_output(double v) const {
  if (kind == Kind::increasing) {
    return base_output + (peak_output - base_output) * std::min(v, v_max) / v_max;
  }
  if (v <= v_star) return base_output + (peak_output - base_output) * v / v_star;
  const double down = peak_output - (peak_output - base_output) * (v - v_star) / (v_max - v_star);
  return std::max(base_output, down);
}

void SynthConfig::validate() const {
  if (n_channels == 0) throw ConfigError("n_channels must be positive");
  if (duration <= Duration::zero() || dt <= Duration::zero()) {
    throw ConfigError("duration and dt must be positive");
  }
  if (duration % dt != Duration::zero()) throw ConfigError("duration must be a multiple of dt");
  if (!(bot_fraction >= 0.0 && bot_fraction < 1.0)) {
    throw ConfigError("bot_fraction must lie in [0, 1)");
  }
  if (n_users == 0) throw ConfigError("n_users must be positive");
  if (volume.v_min < 1 || volume.v_max < volume.v_min) {
    throw ConfigError("volume bounds must satisfy 1 <= v_min <= v_max");
  }
  if (volume.sub_fraction) {
    if (*volume.sub_fraction < 0.0 || *volume.sub_fraction > 1.0) {
      throw ConfigError("sub_fraction must lie in [0, 1]");
    }
    if (volume.split_at <= volume.v_min || volume.split_at >= volume.v_max) {
      throw ConfigError("split_at must lie strictly inside (v_min, v_max)");
    }
  }
  if (volume.offline_rate < 0.0 || bot_rate < 0.0) throw ConfigError("rates must be >= 0");
  if (responses.empty()) throw ConfigError("at least one response model is required");
  for (const auto& r : responses) {
    if (!(r.weight > 0.0)) throw ConfigError("response weights must be positive");
    if (!(r.model.v_star > 0.0)) throw ConfigError("v_star must be positive");
    if (r.model.v_max <= r.model.v_star && r.model.kind == ResponseModel::Kind::inverted_u) {
      throw ConfigError("v_max must exceed v_star");
    }
    if (r.model.base_output < 1.0 || r.model.peak_output < r.model.base_output) {
      throw ConfigError("outputs must satisfy 1 <= base_output <= peak_output");
    }
  }
  if (!broadcast_plan.empty()) {
    if (broadcast_plan.size() != n_channels) {
      throw ConfigError("broadcast_plan needs one entry per channel");
    }
    for (const auto& plan : broadcast_plan) {
      for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& iv = plan[i];
        if (!(iv.start < iv.end)) throw ConfigError("planted interval must have start < end");
        if (iv.start < start || iv.end > start + duration) {
          throw ConfigError("planted interval lies outside the simulated span");
        }
        if (i > 0 && iv.start < plan[i - 1].end) {
          throw ConfigError("planted intervals must be sorted and disjoint");
        }
      }
    }
  } else {
    if (auto_plan.min_slots == 0 || auto_plan.max_slots < auto_plan.min_slots) {
      throw ConfigError("auto plan needs 1 <= min_slots <= max_slots");
    }
    const auto slots = static_cast<std::size_t>(duration / dt);
    const auto sep = static_cast<std::size_t>((auto_plan.min_separation + dt - Duration{1}) / dt);
    if (auto_plan.per_channel > 0 &&
        slots / auto_plan.per_channel < auto_plan.max_slots + sep + 1) {
      throw ConfigError("auto broadcast plan does not fit in the simulated span");
    }
  }
}

namespace {

Duration minutes_field(const nlohmann::json& doc, const char* key, Duration fallback) {
  if (!doc.contains(key)) return fallback;
  return std::chrono::duration_cast<Duration>(
      std::chrono::duration<double, std::ratio<60>>(doc.at(key).get<double>()));
}

Timestamp time_field(const nlohmann::json& value) {
  const auto ts = parse_iso8601(value.get<std::string>());
  if (!ts) throw ConfigError(fmt::format("bad timestamp {}", value.dump()));
  return *ts;
}

TextEntropy entropy_field(const nlohmann::json& doc, const char* key, TextEntropy fallback) {
  if (!doc.contains(key)) return fallback;
  const auto s = doc.at(key).get<std::string>();
  if (s == "low") return TextEntropy::low;
  if (s == "high") return TextEntropy::high;
  throw ConfigError(fmt::format("{} must be \"low\" or \"high\"", key));
}

ResponseModel response_from_json(const nlohmann::json& doc) {
  ResponseModel m;
  const auto kind = doc.value("kind", std::string("inverted_u"));
  if (kind == "inverted_u") {
    m.kind = ResponseModel::Kind::inverted_u;
  } else if (kind == "increasing") {
    m.kind = ResponseModel::Kind::increasing;
  } else {
    throw ConfigError(fmt::format("unknown response kind {}", kind));
  }
  m.v_star = doc.value("v_star", m.v_star);
  m.peak_output = doc.value("peak_output", m.peak_output);
  m.base_output = doc.value("base_output", m.base_output);
  m.v_max = doc.value("v_max", m.v_max);
  return m;
}

nlohmann::json response_to_json(const ResponseModel& m) {
  nlohmann::ordered_json doc;
  doc["kind"] = m.kind == ResponseModel::Kind::inverted_u ? "inverted_u" : "increasing";
  doc["v_star"] = m.v_star;
  doc["peak_output"] = m.peak_output;
  doc["base_output"] = m.base_output;
  doc["v_max"] = m.v_max;
  return doc;
}

}  // namespace

SynthConfig synth_config_from_json(const nlohmann::json& doc) {
  SynthConfig c;
  try {
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("start")) c.start = time_field(doc.at("start"));
    c.duration = minutes_field(doc, "duration_minutes", c.duration);
    c.dt = minutes_field(doc, "dt_minutes", c.dt);
    c.n_channels = doc.value("n_channels", c.n_channels);
    if (doc.contains("broadcast_plan")) {
      for (const auto& channel : doc.at("broadcast_plan")) {
        auto& plan = c.broadcast_plan.emplace_back();
        for (const auto& iv : channel) plan.push_back({time_field(iv.at(0)), time_field(iv.at(1))});
      }
    }
    if (doc.contains("broadcasts")) {
      const auto& b = doc.at("broadcasts");
      c.auto_plan.per_channel = b.value("per_channel", c.auto_plan.per_channel);
      c.auto_plan.min_slots = b.value("min_slots", c.auto_plan.min_slots);
      c.auto_plan.max_slots = b.value("max_slots", c.auto_plan.max_slots);
      c.auto_plan.min_separation =
          minutes_field(b, "min_separation_minutes", c.auto_plan.min_separation);
    }
    if (doc.contains("volume")) {
      const auto& v = doc.at("volume");
      c.volume.v_min = v.value("v_min", c.volume.v_min);
      c.volume.v_max = v.value("v_max", c.volume.v_max);
      if (v.contains("sub_fraction") && !v.at("sub_fraction").is_null()) {
        c.volume.sub_fraction = v.at("sub_fraction").get<double>();
      }
      c.volume.split_at = v.value("split_at", c.volume.split_at);
      c.volume.offline_rate = v.value("offline_rate", c.volume.offline_rate);
    }
    c.n_users = doc.value("n_users", c.n_users);
    c.bot_fraction = doc.value("bot_fraction", c.bot_fraction);
    if (doc.contains("bots")) c.bot_rate = doc.at("bots").value("rate_per_window", c.bot_rate);
    if (doc.contains("responses")) {
      c.responses.clear();
      for (const auto& r : doc.at("responses")) {
        c.responses.push_back({r.value("weight", 1.0), response_from_json(r)});
      }
    }
    if (doc.contains("text")) {
      const auto& t = doc.at("text");
      c.text.question = t.value("question_rate", c.text.question);
      c.text.mention = t.value("mention_rate", c.text.mention);
      c.text.marker = t.value("marker_rate", c.text.marker);
      c.text.emote = t.value("emote_rate", c.text.emote);
    }
    if (doc.contains("vocab_entropy")) {
      const auto& e = doc.at("vocab_entropy");
      c.human_entropy = entropy_field(e, "human", c.human_entropy);
      c.bot_entropy = entropy_field(e, "bot", c.bot_entropy);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid simulation config: {}", e.what()));
  }
  c.validate();
  return c;
}

nlohmann::json GroundTruth::to_json() const {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json b = nlohmann::ordered_json::object();
  for (const auto& [channel, plan] : broadcasts) {
    auto& list = b[channel] = nlohmann::ordered_json::array();
    for (const auto& iv : plan) {
      list.push_back({format_iso8601(iv.start), format_iso8601(iv.end)});
    }
  }
  doc["broadcasts"] = b;
  doc["bot_ids"] = bot_ids;
  nlohmann::ordered_json r = nlohmann::ordered_json::object();
  for (const auto& [user, model] : response_params) r[user] = response_to_json(model);
  doc["response_params"] = r;
  return doc;
}

// ---------------------------------------------------------------------------
// Text models

namespace {

constexpr std::array<std::string_view, 96> kCommonWords = {
    "the",    "a",      "to",     "is",     "it",    "that",   "this",   "and",    "you",
    "i",      "he",     "she",    "we",     "they",  "what",   "why",    "how",    "when",
    "was",    "be",     "not",    "no",     "yes",   "yeah",   "lol",    "lmao",   "gg",
    "wp",     "nice",   "play",   "game",   "stream", "chat",  "mod",    "build",  "item",
    "boss",   "run",    "level",  "map",    "team",  "win",    "lose",   "dead",   "kill",
    "push",   "farm",   "jungle", "mid",    "top",   "bot",    "lane",   "gank",   "ult",
    "skill",  "shot",   "aim",    "clutch", "throw", "rekt",   "hype",   "omg",    "wtf",
    "good",   "bad",    "great",  "love",   "hate",  "think",  "know",   "see",    "look",
    "go",     "get",    "got",    "have",   "had",   "can",    "will",   "just",   "really",
    "too",    "much",   "more",   "some",   "all",   "one",    "two",    "first",  "last",
    "new",    "old",    "again",  "time",   "today", "tonight",
};

constexpr std::string_view kOnsets = "bcdfghjklmnprstvwz";
constexpr std::string_view kVowels = "aeiouy";
constexpr std::string_view kCodas = "nrstlkm";
constexpr std::size_t kVocabularySize = 20000;
constexpr double kZipfExponent = 0.9;

struct Vocabulary {
  std::vector<std::string> words;
  std::vector<double> cdf;  // Zipf over words, common words first
};

const Vocabulary& vocabulary() {
  static const Vocabulary vocab = [] {
    Vocabulary v;
    for (const auto w : kCommonWords) v.words.emplace_back(w);
    std::mt19937_64 rng(0x5eed);  // fixed: the vocabulary is part of the model
    auto pick = [&](std::string_view from) {
      return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
    };
    std::uniform_int_distribution<int> parts(1, 3);
    std::bernoulli_distribution coda(0.4);
    std::set<std::string> seen(v.words.begin(), v.words.end());
    while (v.words.size() < kVocabularySize) {
      std::string w;
      for (int p = parts(rng); p > 0; --p) {
        w += pick(kOnsets);
        w += pick(kVowels);
        if (coda(rng)) w += pick(kCodas);
      }
      if (seen.insert(w).second) v.words.push_back(std::move(w));
    }
    double total = 0.0;
    for (std::size_t r = 0; r < v.words.size(); ++r) {
      total += std::pow(static_cast<double>(r + 1), -kZipfExponent);
      v.cdf.push_back(total);
    }
    for (auto& x : v.cdf) x /= total;
    return v;
  }();
  return vocab;
}

std::size_t zipf_draw(std::mt19937_64& rng) {
  const auto& cdf = vocabulary().cdf;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::size_t successor(std::size_t word, std::size_t which) {
  const auto h = murmur3_x64_128(fmt::format("{}:{}", word, which))[0];
  return static_cast<std::size_t>(h % vocabulary().words.size());
}

constexpr std::array<std::string_view, 12> kBotTemplates = {
    "Thanks for the follow {name}! Welcome to the stream!",
    "{name} now has {n} points",
    "Follow the channel on twitter for stream updates!",
    "!uptime Stream has been live for {n} minutes",
    "Welcome {name}, type !commands for a list of commands",
    "{name} just subscribed! Thank you for the support!",
    "Current song: {song}",
    "Please keep chat friendly and respectful. Thank you!",
    "{name} has been timed out for {n} seconds",
    "Giveaway is open! Type !enter to join, {n} entries so far",
    "Check out the new video: {song}",
    "Leaderboard: {name} is rank {n}",
};

constexpr std::array<std::string_view, 8> kBotNames = {
    "viewer", "friend", "chatter", "newbie", "follower", "player", "fan", "guest"};
constexpr std::array<std::string_view, 4> kSongs = {"Darude - Sandstorm", "Intro Theme",
                                                    "Boss Battle Remix", "Lofi Beats"};

std::string fill_template(std::string_view tpl, std::mt19937_64& rng) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    const std::size_t open = tpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(pos));
      break;
    }
    out.append(tpl.substr(pos, open - pos));
    const std::size_t close = tpl.find('}', open);
    const std::string_view slot = tpl.substr(open + 1, close - open - 1);
    if (slot == "name") {
      out += kBotNames[std::uniform_int_distribution<std::size_t>(0, kBotNames.size() - 1)(rng)];
    } else if (slot == "n") {
      out += fmt::format("{}", 100 * std::uniform_int_distribution<int>(1, 5)(rng));
    } else {
      out += kSongs[std::uniform_int_distribution<std::size_t>(0, kSongs.size() - 1)(rng)];
    }
    pos = close + 1;
  }
  return out;
}

}  // namespace

TextModel::TextModel(TextEntropy entropy, const SynthConfig::TextRates& rates,
                     std::vector<std::string> mention_pool)
    : entropy_(entropy), rates_(rates), mention_pool_(std::move(mention_pool)) {}

std::string TextModel::sample(std::mt19937_64& rng, std::size_t template_seed) const {
  return entropy_ == TextEntropy::high ? sample_high(rng) : sample_low(rng, template_seed);
}

std::string TextModel::sample_high(std::mt19937_64& rng) const {
  static const auto emotes = EmoteLexicon::builtin().entries;
  static const auto markers = MarkerLexicon::builtin().entries;
  const auto& words = vocabulary().words;
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::string out;
  if (coin(rng) < rates_.mention && !mention_pool_.empty()) {
    out += '@';
    out += mention_pool_[std::uniform_int_distribution<std::size_t>(0, mention_pool_.size() - 1)(rng)];
    out += ' ';
  }
  if (coin(rng) < rates_.marker) {
    out += markers[std::uniform_int_distribution<std::size_t>(0, markers.size() - 1)(rng)];
    out += ' ';
  }
  const int n_words = std::uniform_int_distribution<int>(2, 9)(rng);
  std::size_t prev = zipf_draw(rng);
  for (int i = 0; i < n_words; ++i) {
    const std::size_t w =
        i > 0 && coin(rng) < 0.3
            ? successor(prev, std::uniform_int_distribution<std::size_t>(0, 3)(rng))
            : (i == 0 ? prev : zipf_draw(rng));
    std::string word = words[w];
    if (coin(rng) < 0.15) word[0] = static_cast<char>(std::toupper(word[0]));
    if (coin(rng) < 0.05) word += fmt::format("{}", std::uniform_int_distribution<int>(0, 999)(rng));
    if (coin(rng) < 0.1) {
      // Typo: one letter replaced.
      const auto at = std::uniform_int_distribution<std::size_t>(0, word.size() - 1)(rng);
      word[at] = static_cast<char>('a' + std::uniform_int_distribution<int>(0, 25)(rng));
    }
    if (i) out += ' ';
    out += word;
    prev = w;
  }
  if (coin(rng) < rates_.emote) {
    const auto& e = emotes[std::uniform_int_distribution<std::size_t>(0, emotes.size() - 1)(rng)];
    const int repeats = std::uniform_int_distribution<int>(1, 3)(rng);
    const bool glued = coin(rng) < 0.5;
    for (int r = 0; r < repeats; ++r) {
      if (r == 0 || !glued) out += ' ';
      out += e;
    }
  }
  if (coin(rng) < rates_.question) out += '?';
  return out;
}

std::string TextModel::sample_low(std::mt19937_64& rng, std::size_t template_seed) const {
  // Each bot speaks from two templates picked by its seed.
  const std::size_t a = template_seed % kBotTemplates.size();
  const std::size_t b = (template_seed * 7 + 3) % kBotTemplates.size();
  const auto& tpl = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? kBotTemplates[a]
                                                                         : kBotTemplates[b];
  return fill_template(tpl, rng);
}

// ---------------------------------------------------------------------------
// Corpus generation

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::string key(16, '\0');
  for (int i = 0; i < 8; ++i) {
    key[static_cast<std::size_t>(i)] = static_cast<char>(seed >> (8 * i));
    key[static_cast<std::size_t>(8 + i)] = static_cast<char>(stream >> (8 * i));
  }
  return murmur3_x64_128(key)[0];
}

std::vector<BroadcastInterval> draw_plan(const SynthConfig& c, std::mt19937_64& rng) {
  std::vector<BroadcastInterval> plan;
  const auto& ap = c.auto_plan;
  if (ap.per_channel == 0) return plan;
  const auto slots = static_cast<std::size_t>(c.duration / c.dt);
  const auto sep = static_cast<std::size_t>((ap.min_separation + c.dt - Duration{1}) / c.dt);
  const std::size_t segment = slots / ap.per_channel;
  for (std::size_t k = 0; k < ap.per_channel; ++k) {
    const std::size_t len =
        std::uniform_int_distribution<std::size_t>(ap.min_slots, ap.max_slots)(rng);
    // Keep half the separation free at both segment ends.
    const std::size_t lo = (sep + 1) / 2;
    const std::size_t hi = segment - len - (sep + 1) / 2;
    const std::size_t offset = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    const std::size_t first = k * segment + offset;
    plan.push_back({c.start + static_cast<std::int64_t>(first) * c.dt,
                    c.start + static_cast<std::int64_t>(first + len) * c.dt});
  }
  return plan;
}

struct Population {
  std::vector<std::string> names;         // all users
  std::vector<std::size_t> humans;        // indices into names
  std::vector<std::size_t> bots;          // indices into names
  std::vector<std::size_t> model_of;      // per human (parallel to humans)
  std::vector<std::size_t> model_counts;  // humans per model
};

Population draw_population(const SynthConfig& c, std::mt19937_64& rng) {
  Population pop;
  for (std::size_t i = 0; i < c.n_users; ++i) pop.names.push_back(fmt::format("user{:05}", i));
  auto n_bots = static_cast<std::size_t>(std::llround(c.bot_fraction * static_cast<double>(c.n_users)));
  n_bots = std::min(n_bots, c.n_users - 1);
  std::vector<std::size_t> order(c.n_users);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  pop.bots.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_bots));
  pop.humans.assign(order.begin() + static_cast<std::ptrdiff_t>(n_bots), order.end());
  std::sort(pop.bots.begin(), pop.bots.end());
  std::sort(pop.humans.begin(), pop.humans.end());

  std::vector<double> weights;
  for (const auto& r : c.responses) weights.push_back(r.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  pop.model_counts.assign(c.responses.size(), 0);
  for (std::size_t h = 0; h < pop.humans.size(); ++h) {
    const std::size_t m = pick(rng);
    pop.model_of.push_back(m);
    ++pop.model_counts[m];
  }
  return pop;
}

struct RawMessage {
  Timestamp ts;
  std::uint32_t channel;
  std::uint32_t user;
  std::string text;
};

std::vector<RawMessage> generate_channel(const SynthConfig& c, const Population& pop,
                                         const std::vector<BroadcastInterval>& plan,
                                         std::uint32_t channel, const TextModel& human_text,
                                         const TextModel& bot_text) {
  std::mt19937_64 rng(derive_seed(c.seed, channel + 1));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const std::int64_t dt_ms = c.dt.count();
  std::uniform_int_distribution<std::int64_t> offset_s(0, dt_ms / 1000 - 1);

  std::vector<std::size_t> home_bots;
  for (std::size_t b = 0; b < pop.bots.size(); ++b) {
    if (b % c.n_channels == channel) home_bots.push_back(b);
  }
  std::vector<std::size_t> pool(pop.humans.size());
  std::iota(pool.begin(), pool.end(), 0);

  auto stamp = [&](Timestamp window) {
    return window + std::chrono::seconds(offset_s(rng));
  };

  std::vector<RawMessage> out;
  const auto slots = static_cast<std::size_t>(c.duration / c.dt);
  std::size_t next_iv = 0;
  for (std::size_t s = 0; s < slots; ++s) {
    const Timestamp window = c.start + static_cast<std::int64_t>(s) * c.dt;
    while (next_iv < plan.size() && plan[next_iv].end <= window) ++next_iv;
    const bool live = next_iv < plan.size() && plan[next_iv].start <= window;

    if (!live) {
      const int n = std::poisson_distribution<int>(c.volume.offline_rate)(rng);
      for (int i = 0; i < n; ++i) {
        const auto h = std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
        out.push_back({stamp(window), channel, static_cast<std::uint32_t>(pop.humans[h]),
                       human_text.sample(rng)});
      }
      continue;
    }

    std::int64_t target;
    if (c.volume.sub_fraction) {
      target = coin(rng) < *c.volume.sub_fraction
                   ? std::uniform_int_distribution<std::int64_t>(c.volume.v_min,
                                                                 c.volume.split_at - 1)(rng)
                   : std::uniform_int_distribution<std::int64_t>(c.volume.split_at + 1,
                                                                 c.volume.v_max)(rng);
    } else {
      target = std::uniform_int_distribution<std::int64_t>(c.volume.v_min, c.volume.v_max)(rng);
    }
    const auto v = static_cast<double>(target);

    double mean_output = 0.0;
    for (std::size_t m = 0; m < c.responses.size(); ++m) {
      mean_output += static_cast<double>(pop.model_counts[m]) *
                     c.responses[m].model.expected_output(v);
    }
    mean_output /= static_cast<double>(pop.humans.size());
    const auto k = static_cast<std::size_t>(std::clamp<double>(
        std::round(v / mean_output), 1.0, static_cast<double>(pool.size())));

    // Partial Fisher-Yates: pool[0..k) are this window's participants.
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[std::uniform_int_distribution<std::size_t>(i, pool.size() - 1)(rng)]);
    }
    double planned = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      planned += c.responses[pop.model_of[pool[i]]].model.expected_output(v);
    }
    const double scale = v / planned;
    for (std::size_t i = 0; i < k; ++i) {
      const double lambda = scale * c.responses[pop.model_of[pool[i]]].model.expected_output(v);
      const int extra = lambda > 1.0 ? std::poisson_distribution<int>(lambda - 1.0)(rng) : 0;
      const auto user = static_cast<std::uint32_t>(pop.humans[pool[i]]);
      for (int j = 0; j <= extra; ++j) {
        out.push_back({stamp(window), channel, user, human_text.sample(rng)});
      }
    }
    for (const std::size_t b : home_bots) {
      const int n = std::poisson_distribution<int>(c.bot_rate)(rng);
      for (int j = 0; j < n; ++j) {
        out.push_back({stamp(window), channel, static_cast<std::uint32_t>(pop.bots[b]),
                       bot_text.sample(rng, b)});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RawMessage& a, const RawMessage& b) { return a.ts < b.ts; });
  return out;
}

}  // namespace

GroundTruth generate(const SynthConfig& config, std::ostream& corpus) {
  config.validate();
  std::mt19937_64 master(derive_seed(config.seed, 0));
  const Population pop = draw_population(config, master);

  GroundTruth truth;
  std::vector<std::string> channel_names;
  std::vector<std::vector<BroadcastInterval>> plans;
  for (std::size_t ch = 0; ch < config.n_channels; ++ch) {
    channel_names.push_back(fmt::format("chan{:03}", ch));
    plans.push_back(config.broadcast_plan.empty() ? draw_plan(config, master)
                                                  : config.broadcast_plan[ch]);
    truth.broadcasts[channel_names.back()] = plans.back();
  }
  for (const auto b : pop.bots) truth.bot_ids.push_back(pop.names[b]);
  for (std::size_t h = 0; h < pop.humans.size(); ++h) {
    truth.response_params[pop.names[pop.humans[h]]] = config.responses[pop.model_of[h]].model;
  }

  std::vector<std::string> mention_pool;
  for (const auto h : pop.humans) mention_pool.push_back(pop.names[h]);
  const TextModel human_text(config.human_entropy, config.text, std::move(mention_pool));
  const TextModel bot_text(config.bot_entropy, config.text, {});

  std::vector<std::vector<RawMessage>> parts(config.n_channels);
  parallel_for(config.n_channels, default_workers(), [&](std::size_t ch) {
    parts[ch] = generate_channel(config, pop, plans[ch], static_cast<std::uint32_t>(ch),
                                 human_text, bot_text);
  });
  std::vector<RawMessage> all;
  for (auto& part : parts) {
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const RawMessage& a, const RawMessage& b) { return a.ts < b.ts; });

  std::string line;
  for (const auto& m : all) {
    line = format_iso8601(m.ts);
    line += '\t';
    line += channel_names[m.channel];
    line += '\t';
    line += pop.names[m.user];
    line += '\t';
    line += m.text;
    line += '\n';
    corpus << line;
  }
  return truth;
}

}  // namespace cacophony

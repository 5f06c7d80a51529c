#include <doctest.h>

#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "cacophony/lexicon.hpp"
#include "cacophony/metrics.hpp"
#include "cacophony/shingle.hpp"
#include "support.hpp"

using namespace cacophony;
using namespace testing;

namespace {

// Owns the messages a Chunk points into.
struct ChunkFixture {
  ChannelStream stream;
  std::vector<Chunk> chunks;

  ChunkFixture(const std::vector<std::string>& texts, const BotSet& bots = {}) {
    stream.channel = "chan";
    for (std::size_t i = 0; i < texts.size(); ++i) {
      stream.messages.push_back(msg("2014-09-01T12:00:00Z", fmt::format("u{}", i % 3), texts[i]));
    }
    chunks = chunk(stream, bots);
  }
  const Chunk& only() const {
    REQUIRE(chunks.size() == 1);
    return chunks.front();
  }
};

EmoteLexicon emotes(std::vector<std::string> codes) { return {std::move(codes), kMaxEmoteLength}; }
MarkerLexicon markers(std::vector<std::string> phrases) { return {std::move(phrases)}; }

double oracle_emote_fraction(const std::vector<std::string>& texts,
                             const std::vector<std::string>& lexicon, std::size_t k_max) {
  std::set<std::string> all;
  for (const auto& t : texts) {
    const auto s = brute_force_shingles(t, k_max);
    all.insert(s.begin(), s.end());
  }
  if (all.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& code : std::set<std::string>(lexicon.begin(), lexicon.end())) {
    hits += all.contains(code);
  }
  return static_cast<double>(hits) / static_cast<double>(all.size());
}

std::string random_text(SplitMix64& rng, std::size_t max_len) {
  // Small alphabet so repeats and lexicon hits are common; includes a
  // two-byte and a three-byte code point.
  static const std::vector<std::string> kAlphabet = {"a", "b", "K", "p", " ", "\xc3\xa9", "\xe2\x82\xac"};
  std::string s;
  const std::size_t n = rng.next() % (max_len + 1);
  for (std::size_t i = 0; i < n; ++i) s += kAlphabet[rng.next() % kAlphabet.size()];
  return s;
}

}  // namespace

TEST_SUITE("shingles") {
  TEST_CASE("hand-counted shingle sets") {
    CHECK(shingle_set("Kappa").size() == 13);
    CHECK(shingle_set("aaa") == std::set<std::string>{"a", "aa", "aaa"});
    CHECK(shingle_set("").empty());
    CHECK(shingle_set("\xc3\xa9\xc3\xa9") == std::set<std::string>{"\xc3\xa9", "\xc3\xa9\xc3\xa9"});
  }

  TEST_CASE("automaton count and enumeration agree with brute force") {
    SplitMix64 rng(31);
    ShingleAutomaton sam;
    for (int trial = 0; trial < 2000; ++trial) {
      const std::size_t k = 1 + rng.next() % 30;
      sam.clear();
      std::set<std::string> expected;
      const std::size_t n_msgs = 1 + rng.next() % 3;
      for (std::size_t m = 0; m < n_msgs; ++m) {
        const std::string t = random_text(rng, 60);
        sam.add(t);
        const auto s = brute_force_shingles(t, k);
        expected.insert(s.begin(), s.end());
      }
      REQUIRE(sam.count_distinct(k) == expected.size());
      REQUIRE(sam.enumerate(k) == expected);
    }
  }

  TEST_CASE("a reused automaton forgets earlier bags of any size") {
    SplitMix64 rng(32);
    ShingleAutomaton reused;
    for (const std::size_t n_msgs : {400, 1, 200, 3}) {
      reused.clear();
      ShingleAutomaton fresh;
      for (std::size_t m = 0; m < n_msgs; ++m) {
        const std::string t = random_text(rng, 60);
        reused.add(t);
        fresh.add(t);
      }
      CHECK(reused.count_distinct(24) == fresh.count_distinct(24));
      CHECK(reused.state_count() == fresh.state_count());
    }
  }

  TEST_CASE("long messages are capped at k code points") {
    const std::string long_text(200, 'x');
    CHECK(shingle_set(long_text, 24).size() == 24);
  }
}

TEST_SUITE("lexicon") {
  TEST_CASE("lexicon files") {
    std::istringstream in("Kappa\n\nPogChamp\n");
    CHECK(EmoteLexicon::parse(in).entries == std::vector<std::string>{"Kappa", "PogChamp"});
    std::istringstream too_long(std::string(25, 'x') + "\n");
    CHECK_THROWS(EmoteLexicon::parse(too_long));
    std::istringstream upper("Well\n");
    CHECK_THROWS(MarkerLexicon::parse(upper));
    CHECK_THROWS_AS(EmoteMatcher(emotes({})), EmptyLexicon);
    CHECK_THROWS_AS(MarkerMatcher(markers({})), EmptyLexicon);
  }

  TEST_CASE("emote matching is case sensitive and finds glued codes") {
    const EmoteMatcher m(emotes({"Kappa", "KappaPride", ":)"}));
    std::vector<std::uint32_t> ids;
    m.scan("kappa KappaPride:)", [&](std::uint32_t id) { ids.push_back(id); });
    std::sort(ids.begin(), ids.end());
    CHECK(ids.size() == 3);
  }

  TEST_CASE("marker phrases are matched greedily per message") {
    const MarkerMatcher m(markers({"of course", "of", "well"}));
    CHECK(m.count("Of Course yes").matched == 2);
    CHECK(m.count("of yes").matched == 1);
    CHECK(m.count("   ").tokens == 0);
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("chunk volume counts bots, authors do not") {
    ChunkFixture six({"a", "b", "c", "d", "e", "f"});
    CHECK(six.only().volume == 6);
    CHECK(six.only().users() == 3);
    CHECK(*messages_per_user(six.only()) == 2.0);

    ChannelStream s;
    s.channel = "chan";
    for (int i = 0; i < 5; ++i) s.messages.push_back(msg("2014-09-01T12:00:00Z", "bot", "spam"));
    for (int i = 0; i < 5; ++i) s.messages.push_back(msg("2014-09-01T12:01:00Z", fmt::format("h{}", i), "hi"));
    const auto chunks = chunk(s, BotSet{"bot"});
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].volume == 10);
    CHECK(chunks[0].users() == 5);
    CHECK(chunks[0].messages.size() == 5);
  }

  TEST_CASE("bot-only window has volume but no metrics") {
    ChunkFixture f({"spam", "spam"}, BotSet{"u0", "u1"});
    CHECK(f.only().volume == 2);
    CHECK(f.only().users() == 0);
    CHECK_FALSE(messages_per_user(f.only()));
    const EmoteLexicon e = EmoteLexicon::builtin();
    const MarkerLexicon mk = MarkerLexicon::builtin();
    const EmoteMatcher em(e);
    const MarkerMatcher mm(mk);
    MetricsEngine engine(em, mm);
    const auto m = engine.compute(f.only());
    CHECK_FALSE(m.messages_per_user);
    CHECK_FALSE(m.p_question);
    CHECK_FALSE(m.rho_c);
    CHECK_FALSE(m.mean_length);
  }

  TEST_CASE("chunks follow the grid and conserve volume") {
    ChannelStream s;
    s.channel = "chan";
    SplitMix64 rng(4);
    Timestamp t = at("2014-09-01T00:00:00Z");
    for (int i = 0; i < 2000; ++i) {
      t += std::chrono::seconds(rng.next() % 200);
      s.messages.push_back({t, "chan", fmt::format("u{}", rng.next() % 20), "x"});
    }
    for (const auto dt : {std::chrono::minutes(5), std::chrono::minutes(10)}) {
      const auto chunks = chunk(s, BotSet{"u3"}, dt);
      std::int64_t total = 0;
      for (const auto& c : chunks) {
        total += c.volume;
        CHECK(c.t_start == floor_to_grid(c.t_start, dt));
        std::int64_t human = 0;
        for (const auto& [u, n] : c.per_user_counts) human += n;
        CHECK(human == static_cast<std::int64_t>(c.messages.size()));
        CHECK(human <= c.volume);
        if (auto mu = messages_per_user(c)) CHECK(*mu >= 1.0);
      }
      CHECK(total == 2000);
    }
  }

  TEST_CASE("messages per user") {
    std::vector<std::string> ten(10, "x");
    ChunkFixture f(ten);
    CHECK(*messages_per_user(f.only()) == doctest::Approx(10.0 / 3.0));
    ChunkFixture one({"x"});
    CHECK(*messages_per_user(one.only()) == 1.0);
  }

  TEST_CASE("question fraction") {
    CHECK(question_fraction(ChunkFixture({"how?", "ok"}).only()) == 0.5);
    CHECK(question_fraction(ChunkFixture({"what? "}).only()) == 1.0);
    CHECK(question_fraction(ChunkFixture({"?!"}).only()) == 0.0);
  }

  TEST_CASE("mention fraction") {
    CHECK(mention_fraction(ChunkFixture({"@bob hi", "hi"}).only()) == 0.5);
    CHECK(mention_fraction(ChunkFixture({"email me at x@y.com"}).only()) == 0.0);
    CHECK(mention_fraction(ChunkFixture({"@a @b"}).only()) == 1.0);
    CHECK(mention_fraction(ChunkFixture({"@ alone", "@!"}).only()) == 0.0);
  }

  TEST_CASE("marker fraction") {
    const MarkerMatcher well(markers({"well"}));
    CHECK(marker_fraction(ChunkFixture({"Well played"}).only(), well) == 0.5);
    const MarkerMatcher of_course(markers({"of course"}));
    CHECK(marker_fraction(ChunkFixture({"of course yes"}).only(), of_course) == doctest::Approx(2.0 / 3.0));
    CHECK(marker_fraction(ChunkFixture({"  ", "\t"}).only(), well) == 0.0);
    // Phrases do not run across message boundaries.
    CHECK(marker_fraction(ChunkFixture({"of", "course"}).only(), of_course) == 0.0);
  }

  TEST_CASE("emote fraction") {
    ShingleAutomaton sam;
    const EmoteMatcher kappa(emotes({"Kappa"}));
    CHECK(emote_fraction(ChunkFixture({"Kappa"}).only(), kappa, kMaxEmoteLength, sam) ==
          doctest::Approx(1.0 / 13.0));
    CHECK(emote_fraction(ChunkFixture({"hello"}).only(), kappa, kMaxEmoteLength, sam) == 0.0);
    const double glued = emote_fraction(ChunkFixture({"KappaKappa"}).only(), kappa, kMaxEmoteLength, sam);
    CHECK(glued == doctest::Approx(1.0 / static_cast<double>(brute_force_shingles("KappaKappa", 24).size())));
  }

  TEST_CASE("emote fraction equals the substring oracle") {
    SplitMix64 rng(99);
    ShingleAutomaton sam;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<std::string> lexicon;
      const std::size_t n_codes = 1 + rng.next() % 5;
      for (std::size_t i = 0; i < n_codes; ++i) {
        auto code = random_text(rng, 4);
        if (!code.empty()) lexicon.push_back(code);
      }
      if (lexicon.empty()) lexicon.push_back("Kp");
      std::vector<std::string> texts;
      const std::size_t n_msgs = 1 + rng.next() % 3;
      for (std::size_t i = 0; i < n_msgs; ++i) texts.push_back(random_text(rng, 40));
      const std::size_t k = 1 + rng.next() % 24;
      const EmoteMatcher m(emotes(lexicon), k);
      ChunkFixture f(texts);
      REQUIRE(emote_fraction(f.only(), m, k, sam) ==
              doctest::Approx(oracle_emote_fraction(texts, lexicon, k)).epsilon(1e-15));
    }
  }

  TEST_CASE("block compression") {
    DeflateCompressor z;
    const std::vector<std::string> fifty(50, "hello chat how is everyone doing");
    const double r = *block_compression(ChunkFixture(fifty).only(), z);
    CHECK(r == doctest::Approx(0.030927835051546393).epsilon(1e-12));  // oracle golden
    CHECK(r < 0.2);
    CHECK(*block_compression(ChunkFixture({"abc"}).only(), z) == 1.0);
    SplitMix64 rng(7);
    const double random = *block_compression(ChunkFixture({random_alnum(rng, 10240)}).only(), z);
    CHECK(random == doctest::Approx(0.7521484375).epsilon(1e-12));
    CHECK(random > 0.6);
  }

  TEST_CASE("mean length counts code points") {
    CHECK(*mean_length(ChunkFixture({"ab", "abcd"}).only()) == 3.0);
    CHECK(*mean_length(ChunkFixture({"\xc3\xa9"}).only()) == 1.0);
    Chunk empty;
    CHECK_FALSE(mean_length(empty));
  }
}

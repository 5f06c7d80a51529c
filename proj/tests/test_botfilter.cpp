#include <doctest.h>

#include <string>
#include <vector>

#include <fmt/format.h>

#include "cacophony/botfilter.hpp"
#include "cacophony/deflate.hpp"
#include "support.hpp"

using namespace cacophony;
using namespace testing;

namespace {

double ratio_of(const std::vector<std::string>& texts) { return compression_ratio(texts); }

std::vector<Timestamp> seconds(std::initializer_list<std::int64_t> s) {
  std::vector<Timestamp> out;
  for (const auto x : s) out.push_back(Timestamp{std::chrono::seconds(x)});
  return out;
}

UserFeatures features(double rho, std::size_t messages, std::size_t days) {
  UserFeatures u;
  u.user = "u";
  u.rho = rho;
  u.message_count = messages;
  u.active_days = days;
  return u;
}

}  // namespace

TEST_SUITE("deflate") {
  // Goldens from tests/oracles/murmur_golden.py (Python zlib, raw DEFLATE, default level).
  TEST_CASE("repeated emote spam compresses hard") {
    const double r = ratio_of(std::vector<std::string>(200, "Kappa Kappa"));
    CHECK(r == doctest::Approx(0.012922050854522717).epsilon(1e-12));
    CHECK(r < 0.44);
  }

  TEST_CASE("tiny inputs clamp to one") {
    CHECK(ratio_of({"hi"}) == 1.0);
    CHECK(ratio_of({"abc"}) == 1.0);
    CHECK(ratio_of({"a", "b"}) == 1.0);
  }

  TEST_CASE("random alphanumerics barely compress") {
    SplitMix64 rng(42);
    std::vector<std::string> texts;
    for (int i = 0; i < 100; ++i) texts.push_back(random_alnum(rng, 20));
    const double r = ratio_of(texts);
    CHECK(r == doctest::Approx(0.7584564078132444).epsilon(1e-12));
    CHECK(r > 0.6);
  }

  TEST_CASE("empty input is an error") {
    CHECK_THROWS_AS(ratio_of({}), EmptyInput);
    CHECK_THROWS_AS(ratio_of({""}), EmptyInput);
  }

  TEST_CASE("a reused compressor gives the same sizes as fresh ones") {
    DeflateCompressor z;
    SplitMix64 rng(9);
    for (int i = 0; i < 50; ++i) {
      const std::string s = random_alnum(rng, rng.next() % 2000 + 1);
      DeflateCompressor fresh;
      CHECK(z.compressed_size(s) == fresh.compressed_size(s));
    }
  }

  TEST_CASE("lines are joined with newlines only between messages") {
    const std::vector<std::string_view> parts = {"a", "b", "c"};
    CHECK(join_lines(parts) == "a\nb\nc");
  }
}

TEST_SUITE("botfilter") {
  TEST_CASE("inter-message time pools gaps within sessions") {
    CHECK(*inter_message_time(seconds({0, 30, 45})) == doctest::Approx(22.5));
    CHECK(*inter_message_time(seconds({0, 7200, 7210})) == doctest::Approx(10.0));
    CHECK_FALSE(inter_message_time(seconds({0})));
    CHECK_FALSE(inter_message_time(seconds({0, 7200})));
    CHECK(*inter_message_time(seconds({0, 3600})) == doctest::Approx(3600.0));
    CHECK_FALSE(inter_message_time(seconds({5, 5, 5})));
  }

  TEST_CASE("eligibility needs two days and ten messages") {
    CHECK(eligible(features(0.5, 200, 5)));
    CHECK_FALSE(eligible(features(0.5, 500, 1)));
    CHECK_FALSE(eligible(features(0.5, 9, 10)));
    CHECK(eligible(features(0.5, 10, 2)));
  }

  TEST_CASE("classification keeps the threshold itself") {
    CHECK(classify(features(0.44, 200, 5)) == BotLabel::retain);
    CHECK(classify(features(0.30, 200, 5)) == BotLabel::bot);
    CHECK(classify(features(0.10, 3, 5)) == BotLabel::retain);
    CHECK(to_string(BotLabel::bot) == "bot");
    CHECK(to_string(BotLabel::retain) == "retain");
  }

  TEST_CASE("features pool a user's messages across channels") {
    std::vector<ChannelStream> channels;
    std::vector<ChatMessage> a, b;
    for (int i = 0; i < 12; ++i) {
      const auto day = i < 6 ? "2014-09-01" : "2014-09-02";
      a.push_back(msg(fmt::format("{}T10:{:02}:00Z", day, i), "spam", "Follow the channel!", "A"));
    }
    b.push_back(msg("2014-09-01T10:00:30Z", "human", "hello there", "B"));
    b.push_back(msg("2014-09-01T10:01:00Z", "spam", "Follow the channel!", "B"));
    channels.push_back(stream_of(a, "A"));
    channels.push_back(stream_of(b, "B"));
    const auto f = extract_user_features(channels);
    REQUIRE(f.size() == 2);
    CHECK(f[0].user == "human");
    CHECK(f[0].message_count == 1);
    CHECK(f[0].rho == 1.0);
    CHECK_FALSE(f[0].tau_seconds);
    CHECK(f[1].user == "spam");
    CHECK(f[1].message_count == 13);
    CHECK(f[1].active_days == 2);
    CHECK(f[1].rho < 0.44);
    REQUIRE(f[1].tau_seconds);
    const auto bots = bot_set(f);
    CHECK(bots == BotSet{"spam"});
  }

  TEST_CASE("worker count does not change features") {
    std::vector<ChannelStream> channels;
    SplitMix64 rng(8);
    for (int c = 0; c < 5; ++c) {
      std::vector<ChatMessage> ms;
      Timestamp t = at("2014-09-01T00:00:00Z");
      for (int i = 0; i < 400; ++i) {
        t += std::chrono::seconds(rng.next() % 600);
        ms.push_back({t, "c", fmt::format("u{}", rng.next() % 40), random_alnum(rng, 5 + rng.next() % 30)});
      }
      channels.push_back(stream_of(ms, fmt::format("c{}", c)));
    }
    const auto one = extract_user_features(channels, kDefaultSessionTimeout, 1);
    const auto four = extract_user_features(channels, kDefaultSessionTimeout, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(one[i].user == four[i].user);
      CHECK(one[i].rho == four[i].rho);
      CHECK(one[i].tau_seconds == four[i].tau_seconds);
      CHECK(one[i].message_count == four[i].message_count);
      CHECK(one[i].active_days == four[i].active_days);
      CHECK(one[i].rho > 0.0);
      CHECK(one[i].rho <= 1.0);
      if (one[i].tau_seconds) CHECK(*one[i].tau_seconds > 0.0);
    }
  }
}

#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "cacophony/chatlog.hpp"
#include "cacophony/murmur3.hpp"
#include "support.hpp"

using namespace cacophony;
using namespace testing;

TEST_SUITE("time") {
  TEST_CASE("iso timestamps round trip") {
    const auto t = parse_iso8601("2014-09-01T12:00:00Z");
    REQUIRE(t);
    CHECK(t->time_since_epoch() == std::chrono::seconds(1409572800));
    CHECK(format_iso8601(*t) == "2014-09-01T12:00:00Z");
    const auto frac = parse_iso8601("2014-09-01T12:00:00.25Z");
    REQUIRE(frac);
    CHECK(format_iso8601(*frac) == "2014-09-01T12:00:00.250Z");
  }

  TEST_CASE("malformed timestamps are rejected") {
    for (const char* bad : {"", "2014-09-01 12:00:00Z", "2014-09-01T12:00:00", "2014-13-01T00:00:00Z",
                            "2014-02-30T00:00:00Z", "2014-09-01T24:00:00Z", "2014-09-01T12:00:00.Z",
                            "2014-09-01T12:00:60Z", "x014-09-01T12:00:00Z"}) {
      CHECK_MESSAGE(!parse_iso8601(bad), bad);
    }
  }

  TEST_CASE("grid floor works before the epoch too") {
    const Duration five = std::chrono::minutes(5);
    CHECK(floor_to_grid(at("2014-09-01T12:07:59Z"), five) == at("2014-09-01T12:05:00Z"));
    CHECK(floor_to_grid(at("1969-12-31T23:59:00Z"), five) == at("1969-12-31T23:55:00Z"));
    CHECK(utc_day(at("1969-12-31T23:59:00Z")) == -1);
    CHECK(utc_day(at("1970-01-02T00:00:00Z")) == 1);
  }
}

TEST_SUITE("chatlog") {
  TEST_CASE("tsv line maps fields directly") {
    const auto r = parse_line("2014-09-01T12:00:00Z\tchanA\tuserB\thello", LogFormat::tsv);
    REQUIRE(std::holds_alternative<ChatMessage>(r));
    CHECK(std::get<ChatMessage>(r) == ChatMessage{at("2014-09-01T12:00:00Z"), "chanA", "userB", "hello"});
  }

  TEST_CASE("tsv text keeps tabs after the third separator and drops one newline") {
    const auto r = parse_line("2014-09-01T12:00:00Z\tc\tu\ta\tb\n", LogFormat::tsv);
    REQUIRE(std::holds_alternative<ChatMessage>(r));
    CHECK(std::get<ChatMessage>(r).text == "a\tb");
  }

  TEST_CASE("empty text is a missing field") {
    const auto r = parse_line("2014-09-01T12:00:00Z\tchanA\tuserB\t", LogFormat::tsv);
    REQUIRE(std::holds_alternative<ParseError>(r));
    CHECK(std::get<ParseError>(r) == ParseError{ParseErrorKind::missing_field, "text"});
    const auto short_line = parse_line("2014-09-01T12:00:00Z\tchanA", LogFormat::tsv);
    CHECK(std::get<ParseError>(short_line).kind == ParseErrorKind::missing_field);
  }

  TEST_CASE("invalid utf8 names the field") {
    const std::string line = "2014-09-01T12:00:00Z\tchanA\tuserB\tbad\xff";
    const auto r = parse_line(line, LogFormat::tsv);
    REQUIRE(std::holds_alternative<ParseError>(r));
    CHECK(std::get<ParseError>(r) == ParseError{ParseErrorKind::invalid_utf8, "text"});
    const std::string in_user = "2014-09-01T12:00:00Z\tchanA\tus\xc3\x28\thi";
    CHECK(std::get<ParseError>(parse_line(in_user, LogFormat::tsv)).field == "user");
  }

  TEST_CASE("bad timestamp is reported as such") {
    const auto r = parse_line("yesterday\tc\tu\thi", LogFormat::tsv);
    CHECK(std::get<ParseError>(r) == ParseError{ParseErrorKind::malformed_timestamp, "ts"});
  }

  TEST_CASE("jsonl lines") {
    const auto r = parse_line(R"({"ts":"2014-09-01T12:00:00Z","channel":"c","user":"u","text":"hi \"there\""})",
                              LogFormat::jsonl);
    REQUIRE(std::holds_alternative<ChatMessage>(r));
    CHECK(std::get<ChatMessage>(r).text == "hi \"there\"");
    const auto missing = parse_line(R"({"ts":"2014-09-01T12:00:00Z","channel":"c","text":"x"})",
                                    LogFormat::jsonl);
    CHECK(std::get<ParseError>(missing) == ParseError{ParseErrorKind::missing_field, "user"});
    const std::string bad = "{\"ts\":\"2014-09-01T12:00:00Z\",\"channel\":\"c\",\"user\":\"u\",\"text\":\"\xff\"}";
    CHECK(std::get<ParseError>(parse_line(bad, LogFormat::jsonl)).kind == ParseErrorKind::invalid_utf8);
  }

  TEST_CASE("serialize then parse is the identity") {
    SplitMix64 rng(11);
    for (int i = 0; i < 500; ++i) {
      ChatMessage m{Timestamp{std::chrono::milliseconds(1400000000000 + static_cast<std::int64_t>(rng.next() % 100000000000))},
                    random_alnum(rng, 1 + rng.next() % 8), random_alnum(rng, 1 + rng.next() % 8),
                    random_alnum(rng, 1 + rng.next() % 40) + " \xc3\xa9 \"q\" ?"};
      for (const auto fmt : {LogFormat::tsv, LogFormat::jsonl}) {
        const auto r = parse_line(serialize(m, fmt), fmt);
        REQUIRE(std::holds_alternative<ChatMessage>(r));
        CHECK(std::get<ChatMessage>(r) == m);
      }
    }
  }

  TEST_CASE("anonymize matches the reference murmur digests") {
    // Values from tests/oracles/murmur_golden.py (mmh3.hash_bytes(salt + raw).hex()).
    CHECK(anonymize("", "").hex() == "00000000000000000000000000000000");
    CHECK(anonymize("", salt_from_hex("0102")).hex() == "b78411eb7e286ba5e876f6e8fc2a2067");
    CHECK(anonymize("alice", "").hex() == "aa55b3e8974f1a4f63829f307f42f904");
    CHECK(anonymize("alice", salt_from_hex("deadbeef")).hex() == "59bd191cb336de92b8021f11ec94f430");
    CHECK(anonymize("The quick brown fox jumps over the lazy dog", "").hex() ==
          "6c1b07bc7bbc4be347939ac4a93c437a");
  }

  TEST_CASE("anonymize is deterministic and salt sensitive") {
    const std::string s = salt_from_hex("00ff10");
    CHECK(anonymize("alice", s) == anonymize("alice", s));
    CHECK(anonymize("alice", s) != anonymize("alice", salt_from_hex("00ff11")));
    CHECK(anonymize("alice", s) != anonymize("bob", s));
  }

  TEST_CASE("incremental murmur equals one-shot on every split") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const std::string data = random_alnum(rng, rng.next() % 70);
      const auto whole = murmur3_x64_128(data, 0);
      const std::size_t cut = data.empty() ? 0 : rng.next() % (data.size() + 1);
      Murmur3x64_128 h;
      h.update(std::string_view(data).substr(0, cut));
      h.update(std::string_view(data).substr(cut));
      CHECK(h.finish() == whole);
    }
  }

  TEST_CASE("salt hex must be well formed") {
    CHECK(salt_from_hex("") == "");
    CHECK(salt_from_hex("41") == "A");
    CHECK_THROWS(salt_from_hex("4"));
    CHECK_THROWS(salt_from_hex("zz"));
  }

  TEST_CASE("ingest partitions by channel") {
    std::istringstream in(
        "2014-09-01T12:00:00Z\tA\tu1\thi\n"
        "2014-09-01T12:00:01Z\tB\tu2\thello\n"
        "2014-09-01T12:00:02Z\tA\tu3\tyo\n");
    const auto r = ingest(in, {});
    REQUIRE(r.channels.size() == 2);
    std::vector<std::size_t> sizes;
    for (const auto& c : r.channels) sizes.push_back(c.messages.size());
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{1, 2});
    CHECK(r.report.accepted == 3);
    CHECK(r.report.skipped == 0);
    CHECK(r.channels[0].channel < r.channels[1].channel);
    CHECK(r.channels[0].channel.size() == 32);
  }

  TEST_CASE("malformed lines are counted and skipped") {
    std::string text;
    for (int i = 0; i < 10; ++i) {
      text += i == 4 ? "garbage line\n" : fmt::format("2014-09-01T12:00:{:02}Z\tA\tu\tm{}\n", i, i);
    }
    std::istringstream in(text);
    const auto r = ingest(in, {});
    CHECK(r.report.accepted == 9);
    CHECK(r.report.skipped == 1);
    CHECK(r.report.skipped_by_kind.at(ParseErrorKind::missing_field) == 1);
  }

  TEST_CASE("lines outside the observation window are skipped") {
    std::string text;
    for (int i = 0; i < 6; ++i) text += fmt::format("2014-09-01T12:0{}:00Z\tA\tu\tm{}\n", i, i);
    IngestOptions opts;
    opts.window_start = at("2014-09-01T12:01:00Z");
    opts.window_end = at("2014-09-01T12:04:00Z");
    std::istringstream in(text);
    const auto r = ingest(in, opts);
    CHECK(r.report.accepted == 3);
    CHECK(r.report.skipped == 3);
    CHECK(r.report.skipped_by_kind.at(ParseErrorKind::outside_window) == 3);
    REQUIRE(r.channels.size() == 1);
    CHECK(r.channels[0].messages.front().text == "m1");
    CHECK(r.channels[0].messages.back().text == "m3");
  }

  TEST_CASE("equal timestamps keep input order; small skew is reordered") {
    std::istringstream in(
        "2014-09-01T12:00:00Z\tA\tu\tfirst\n"
        "2014-09-01T12:05:00Z\tA\tu\tlate\n"
        "2014-09-01T12:00:00Z\tA\tu\tsecond\n");
    IngestOptions opts;
    opts.anonymize_ids = false;
    const auto r = ingest(in, opts);
    REQUIRE(r.channels.size() == 1);
    const auto& m = r.channels[0].messages;
    REQUIRE(m.size() == 3);
    CHECK(m[0].text == "first");
    CHECK(m[1].text == "second");
    CHECK(m[2].text == "late");
    CHECK(m[0].user == "u");
  }

  TEST_CASE("skew beyond the reorder window aborts") {
    std::istringstream in(
        "2014-09-01T12:30:00Z\tA\tu\tnow\n"
        "2014-09-01T12:19:59Z\tA\tu\ttoo old\n");
    CHECK_THROWS_AS(ingest(in, {}), AbortError);
    std::istringstream ok(
        "2014-09-01T12:30:00Z\tA\tu\tnow\n"
        "2014-09-01T12:20:00Z\tA\tu\tjust in time\n");
    CHECK(ingest(ok, {}).report.accepted == 2);
  }

  TEST_CASE("raw identifiers do not survive ingest") {
    std::istringstream in("2014-09-01T12:00:00Z\tsecretchan\tsecretuser\thi\n");
    const auto r = ingest(in, {});
    CHECK(r.channels[0].channel == anonymize("secretchan", "").hex());
    CHECK(r.channels[0].messages[0].user == anonymize("secretuser", "").hex());
  }
}

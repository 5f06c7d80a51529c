#include "cacophony/chatlog.hpp"

#include <algorithm>
#include <istream>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "cacophony/murmur3.hpp"
#include "cacophony/utf8.hpp"

namespace cacophony {

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::malformed_timestamp: return "malformed_timestamp";
    case ParseErrorKind::missing_field: return "missing_field";
    case ParseErrorKind::invalid_utf8: return "invalid_utf8";
    case ParseErrorKind::outside_window: return "outside_window";
  }
  return "unknown";
}

namespace {

constexpr std::array<std::string_view, 4> kFieldNames = {"ts", "channel", "user", "text"};

ParseResult parse_tsv(std::string_view line) {
  std::array<std::string_view, 4> fields;
  std::size_t begin = 0;
  for (std::size_t f = 0; f < 3; ++f) {
    const std::size_t tab = line.find('\t', begin);
    if (tab == std::string_view::npos) {
      return ParseError{ParseErrorKind::missing_field, std::string(kFieldNames[f + 1])};
    }
    fields[f] = line.substr(begin, tab - begin);
    begin = tab + 1;
  }
  fields[3] = line.substr(begin);

  for (std::size_t f = 1; f < 4; ++f) {
    if (fields[f].empty()) {
      return ParseError{ParseErrorKind::missing_field, std::string(kFieldNames[f])};
    }
    if (!utf8::is_valid(fields[f])) {
      return ParseError{ParseErrorKind::invalid_utf8, std::string(kFieldNames[f])};
    }
  }
  const auto ts = parse_iso8601(fields[0]);
  if (!ts) return ParseError{ParseErrorKind::malformed_timestamp, "ts"};
  return ChatMessage{*ts, std::string(fields[1]), std::string(fields[2]), std::string(fields[3])};
}

// Names the JSON key whose value encloses byte `offset`: the last `"key":`
// that starts before it.
std::string enclosing_json_key(std::string_view line, std::size_t offset) {
  std::string best = "text";
  std::size_t best_pos = 0;
  for (const auto name : kFieldNames) {
    const std::string needle = fmt::format("\"{}\"", name);
    std::size_t pos = line.find(needle);
    while (pos != std::string_view::npos && pos < offset) {
      if (pos >= best_pos) {
        best_pos = pos;
        best = std::string(name);
      }
      pos = line.find(needle, pos + 1);
    }
  }
  return best;
}

ParseResult parse_jsonl(std::string_view line) {
  if (const auto bad = utf8::find_invalid(line); bad != std::string_view::npos) {
    return ParseError{ParseErrorKind::invalid_utf8, enclosing_json_key(line, bad)};
  }
  const auto doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return ParseError{ParseErrorKind::missing_field, "ts"};
  }
  std::array<std::string, 4> values;
  for (std::size_t f = 0; f < 4; ++f) {
    const auto it = doc.find(kFieldNames[f]);
    if (it == doc.end() || !it->is_string()) {
      if (f == 0 && it != doc.end()) return ParseError{ParseErrorKind::malformed_timestamp, "ts"};
      return ParseError{ParseErrorKind::missing_field, std::string(kFieldNames[f])};
    }
    values[f] = it->get<std::string>();
    if (f > 0 && values[f].empty()) {
      return ParseError{ParseErrorKind::missing_field, std::string(kFieldNames[f])};
    }
  }
  const auto ts = parse_iso8601(values[0]);
  if (!ts) return ParseError{ParseErrorKind::malformed_timestamp, "ts"};
  return ChatMessage{*ts, std::move(values[1]), std::move(values[2]), std::move(values[3])};
}

}  // namespace

ParseResult parse_line(std::string_view line, LogFormat format) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  return format == LogFormat::tsv ? parse_tsv(line) : parse_jsonl(line);
}

std::string serialize(const ChatMessage& m, LogFormat format) {
  if (format == LogFormat::tsv) {
    return fmt::format("{}\t{}\t{}\t{}", format_iso8601(m.timestamp), m.channel, m.user, m.text);
  }
  nlohmann::ordered_json doc;
  doc["ts"] = format_iso8601(m.timestamp);
  doc["channel"] = m.channel;
  doc["user"] = m.user;
  doc["text"] = m.text;
  return doc.dump();
}

std::string AnonId::hex() const {
  std::string out(32, '0');
  static constexpr char kDigits[] = "0123456789abcdef";
  std::size_t pos = 0;
  for (const std::uint64_t word : {h1, h2}) {
    for (int byte = 0; byte < 8; ++byte) {
      const auto b = static_cast<unsigned>((word >> (8 * byte)) & 0xFF);
      out[pos++] = kDigits[b >> 4];
      out[pos++] = kDigits[b & 0xF];
    }
  }
  return out;
}

AnonId anonymize(std::string_view raw_id, std::string_view salt) {
  Murmur3x64_128 hasher;
  hasher.update(salt);
  hasher.update(raw_id);
  const auto [h1, h2] = hasher.finish();
  return {h1, h2};
}

std::string salt_from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("salt hex must have an even length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument(fmt::format("invalid hex digit '{}' in salt", c));
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<char>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
  }
  return out;
}

namespace {

class IdCache {
 public:
  IdCache(const std::string& salt, bool enabled) : salt_(salt), enabled_(enabled) {}

  const std::string& resolve(const std::string& raw) {
    auto it = cache_.find(raw);
    if (it == cache_.end()) {
      it = cache_.emplace(raw, enabled_ ? anonymize(raw, salt_).hex() : raw).first;
    }
    return it->second;
  }

 private:
  const std::string& salt_;
  bool enabled_;
  std::unordered_map<std::string, std::string> cache_;
};

}  // namespace

IngestResult ingest(std::istream& source, const IngestOptions& options) {
  IngestResult result;
  IdCache channels(options.salt, options.anonymize_ids);
  IdCache users(options.salt, options.anonymize_ids);
  std::unordered_map<std::string, std::size_t> channel_index;
  std::vector<bool> needs_sort;

  std::optional<Timestamp> latest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto parsed = parse_line(line, options.format);
    if (auto* err = std::get_if<ParseError>(&parsed)) {
      ++result.report.skipped;
      ++result.report.skipped_by_kind[err->kind];
      continue;
    }
    auto& msg = std::get<ChatMessage>(parsed);
    if ((options.window_start && msg.timestamp < *options.window_start) ||
        (options.window_end && msg.timestamp >= *options.window_end)) {
      ++result.report.skipped;
      ++result.report.skipped_by_kind[ParseErrorKind::outside_window];
      continue;
    }
    if (latest && msg.timestamp < *latest - options.reorder_window) {
      throw AbortError(fmt::format(
          "line {}: timestamp {} is more than {} s behind {}; input is too far out of order",
          line_no, format_iso8601(msg.timestamp), to_seconds(options.reorder_window),
          format_iso8601(*latest)));
    }
    if (!latest || msg.timestamp > *latest) latest = msg.timestamp;

    msg.channel = channels.resolve(msg.channel);
    msg.user = users.resolve(msg.user);

    auto [it, inserted] = channel_index.try_emplace(msg.channel, result.channels.size());
    if (inserted) {
      result.channels.push_back({msg.channel, {}});
      needs_sort.push_back(false);
    }
    auto& stream = result.channels[it->second].messages;
    if (!stream.empty() && msg.timestamp < stream.back().timestamp) needs_sort[it->second] = true;
    stream.push_back(std::move(msg));
    ++result.report.accepted;
  }

  for (std::size_t i = 0; i < result.channels.size(); ++i) {
    if (!needs_sort[i]) continue;
    std::stable_sort(result.channels[i].messages.begin(), result.channels[i].messages.end(),
                     [](const ChatMessage& a, const ChatMessage& b) {
                       return a.timestamp < b.timestamp;
                     });
  }
  std::sort(result.channels.begin(), result.channels.end(),
            [](const ChannelStream& a, const ChannelStream& b) { return a.channel < b.channel; });
  return result;
}

std::size_t total_messages(const std::vector<ChannelStream>& channels) {
  std::size_t n = 0;
  for (const auto& c : channels) n += c.messages.size();
  return n;
}

}  // namespace cacophony

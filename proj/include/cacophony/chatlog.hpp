#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cacophony/time.hpp"

namespace cacophony {

enum class LogFormat { tsv, jsonl };

/// One chat line. After ingest the two identifiers hold AnonId hex digests.
struct ChatMessage {
  Timestamp timestamp;
  std::string channel;
  std::string user;
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

enum class ParseErrorKind { malformed_timestamp, missing_field, invalid_utf8, outside_window };

struct ParseError {
  ParseErrorKind kind;
  std::string field;  // ts, channel, user or text

  bool operator==(const ParseError&) const = default;
};

std::string_view to_string(ParseErrorKind kind);

using ParseResult = std::variant<ChatMessage, ParseError>;

/// Parses one record. A single trailing '\n' is stripped; everything else in
/// the text field is preserved byte for byte.
ParseResult parse_line(std::string_view line, LogFormat format);

/// Renders a record without the trailing newline.
std::string serialize(const ChatMessage& message, LogFormat format);

/// 128-bit anonymized identifier.
struct AnonId {
  std::uint64_t h1 = 0;
  std::uint64_t h2 = 0;

  /// 32 lowercase hex digits: h1 then h2, each as little-endian bytes.
  std::string hex() const;

  auto operator<=>(const AnonId&) const = default;
};

/// MurmurHash3-x64-128 of salt followed by raw_id, seed 0.
AnonId anonymize(std::string_view raw_id, std::string_view salt);

/// Decodes a hex salt ("" is allowed). Throws std::invalid_argument.
std::string salt_from_hex(std::string_view hex);

struct ChannelStream {
  std::string channel;
  std::vector<ChatMessage> messages;  // non-decreasing timestamps, stable
};

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t skipped = 0;
  std::map<ParseErrorKind, std::size_t> skipped_by_kind;
};

struct IngestOptions {
  LogFormat format = LogFormat::tsv;
  std::string salt;
  /// When false, identifiers are assumed to be anonymized already.
  bool anonymize_ids = true;
  Duration reorder_window = std::chrono::minutes(10);
  /// Observation window [window_start, window_end); lines outside it are skipped.
  std::optional<Timestamp> window_start;
  std::optional<Timestamp> window_end;
};

struct IngestResult {
  std::vector<ChannelStream> channels;  // sorted by channel id
  IngestReport report;
};

/// Raised when input arrives further out of order than the reorder window.
class AbortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

IngestResult ingest(std::istream& source, const IngestOptions& options);

std::size_t total_messages(const std::vector<ChannelStream>& channels);

}  // namespace cacophony

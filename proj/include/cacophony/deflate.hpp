#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cacophony {

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reusable raw DEFLATE (RFC 1951) encoder at the library default level.
/// Holds one zlib stream; not thread-safe, keep one per worker.
class DeflateCompressor {
 public:
  DeflateCompressor();
  ~DeflateCompressor();
  DeflateCompressor(const DeflateCompressor&) = delete;
  DeflateCompressor& operator=(const DeflateCompressor&) = delete;
  DeflateCompressor(DeflateCompressor&&) noexcept;
  DeflateCompressor& operator=(DeflateCompressor&&) noexcept;

  /// Size in bytes of the complete raw DEFLATE stream for `data`.
  std::size_t compressed_size(std::string_view data);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// min(deflated / raw, 1) for `texts` joined by '\n'. Throws EmptyInput when
/// the joined size is zero.
double compression_ratio(std::span<const std::string_view> texts, DeflateCompressor& z);
double compression_ratio(std::span<const std::string_view> texts);
double compression_ratio(std::span<const std::string> texts);

std::string join_lines(std::span<const std::string_view> texts);

}  // namespace cacophony

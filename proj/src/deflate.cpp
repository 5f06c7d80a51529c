#include "cacophony/deflate.hpp"

#include <algorithm>
#include <array>
#include <vector>

#include <zlib.h>

namespace cacophony {

struct DeflateCompressor::State {
  z_stream zs{};
  std::array<unsigned char, 1 << 16> sink{};
};

DeflateCompressor::DeflateCompressor() : state_(std::make_unique<State>()) {
  if (deflateInit2(&state_->zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) !=
      Z_OK) {
    throw std::runtime_error("deflateInit2 failed");
  }
}

DeflateCompressor::~DeflateCompressor() {
  if (state_) deflateEnd(&state_->zs);
}

DeflateCompressor::DeflateCompressor(DeflateCompressor&&) noexcept = default;

DeflateCompressor& DeflateCompressor::operator=(DeflateCompressor&& other) noexcept {
  if (this != &other) {
    if (state_) deflateEnd(&state_->zs);
    state_ = std::move(other.state_);
  }
  return *this;
}

std::size_t DeflateCompressor::compressed_size(std::string_view data) {
  z_stream& zs = state_->zs;
  deflateReset(&zs);
  // zlib's API is not const-correct; the input is only read.
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  std::size_t total = 0;
  int rc;
  do {
    zs.next_out = state_->sink.data();
    zs.avail_out = static_cast<uInt>(state_->sink.size());
    rc = deflate(&zs, Z_FINISH);
    if (rc == Z_STREAM_ERROR) throw std::runtime_error("deflate failed");
    total += state_->sink.size() - zs.avail_out;
  } while (rc != Z_STREAM_END);
  return total;
}

std::string join_lines(std::span<const std::string_view> texts) {
  std::size_t size = texts.empty() ? 0 : texts.size() - 1;
  for (const auto t : texts) size += t.size();
  std::string out;
  out.reserve(size);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out.push_back('\n');
    out.append(texts[i]);
  }
  return out;
}

double compression_ratio(std::span<const std::string_view> texts, DeflateCompressor& z) {
  const std::string joined = join_lines(texts);
  if (joined.empty()) throw EmptyInput("compression ratio of an empty input");
  const double ratio =
      static_cast<double>(z.compressed_size(joined)) / static_cast<double>(joined.size());
  return std::min(ratio, 1.0);
}

double compression_ratio(std::span<const std::string_view> texts) {
  DeflateCompressor z;
  return compression_ratio(texts, z);
}

double compression_ratio(std::span<const std::string> texts) {
  std::vector<std::string_view> views(texts.begin(), texts.end());
  return compression_ratio(std::span<const std::string_view>(views));
}

}  // namespace cacophony

#include "cacophony/segmenter.hpp"

#include <numeric>

#include <fmt/format.h>

namespace cacophony {

VolumeSeries sample_volume(const ChannelStream& stream, Duration dt) {
  if (stream.messages.empty()) {
    throw EmptyStream(fmt::format("channel {} has no messages", stream.channel));
  }
  if (dt <= Duration::zero()) throw std::invalid_argument("dt must be positive");

  VolumeSeries vs;
  vs.channel = stream.channel;
  vs.dt = dt;
  vs.t0 = floor_to_grid(stream.messages.front().timestamp, dt);
  const Timestamp last = floor_to_grid(stream.messages.back().timestamp, dt);
  vs.values.assign(static_cast<std::size_t>((last - vs.t0) / dt) + 1, 0);
  for (const auto& m : stream.messages) {
    ++vs.values[static_cast<std::size_t>((m.timestamp - vs.t0) / dt)];
  }
  return vs;
}

std::string SymbolSequence::str() const {
  std::string out(symbols.size(), 'I');
  for (std::size_t i = 0; i < symbols.size(); ++i) out[i] = static_cast<char>(symbols[i]);
  return out;
}

SymbolSequence SymbolSequence::from_string(std::string_view s) {
  SymbolSequence seq;
  seq.symbols.reserve(s.size());
  for (const char c : s) {
    if (c != 'A' && c != 'I') throw std::invalid_argument("symbols must be A or I");
    seq.symbols.push_back(static_cast<Symbol>(c));
  }
  return seq;
}

SymbolSequence symbolize(const VolumeSeries& series) {
  SymbolSequence seq;
  if (series.values.empty()) return seq;
  const double total = std::accumulate(series.values.begin(), series.values.end(), 0.0);
  seq.mean_volume = total / static_cast<double>(series.values.size());
  seq.symbols.reserve(series.values.size());
  for (const auto v : series.values) {
    seq.symbols.push_back(static_cast<double>(v) >= seq.mean_volume ? Symbol::active
                                                                    : Symbol::inactive);
  }
  return seq;
}

namespace {

// One in-place sweep replacing the middle of outer,inner,outer with outer.
bool sweep(std::vector<Symbol>& s, Symbol outer) {
  bool changed = false;
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    if (s[i] == outer && s[i + 1] != outer && s[i + 2] == outer) {
      s[i + 1] = outer;
      changed = true;
    }
  }
  return changed;
}

}  // namespace

SymbolSequence smooth(SymbolSequence s) {
  // Every rewrite fuses three runs into one, so the loop terminates.
  for (;;) {
    const bool a = sweep(s.symbols, Symbol::active);
    const bool i = sweep(s.symbols, Symbol::inactive);
    if (!a && !i) break;
  }
  return s;
}

std::vector<BroadcastInterval> merge_intervals(std::vector<BroadcastInterval> intervals,
                                               Duration merge_gap) {
  std::vector<BroadcastInterval> out;
  for (const auto& iv : intervals) {
    if (!out.empty() && iv.start - out.back().end < merge_gap) {
      out.back().end = std::max(out.back().end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

std::vector<BroadcastInterval> detect_broadcasts(const SymbolSequence& s,
                                                 const VolumeSeries& series, Duration merge_gap) {
  if (s.symbols.size() != series.values.size()) {
    throw std::invalid_argument("symbol sequence and volume series differ in length");
  }
  std::vector<BroadcastInterval> runs;
  const auto& sym = s.symbols;
  for (std::size_t i = 0; i < sym.size();) {
    if (sym[i] != Symbol::active) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < sym.size() && sym[j] == Symbol::active) ++j;
    runs.push_back({series.slot_start(i), series.slot_start(j)});
    i = j;
  }
  return merge_intervals(std::move(runs), merge_gap);
}

std::vector<BroadcastInterval> segment_channel(const ChannelStream& stream, Duration dt,
                                               Duration merge_gap) {
  const auto series = sample_volume(stream, dt);
  return detect_broadcasts(smooth(symbolize(series)), series, merge_gap);
}

}  // namespace cacophony

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cacophony/chatlog.hpp"
#include "cacophony/time.hpp"

namespace cacophony {

/// Message counts on a fixed grid, from the slot of a channel's first
/// message to the slot of its last one, zero slots included.
struct VolumeSeries {
  std::string channel;
  Timestamp t0;
  Duration dt = std::chrono::minutes(5);
  std::vector<std::int64_t> values;

  Timestamp slot_start(std::size_t i) const { return t0 + static_cast<std::int64_t>(i) * dt; }
};

class EmptyStream : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

VolumeSeries sample_volume(const ChannelStream& stream, Duration dt);

enum class Symbol : char { active = 'A', inactive = 'I' };

struct SymbolSequence {
  std::vector<Symbol> symbols;
  double mean_volume = 0.0;

  std::string str() const;
  static SymbolSequence from_string(std::string_view s);
};

/// A where the slot volume is at or above the series mean, I below it.
SymbolSequence symbolize(const VolumeSeries& series);

/// Rewrites AIA -> AAA and IAI -> III until neither pattern remains.
/// Each pass sweeps left to right for AIA, then left to right for IAI,
/// rewriting in place so that a rewrite can feed the next match.
SymbolSequence smooth(SymbolSequence s);

struct BroadcastInterval {
  Timestamp start;
  Timestamp end;  // exclusive

  bool operator==(const BroadcastInterval&) const = default;
};

/// Merges intervals whose gap (end of earlier to start of later) is below
/// `merge_gap`, transitively. Input must be sorted by start.
std::vector<BroadcastInterval> merge_intervals(std::vector<BroadcastInterval> intervals,
                                               Duration merge_gap);

/// Turns every maximal A-run of a smoothed sequence into an interval.
/// Interior runs are exactly the IIA ... AAI spans; a run touching either
/// end of the series is opened at t0 or closed at the series end.
std::vector<BroadcastInterval> detect_broadcasts(const SymbolSequence& s,
                                                 const VolumeSeries& series,
                                                 Duration merge_gap = std::chrono::minutes(60));

/// sample_volume -> symbolize -> smooth -> detect_broadcasts.
std::vector<BroadcastInterval> segment_channel(const ChannelStream& stream, Duration dt,
                                               Duration merge_gap);

}  // namespace cacophony

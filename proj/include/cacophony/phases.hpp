#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cacophony {

/// Exact integer bins up to `exact_limit`, then `per_decade` log-spaced bins.
/// Log bin j covers (exact_limit * 10^(j/per_decade), exact_limit * 10^((j+1)/per_decade)],
/// with edges floored to integers.
struct BinSpec {
  std::int64_t exact_limit = 100;
  int per_decade = 10;

  struct Bin {
    std::int64_t lo;  // inclusive
    std::int64_t hi;  // inclusive
    bool exact() const { return lo == hi; }
    std::string label() const;
    auto operator<=>(const Bin&) const = default;
  };
  Bin bin_of(std::int64_t v) const;
};

struct CurveBin {
  BinSpec::Bin bin;
  double stat = 0.0;       // median
  double se_median = 0.0;  // 1.2533 * sd / sqrt(n)
  double se_mean = 0.0;    // sd / sqrt(n)
  std::size_t n = 0;
};

struct ConditionalCurve {
  std::vector<CurveBin> bins;  // sorted by V
};

class NoData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One chunk reduced to what the aggregate analysis needs.
struct ChunkSample {
  std::int64_t volume = 0;      // V, bots included
  std::int64_t users = 0;       // U, humans only
  double messages_per_user = 0; // M_u
};

/// Median of M_u per V bin over samples with users >= min_chunk_users.
/// Throws NoData when nothing survives the filter.
ConditionalCurve conditional_median(std::span<const ChunkSample> samples, const BinSpec& binning,
                                    std::int64_t min_chunk_users = 2);

/// Channel sizes for quartile grouping: distinct (human) users per channel.
struct ChannelSize {
  std::string channel;
  std::int64_t users = 0;
};

/// Channel -> quartile group 0..3, cutting at the 25/50/75th percentiles of
/// user counts (linear interpolation). A channel equal to a cut point goes to
/// the lower group.
std::map<std::string, int> quartile_groups(std::span<const ChannelSize> channels);

struct ChannelChunkSample {
  std::string channel;
  ChunkSample sample;
};

/// conditional_median per quartile group with U > 2. Groups without data
/// get an empty curve; throws NoData only when every group is empty.
std::array<ConditionalCurve, 4> quartile_curves(std::span<const ChannelChunkSample> samples,
                                                std::span<const ChannelSize> channels,
                                                const BinSpec& binning,
                                                std::int64_t min_chunk_users = 3);

/// argmax of a centered 5-bin moving average (truncated at the edges) of the
/// median over the exact bins. Ties go to the smallest V.
std::int64_t peak_estimate(const ConditionalCurve& curve);

struct Observation {
  std::int64_t volume;  // V of the chunk
  std::int64_t count;   // messages the user wrote in it (>= 1)
};

struct ResponseCurve {
  std::string user;
  std::vector<Observation> observations;
};

enum class Quadrant { I, II, III, IV };

std::string_view to_string(Quadrant q);

/// x = alpha_sub, y = alpha_sup. Zero slopes fall on the non-overload side:
/// IV iff alpha_sub > 0 and alpha_sup < 0.
Quadrant quadrant_of(double alpha_sub, double alpha_sup);

struct SlopePair {
  double alpha_sub = 0.0;
  double alpha_sup = 0.0;
  std::size_t n_sub = 0;
  std::size_t n_sup = 0;
  Quadrant quadrant = Quadrant::I;
};

struct SlopeOptions {
  std::int64_t v_star = 40;
  std::int64_t v_max = 200;
  std::size_t min_obs = 10;
};

enum class FitStatus { ok, insufficient_data, degenerate_variance };

struct SlopeFit {
  FitStatus status = FitStatus::insufficient_data;
  std::optional<SlopePair> slopes;
};

/// OLS slope of z-scored y on z-scored x; equals Pearson's r. Empty when
/// either side has zero variance or fewer than two points.
std::optional<double> standardized_slope(std::span<const double> x, std::span<const double> y);

/// Sub region V < v_star, sup region v_star < V < v_max; each must hold at
/// least min_obs observations.
SlopeFit fit_slopes(const ResponseCurve& rc, const SlopeOptions& options = {});

}  // namespace cacophony

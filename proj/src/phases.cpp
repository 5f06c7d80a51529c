#include "cacophony/phases.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace cacophony {

namespace {

constexpr double kMedianSeFactor = 1.2533;  // sqrt(pi / 2)

std::int64_t log_edge(const BinSpec& spec, std::int64_t j) {
  return static_cast<std::int64_t>(std::floor(
      static_cast<double>(spec.exact_limit) *
      std::pow(10.0, static_cast<double>(j) / static_cast<double>(spec.per_decade))));
}

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double upper = v[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
  return (lower + upper) / 2.0;
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double percentile(std::vector<double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string BinSpec::Bin::label() const {
  return exact() ? fmt::format("{}", lo) : fmt::format("{}-{}", lo, hi);
}

BinSpec::Bin BinSpec::bin_of(std::int64_t v) const {
  if (v <= exact_limit) return {v, v};
  auto j = static_cast<std::int64_t>(
      std::floor(per_decade * std::log10(static_cast<double>(v) / static_cast<double>(exact_limit))));
  j = std::max<std::int64_t>(j, 0);
  // Correct the floating-point estimate against the integer edges.
  while (j > 0 && v <= log_edge(*this, j)) --j;
  while (v > log_edge(*this, j + 1)) ++j;
  return {log_edge(*this, j) + 1, log_edge(*this, j + 1)};
}

ConditionalCurve conditional_median(std::span<const ChunkSample> samples, const BinSpec& binning,
                                    std::int64_t min_chunk_users) {
  std::map<BinSpec::Bin, std::vector<double>> groups;
  for (const auto& s : samples) {
    if (s.users < min_chunk_users || s.users == 0) continue;
    groups[binning.bin_of(s.volume)].push_back(s.messages_per_user);
  }
  if (groups.empty()) throw NoData("no chunks pass the user filter");

  ConditionalCurve curve;
  for (auto& [bin, values] : groups) {
    // Sorting first makes the sums independent of input order.
    std::sort(values.begin(), values.end());
    CurveBin b;
    b.bin = bin;
    b.n = values.size();
    const double sd = sample_sd(values);
    const double root_n = std::sqrt(static_cast<double>(b.n));
    b.se_mean = sd / root_n;
    b.se_median = kMedianSeFactor * sd / root_n;
    b.stat = median_of(values);
    curve.bins.push_back(b);
  }
  return curve;
}

std::map<std::string, int> quartile_groups(std::span<const ChannelSize> channels) {
  std::map<std::string, int> out;
  if (channels.empty()) return out;
  std::vector<double> sizes;
  for (const auto& c : channels) sizes.push_back(static_cast<double>(c.users));
  std::sort(sizes.begin(), sizes.end());
  const std::array<double, 3> cuts = {percentile(sizes, 0.25), percentile(sizes, 0.5),
                                      percentile(sizes, 0.75)};
  for (const auto& c : channels) {
    const auto u = static_cast<double>(c.users);
    int group = 3;
    for (int g = 0; g < 3; ++g) {
      if (u <= cuts[static_cast<std::size_t>(g)]) {
        group = g;
        break;
      }
    }
    out[c.channel] = group;
  }
  return out;
}

std::array<ConditionalCurve, 4> quartile_curves(std::span<const ChannelChunkSample> samples,
                                                std::span<const ChannelSize> channels,
                                                const BinSpec& binning,
                                                std::int64_t min_chunk_users) {
  const auto groups = quartile_groups(channels);
  std::array<std::vector<ChunkSample>, 4> per_group;
  for (const auto& s : samples) {
    const auto it = groups.find(s.channel);
    if (it != groups.end()) per_group[static_cast<std::size_t>(it->second)].push_back(s.sample);
  }
  std::array<ConditionalCurve, 4> out;
  bool any = false;
  for (std::size_t g = 0; g < 4; ++g) {
    try {
      out[g] = conditional_median(per_group[g], binning, min_chunk_users);
      any = true;
    } catch (const NoData&) {
    }
  }
  if (!any) throw NoData("no quartile group has data");
  return out;
}

std::int64_t peak_estimate(const ConditionalCurve& curve) {
  std::vector<const CurveBin*> exact;
  for (const auto& b : curve.bins) {
    if (b.bin.exact()) exact.push_back(&b);
  }
  if (exact.empty()) throw NoData("curve has no exact bins");
  constexpr std::ptrdiff_t kHalf = 2;
  const auto n = static_cast<std::ptrdiff_t>(exact.size());
  std::int64_t best_v = exact.front()->bin.lo;
  double best = -INFINITY;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, i - kHalf);
         k <= std::min(n - 1, i + kHalf); ++k) {
      sum += exact[static_cast<std::size_t>(k)]->stat;
      ++count;
    }
    const double avg = sum / count;
    if (avg > best) {
      best = avg;
      best_v = exact[static_cast<std::size_t>(i)]->bin.lo;
    }
  }
  return best_v;
}

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::I: return "I";
    case Quadrant::II: return "II";
    case Quadrant::III: return "III";
    case Quadrant::IV: return "IV";
  }
  return "?";
}

Quadrant quadrant_of(double alpha_sub, double alpha_sup) {
  const bool rising = alpha_sub > 0.0;
  const bool falling = alpha_sup < 0.0;
  if (rising) return falling ? Quadrant::IV : Quadrant::I;
  return falling ? Quadrant::III : Quadrant::II;
}

std::optional<double> standardized_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::nullopt;
  const double sx = sample_sd(x);
  const double sy = sample_sd(y);
  if (!(sx > 0.0) || !(sy > 0.0)) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zx = (x[i] - mx) / sx;
    const double zy = (y[i] - my) / sy;
    sxy += zx * zy;
    sxx += zx * zx;
  }
  return std::clamp(sxy / sxx, -1.0, 1.0);
}

SlopeFit fit_slopes(const ResponseCurve& rc, const SlopeOptions& options) {
  std::vector<double> sub_v, sub_m, sup_v, sup_m;
  for (const auto& o : rc.observations) {
    if (o.volume < options.v_star) {
      sub_v.push_back(static_cast<double>(o.volume));
      sub_m.push_back(static_cast<double>(o.count));
    } else if (o.volume > options.v_star && o.volume < options.v_max) {
      sup_v.push_back(static_cast<double>(o.volume));
      sup_m.push_back(static_cast<double>(o.count));
    }
  }
  SlopeFit fit;
  if (sub_v.size() < options.min_obs || sup_v.size() < options.min_obs) return fit;
  const auto sub = standardized_slope(sub_v, sub_m);
  const auto sup = standardized_slope(sup_v, sup_m);
  if (!sub || !sup) {
    fit.status = FitStatus::degenerate_variance;
    return fit;
  }
  fit.status = FitStatus::ok;
  fit.slopes = SlopePair{*sub, *sup, sub_v.size(), sup_v.size(), quadrant_of(*sub, *sup)};
  return fit;
}

}  // namespace cacophony

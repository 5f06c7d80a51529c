#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cacophony/segmenter.hpp"
#include "cacophony/time.hpp"

namespace cacophony {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Expected messages a participating user writes in a window of volume V.
struct ResponseModel {
  enum class Kind { inverted_u, increasing };
  Kind kind = Kind::inverted_u;
  double v_star = 40.0;
  double peak_output = 4.0;
  double base_output = 1.0;
  double v_max = 200.0;

  /// inverted_u: linear base -> peak on [0, v_star], linear peak -> base on
  /// [v_star, v_max], base beyond. increasing: linear base -> peak on
  /// [0, v_max], peak beyond.
  double expected_output(double v) const;
};

enum class TextEntropy { low, high };

struct SynthConfig {
  std::uint64_t seed = 1;
  Timestamp start = Timestamp{std::chrono::seconds(1409529600)};  // 2014-09-01
  Duration duration = std::chrono::hours(72);
  Duration dt = std::chrono::minutes(5);
  std::size_t n_channels = 4;

  /// Explicit planted broadcasts per channel index; when empty, a plan is
  /// drawn from `auto_plan`.
  std::vector<std::vector<BroadcastInterval>> broadcast_plan;
  struct AutoPlan {
    std::size_t per_channel = 3;
    std::size_t min_slots = 6;
    std::size_t max_slots = 24;
    Duration min_separation = std::chrono::minutes(90);
  } auto_plan;

  /// In-broadcast target volume per window: uniform on [v_min, v_max], or,
  /// when sub_fraction is set, uniform on [v_min, split_at) with that
  /// probability and on (split_at, v_max] otherwise.
  struct Volume {
    std::int64_t v_min = 20;
    std::int64_t v_max = 80;
    std::optional<double> sub_fraction;
    std::int64_t split_at = 40;
    double offline_rate = 0.2;  // Poisson mean per window outside broadcasts
  } volume;

  std::size_t n_users = 200;
  double bot_fraction = 0.0;
  double bot_rate = 0.5;  // Poisson mean per bot per broadcast window

  struct WeightedResponse {
    double weight = 1.0;
    ResponseModel model;
  };
  std::vector<WeightedResponse> responses{{1.0, {}}};

  struct TextRates {
    double question = 0.10;
    double mention = 0.05;
    double marker = 0.15;
    double emote = 0.20;
  } text;

  TextEntropy human_entropy = TextEntropy::high;
  TextEntropy bot_entropy = TextEntropy::low;

  /// Throws ConfigError.
  void validate() const;
};

SynthConfig synth_config_from_json(const nlohmann::json& doc);

struct GroundTruth {
  std::map<std::string, std::vector<BroadcastInterval>> broadcasts;  // raw channel name
  std::vector<std::string> bot_ids;                                  // raw user names
  std::map<std::string, ResponseModel> response_params;              // humans only

  nlohmann::json to_json() const;
};

/// Writes a TSV corpus in global timestamp order and returns what was
/// planted. Deterministic for a given config.
GroundTruth generate(const SynthConfig& config, std::ostream& corpus);

/// High entropy: Zipf draws over a large vocabulary with a light bigram
/// bias, plus injected questions, mentions, markers and emotes. Low
/// entropy: a few fixed templates with small slot vocabularies.
class TextModel {
 public:
  TextModel(TextEntropy entropy, const SynthConfig::TextRates& rates,
            std::vector<std::string> mention_pool);

  std::string sample(std::mt19937_64& rng, std::size_t template_seed = 0) const;

 private:
  std::string sample_high(std::mt19937_64& rng) const;
  std::string sample_low(std::mt19937_64& rng, std::size_t template_seed) const;

  TextEntropy entropy_;
  SynthConfig::TextRates rates_;
  std::vector<std::string> mention_pool_;
};

}  // namespace cacophony

#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "cacophony/chatlog.hpp"
#include "cacophony/deflate.hpp"
#include "cacophony/time.hpp"

namespace cacophony {

inline constexpr double kDefaultRhoThreshold = 0.44;
inline constexpr Duration kDefaultSessionTimeout = std::chrono::hours(1);

struct UserFeatures {
  std::string user;
  std::optional<double> tau_seconds;
  double rho = 1.0;
  std::size_t message_count = 0;
  std::size_t active_days = 0;
};

enum class BotLabel { retain, bot };

std::string_view to_string(BotLabel label);

/// Mean gap between consecutive messages, pooled over every session with at
/// least two messages. A gap longer than `session_timeout` ends a session and
/// is discarded. Empty when no session has two messages, or when every pooled
/// gap is zero.
std::optional<double> inter_message_time(std::span<const Timestamp> timestamps,
                                         Duration session_timeout = kDefaultSessionTimeout);

/// Active on at least two UTC days and at least ten messages.
bool eligible(const UserFeatures& u);

/// Only eligible users below the threshold are bots; tau is not consulted.
BotLabel classify(const UserFeatures& u, double rho_threshold = kDefaultRhoThreshold);

/// Features for every author across all channels, sorted by user id. A
/// user's texts are taken in timestamp order (ties by channel order, then
/// stream order). Runs on up to `workers` threads.
std::vector<UserFeatures> extract_user_features(const std::vector<ChannelStream>& channels,
                                                Duration session_timeout = kDefaultSessionTimeout,
                                                unsigned workers = 1);

using BotSet = std::unordered_set<std::string>;

BotSet bot_set(std::span<const UserFeatures> features, double rho_threshold = kDefaultRhoThreshold);

}  // namespace cacophony

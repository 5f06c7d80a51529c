#include "cacophony/botfilter.hpp"

#include <algorithm>
#include <unordered_map>

#include "cacophony/parallel.hpp"

namespace cacophony {

std::string_view to_string(BotLabel label) { return label == BotLabel::bot ? "bot" : "retain"; }

std::optional<double> inter_message_time(std::span<const Timestamp> timestamps,
                                         Duration session_timeout) {
  Duration total{0};
  std::size_t gaps = 0;
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    const Duration gap = timestamps[i] - timestamps[i - 1];
    if (gap > session_timeout) continue;
    total += gap;
    ++gaps;
  }
  if (gaps == 0 || total == Duration::zero()) return std::nullopt;
  return to_seconds(total) / static_cast<double>(gaps);
}

bool eligible(const UserFeatures& u) { return u.active_days >= 2 && u.message_count >= 10; }

BotLabel classify(const UserFeatures& u, double rho_threshold) {
  return eligible(u) && u.rho < rho_threshold ? BotLabel::bot : BotLabel::retain;
}

std::vector<UserFeatures> extract_user_features(const std::vector<ChannelStream>& channels,
                                                Duration session_timeout, unsigned workers) {
  std::unordered_map<std::string_view, std::vector<const ChatMessage*>> by_user;
  for (const auto& ch : channels) {
    for (const auto& m : ch.messages) by_user[m.user].push_back(&m);
  }
  std::vector<std::pair<std::string_view, std::vector<const ChatMessage*>>> users(
      std::make_move_iterator(by_user.begin()), std::make_move_iterator(by_user.end()));
  std::sort(users.begin(), users.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<UserFeatures> out(users.size());
  std::vector<DeflateCompressor> compressors(std::max(1u, workers));
  // Users are dealt round-robin to blocks; each block owns one compressor.
  const std::size_t blocks = compressors.size();
  parallel_for(blocks, workers, [&](std::size_t block) {
    DeflateCompressor& z = compressors[block];
    std::vector<Timestamp> times;
    std::vector<std::string_view> texts;
    for (std::size_t i = block; i < users.size(); i += blocks) {
      auto& [user, msgs] = users[i];
      std::stable_sort(msgs.begin(), msgs.end(), [](const ChatMessage* a, const ChatMessage* b) {
        return a->timestamp < b->timestamp;
      });
      times.clear();
      texts.clear();
      std::int64_t last_day = 0;
      std::size_t days = 0;
      for (const auto* m : msgs) {
        times.push_back(m->timestamp);
        texts.push_back(m->text);
        const std::int64_t day = utc_day(m->timestamp);
        if (days == 0 || day != last_day) {
          ++days;
          last_day = day;
        }
      }
      UserFeatures& f = out[i];
      f.user = std::string(user);
      f.message_count = msgs.size();
      f.active_days = days;
      f.tau_seconds = inter_message_time(times, session_timeout);
      f.rho = compression_ratio(texts, z);
    }
  });
  return out;
}

BotSet bot_set(std::span<const UserFeatures> features, double rho_threshold) {
  BotSet bots;
  for (const auto& f : features) {
    if (classify(f, rho_threshold) == BotLabel::bot) bots.insert(f.user);
  }
  return bots;
}

}  // namespace cacophony

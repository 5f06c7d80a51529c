#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cacophony/botfilter.hpp"
#include "cacophony/chatlog.hpp"
#include "cacophony/lexicon.hpp"
#include "cacophony/metrics.hpp"
#include "cacophony/phases.hpp"
#include "cacophony/segmenter.hpp"

namespace cacophony {

/// Channels enter the aggregate analysis only with enough traffic over the
/// whole observation window; chunks need more than one author.
struct ChannelFilter {
  std::int64_t min_messages = 1000;
  std::int64_t min_users = 100;
  std::int64_t min_chunk_users = 2;
};

struct PipelineConfig {
  Duration dt = std::chrono::minutes(5);
  Duration merge_gap = std::chrono::minutes(60);
  double rho_threshold = kDefaultRhoThreshold;
  Duration session_timeout = kDefaultSessionTimeout;
  ChannelFilter channel_filter;
  SlopeOptions slopes;
  BinSpec binning;
  std::size_t k_max = kMaxEmoteLength;
  std::optional<std::filesystem::path> emotes_path;
  std::optional<std::filesystem::path> markers_path;
  std::string salt;
  LogFormat format = LogFormat::tsv;
  bool pre_anonymized = false;
  std::optional<Timestamp> window_start;
  std::optional<Timestamp> window_end;
  bool include_offline = false;
  unsigned workers = 1;
};

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::filesystem::path& path);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

using BroadcastMap = std::map<std::string, std::vector<BroadcastInterval>>;

struct ChunkRecord {
  const Chunk* chunk = nullptr;
  ChunkMetrics metrics;
  bool in_broadcast = false;
};

struct PhaseResult {
  std::optional<ConditionalCurve> curve;
  std::array<ConditionalCurve, 4> quartiles;
  std::optional<std::int64_t> v_star_estimate;
  std::vector<std::pair<std::string, SlopePair>> slopes;  // sorted by user
  std::size_t chunks_in_curve = 0;
  std::size_t channels_passing_filter = 0;
  std::size_t users_considered = 0;
  std::size_t users_degenerate = 0;
};

/// Staged analysis over one corpus. Each stage is computed on first use;
/// upstream results can be injected from artifact files instead.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  /// Throws PipelineError("no messages") when nothing was accepted.
  void load(std::istream& input);
  void load(const std::filesystem::path& input);

  const PipelineConfig& config() const { return config_; }
  const IngestResult& corpus() const { return corpus_; }

  const BroadcastMap& broadcasts();
  void set_broadcasts(BroadcastMap b);

  const std::vector<UserFeatures>& user_features();
  const BotSet& bots();
  void set_bots(BotSet b);

  /// All chunks (every window with at least one message), grouped by
  /// channel in channel order, with metrics and the broadcast flag.
  const std::vector<ChunkRecord>& chunk_records();

  /// Chunk records kept for analysis: broadcast chunks only, unless
  /// include_offline is set.
  std::vector<const ChunkRecord*> analysis_chunks();

  const PhaseResult& phases();

 private:
  void require_loaded() const;

  PipelineConfig config_;
  bool loaded_ = false;
  IngestResult corpus_;
  std::optional<BroadcastMap> broadcasts_;
  std::optional<std::vector<UserFeatures>> features_;
  std::optional<BotSet> bots_;
  std::vector<std::vector<Chunk>> chunks_;  // per channel
  std::optional<std::vector<ChunkRecord>> records_;
  std::optional<PhaseResult> phases_;
  EmoteLexicon emotes_;
  MarkerLexicon markers_;
};

// Artifact writers. Each produces the exact bytes of one artifact file.
void write_broadcasts_csv(std::ostream& out, const BroadcastMap& broadcasts);
void write_bots_csv(std::ostream& out, std::span<const UserFeatures> features, double rho_threshold);
void write_chunks_csv(std::ostream& out, std::span<const ChunkRecord* const> records);
void write_curve_csv(std::ostream& out, const ConditionalCurve& curve);
void write_quartile_curves_csv(std::ostream& out, const std::array<ConditionalCurve, 4>& curves);
void write_slopes_csv(std::ostream& out,
                      std::span<const std::pair<std::string, SlopePair>> slopes);

BroadcastMap read_broadcasts_csv(const std::filesystem::path& path);
BotSet read_bots_csv(const std::filesystem::path& path);

/// Stage entry points shared by the CLI subcommands and run_pipeline. Each
/// writes one artifact into `out_dir` and returns its path.
std::filesystem::path write_ingest(Pipeline& p, const std::filesystem::path& out_dir);
std::filesystem::path write_broadcasts(Pipeline& p, const std::filesystem::path& out_dir);
std::filesystem::path write_bots(Pipeline& p, const std::filesystem::path& out_dir);
std::filesystem::path write_chunks(Pipeline& p, const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> write_curve(Pipeline& p, const std::filesystem::path& out_dir);
std::filesystem::path write_slopes(Pipeline& p, const std::filesystem::path& out_dir);

nlohmann::ordered_json summarize(Pipeline& p);

/// ingest -> broadcasts -> bots -> chunks/metrics -> phases, writing
/// broadcasts.csv, bots.csv, chunks.csv, curve.csv, curve_quartiles.csv,
/// slopes.csv and summary.json. On failure the artifacts written so far
/// are removed and the error is rethrown.
nlohmann::ordered_json run_pipeline(const PipelineConfig& config,
                                    const std::filesystem::path& input,
                                    const std::filesystem::path& out_dir);

/// Turns pipeline artifacts into per-figure tables: fig_overload.csv,
/// fig_overload_quartiles.csv, fig_features.csv, fig_slopes.csv and
/// fig_quadrants.csv. Throws MissingArtifact naming the first absent input.
std::vector<std::filesystem::path> report(const std::filesystem::path& artifacts_dir,
                                          const std::filesystem::path& out_dir);

}  // namespace cacophony

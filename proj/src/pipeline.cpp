#include "cacophony/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "cacophony/csv.hpp"
#include "cacophony/parallel.hpp"

namespace fs = std::filesystem;

namespace cacophony {

MissingArtifact::MissingArtifact(const fs::path& path)
    : std::runtime_error(fmt::format("missing artifact: {}", path.string())), path_(path) {}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  config_.workers = std::max(1u, config_.workers);
  emotes_ = config_.emotes_path ? EmoteLexicon::load(*config_.emotes_path) : EmoteLexicon::builtin();
  markers_ =
      config_.markers_path ? MarkerLexicon::load(*config_.markers_path) : MarkerLexicon::builtin();
}

void Pipeline::load(std::istream& input) {
  IngestOptions opts;
  opts.format = config_.format;
  opts.salt = config_.salt;
  opts.anonymize_ids = !config_.pre_anonymized;
  opts.window_start = config_.window_start;
  opts.window_end = config_.window_end;
  corpus_ = ingest(input, opts);
  if (corpus_.report.accepted == 0) throw PipelineError("no messages");
  loaded_ = true;
}

void Pipeline::load(const fs::path& input) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw PipelineError(fmt::format("cannot open input {}", input.string()));
  load(in);
}

void Pipeline::require_loaded() const {
  if (!loaded_) throw PipelineError("no corpus loaded");
}

const BroadcastMap& Pipeline::broadcasts() {
  if (!broadcasts_) {
    require_loaded();
    const auto& channels = corpus_.channels;
    std::vector<std::vector<BroadcastInterval>> found(channels.size());
    parallel_for(channels.size(), config_.workers, [&](std::size_t i) {
      found[i] = segment_channel(channels[i], config_.dt, config_.merge_gap);
    });
    BroadcastMap map;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      map.emplace(channels[i].channel, std::move(found[i]));
    }
    broadcasts_ = std::move(map);
  }
  return *broadcasts_;
}

void Pipeline::set_broadcasts(BroadcastMap b) {
  broadcasts_ = std::move(b);
  records_.reset();
  phases_.reset();
}

const std::vector<UserFeatures>& Pipeline::user_features() {
  if (!features_) {
    require_loaded();
    features_ = extract_user_features(corpus_.channels, config_.session_timeout, config_.workers);
  }
  return *features_;
}

const BotSet& Pipeline::bots() {
  if (!bots_) bots_ = bot_set(user_features(), config_.rho_threshold);
  return *bots_;
}

void Pipeline::set_bots(BotSet b) {
  bots_ = std::move(b);
  records_.reset();
  phases_.reset();
}

const std::vector<ChunkRecord>& Pipeline::chunk_records() {
  if (records_) return *records_;
  require_loaded();
  const auto& channels = corpus_.channels;
  const BotSet& bot_ids = bots();
  const BroadcastMap& live = broadcasts();

  const EmoteMatcher emote_matcher(emotes_, config_.k_max);
  const MarkerMatcher marker_matcher(markers_);

  chunks_.assign(channels.size(), {});
  std::vector<std::vector<ChunkRecord>> per_channel(channels.size());
  const std::size_t blocks = std::min<std::size_t>(config_.workers, std::max<std::size_t>(1, channels.size()));
  parallel_for(blocks, config_.workers, [&](std::size_t block) {
    MetricsEngine engine(emote_matcher, marker_matcher, config_.k_max);
    for (std::size_t i = block; i < channels.size(); i += blocks) {
      chunks_[i] = chunk(channels[i], bot_ids, config_.dt);
      const auto it = live.find(channels[i].channel);
      static const std::vector<BroadcastInterval> kNone;
      const auto& intervals = it == live.end() ? kNone : it->second;
      std::size_t k = 0;
      auto& recs = per_channel[i];
      recs.reserve(chunks_[i].size());
      for (const auto& c : chunks_[i]) {
        while (k < intervals.size() && intervals[k].end <= c.t_start) ++k;
        ChunkRecord r;
        r.chunk = &c;
        r.in_broadcast = k < intervals.size() && intervals[k].start <= c.t_start;
        if (r.in_broadcast || config_.include_offline) r.metrics = engine.compute(c);
        recs.push_back(std::move(r));
      }
    }
  });

  std::vector<ChunkRecord> all;
  for (auto& recs : per_channel) {
    all.insert(all.end(), std::make_move_iterator(recs.begin()),
               std::make_move_iterator(recs.end()));
  }
  records_ = std::move(all);
  return *records_;
}

std::vector<const ChunkRecord*> Pipeline::analysis_chunks() {
  std::vector<const ChunkRecord*> out;
  for (const auto& r : chunk_records()) {
    if (r.in_broadcast || config_.include_offline) out.push_back(&r);
  }
  return out;
}

const PhaseResult& Pipeline::phases() {
  if (phases_) return *phases_;
  require_loaded();
  const BotSet& bot_ids = bots();
  const auto& filter = config_.channel_filter;

  // Channel totals over the whole window: all messages, distinct humans.
  std::unordered_map<std::string_view, ChannelSize> sizes;
  std::unordered_set<std::string_view> passing;
  for (const auto& ch : corpus_.channels) {
    std::unordered_set<std::string_view> humans;
    for (const auto& m : ch.messages) {
      if (!bot_ids.contains(m.user)) humans.insert(m.user);
    }
    const auto n_users = static_cast<std::int64_t>(humans.size());
    sizes[ch.channel] = {ch.channel, n_users};
    if (static_cast<std::int64_t>(ch.messages.size()) >= filter.min_messages &&
        n_users >= filter.min_users) {
      passing.insert(ch.channel);
    }
  }

  PhaseResult result;
  result.channels_passing_filter = passing.size();
  std::vector<ChunkSample> samples;
  std::vector<ChannelChunkSample> channel_samples;
  std::unordered_map<std::string_view, std::vector<Observation>> observations;
  for (const ChunkRecord* r : analysis_chunks()) {
    const Chunk& c = *r->chunk;
    if (!passing.contains(c.channel)) continue;
    for (const auto& [user, count] : c.per_user_counts) {
      observations[user].push_back({c.volume, count});
    }
    const auto mu = messages_per_user(c);
    if (!mu) continue;
    const ChunkSample s{c.volume, static_cast<std::int64_t>(c.users()), *mu};
    samples.push_back(s);
    channel_samples.push_back({std::string(c.channel), s});
    if (s.users >= filter.min_chunk_users) ++result.chunks_in_curve;
  }

  try {
    result.curve = conditional_median(samples, config_.binning, filter.min_chunk_users);
    result.v_star_estimate = peak_estimate(*result.curve);
  } catch (const NoData&) {
  }
  std::vector<ChannelSize> passing_sizes;
  for (const auto& ch : corpus_.channels) {
    if (passing.contains(ch.channel)) passing_sizes.push_back(sizes[ch.channel]);
  }
  try {
    result.quartiles = quartile_curves(channel_samples, passing_sizes, config_.binning, 3);
  } catch (const NoData&) {
  }

  std::vector<ResponseCurve> curves;
  curves.reserve(observations.size());
  for (auto& [user, obs] : observations) curves.push_back({std::string(user), std::move(obs)});
  std::sort(curves.begin(), curves.end(),
            [](const ResponseCurve& a, const ResponseCurve& b) { return a.user < b.user; });
  std::vector<SlopeFit> fits(curves.size());
  parallel_for(curves.size(), config_.workers,
               [&](std::size_t i) { fits[i] = fit_slopes(curves[i], config_.slopes); });
  result.users_considered = curves.size();
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (fits[i].status == FitStatus::ok) {
      result.slopes.emplace_back(curves[i].user, *fits[i].slopes);
    } else if (fits[i].status == FitStatus::degenerate_variance) {
      ++result.users_degenerate;
    }
  }
  phases_ = std::move(result);
  return *phases_;
}

// ---------------------------------------------------------------------------
// Artifact writers

void write_broadcasts_csv(std::ostream& out, const BroadcastMap& broadcasts) {
  out << "channel,start_iso,end_iso\n";
  for (const auto& [channel, intervals] : broadcasts) {
    for (const auto& iv : intervals) {
      out << channel << ',' << format_iso8601(iv.start) << ',' << format_iso8601(iv.end) << '\n';
    }
  }
}

void write_bots_csv(std::ostream& out, std::span<const UserFeatures> features,
                    double rho_threshold) {
  out << "user,rho,tau_seconds,message_count,active_days,label\n";
  for (const auto& f : features) {
    out << f.user << ',' << format_number(f.rho) << ',' << format_optional(f.tau_seconds) << ','
        << f.message_count << ',' << f.active_days << ','
        << to_string(classify(f, rho_threshold)) << '\n';
  }
}

void write_chunks_csv(std::ostream& out, std::span<const ChunkRecord* const> records) {
  out << "channel,t_start,V,U,M_u,l_m,p_q,p_at,p_d,p_emote,rho_c\n";
  for (const ChunkRecord* r : records) {
    const Chunk& c = *r->chunk;
    const ChunkMetrics& m = r->metrics;
    out << c.channel << ',' << format_iso8601(c.t_start) << ',' << c.volume << ',' << c.users()
        << ',' << format_optional(m.messages_per_user) << ',' << format_optional(m.mean_length)
        << ',' << format_optional(m.p_question) << ',' << format_optional(m.p_mention) << ','
        << format_optional(m.p_marker) << ',' << format_optional(m.p_emote) << ','
        << format_optional(m.rho_c) << '\n';
  }
}

namespace {

void write_curve_rows(std::ostream& out, const ConditionalCurve& curve, std::string_view prefix) {
  for (const auto& b : curve.bins) {
    out << prefix << b.bin.label() << ',' << format_number(b.stat) << ','
        << format_number(b.se_median) << ',' << format_number(b.se_mean) << ',' << b.n << '\n';
  }
}

}  // namespace

void write_curve_csv(std::ostream& out, const ConditionalCurve& curve) {
  out << "V_bin,stat,se_median,se_mean,n\n";
  write_curve_rows(out, curve, "");
}

void write_quartile_curves_csv(std::ostream& out, const std::array<ConditionalCurve, 4>& curves) {
  out << "quartile,V_bin,stat,se_median,se_mean,n\n";
  for (std::size_t q = 0; q < curves.size(); ++q) {
    write_curve_rows(out, curves[q], fmt::format("{},", q + 1));
  }
}

void write_slopes_csv(std::ostream& out,
                      std::span<const std::pair<std::string, SlopePair>> slopes) {
  out << "user,alpha_sub,alpha_sup,n_sub,n_sup,quadrant\n";
  for (const auto& [user, s] : slopes) {
    out << user << ',' << format_number(s.alpha_sub) << ',' << format_number(s.alpha_sup) << ','
        << s.n_sub << ',' << s.n_sup << ',' << to_string(s.quadrant) << '\n';
  }
}

BroadcastMap read_broadcasts_csv(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifact(path);
  const CsvTable t = read_csv(path);
  const std::size_t ch = t.column("channel");
  const std::size_t s = t.column("start_iso");
  const std::size_t e = t.column("end_iso");
  BroadcastMap map;
  for (const auto& row : t.rows) {
    const auto start = parse_iso8601(row[s]);
    const auto end = parse_iso8601(row[e]);
    if (!start || !end) throw PipelineError(fmt::format("{}: bad timestamp", path.string()));
    map[row[ch]].push_back({*start, *end});
  }
  for (auto& [channel, intervals] : map) {
    std::sort(intervals.begin(), intervals.end(),
              [](const auto& a, const auto& b) { return a.start < b.start; });
  }
  return map;
}

BotSet read_bots_csv(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifact(path);
  const CsvTable t = read_csv(path);
  const std::size_t user = t.column("user");
  const std::size_t label = t.column("label");
  BotSet bots;
  for (const auto& row : t.rows) {
    if (row[label] == "bot") bots.insert(row[user]);
  }
  return bots;
}

// ---------------------------------------------------------------------------
// Stages

namespace {

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PipelineError(fmt::format("cannot write {}", path.string()));
  out << content;
  out.close();
  if (!out) throw PipelineError(fmt::format("failed writing {}", path.string()));
  return path;
}

template <typename Writer>
fs::path write_artifact(const fs::path& dir, const std::string& name, Writer&& writer) {
  std::ostringstream buffer;
  writer(buffer);
  return write_file(dir, name, buffer.str());
}

}  // namespace

fs::path write_ingest(Pipeline& p, const fs::path& out_dir) {
  // Re-emit the anonymized corpus in global time order, channel order on ties.
  std::vector<const ChatMessage*> all;
  for (const auto& ch : p.corpus().channels) {
    for (const auto& m : ch.messages) all.push_back(&m);
  }
  std::stable_sort(all.begin(), all.end(), [](const ChatMessage* a, const ChatMessage* b) {
    return a->timestamp < b->timestamp;
  });
  const auto corpus_path = write_artifact(out_dir, "corpus.tsv", [&](std::ostream& out) {
    for (const auto* m : all) out << serialize(*m, LogFormat::tsv) << '\n';
  });
  const auto& report = p.corpus().report;
  nlohmann::ordered_json doc;
  doc["accepted"] = report.accepted;
  doc["skipped"] = report.skipped;
  nlohmann::ordered_json kinds = nlohmann::ordered_json::object();
  for (const auto& [kind, n] : report.skipped_by_kind) kinds[std::string(to_string(kind))] = n;
  doc["skipped_by_kind"] = kinds;
  doc["channels"] = p.corpus().channels.size();
  write_file(out_dir, "ingest.json", doc.dump(2) + "\n");
  return corpus_path;
}

fs::path write_broadcasts(Pipeline& p, const fs::path& out_dir) {
  return write_artifact(out_dir, "broadcasts.csv",
                        [&](std::ostream& out) { write_broadcasts_csv(out, p.broadcasts()); });
}

fs::path write_bots(Pipeline& p, const fs::path& out_dir) {
  return write_artifact(out_dir, "bots.csv", [&](std::ostream& out) {
    write_bots_csv(out, p.user_features(), p.config().rho_threshold);
  });
}

fs::path write_chunks(Pipeline& p, const fs::path& out_dir) {
  const auto records = p.analysis_chunks();
  return write_artifact(out_dir, "chunks.csv",
                        [&](std::ostream& out) { write_chunks_csv(out, records); });
}

std::vector<fs::path> write_curve(Pipeline& p, const fs::path& out_dir) {
  const PhaseResult& ph = p.phases();
  std::vector<fs::path> paths;
  paths.push_back(write_artifact(out_dir, "curve.csv", [&](std::ostream& out) {
    write_curve_csv(out, ph.curve.value_or(ConditionalCurve{}));
  }));
  paths.push_back(write_artifact(out_dir, "curve_quartiles.csv", [&](std::ostream& out) {
    write_quartile_curves_csv(out, ph.quartiles);
  }));
  return paths;
}

fs::path write_slopes(Pipeline& p, const fs::path& out_dir) {
  return write_artifact(out_dir, "slopes.csv",
                        [&](std::ostream& out) { write_slopes_csv(out, p.phases().slopes); });
}

nlohmann::ordered_json summarize(Pipeline& p) {
  const auto& cfg = p.config();
  const PhaseResult& ph = p.phases();
  std::size_t n_broadcasts = 0;
  for (const auto& [channel, intervals] : p.broadcasts()) n_broadcasts += intervals.size();

  nlohmann::ordered_json doc;
  doc["messages_in"] = p.corpus().report.accepted;
  doc["lines_skipped"] = p.corpus().report.skipped;
  doc["channels"] = p.corpus().channels.size();
  doc["broadcasts"] = n_broadcasts;
  doc["users"] = p.user_features().size();
  doc["bots_removed"] = p.bots().size();
  doc["chunks_emitted"] = p.analysis_chunks().size();
  doc["channels_passing_filter"] = ph.channels_passing_filter;
  doc["chunks_in_curve"] = ph.chunks_in_curve;
  doc["v_star_estimate"] =
      ph.v_star_estimate ? nlohmann::ordered_json(*ph.v_star_estimate) : nlohmann::ordered_json();
  doc["users_with_observations"] = ph.users_considered;
  doc["users_regressed"] = ph.slopes.size();
  doc["users_degenerate"] = ph.users_degenerate;
  std::array<std::size_t, 4> quadrants{};
  for (const auto& [user, s] : ph.slopes) ++quadrants[static_cast<std::size_t>(s.quadrant)];
  nlohmann::ordered_json q;
  for (const auto quad : {Quadrant::I, Quadrant::II, Quadrant::III, Quadrant::IV}) {
    q[std::string(to_string(quad))] = quadrants[static_cast<std::size_t>(quad)];
  }
  doc["quadrants"] = q;
  doc["quadrant_iv_share"] =
      ph.slopes.empty() ? 0.0
                        : static_cast<double>(quadrants[3]) / static_cast<double>(ph.slopes.size());

  nlohmann::ordered_json c;
  c["dt_minutes"] = std::chrono::duration<double, std::ratio<60>>(cfg.dt).count();
  c["merge_gap_minutes"] = std::chrono::duration<double, std::ratio<60>>(cfg.merge_gap).count();
  c["rho_threshold"] = cfg.rho_threshold;
  c["session_timeout_seconds"] = to_seconds(cfg.session_timeout);
  c["min_messages"] = cfg.channel_filter.min_messages;
  c["min_users"] = cfg.channel_filter.min_users;
  c["min_chunk_users"] = cfg.channel_filter.min_chunk_users;
  c["v_star"] = cfg.slopes.v_star;
  c["v_max"] = cfg.slopes.v_max;
  c["min_obs"] = cfg.slopes.min_obs;
  c["include_offline"] = cfg.include_offline;
  if (cfg.window_start) c["window_start"] = format_iso8601(*cfg.window_start);
  if (cfg.window_end) c["window_end"] = format_iso8601(*cfg.window_end);
  doc["config"] = c;
  return doc;
}

nlohmann::ordered_json run_pipeline(const PipelineConfig& config, const fs::path& input,
                                    const fs::path& out_dir) {
  std::vector<fs::path> written;
  try {
    Pipeline p(config);
    p.load(input);
    written.push_back(write_broadcasts(p, out_dir));
    written.push_back(write_bots(p, out_dir));
    written.push_back(write_chunks(p, out_dir));
    for (auto& path : write_curve(p, out_dir)) written.push_back(std::move(path));
    written.push_back(write_slopes(p, out_dir));
    auto summary = summarize(p);
    written.push_back(write_file(out_dir, "summary.json", summary.dump(2) + "\n"));
    return summary;
  } catch (...) {
    std::error_code ec;
    for (const auto& path : written) fs::remove(path, ec);
    throw;
  }
}

// ---------------------------------------------------------------------------
// Report

namespace {

CsvTable require_artifact(const fs::path& dir, const char* name) {
  const fs::path path = dir / name;
  if (!fs::exists(path)) throw MissingArtifact(path);
  return read_csv(path);
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw PipelineError(fmt::format("not a number: '{}'", s));
  }
  return v;
}

}  // namespace

std::vector<fs::path> report(const fs::path& artifacts_dir, const fs::path& out_dir) {
  const CsvTable curve = require_artifact(artifacts_dir, "curve.csv");
  const CsvTable quartiles = require_artifact(artifacts_dir, "curve_quartiles.csv");
  const CsvTable chunks = require_artifact(artifacts_dir, "chunks.csv");
  const CsvTable slopes = require_artifact(artifacts_dir, "slopes.csv");
  std::vector<fs::path> out;

  out.push_back(write_artifact(out_dir, "fig_overload.csv", [&](std::ostream& os) {
    const auto vb = curve.column("V_bin"), st = curve.column("stat"),
               se = curve.column("se_median");
    os << "V_bin,stat,se\n";
    for (const auto& r : curve.rows) os << r[vb] << ',' << r[st] << ',' << r[se] << '\n';
  }));

  out.push_back(write_artifact(out_dir, "fig_overload_quartiles.csv", [&](std::ostream& os) {
    const auto q = quartiles.column("quartile"), vb = quartiles.column("V_bin"),
               st = quartiles.column("stat"), se = quartiles.column("se_median");
    os << "quartile,V_bin,stat,se\n";
    for (const auto& r : quartiles.rows) {
      os << r[q] << ',' << r[vb] << ',' << r[st] << ',' << r[se] << '\n';
    }
  }));

  out.push_back(write_artifact(out_dir, "fig_features.csv", [&](std::ostream& os) {
    static constexpr std::array<const char*, 7> kMetrics = {"M_u", "l_m",     "p_q",  "p_at",
                                                            "p_d", "p_emote", "rho_c"};
    const BinSpec binning;
    const auto vcol = chunks.column("V");
    std::array<std::size_t, kMetrics.size()> cols{};
    for (std::size_t i = 0; i < kMetrics.size(); ++i) cols[i] = chunks.column(kMetrics[i]);
    struct Acc {
      std::size_t n = 0;
      std::array<double, kMetrics.size()> sum{};
      std::array<std::size_t, kMetrics.size()> count{};
    };
    std::map<BinSpec::Bin, Acc> bins;
    for (const auto& r : chunks.rows) {
      const auto v = parse_double(r[vcol]);
      if (!v) continue;
      Acc& a = bins[binning.bin_of(static_cast<std::int64_t>(*v))];
      ++a.n;
      for (std::size_t i = 0; i < kMetrics.size(); ++i) {
        if (const auto x = parse_double(r[cols[i]])) {
          a.sum[i] += *x;
          ++a.count[i];
        }
      }
    }
    os << "V_bin,n";
    for (const auto* m : kMetrics) os << ',' << m;
    os << '\n';
    for (const auto& [bin, a] : bins) {
      os << bin.label() << ',' << a.n;
      for (std::size_t i = 0; i < kMetrics.size(); ++i) {
        os << ',';
        if (a.count[i]) os << format_number(a.sum[i] / static_cast<double>(a.count[i]));
      }
      os << '\n';
    }
  }));

  out.push_back(write_artifact(out_dir, "fig_slopes.csv", [&](std::ostream& os) {
    const auto u = slopes.column("user"), a = slopes.column("alpha_sub"),
               b = slopes.column("alpha_sup"), q = slopes.column("quadrant");
    os << "user,alpha_sub,alpha_sup,quadrant\n";
    for (const auto& r : slopes.rows) os << r[u] << ',' << r[a] << ',' << r[b] << ',' << r[q] << '\n';
  }));

  out.push_back(write_artifact(out_dir, "fig_quadrants.csv", [&](std::ostream& os) {
    const auto q = slopes.column("quadrant");
    std::map<std::string, std::size_t> counts{{"I", 0}, {"II", 0}, {"III", 0}, {"IV", 0}};
    for (const auto& r : slopes.rows) ++counts[r[q]];
    os << "quadrant,count,share\n";
    for (const char* name : {"I", "II", "III", "IV"}) {
      const double share = slopes.rows.empty() ? 0.0
                                               : static_cast<double>(counts[name]) /
                                                     static_cast<double>(slopes.rows.size());
      os << name << ',' << counts[name] << ',' << format_number(share) << '\n';
    }
  }));
  return out;
}

}  // namespace cacophony

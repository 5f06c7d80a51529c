#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cacophony/parallel.hpp"
#include "cacophony/pipeline.hpp"
#include "cacophony/synthgen.hpp"

namespace fs = std::filesystem;
using namespace cacophony;

namespace {

struct Options {
  double dt_minutes = 5.0;
  double merge_gap_minutes = 60.0;
  double session_timeout_minutes = 60.0;
  std::string salt_hex;
  std::string emotes;
  std::string markers;
  std::string format = "tsv";
  bool pre_anonymized = false;
  bool include_offline = false;
  std::string window_start;
  std::string window_end;
  PipelineConfig config;
};

Duration minutes(double m) {
  return std::chrono::duration_cast<Duration>(std::chrono::duration<double, std::ratio<60>>(m));
}

PipelineConfig resolve(Options& o) {
  PipelineConfig c = o.config;
  if (o.dt_minutes <= 0 || minutes(o.dt_minutes).count() <= 0) {
    throw CLI::ValidationError("--dt", "must be positive");
  }
  c.dt = minutes(o.dt_minutes);
  c.merge_gap = minutes(o.merge_gap_minutes);
  c.session_timeout = minutes(o.session_timeout_minutes);
  if (!o.salt_hex.empty()) {
    c.salt = salt_from_hex(o.salt_hex);
  } else if (const char* env = std::getenv("CACOPHONY_SALT"); env && *env) {
    c.salt = salt_from_hex(env);
  }
  if (!o.emotes.empty()) c.emotes_path = o.emotes;
  if (!o.markers.empty()) c.markers_path = o.markers;
  c.format = o.format == "jsonl" ? LogFormat::jsonl : LogFormat::tsv;
  c.pre_anonymized = o.pre_anonymized;
  c.include_offline = o.include_offline;
  const auto instant = [](const std::string& flag, const std::string& text) {
    const auto t = parse_iso8601(text);
    if (!t) throw CLI::ValidationError(flag, "expected an ISO-8601 UTC timestamp");
    return *t;
  };
  if (!o.window_start.empty()) c.window_start = instant("--window-start", o.window_start);
  if (!o.window_end.empty()) c.window_end = instant("--window-end", o.window_end);
  if (c.window_start && c.window_end && *c.window_end <= *c.window_start) {
    throw CLI::ValidationError("--window-end", "must be after --window-start");
  }
  if (c.workers == 0) c.workers = default_workers();
  return c;
}

struct StageInputs {
  std::string input;
  std::string out = ".";
  std::string bots;
  std::string broadcasts;
};

void add_stage_args(CLI::App* cmd, StageInputs& in, bool upstream) {
  cmd->add_option("input", in.input, "Chat log (TSV or JSONL)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", in.out, "Output directory");
  if (upstream) {
    cmd->add_option("--bots", in.bots, "Reuse labels from a bots.csv")->check(CLI::ExistingFile);
    cmd->add_option("--broadcasts", in.broadcasts, "Reuse intervals from a broadcasts.csv")
        ->check(CLI::ExistingFile);
  }
}

Pipeline open_pipeline(Options& o, const StageInputs& in) {
  Pipeline p(resolve(o));
  p.load(fs::path(in.input));
  if (!in.bots.empty()) p.set_bots(read_bots_csv(in.bots));
  if (!in.broadcasts.empty()) p.set_broadcasts(read_broadcasts_csv(in.broadcasts));
  return p;
}

void print_paths(std::initializer_list<fs::path> paths) {
  for (const auto& p : paths) std::cout << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chat-log analysis: broadcast segmentation, bot filtering, overload phases"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  o.config.workers = 0;
  app.add_option("--dt", o.dt_minutes, "Grid width in minutes")->capture_default_str();
  app.add_option("--merge-gap", o.merge_gap_minutes, "Merge broadcasts closer than this (minutes)")
      ->capture_default_str();
  app.add_option("--rho-threshold", o.config.rho_threshold, "Bot compression-ratio cutoff")
      ->capture_default_str();
  app.add_option("--session-timeout", o.session_timeout_minutes,
                 "Gap that ends a user session (minutes)")
      ->capture_default_str();
  app.add_option("--salt", o.salt_hex, "Hex salt for id hashing (default: $CACOPHONY_SALT)");
  app.add_option("--workers", o.config.workers, "Worker threads (default: all cores)");
  app.add_option("--emotes", o.emotes, "Emote lexicon, one code per line")->check(CLI::ExistingFile);
  app.add_option("--markers", o.markers, "Discourse-marker lexicon, one phrase per line")
      ->check(CLI::ExistingFile);
  app.add_option("--format", o.format, "Input format")
      ->check(CLI::IsMember({"tsv", "jsonl"}))
      ->capture_default_str();
  app.add_flag("--pre-anonymized", o.pre_anonymized, "Input ids are already hashed");
  app.add_option("--window-start", o.window_start, "Skip messages before this UTC instant");
  app.add_option("--window-end", o.window_end, "Skip messages at or after this UTC instant");
  app.add_flag("--include-offline", o.include_offline, "Analyse chunks outside broadcasts too");
  app.add_option("--min-messages", o.config.channel_filter.min_messages,
                 "Channel filter: minimum messages")
      ->capture_default_str();
  app.add_option("--min-users", o.config.channel_filter.min_users, "Channel filter: minimum users")
      ->capture_default_str();
  app.add_option("--min-chunk-users", o.config.channel_filter.min_chunk_users,
                 "Minimum authors for a chunk to enter the curve")
      ->capture_default_str();
  app.add_option("--v-star", o.config.slopes.v_star, "Sub/super-critical split volume")
      ->capture_default_str();
  app.add_option("--v-max", o.config.slopes.v_max, "Upper volume bound for slopes")
      ->capture_default_str();
  app.add_option("--min-obs", o.config.slopes.min_obs, "Minimum observations per region")
      ->capture_default_str();

  StageInputs ingest_in, bcast_in, bots_in, metrics_in, curve_in, slopes_in, run_in;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate and anonymize a log");
  add_stage_args(ingest_cmd, ingest_in, false);
  auto* bcast_cmd = app.add_subcommand("broadcasts", "Detect broadcast intervals");
  add_stage_args(bcast_cmd, bcast_in, false);
  auto* bots_cmd = app.add_subcommand("bots", "Score users and label bots");
  add_stage_args(bots_cmd, bots_in, false);
  auto* metrics_cmd = app.add_subcommand("metrics", "Per-chunk conversation metrics");
  add_stage_args(metrics_cmd, metrics_in, true);
  auto* phases_cmd = app.add_subcommand("phases", "Overload curve and per-user slopes");
  phases_cmd->require_subcommand(1);
  auto* curve_cmd = phases_cmd->add_subcommand("curve", "Median messages per user against volume");
  add_stage_args(curve_cmd, curve_in, true);
  auto* slopes_cmd = phases_cmd->add_subcommand("slopes", "Per-user sub/super-critical slopes");
  add_stage_args(slopes_cmd, slopes_in, true);

  std::string sim_config, sim_out = ".";
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic corpus");
  sim_cmd->add_option("--config", sim_config, "Generator config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("-o,--out", sim_out, "Output directory");

  std::string report_in = ".", report_out = ".";
  auto* report_cmd = app.add_subcommand("report", "Per-figure tables from pipeline artifacts");
  report_cmd->add_option("--artifacts", report_in, "Directory holding pipeline artifacts");
  report_cmd->add_option("-o,--out", report_out, "Output directory");

  auto* run_cmd = app.add_subcommand("run", "Full pipeline");
  add_stage_args(run_cmd, run_in, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest_cmd) {
      Pipeline p = open_pipeline(o, ingest_in);
      print_paths({write_ingest(p, ingest_in.out)});
      const auto& r = p.corpus().report;
      if (r.skipped > 0) std::cerr << fmt::format("skipped {} lines\n", r.skipped);
    } else if (*bcast_cmd) {
      Pipeline p = open_pipeline(o, bcast_in);
      print_paths({write_broadcasts(p, bcast_in.out)});
    } else if (*bots_cmd) {
      Pipeline p = open_pipeline(o, bots_in);
      print_paths({write_bots(p, bots_in.out)});
    } else if (*metrics_cmd) {
      Pipeline p = open_pipeline(o, metrics_in);
      print_paths({write_chunks(p, metrics_in.out)});
    } else if (*curve_cmd) {
      Pipeline p = open_pipeline(o, curve_in);
      for (const auto& path : write_curve(p, curve_in.out)) std::cout << path.string() << '\n';
    } else if (*slopes_cmd) {
      Pipeline p = open_pipeline(o, slopes_in);
      print_paths({write_slopes(p, slopes_in.out)});
    } else if (*sim_cmd) {
      std::ifstream cfg_in(sim_config);
      const auto doc = nlohmann::json::parse(cfg_in, nullptr, false);
      if (doc.is_discarded()) throw ConfigError(fmt::format("{}: not valid JSON", sim_config));
      const SynthConfig cfg = synth_config_from_json(doc);
      fs::create_directories(sim_out);
      const fs::path corpus = fs::path(sim_out) / "corpus.tsv";
      const fs::path truth = fs::path(sim_out) / "truth.json";
      std::ofstream out(corpus, std::ios::binary | std::ios::trunc);
      const GroundTruth gt = generate(cfg, out);
      out.close();
      std::ofstream(truth, std::ios::binary | std::ios::trunc) << gt.to_json().dump(2) << '\n';
      print_paths({corpus, truth});
    } else if (*report_cmd) {
      for (const auto& path : report(report_in, report_out)) std::cout << path.string() << '\n';
    } else if (*run_cmd) {
      const auto summary = run_pipeline(resolve(o), run_in.input, run_in.out);
      std::cout << summary.dump(2) << '\n';
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

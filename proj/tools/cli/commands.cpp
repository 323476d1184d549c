#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <unordered_set>

#include "digest.hpp"
#include "pamcurate/ais_csv.hpp"
#include "pamcurate/ais_curate.hpp"
#include "pamcurate/assemble.hpp"
#include "pamcurate/deployment.hpp"
#include "pamcurate/errors.hpp"
#include "pamcurate/geo_align.hpp"
#include "pamcurate/hkmeans.hpp"
#include "pamcurate/hsample.hpp"
#include "pamcurate/manifest_io.hpp"
#include "pamcurate/model_io.hpp"
#include "pamcurate/timeutil.hpp"

namespace pamcurate::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw UsageError(what + " path is not set");
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw InputError(what + " not found: " + path.string());
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw InputError(what + " is not readable: " + path.string());
}

void prepare_out(const RunConfig& config) {
  config.validate();
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw InputError("cannot create output directory " + config.out.string());
}

void write_text(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << text;
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_run_record(const RunConfig& config, const std::string& stage,
                      const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
  ordered_json record;
  record["stage"] = stage;
  record["digest_algorithm"] = "sha256";
  record["config"] = config.to_json();
  record["inputs"] = ordered_json::object();
  for (const auto& p : inputs) record["inputs"][p.string()] = sha256_file(p);
  record["outputs"] = ordered_json::object();
  for (const auto& p : outputs) record["outputs"][p.filename().string()] = sha256_file(p);
  write_text(run_record_path(config, stage), record.dump(2) + "\n");
}

ThresholdOrigin origin_or(const std::optional<std::uint64_t>& manual) {
  return manual ? ThresholdOrigin::kManual : ThresholdOrigin::kDetected;
}

const char* origin_name(ThresholdOrigin o) {
  return o == ThresholdOrigin::kManual ? "manual" : "detected";
}

}  // namespace

fs::path run_record_path(const RunConfig& config, const std::string& subcommand) {
  return config.out / ("run_" + subcommand + ".json");
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"align", "curate-ais", "fit",
                                                 "sample", "assemble",  "stats"};
  return names;
}

void cmd_align(const RunConfig& config, std::ostream& log) {
  require_file(config.deployment, "deployment config");
  for (const auto& p : config.ais) require_file(p, "AIS file");
  prepare_out(config);

  const auto deployment = DeploymentConfig::load(config.deployment);
  std::vector<AisPulse> pulses;
  std::size_t rows = 0, malformed = 0;
  for (const auto& p : config.ais) {
    auto part = read_ais_csv(p);
    rows += part.rows;
    malformed += part.malformed;
    pulses.insert(pulses.end(), part.pulses.begin(), part.pulses.end());
  }
  const AlignResult result = align(pulses, deployment, config.side_km, config.workers);

  const fs::path sidecar = config.out / kAlignedSidecar;
  write_sidecar(result.windows, sidecar);

  std::string pulse_text = "mmsi,time,lat,lon,vessel_type,hydrophone_id,window_id\n";
  for (const auto& ap : result.pulses) {
    pulse_text += std::to_string(ap.pulse.mmsi) + "," + format_utc(ap.pulse.time) + "," +
                  shortest(ap.pulse.position.lat) + "," + shortest(ap.pulse.position.lon) + "," +
                  (ap.pulse.vessel_type ? std::to_string(*ap.pulse.vessel_type) : "") + "," +
                  ap.hydrophone_id + "," + std::to_string(ap.window_id) + "\n";
  }
  const fs::path pulses_path = config.out / kAlignedPulses;
  write_text(pulses_path, pulse_text);

  ordered_json stats;
  stats["rows"] = rows;
  stats["malformed_rows"] = malformed;
  stats["rejected_coordinates"] = result.rejected;
  stats["aligned_pulses"] = result.pulses.size();
  stats["aligned_windows"] = result.windows.size();
  stats["side_km"] = config.side_km;
  const fs::path stats_path = config.out / kAlignStats;
  write_text(stats_path, stats.dump(2) + "\n");

  std::vector<fs::path> inputs{config.deployment};
  inputs.insert(inputs.end(), config.ais.begin(), config.ais.end());
  write_run_record(config, "align", inputs, {sidecar, pulses_path, stats_path});
  log << "align: " << rows << " rows, " << malformed << " malformed, " << result.rejected
      << " rejected, " << result.pulses.size() << " aligned pulses in " << result.windows.size()
      << " windows\n";
}

void cmd_curate_ais(const RunConfig& config, std::ostream& log) {
  const fs::path sidecar = config.out / kAlignedSidecar;
  require_file(config.deployment, "deployment config");
  require_file(sidecar, "aligned-window sidecar (run align first)");
  prepare_out(config);

  const auto deployment = DeploymentConfig::load(config.deployment);
  const AlignedWindowSet aligned = read_sidecar(sidecar, deployment);
  const OccurrenceHistogram hist = histogram(aligned);
  const Threshold threshold = config.threshold
                                  ? Threshold{*config.threshold, ThresholdOrigin::kManual}
                                  : detect_knee(hist, config.knee_sensitivity);
  const auto entries = curate(aligned, threshold, *config.seed, config.workers);

  const fs::path manifest = config.out / kAisManifest;
  write_manifest(entries, manifest);

  ordered_json stats;
  stats["threshold"] = threshold.t;
  stats["threshold_origin"] = origin_name(threshold.origin);
  stats["ships"] = hist.ships();
  stats["aligned_windows"] = aligned.size();
  stats["curated_windows"] = entries.size();
  const fs::path stats_path = config.out / kCurateStats;
  write_text(stats_path, stats.dump(2) + "\n");

  write_run_record(config, "curate-ais", {config.deployment, sidecar}, {manifest, stats_path});
  log << "curate-ais: t=" << threshold.t << " (" << origin_name(threshold.origin) << "), "
      << aligned.size() << " -> " << entries.size() << " windows\n";
}

void cmd_stats(const RunConfig& config, std::ostream& log) {
  const fs::path sidecar = config.out / kAlignedSidecar;
  require_file(config.deployment, "deployment config");
  require_file(sidecar, "aligned-window sidecar (run align first)");
  prepare_out(config);

  const auto deployment = DeploymentConfig::load(config.deployment);
  const AlignedWindowSet aligned = read_sidecar(sidecar, deployment);
  const OccurrenceHistogram hist = histogram(aligned);
  const auto ranked = hist.ranked_counts();

  std::string curve = "occurrence_rank,count\n";
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    curve += std::to_string(r + 1) + "," + std::to_string(ranked[r]) + "\n";
  }
  const fs::path curve_path = config.out / kOccurrence;
  write_text(curve_path, curve);

  ordered_json stats;
  stats["ships"] = hist.ships();
  stats["aligned_windows"] = hist.total_windows;
  if (config.threshold) {
    stats["threshold"] = *config.threshold;
    stats["threshold_origin"] = origin_name(origin_or(config.threshold));
  } else {
    try {
      const Threshold t = detect_knee(hist, config.knee_sensitivity);
      stats["threshold"] = t.t;
      stats["threshold_origin"] = "detected";
    } catch (const DegenerateInputError& e) {
      stats["threshold"] = nullptr;
      stats["threshold_origin"] = "none";
      stats["threshold_error"] = e.what();
    }
  }
  stats["hydrophones"] = ordered_json::array();
  for (const auto& h : deployment.hydrophones) {
    ordered_json jh;
    jh["id"] = h.id;
    jh["lat"] = h.location.lat;
    jh["lon"] = h.location.lon;
    try {
      const GeoFence f = fence_of(h, config.side_km);
      jh["fence"] = {{"lat_min", h.location.lat - f.lat_half_span_deg},
                     {"lat_max", h.location.lat + f.lat_half_span_deg},
                     {"lon_min", wrap_longitude(h.location.lon - f.lon_half_span_deg)},
                     {"lon_max", wrap_longitude(h.location.lon + f.lon_half_span_deg)}};
    } catch (const ValidationError&) {
      jh["fence"] = nullptr;
    }
    stats["hydrophones"].push_back(std::move(jh));
  }
  const fs::path stats_path = config.out / kStats;
  write_text(stats_path, stats.dump(2) + "\n");

  write_run_record(config, "stats", {config.deployment, sidecar}, {curve_path, stats_path});
  log << "stats: " << hist.ships() << " ships, threshold " << stats["threshold"].dump() << "\n";
}

namespace {

FitConfig fit_config_of(const RunConfig& config) {
  FitConfig fit;
  fit.level_ks = config.levels;
  fit.batch_size = config.batch_size;
  fit.passes = config.passes;
  fit.resample_rounds = config.resample_rounds;
  fit.resample_size = config.resample_size;
  fit.seed = *config.seed;
  fit.normalize = true;
  fit.workers = config.workers;
  try {
    fit.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  return fit;
}

}  // namespace

void cmd_fit(const RunConfig& config, std::ostream& log) {
  if (config.shards.empty()) throw UsageError("fit needs at least one shard");
  for (const auto& p : config.shards) require_file(p, "embedding shard");
  prepare_out(config);
  const FitConfig fit = fit_config_of(config);

  const ShardFileSource source(config.shards);
  const ClusterHierarchy hierarchy = build_hierarchy(source, fit);
  const fs::path model = config.out / kModel;
  write_model(hierarchy, model);

  ordered_json stats;
  stats["dim"] = hierarchy.dim();
  stats["levels"] = ordered_json::array();
  for (const auto& set : hierarchy.levels) {
    std::uint64_t absorbed = 0;
    for (auto c : set.counts) absorbed += c;
    stats["levels"].push_back({{"level", set.level}, {"k", set.k}, {"members", absorbed}});
  }
  const fs::path stats_path = config.out / kFitStats;
  write_text(stats_path, stats.dump(2) + "\n");

  write_run_record(config, "fit", config.shards, {model, stats_path});
  log << "fit: " << hierarchy.depth() << " levels, dim " << hierarchy.dim() << "\n";
}

void cmd_sample(const RunConfig& config, std::ostream& log) {
  const fs::path model_path = config.out / kModel;
  require_file(config.deployment, "deployment config");
  require_file(model_path, "hierarchy model (run fit first)");
  if (config.shards.empty()) throw UsageError("sample needs at least one shard");
  for (const auto& p : config.shards) require_file(p, "embedding shard");
  prepare_out(config);

  const auto deployment = DeploymentConfig::load(config.deployment);
  const ClusterHierarchy hierarchy = read_model(model_path);
  const std::string model_digest = sha256_file(model_path);

  // Counting pass; unreadable shards are excluded here and tallied.
  std::vector<std::uint64_t> populations(hierarchy.leaf_count(), 0);
  std::vector<fs::path> accepted;
  std::vector<std::string> rejected;
  for (const auto& p : config.shards) {
    try {
      const ShardFileSource source({p});
      if (source.dim() != hierarchy.dim()) {
        throw ValidationError("dim " + std::to_string(source.dim()) + " != model dim " +
                              std::to_string(hierarchy.dim()));
      }
      const auto counts = count_populations(source, hierarchy, config.workers);
      for (std::size_t i = 0; i < counts.size(); ++i) populations[i] += counts[i];
      accepted.push_back(p);
    } catch (const ParseError& e) {
      rejected.push_back(p.string() + ": " + e.what());
    } catch (const ValidationError& e) {
      rejected.push_back(p.string() + ": " + e.what());
    }
  }
  const QuotaTree quotas = allocate_quotas(hierarchy, populations, config.target_n);

  const fs::path checkpoint_path = config.out / kCheckpoint;
  SelectionState initial;
  StreamOptions options;
  options.workers = config.workers;
  if (fs::exists(checkpoint_path)) {
    try {
      SelectionCheckpoint cp = read_checkpoint(checkpoint_path);
      const bool known = std::all_of(
          cp.completed_shards.begin(), cp.completed_shards.end(), [&](const std::string& s) {
            return std::find(accepted.begin(), accepted.end(), fs::path(s)) != accepted.end();
          });
      if (cp.model_digest == model_digest && cp.state.capacities() == quotas.leaf_quotas() &&
          known) {
        initial = std::move(cp.state);
        options.completed = std::move(cp.completed_shards);
        log << "sample: resuming with " << options.completed.size() << " completed shards\n";
      } else {
        log << "sample: ignoring stale checkpoint\n";
      }
    } catch (const ParseError& e) {
      log << "sample: ignoring unreadable checkpoint (" << e.what() << ")\n";
    }
  }
  const std::size_t total_shards = accepted.size();
  options.on_progress = [&](const SelectionState& state, const std::vector<std::string>& done) {
    SelectionCheckpoint cp{state, done, model_digest};
    std::sort(cp.completed_shards.begin(), cp.completed_shards.end());
    write_checkpoint(cp, checkpoint_path);
    log << "sample: " << done.size() << "/" << total_shards << " shards\n";
  };

  StreamStats stream_stats;
  const SelectionState state =
      stream_select(accepted, hierarchy, quotas, options, &stream_stats, std::move(initial));
  for (auto& r : stream_stats.rejected) rejected.push_back(std::move(r));
  std::sort(rejected.begin(), rejected.end());

  const auto ids = selected_ids(state);
  const auto windows =
      resolve_windows(deployment, std::unordered_set<WindowId>(ids.begin(), ids.end()));
  const auto entries = emit(state, hierarchy, windows);
  const fs::path manifest = config.out / kHkmeansManifest;
  write_manifest(entries, manifest);

  std::uint64_t population = 0;
  for (auto p : populations) population += p;
  ordered_json stats;
  stats["target_n"] = config.target_n;
  stats["population"] = population;
  stats["quota_total"] = quotas.total();
  stats["selected"] = entries.size();
  stats["shards_accepted"] = accepted.size();
  stats["shards_rejected"] = rejected;
  const fs::path stats_path = config.out / kSampleStats;
  write_text(stats_path, stats.dump(2) + "\n");

  std::vector<fs::path> inputs{config.deployment, model_path};
  inputs.insert(inputs.end(), config.shards.begin(), config.shards.end());
  write_run_record(config, "sample", inputs, {manifest, stats_path});
  log << "sample: selected " << entries.size() << " of " << population << " windows\n";
}

void cmd_assemble(const RunConfig& config, std::ostream& log) {
  const fs::path ais_path = config.out / kAisManifest;
  const fs::path hk_path = config.out / kHkmeansManifest;
  require_file(ais_path, "AIS manifest (run curate-ais first)");
  require_file(hk_path, "cluster manifest (run sample first)");
  prepare_out(config);

  Assembly assembly = assemble(read_manifest(ais_path), read_manifest(hk_path));
  const fs::path manifest = config.out / kManifest;
  write_manifest(assembly.manifest.entries, manifest);
  const fs::path summary = config.out / kSummary;
  write_text(summary, assembly.summary.to_json());

  write_run_record(config, "assemble", {ais_path, hk_path}, {manifest, summary});
  log << "assemble: " << assembly.summary.total_entries << " windows ("
      << assembly.summary.ais_entries << " ais, " << assembly.summary.hkmeans_entries
      << " hkmeans), " << assembly.summary.total_hours << " h\n";
}

int run_command(const std::string& subcommand, const RunConfig& config, std::ostream& log) {
  try {
    if (subcommand == "align") {
      cmd_align(config, log);
    } else if (subcommand == "curate-ais") {
      cmd_curate_ais(config, log);
    } else if (subcommand == "fit") {
      cmd_fit(config, log);
    } else if (subcommand == "sample") {
      cmd_sample(config, log);
    } else if (subcommand == "assemble") {
      cmd_assemble(config, log);
    } else if (subcommand == "stats") {
      cmd_stats(config, log);
    } else {
      throw UsageError("unknown subcommand '" + subcommand + "'");
    }
    return 0;
  } catch (const UsageError& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateInputError& e) {
    log << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace pamcurate::cli

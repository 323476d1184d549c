#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "desk_fixture.hpp"
#include "json.hpp"
#include "pamcurate/deployment.hpp"
#include "pamcurate/geo_align.hpp"
#include "pamcurate/manifest_io.hpp"
#include "pamcurate/shard_io.hpp"

namespace pamcurate::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

struct Desk {
  fixture::DeskFixture fx;
  RunConfig config;
};

Desk make_desk(const std::string& name) {
  Desk d;
  d.fx = fixture::write_desk_fixture(fixture::scratch_dir(name));
  d.config = RunConfig::load(d.fx.config);
  return d;
}

int run(const std::string& stage, const RunConfig& c, std::string* log = nullptr) {
  std::ostringstream out;
  const int rc = run_command(stage, c, out);
  if (log) *log = out.str();
  return rc;
}

TEST(Align, DeskFixtureCounts) {
  const auto d = make_desk("cmd_align");
  ASSERT_EQ(run("align", d.config), 0);
  const json stats = read_json(d.config.out / kAlignStats);
  EXPECT_EQ(stats["malformed_rows"], 3);
  EXPECT_EQ(stats["rejected_coordinates"], 1);
  EXPECT_GT(stats["aligned_windows"].get<int>(), 0);
  EXPECT_LE(stats["aligned_windows"], stats["aligned_pulses"]);
  // Every ship pulse has a decoy that never aligns; the between-recordings
  // pulse never aligns either.
  const int rows = stats["rows"];
  EXPECT_EQ(stats["aligned_pulses"].get<int>() * 2 + 1 + 3 + 1, rows);
  EXPECT_TRUE(fs::exists(run_record_path(d.config, "align")));
}

TEST(Align, EmptyAisFileGivesEmptySidecar) {
  auto d = make_desk("cmd_align_empty");
  const fs::path empty = d.fx.dir / "empty.csv";
  std::ofstream(empty) << "MMSI,BaseDateTime,LAT,LON,SOG,VesselType\n";
  d.config.ais = {empty};
  ASSERT_EQ(run("align", d.config), 0);
  EXPECT_EQ(fs::file_size(d.config.out / kAlignedSidecar), 0u);
  EXPECT_EQ(read_json(d.config.out / kAlignStats)["aligned_windows"], 0);

  // A manual threshold on nothing is an empty manifest; detection has no curve.
  auto manual = d.config;
  manual.threshold = 5;
  EXPECT_EQ(run("curate-ais", manual), 0);
  EXPECT_EQ(fs::file_size(d.config.out / kAisManifest), 0u);
  std::string log;
  EXPECT_EQ(run("curate-ais", d.config, &log), 3);
  EXPECT_EQ(run("stats", d.config), 0);
  EXPECT_TRUE(read_json(d.config.out / kStats)["threshold"].is_null());
}

TEST(Commands, MissingInputNamesTheFile) {
  auto d = make_desk("cmd_missing");
  d.config.deployment = d.fx.dir / "no_such_deployment.json";
  std::string log;
  EXPECT_EQ(run("align", d.config, &log), 2);
  EXPECT_NE(log.find("no_such_deployment.json"), std::string::npos) << log;
}

TEST(Commands, LaterStageBeforeEarlierOneSaysWhatToRun) {
  const auto d = make_desk("cmd_order");
  std::string log;
  EXPECT_EQ(run("curate-ais", d.config, &log), 2);
  EXPECT_NE(log.find("run align first"), std::string::npos) << log;
  EXPECT_EQ(run("sample", d.config, &log), 2);
  EXPECT_NE(log.find("run fit first"), std::string::npos) << log;
  EXPECT_EQ(run("assemble", d.config, &log), 2);
}

TEST(Commands, MissingSeedAndUnknownStageAreUsageErrors) {
  auto d = make_desk("cmd_usage");
  auto no_seed = d.config;
  no_seed.seed.reset();
  std::string log;
  EXPECT_EQ(run("align", no_seed, &log), 1);
  EXPECT_NE(log.find("seed"), std::string::npos);
  EXPECT_EQ(run("frobnicate", d.config), 1);
  auto bad_levels = d.config;
  bad_levels.levels = {2, 6};  // must shrink upwards
  EXPECT_EQ(run("fit", bad_levels), 1);
}

TEST(Stats, CurveIsDescendingAndThresholdDetected) {
  const auto d = make_desk("cmd_stats");
  ASSERT_EQ(run("align", d.config), 0);
  ASSERT_EQ(run("stats", d.config), 0);
  std::istringstream curve(slurp(d.config.out / kOccurrence));
  std::string line;
  std::getline(curve, line);
  EXPECT_EQ(line, "occurrence_rank,count");
  long prev = -1, rank = 0;
  while (std::getline(curve, line)) {
    const auto comma = line.find(',');
    EXPECT_EQ(std::stol(line.substr(0, comma)), ++rank);
    const long count = std::stol(line.substr(comma + 1));
    if (prev >= 0) EXPECT_LE(count, prev);
    EXPECT_GT(count, 0);
    prev = count;
  }
  const json stats = read_json(d.config.out / kStats);
  EXPECT_EQ(stats["ships"], rank);
  EXPECT_EQ(stats["threshold_origin"], "detected");
  EXPECT_GE(stats["threshold"].get<long>(), 1);
  ASSERT_EQ(stats["hydrophones"].size(), 2u);
  const auto& f = stats["hydrophones"][0]["fence"];
  EXPECT_LT(f["lat_min"].get<double>(), 36.8);
  EXPECT_GT(f["lat_max"].get<double>(), 36.8);
}

TEST(Curate, ManualThresholdKeepsSmallShipsWhole) {
  auto d = make_desk("cmd_curate");
  d.config.threshold = 10;
  ASSERT_EQ(run("align", d.config), 0);
  ASSERT_EQ(run("curate-ais", d.config), 0);
  const auto entries = read_manifest(d.config.out / kAisManifest);
  const json stats = read_json(d.config.out / kCurateStats);
  EXPECT_EQ(stats["threshold"], 10);
  EXPECT_EQ(stats["threshold_origin"], "manual");
  EXPECT_EQ(stats["curated_windows"], entries.size());

  const auto aligned =
      read_sidecar(d.config.out / kAlignedSidecar, DeploymentConfig::load(d.config.deployment));
  std::map<Mmsi, std::vector<WindowId>> by_ship;
  for (const auto& [id, aw] : aligned.windows()) {
    for (Mmsi m : aw.mmsis) by_ship[m].push_back(id);
  }
  std::set<WindowId> kept;
  for (const auto& e : entries) {
    EXPECT_EQ(e.source, Source::kAis);
    ASSERT_TRUE(aligned.windows().count(e.window_id));
    EXPECT_TRUE(aligned.windows().at(e.window_id).mmsis.count(e.mmsi.value()));
    kept.insert(e.window_id);
  }
  // Ships at or below the threshold are retained with probability one.
  std::size_t small = 0;
  for (const auto& [ship, ids] : by_ship) {
    if (ids.size() > 10) continue;
    ++small;
    for (WindowId id : ids) EXPECT_TRUE(kept.count(id)) << ship;
  }
  EXPECT_GT(small, 0u);
  EXPECT_LT(entries.size(), aligned.size());
}

TEST(Sample, DimMismatchShardIsRejectedNotFatal) {
  auto d = make_desk("cmd_sample_dim");
  ASSERT_EQ(run("fit", d.config), 0);
  ASSERT_EQ(run("sample", d.config), 0);
  const std::string clean = slurp(d.config.out / kHkmeansManifest);

  EmbeddingShard odd(4);
  const float v[4] = {1, 2, 3, 4};
  odd.add(12345, v);
  const fs::path odd_path = d.fx.dir / "odd.pamemb";
  write_shard(odd, odd_path);
  std::ofstream(d.fx.dir / "garbage.pamemb") << "definitely not a shard";
  auto with_bad = d.config;
  with_bad.shards.push_back(odd_path);
  with_bad.shards.push_back(d.fx.dir / "garbage.pamemb");
  fs::remove(d.config.out / kCheckpoint);
  ASSERT_EQ(run("sample", with_bad), 0);
  const json stats = read_json(d.config.out / kSampleStats);
  ASSERT_EQ(stats["shards_rejected"].size(), 2u);
  EXPECT_EQ(stats["shards_accepted"], 4);
  EXPECT_EQ(slurp(d.config.out / kHkmeansManifest), clean);
}

TEST(Sample, SelectsTargetAndRecordsRun) {
  const auto d = make_desk("cmd_sample");
  ASSERT_EQ(run("fit", d.config), 0);
  ASSERT_EQ(run("sample", d.config), 0);
  const json stats = read_json(d.config.out / kSampleStats);
  EXPECT_EQ(stats["population"], 1000);
  EXPECT_EQ(stats["selected"], 400);
  EXPECT_EQ(stats["quota_total"], 400);
  const json record = read_json(run_record_path(d.config, "sample"));
  EXPECT_EQ(record["stage"], "sample");
  EXPECT_EQ(record["digest_algorithm"], "sha256");
  EXPECT_EQ(record["outputs"].size(), 2u);
  EXPECT_EQ(record["inputs"].size(), 6u);  // deployment, model, four shards
  for (const auto& [k, v] : record["outputs"].items()) {
    EXPECT_EQ(v.get<std::string>().size(), 64u) << k;
  }
}

// ---- the installed binary ----

int exec(const std::string& args) {
  const std::string cmd = std::string(PAMCURATE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Binary, ExitCodes) {
  const auto d = make_desk("cmd_binary");
  const std::string cfg = "--config " + d.fx.config.string();
  EXPECT_EQ(exec(""), 1);
  EXPECT_EQ(exec("--help"), 0);
  EXPECT_EQ(exec("align --help"), 0);
  EXPECT_EQ(exec("bogus"), 1);
  EXPECT_EQ(exec("align --out " + (d.fx.dir / "o").string()), 1);  // no seed
  EXPECT_EQ(exec("fit " + cfg + " --levels 4,x"), 1);
  EXPECT_EQ(exec("align " + cfg + " --deployment " + (d.fx.dir / "nope.json").string()), 2);
  EXPECT_EQ(exec("align " + cfg), 0);
  EXPECT_EQ(exec("curate-ais " + cfg + " --threshold 20"), 0);
  EXPECT_TRUE(fs::exists(d.fx.dir / "out" / kAisManifest));
}

TEST(Binary, FlagsOverrideConfig) {
  const auto d = make_desk("cmd_binary_override");
  const fs::path out = d.fx.dir / "other_out";
  ASSERT_EQ(exec("align --config " + d.fx.config.string() + " --out " + out.string() +
                 " --seed 11 --side-km 2"),
            0);
  const json record = read_json(out / "run_align.json");
  EXPECT_EQ(record["config"]["seed"], 11);
  EXPECT_EQ(record["config"]["side_km"], 2.0);
  EXPECT_EQ(record["config"]["out"], out.string());
}

}  // namespace
}  // namespace pamcurate::cli

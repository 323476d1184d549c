#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/run_config.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string deployment;
  std::vector<std::string> ais;
  std::vector<std::string> shards;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> side_km;
  std::optional<std::uint64_t> threshold;
  std::optional<double> knee_sensitivity;
  std::string levels;
  std::optional<std::uint64_t> target_n;
  std::optional<unsigned> workers;
};

void add_options(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "run config JSON (or a run record to replay)");
  sub->add_option("--deployment", o.deployment, "deployment config JSON");
  sub->add_option("--ais", o.ais, "AIS CSV file(s)");
  sub->add_option("--shards", o.shards, "embedding shard file(s)");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "random seed (required)");
  sub->add_option("--side-km", o.side_km, "fence side length in km");
  sub->add_option("--threshold", o.threshold, "manual AIS occurrence threshold");
  sub->add_option("--knee-sensitivity", o.knee_sensitivity, "knee detection sensitivity");
  sub->add_option("--levels", o.levels, "clusters per level, leaves first, e.g. 6000,400,40,10");
  sub->add_option("--target-n", o.target_n, "windows to select from the clustered corpus");
  sub->add_option("--workers", o.workers, "worker threads");
}

pamcurate::cli::RunConfig build_config(const Overrides& o) {
  namespace fs = std::filesystem;
  using pamcurate::cli::RunConfig;
  RunConfig c = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  const auto abs = [](const std::string& p) { return fs::absolute(p).lexically_normal(); };
  if (!o.deployment.empty()) c.deployment = abs(o.deployment);
  if (!o.ais.empty()) {
    c.ais.clear();
    for (const auto& p : o.ais) c.ais.push_back(abs(p));
  }
  if (!o.shards.empty()) {
    c.shards.clear();
    for (const auto& p : o.shards) c.shards.push_back(abs(p));
  }
  if (!o.out.empty()) c.out = abs(o.out);
  if (o.seed) c.seed = o.seed;
  if (o.side_km) c.side_km = *o.side_km;
  if (o.threshold) c.threshold = o.threshold;
  if (o.knee_sensitivity) c.knee_sensitivity = *o.knee_sensitivity;
  if (!o.levels.empty()) c.levels = pamcurate::cli::parse_levels_csv(o.levels);
  if (o.target_n) c.target_n = *o.target_n;
  if (o.workers) c.workers = *o.workers;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curates passive acoustic monitoring audio into a training manifest."};
  app.require_subcommand(1);

  std::map<std::string, Overrides> overrides;
  const std::map<std::string, std::string> help = {
      {"align", "join AIS pulses with hydrophone fences and audio windows"},
      {"curate-ais", "occurrence-limited sampling of ship-labelled windows"},
      {"fit", "fit the hierarchical k-means model on embedding shards"},
      {"sample", "balanced selection of windows through the cluster hierarchy"},
      {"assemble", "merge both curated sets into the final manifest"},
      {"stats", "occurrence curve, threshold and fence diagnostics"},
  };
  for (const auto& name : pamcurate::cli::subcommands()) {
    add_options(app.add_subcommand(name, help.at(name)), overrides[name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  pamcurate::cli::RunConfig config;
  try {
    config = build_config(overrides.at(name));
  } catch (const pamcurate::cli::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const pamcurate::cli::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return pamcurate::cli::run_command(name, config, std::cerr);
}

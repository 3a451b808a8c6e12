#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pathguide/scenario.hpp"

using namespace pathguide;

namespace {

std::vector<DensityTier> tiers_from_flag(const std::string& tier) {
  if (tier == "all")
    return {DensityTier::kLow, DensityTier::kMedium, DensityTier::kHigh};
  return {tier_from_name(tier)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-guided trajectory replanning benchmark"};
  app.require_subcommand(1);

  std::string config_path, tier = "all", out_dir = "out", dump_dir = "dump";
  int seed = -1, tasks = -1, task_id = 0;

  auto* bench = app.add_subcommand("bench", "run the replanning benchmark");
  bench->add_option("--config", config_path, "scenario config file");
  bench->add_option("--seed", seed, "override rng seed");
  bench->add_option("--tasks", tasks, "override task count per tier");
  bench->add_option("--tier", tier, "low|medium|high|all")->default_val("all");
  bench->add_option("--out", out_dir, "output directory")->default_val("out");

  auto* one = app.add_subcommand("replan-one", "run a single task with dumps");
  one->add_option("--config", config_path, "scenario config file");
  one->add_option("--seed", seed, "override rng seed");
  one->add_option("--tier", tier, "low|medium|high")->default_val("medium");
  one->add_option("--task", task_id, "task id within the tier");
  one->add_option("--dump", dump_dir, "dump directory")->default_val("dump");

  auto* mapgen = app.add_subcommand("map-gen", "emit a generated map file");
  std::string map_out = "map.txt";
  mapgen->add_option("--config", config_path, "scenario config file");
  mapgen->add_option("--seed", seed, "override rng seed");
  mapgen->add_option("--tier", tier, "low|medium|high")->default_val("medium");
  mapgen->add_option("--task", task_id, "task id within the tier");
  mapgen->add_option("--out", map_out, "output map file")->default_val("map.txt");

  CLI11_PARSE(app, argc, argv);

  try {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{}
                                             : ScenarioConfig::from_file(config_path);
    if (seed >= 0) cfg.rng_seed = static_cast<uint64_t>(seed);
    if (tasks >= 0) cfg.tasks = tasks;

    if (bench->parsed()) {
      const auto result = run_benchmark(cfg, tiers_from_flag(tier));
      std::filesystem::create_directories(out_dir);
      std::ofstream csv(out_dir + "/records.csv");
      csv << result.csv();
      std::cout << result.summary();
    } else if (one->parsed()) {
      dump_artifacts(cfg, tier_from_name(tier), task_id, dump_dir);
      std::cout << "artifacts written to " << dump_dir << "\n";
    } else if (mapgen->parsed()) {
      const auto t = tier_from_name(tier);
      const auto task = generate_map(cfg, t, task_seed(cfg, t, task_id));
      task.field.save_file(map_out);
      std::cout << "map written to " << map_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

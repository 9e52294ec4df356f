#include "coinspect/engine.hpp"
#include "coinspect/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <optional>

namespace {

struct RunOptions {
  std::string scenario;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> voxel_size;
  std::optional<double> quality_floor;
  std::optional<int> horizon;
  std::string log_level = "info";
};

int run(const RunOptions& o) {
  using namespace coinspect;
  spdlog::set_level(spdlog::level::from_str(o.log_level));

  ScenarioOverrides ov{o.seed, o.duration, o.voxel_size, o.quality_floor, o.horizon};
  const Scenario s = parse_scenario(o.scenario, ov);
  spdlog::info("scenario '{}': {} agents ({} explorers), {} interest points, T={} s", s.name, s.config.roster.size(),
               s.config.explorer_count(), s.scene.interest_points.size(), s.config.duration);

  const auto t0 = std::chrono::steady_clock::now();
  const MissionResult r = run_mission(s.config, s.scene);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_outputs(r, s.scene, o.out);
  const auto& sc = r.safety;
  fmt::print("Q = {:.6f}\n", r.Q);
  fmt::print("points above floor: {}/{} ({:.1f}%)\n", r.ledger.observed_count(), r.ledger.size(),
             r.ledger.size() ? 100.0 * static_cast<double>(r.ledger.observed_count()) / static_cast<double>(r.ledger.size()) : 0.0);
  fmt::print("average quality: {:.6f}\n", r.ledger.average());
  fmt::print("safety: same-voxel {} occupied-entries {} crossings {} unclaimed {} out-of-grid {}\n",
             sc.agent_agent_same_voxel, sc.occupied_voxel_entries, sc.obstacle_crossings, sc.unclaimed_voxel_entries,
             sc.out_of_grid);
  fmt::print("digest: {}\n", result_digest(r, s.scene));
  fmt::print("wall clock: {:.2f} s, outputs in {}\n", wall, o.out);
  if (sc.total() != 0) {
    spdlog::error("safety violations recorded");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative multi-UAV structural inspection simulator"};
  app.require_subcommand(1);
  RunOptions o;
  auto* cmd = app.add_subcommand("run", "Run a scenario and write result files");
  cmd->add_option("--scenario", o.scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Override the scenario seed");
  cmd->add_option("--duration", o.duration, "Override mission duration [s]")->check(CLI::PositiveNumber);
  cmd->add_option("--voxel-size", o.voxel_size, "Override voxel size [m]")->check(CLI::PositiveNumber);
  cmd->add_option("--quality-floor", o.quality_floor, "Override the quality floor")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--horizon", o.horizon, "Override the planning horizon [voxels]")->check(CLI::PositiveNumber);
  cmd->add_option("--log-level", o.log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    return run(o);
  } catch (const coinspect::ConfigError& e) {
    spdlog::error("configuration: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

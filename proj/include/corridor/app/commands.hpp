#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corridor/metrics/sweep.hpp"
#include "corridor/rl/corridor_env.hpp"
#include "corridor/rl/train.hpp"

namespace corridor {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitInfeasible = 3,
  kExitSimulationFault = 4,
  kExitDivergence = 5,
};

struct CliFlags {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::filesystem::path> checkpoint;
};

struct RunConfig {
  ScenarioSpec scenario;
  ControllerConfig controller;
  std::optional<std::filesystem::path> checkpoint;
  std::vector<std::uint64_t> seeds;  // empty: the scenario's own seed
  RunOptions options;
};

struct TrainCommandConfig {
  TrainConfig training;
  CorridorEnvConfig environment;
};

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Parsers throw ConfigError on unknown keys or malformed values. Flags
/// override the matching config entries.
RunConfig parse_run_config(const nlohmann::json& j, const CliFlags& flags);
SweepConfig parse_sweep_config(const nlohmann::json& j, const CliFlags& flags);
TrainCommandConfig parse_train_config(const nlohmann::json& j, const CliFlags& flags);

int cmd_run(const CliFlags& flags);
int cmd_sweep(const CliFlags& flags);
int cmd_train(const CliFlags& flags);
int cmd_eval(const CliFlags& flags);

/// Entry point: parses subcommand and flags, configures logging from
/// CORRIDOR_LOG, maps failures to exit codes.
int run_cli(int argc, char** argv);

}  // namespace corridor

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corridor/control/controllers.hpp"
#include "corridor/metrics/metrics.hpp"

namespace corridor {

enum class ControllerKind { ModelBased, Oracle, Policy, IdmBaseline };

std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller_kind(std::string_view text);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::ModelBased;
  double w = 10.0;
  std::shared_ptr<const Policy> policy;  // required for Policy
};

/// Simulated controllers only; the oracle has no per-step behaviour.
std::unique_ptr<CavController> make_controller(const ControllerConfig& config);

struct RunOptions {
  ScenarioOptions scenario{};
  ObservationConfig observation{};
  ThroughputLanes lanes = ThroughputLanes::Both;
  /// Stop once both travel times and the throughput window are known.
  bool stop_when_measured = false;
};

struct EpisodeOutcome {
  EpisodeRecord record;
  std::optional<double> ems_time;
  std::optional<double> cav_time;
  std::optional<ThroughputResult> throughput;
};

using StepObserver = std::function<void(const Simulation&, const CavController&)>;

/// Closed loop from t0 to the horizon. `observer` sees the state after every
/// step.
EpisodeOutcome run_controlled_episode(const ScenarioSpec& spec, CavController& controller,
                                      const RunOptions& options = {}, const StepObserver& observer = {});

enum class CellStatus { Ok, Incomplete, Infeasible, Failed };

std::string_view to_string(CellStatus status);

struct CellResult {
  std::size_t i = 0;  // x_a index
  std::size_t j = 0;  // d index
  double x_a = 0.0;
  double d = 0.0;
  std::uint64_t seed = 0;
  CellStatus status = CellStatus::Ok;
  std::optional<double> ems_time;
  std::optional<double> cav_time;
  std::optional<double> throughput;
  bool throughput_degenerate = false;
  std::string message;
};

void to_json(nlohmann::json& j, const CellResult& c);
void from_json(const nlohmann::json& j, CellResult& c);

struct SweepResult {
  NetworkKind network = NetworkKind::OneIntersection;
  std::string controller;
  std::vector<double> x_a;
  std::vector<double> d;
  std::vector<std::uint64_t> seeds;
  std::vector<CellResult> cells;  // ordered by (i, j, seed index)

  /// Per-cell mean over seeds with a value; cells without any stay missing.
  Grid grid(Metric metric) const;
};

void to_json(nlohmann::json& j, const SweepResult& r);
void from_json(const nlohmann::json& j, SweepResult& r);

/// One cell under one controller.
CellResult run_cell(const ScenarioSpec& spec, const ControllerConfig& controller, const RunOptions& options);

struct SweepConfig {
  ScenarioSpec base;
  std::vector<double> x_a;
  std::vector<double> d;
  std::vector<ControllerConfig> controllers;
  std::vector<std::uint64_t> seeds{0};
  int workers = 1;
  RunOptions run{};
};

struct SweepStats {
  std::size_t executed_runs = 0;
  std::size_t reused_runs = 0;
};

/// Runs every (controller, cell, seed) on a bounded pool. With `cell_dir`
/// each run persists to its own JSON file and existing files for the same
/// spec are reused, so an interrupted sweep resumes where it stopped.
std::vector<SweepResult> run_sweep(const SweepConfig& config,
                                   const std::optional<std::filesystem::path>& cell_dir = std::nullopt,
                                   SweepStats* stats = nullptr);

}  // namespace corridor

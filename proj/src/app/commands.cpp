#include "corridor/app/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "corridor/error.hpp"
#include "corridor/rl/checkpoint.hpp"

namespace corridor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, std::string_view where) {
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", where));
  std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("'{}': {}", key, e.what()));
  }
}

ScenarioSpec parse_scenario(const json& j) {
  check_keys(j, {"network", "x_a", "d", "inflow_vph", "seed", "horizon_steps"}, "scenario");
  try {
    return j.get<ScenarioSpec>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("scenario: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("scenario: {}", e.what()));
  }
}

SignalProgram parse_signal(const json& j) {
  check_keys(j, {"green_s", "yellow_s", "red_s", "phase_offset_s"}, "signal");
  SignalProgram p;
  p.green_s = get_or(j, "green_s", p.green_s);
  p.yellow_s = get_or(j, "yellow_s", p.yellow_s);
  p.red_s = get_or(j, "red_s", p.red_s);
  p.phase_offset_s = get_or(j, "phase_offset_s", p.phase_offset_s);
  if (!(p.green_s > 0 && p.yellow_s >= 0 && p.red_s >= 0)) throw ConfigError("signal: invalid durations");
  return p;
}

ObservationConfig parse_observation(const json& j) {
  check_keys(j, {"comm_range", "sentinel_headway"}, "observation");
  ObservationConfig c;
  c.comm_range = get_or(j, "comm_range", c.comm_range);
  c.sentinel_headway = get_or(j, "sentinel_headway", c.sentinel_headway);
  if (!(c.comm_range > 0 && c.sentinel_headway > 0)) throw ConfigError("observation: values must be > 0");
  return c;
}

RewardCoefficients parse_reward(const json& j, RewardCoefficients c) {
  check_keys(j, {"nu1", "nu2", "nu3", "nu4"}, "reward");
  c.nu1 = get_or(j, "nu1", c.nu1);
  c.nu2 = get_or(j, "nu2", c.nu2);
  c.nu3 = get_or(j, "nu3", c.nu3);
  c.nu4 = get_or(j, "nu4", c.nu4);
  if (c.nu1 < 0 || c.nu2 < 0 || c.nu3 < 0 || c.nu4 < 0) throw ConfigError("reward: coefficients must be >= 0");
  return c;
}

std::shared_ptr<const Policy> load_policy(const std::optional<fs::path>& path) {
  if (!path) throw ConfigError("controller 'policy' needs --checkpoint or a 'checkpoint' entry");
  if (!fs::exists(*path)) throw ConfigError(fmt::format("checkpoint {} does not exist", path->string()));
  return std::make_shared<const Policy>(load_checkpoint(*path));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  out << text;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError(fmt::format("output directory {} is not writable", dir.string()));
}

void write_sweep_outputs(const fs::path& out, const std::vector<SweepResult>& results, const SweepStats& stats) {
  json summary{{"executed_runs", stats.executed_runs}, {"reused_runs", stats.reused_runs}};
  json diffs = json::array();
  for (const auto& r : results) {
    write_text(out / fmt::format("sweep_{}.json", r.controller), json(r).dump(1) + "\n");
    for (auto m : {Metric::EmsTime, Metric::CavTime, Metric::Throughput}) {
      std::ostringstream csv;
      write_grid_csv(csv, r.grid(m));
      write_text(out / fmt::format("heatmap_{}_{}.csv", r.controller, to_string(m)), csv.str());
    }
  }
  // Every other controller against the model-based one (or the first listed).
  if (results.size() > 1) {
    std::size_t base = 0;
    for (std::size_t k = 0; k < results.size(); ++k) {
      if (results[k].controller == "model_based") base = k;
    }
    for (std::size_t k = 0; k < results.size(); ++k) {
      if (k == base) continue;
      for (auto m : {Metric::EmsTime, Metric::CavTime, Metric::Throughput}) {
        std::ostringstream csv;
        write_grid_csv(csv, percentage_diff_grid(results[k].grid(m), results[base].grid(m), m));
        write_text(out / fmt::format("diff_{}_vs_{}_{}.csv", results[k].controller, results[base].controller,
                                     to_string(m)),
                   csv.str());
      }
      diffs.push_back({{"a", results[k].controller}, {"b", results[base].controller}});
    }
  }
  summary["diff_grids"] = diffs;
  write_text(out / "summary.json", summary.dump(1) + "\n");
}

}  // namespace

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

RunConfig parse_run_config(const json& j, const CliFlags& flags) {
  check_keys(j, {"scenario", "controller", "w", "checkpoint", "seeds", "throughput_lanes", "observation", "signal"},
             "run config");
  if (!j.contains("scenario")) throw ConfigError("run config: missing 'scenario'");
  RunConfig c;
  c.scenario = parse_scenario(j.at("scenario"));
  c.controller.kind = parse_controller_kind(get_or<std::string>(j, "controller", "model_based"));
  c.controller.w = get_or(j, "w", 10.0);
  if (j.contains("checkpoint")) c.checkpoint = get_or<std::string>(j, "checkpoint", "");
  if (flags.checkpoint) c.checkpoint = flags.checkpoint;
  c.seeds = get_or(j, "seeds", std::vector<std::uint64_t>{});
  if (flags.seed) c.seeds = {*flags.seed};
  c.options.lanes = parse_throughput_lanes(get_or<std::string>(j, "throughput_lanes", "both"));
  if (j.contains("observation")) c.options.observation = parse_observation(j.at("observation"));
  if (j.contains("signal")) c.options.scenario.program = parse_signal(j.at("signal"));
  if (c.controller.kind == ControllerKind::Policy) c.controller.policy = load_policy(c.checkpoint);
  return c;
}

SweepConfig parse_sweep_config(const json& j, const CliFlags& flags) {
  check_keys(j,
             {"base", "x_a", "d", "controllers", "w", "checkpoint", "seeds", "workers", "throughput_lanes",
              "observation", "signal"},
             "sweep config");
  SweepConfig c;
  if (j.contains("base")) c.base = parse_scenario(j.at("base"));
  c.x_a = get_or(j, "x_a", default_x_a_axis(c.base.network));
  c.d = get_or(j, "d", default_d_axis(c.base.network));
  const double w = get_or(j, "w", 10.0);
  std::optional<fs::path> checkpoint;
  if (j.contains("checkpoint")) checkpoint = get_or<std::string>(j, "checkpoint", "");
  if (flags.checkpoint) checkpoint = flags.checkpoint;
  for (const auto& name : get_or(j, "controllers", std::vector<std::string>{"model_based", "oracle"})) {
    ControllerConfig cc;
    cc.kind = parse_controller_kind(name);
    cc.w = w;
    if (cc.kind == ControllerKind::Policy) cc.policy = load_policy(checkpoint);
    c.controllers.push_back(cc);
  }
  c.seeds = get_or(j, "seeds", std::vector<std::uint64_t>{c.base.seed});
  if (flags.seed) c.seeds = {*flags.seed};
  c.workers = get_or(j, "workers", 1);
  if (flags.workers) c.workers = *flags.workers;
  if (c.workers < 1) throw ConfigError("sweep config: workers must be >= 1");
  c.run.lanes = parse_throughput_lanes(get_or<std::string>(j, "throughput_lanes", "both"));
  if (j.contains("observation")) c.run.observation = parse_observation(j.at("observation"));
  if (j.contains("signal")) c.run.scenario.program = parse_signal(j.at("signal"));
  c.run.scenario.sim.record_rows = false;
  c.run.stop_when_measured = true;
  return c;
}

TrainCommandConfig parse_train_config(const json& j, const CliFlags& flags) {
  check_keys(j, {"training", "environment"}, "train config");
  TrainCommandConfig c;
  if (j.contains("training")) {
    try {
      c.training = j.at("training").get<TrainConfig>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("training: {}", e.what()));
    }
  }
  if (flags.seed) c.training.seed = *flags.seed;
  if (flags.workers) c.training.workers = *flags.workers;
  c.training.validate();

  auto& env = c.environment;
  if (j.contains("environment")) {
    const json& e = j.at("environment");
    check_keys(e, {"network", "x_a_range", "d_range", "inflow_vph", "reward", "prose_variant", "observation", "signal"},
               "environment");
    env.network = parse_network_kind(get_or<std::string>(e, "network", "OneIntersection"));
    env.coefficients = env.network == NetworkKind::OneIntersection ? RewardCoefficients::single_intersection()
                                                                    : RewardCoefficients::two_intersection();
    env.x_a_range = get_or(e, "x_a_range", env.x_a_range);
    env.d_range = get_or(e, "d_range", env.d_range);
    env.inflow_vph = get_or(e, "inflow_vph", env.inflow_vph);
    if (e.contains("reward")) env.coefficients = parse_reward(e.at("reward"), env.coefficients);
    env.prose_variant = get_or(e, "prose_variant", false);
    if (e.contains("observation")) env.observation = parse_observation(e.at("observation"));
    if (e.contains("signal")) env.scenario.program = parse_signal(e.at("signal"));
  }
  env.horizon = c.training.horizon;
  env.gamma = c.training.gamma;
  return c;
}

int cmd_run(const CliFlags& flags) {
  RunConfig cfg = parse_run_config(read_json_file(flags.config), flags);
  ensure_dir(flags.out);
  std::vector<std::uint64_t> seeds = cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.scenario.seed} : cfg.seeds;
  json metrics = json::array();
  for (auto seed : seeds) {
    ScenarioSpec spec = cfg.scenario;
    spec.seed = seed;
    if (cfg.controller.kind == ControllerKind::Oracle) {
      CellResult cell = run_cell(spec, cfg.controller, cfg.options);
      if (cell.status == CellStatus::Infeasible) throw InfeasibleScenario(cell.message);
      metrics.push_back({{"seed", seed}, {"controller", "oracle"}, {"ems_time", opt_json(cell.ems_time)},
                         {"cav_time", opt_json(cell.cav_time)}});
      continue;
    }
    auto controller = make_controller(cfg.controller);
    auto outcome = run_controlled_episode(spec, *controller, cfg.options);
    std::ostringstream episode, ts;
    write_episode_csv(episode, outcome.record);
    write_time_space_csv(ts, outcome.record);
    write_text(flags.out / fmt::format("episode_{}.csv", seed), episode.str());
    write_text(flags.out / fmt::format("time_space_{}.csv", seed), ts.str());
    json m{{"seed", seed},
           {"controller", to_string(cfg.controller.kind)},
           {"scenario", spec},
           {"ems_time", opt_json(outcome.ems_time)},
           {"cav_time", opt_json(outcome.cav_time)},
           {"lane_changes", outcome.record.lane_changes.size()}};
    if (outcome.throughput) {
      m["throughput"] = {{"q", outcome.throughput->q},
                         {"vehicles", outcome.throughput->vehicles},
                         {"headway_sum", outcome.throughput->headway_sum},
                         {"degenerate", outcome.throughput->degenerate},
                         {"window", {outcome.throughput->window_start, outcome.throughput->window_end}},
                         {"lanes", to_string(cfg.options.lanes)}};
    } else {
      m["throughput"] = nullptr;
    }
    if (auto* mb = dynamic_cast<ModelBasedController*>(controller.get())) m["branch"] = to_string(mb->branch());
    metrics.push_back(m);
  }
  write_text(flags.out / "metrics.json", metrics.dump(1) + "\n");
  return kExitOk;
}

int cmd_sweep(const CliFlags& flags) {
  SweepConfig cfg = parse_sweep_config(read_json_file(flags.config), flags);
  ensure_dir(flags.out);
  SweepStats stats;
  auto results = run_sweep(cfg, flags.out / "cells", &stats);
  spdlog::info("sweep: {} runs executed, {} reused", stats.executed_runs, stats.reused_runs);
  write_sweep_outputs(flags.out, results, stats);
  return kExitOk;
}

int cmd_train(const CliFlags& flags) {
  TrainCommandConfig cfg = parse_train_config(read_json_file(flags.config), flags);
  ensure_dir(flags.out);
  const CorridorEnvConfig env_cfg = cfg.environment;
  EnvFactory factory = [env_cfg] { return std::make_unique<CorridorEnv>(env_cfg); };
  std::ofstream curve_file(flags.out / "learning_curve.csv");
  if (!curve_file) throw ConfigError("cannot write learning curve");
  curve_file << "iteration,mean_return,ems_travel_time,cav_travel_time,episodes,eval_return\n";
  TrainHooks hooks;
  hooks.on_abort = [&](const Policy& p) { save_checkpoint(flags.out / "abort_checkpoint.json", p); };
  hooks.on_iteration = [&](const CurvePoint& p) {
    std::ostringstream row;
    write_learning_curve(row, {p});
    std::string text = row.str();
    curve_file << text.substr(text.find('\n') + 1) << std::flush;
  };
  TrainResult result = train(factory, cfg.training, hooks);
  save_checkpoint(flags.out / "checkpoint.json", result.policy);
  save_checkpoint(flags.out / "final_checkpoint.json", result.final_policy);
  json summary{{"training", cfg.training},
               {"best_eval_return", std::isfinite(result.best_eval_return) ? json(result.best_eval_return) : json(nullptr)},
               {"iterations", result.curve.size()}};
  write_text(flags.out / "train_summary.json", summary.dump(1) + "\n");
  return kExitOk;
}

int cmd_eval(const CliFlags& flags) {
  json j = read_json_file(flags.config);
  if (j.is_object()) j["controllers"] = json::array({"policy"});
  SweepConfig cfg = parse_sweep_config(j, flags);
  ensure_dir(flags.out);
  SweepStats stats;
  auto results = run_sweep(cfg, std::nullopt, &stats);
  write_sweep_outputs(flags.out, results, stats);
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  if (const char* level = std::getenv("CORRIDOR_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
  CLI::App app{"Emergency-vehicle corridor clearance: simulation, control, training"};
  app.require_subcommand(1);
  CliFlags flags;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string checkpoint;

  auto add_flags = [&](CLI::App* sub, bool needs_checkpoint) {
    sub->add_option("--config", flags.config, "JSON config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    auto* opt = sub->add_option("--checkpoint", checkpoint, "policy checkpoint");
    if (needs_checkpoint) opt->required();
  };
  auto* run = app.add_subcommand("run", "simulate one scenario");
  auto* sweep = app.add_subcommand("sweep", "run an (x_a, d) grid");
  auto* tr = app.add_subcommand("train", "train a policy");
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint over a grid");
  add_flags(run, false);
  add_flags(sweep, false);
  add_flags(tr, false);
  add_flags(ev, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  for (auto* sub : {run, sweep, tr, ev}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) flags.seed = seed;
    if (sub->count("--workers")) flags.workers = workers;
    if (sub->count("--checkpoint")) flags.checkpoint = fs::path(checkpoint);
  }

  try {
    if (run->parsed()) return cmd_run(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (tr->parsed()) return cmd_train(flags);
    return cmd_eval(flags);
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kExitUsage;
  } catch (const InfeasibleScenario& e) {
    spdlog::error("infeasible scenario: {}", e.what());
    return kExitInfeasible;
  } catch (const SimulationFault& e) {
    spdlog::error("simulation fault: {}", e.what());
    return kExitSimulationFault;
  } catch (const TrainingDivergence& e) {
    spdlog::error("training diverged: {}", e.what());
    return kExitDivergence;
  } catch (const DomainError& e) {
    spdlog::error("invalid input: {}", e.what());
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("config: {}", e.what());
    return kExitUsage;
  }
}

}  // namespace corridor

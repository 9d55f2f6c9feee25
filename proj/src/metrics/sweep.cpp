#include "corridor/metrics/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "corridor/error.hpp"

namespace corridor {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::ModelBased:
      return "model_based";
    case ControllerKind::Oracle:
      return "oracle";
    case ControllerKind::Policy:
      return "policy";
    case ControllerKind::IdmBaseline:
      return "idm_baseline";
  }
  return "?";
}

ControllerKind parse_controller_kind(std::string_view text) {
  if (text == "model_based") return ControllerKind::ModelBased;
  if (text == "oracle") return ControllerKind::Oracle;
  if (text == "policy") return ControllerKind::Policy;
  if (text == "idm_baseline") return ControllerKind::IdmBaseline;
  throw ConfigError(fmt::format("unknown controller '{}'", text));
}

std::unique_ptr<CavController> make_controller(const ControllerConfig& config) {
  switch (config.kind) {
    case ControllerKind::ModelBased:
      return std::make_unique<ModelBasedController>(config.w);
    case ControllerKind::IdmBaseline:
      return std::make_unique<IdmBaselineController>();
    case ControllerKind::Policy:
      if (!config.policy) throw ConfigError("controller 'policy' needs a checkpoint");
      return std::make_unique<PolicyController>(*config.policy);
    case ControllerKind::Oracle:
      break;
  }
  throw ConfigError("the oracle is analytic and has no simulated controller");
}

EpisodeOutcome run_controlled_episode(const ScenarioSpec& spec, CavController& controller, const RunOptions& options,
                                      const StepObserver& observer) {
  Simulation sim = make_simulation(spec, options.scenario);
  sim.start();
  controller.reset(ControllerContext{spec, sim.network()});
  const std::size_t k = sim.network().intersection_count() - 1;
  const auto cav = sim.cav_id();
  auto idm = [&](double desired) { return sim.idm_accel_for(*cav, desired); };

  for (int s = 0; s < spec.horizon_steps; ++s) {
    AccelCommand cmd{};
    bool commanded = false;
    if (cav && !sim.has_exited(*cav)) {
      Observation obs = observe(sim, options.observation);
      cmd = AccelCommand{*cav, controller.act(obs, idm)};
      commanded = true;
    }
    sim.step(commanded ? std::span<const AccelCommand>(&cmd, 1) : std::span<const AccelCommand>{});
    if (observer) observer(sim, controller);

    if (options.stop_when_measured) {
      const auto& rec = sim.record();
      auto t_ems = sim.ems_id() ? rec.crossing_time(*sim.ems_id(), k) : std::nullopt;
      bool cav_done = !cav || rec.crossing_time(*cav, k).has_value();
      if (t_ems && cav_done && sim.time() >= permissive_period_end(sim.program(), *t_ems, k)) break;
    }
  }

  EpisodeOutcome out;
  out.record = sim.take_record();
  out.ems_time = travel_time_ems(out.record);
  out.cav_time = travel_time_cav(out.record);
  out.throughput = throughput(out.record, options.lanes);
  return out;
}

std::string_view to_string(CellStatus status) {
  switch (status) {
    case CellStatus::Ok:
      return "ok";
    case CellStatus::Incomplete:
      return "incomplete";
    case CellStatus::Infeasible:
      return "infeasible";
    case CellStatus::Failed:
      return "failed";
  }
  return "?";
}

namespace {

CellStatus parse_cell_status(const std::string& s) {
  for (auto st : {CellStatus::Ok, CellStatus::Incomplete, CellStatus::Infeasible, CellStatus::Failed}) {
    if (to_string(st) == s) return st;
  }
  throw ConfigError(fmt::format("unknown cell status '{}'", s));
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> json_opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const CellResult& c) {
  j = nlohmann::json{{"i", c.i},
                     {"j", c.j},
                     {"x_a", c.x_a},
                     {"d", c.d},
                     {"seed", c.seed},
                     {"status", to_string(c.status)},
                     {"ems_time", opt_json(c.ems_time)},
                     {"cav_time", opt_json(c.cav_time)},
                     {"throughput", opt_json(c.throughput)},
                     {"throughput_degenerate", c.throughput_degenerate},
                     {"message", c.message}};
}

void from_json(const nlohmann::json& j, CellResult& c) {
  c.i = j.at("i").get<std::size_t>();
  c.j = j.at("j").get<std::size_t>();
  c.x_a = j.at("x_a").get<double>();
  c.d = j.at("d").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.status = parse_cell_status(j.at("status").get<std::string>());
  c.ems_time = json_opt(j, "ems_time");
  c.cav_time = json_opt(j, "cav_time");
  c.throughput = json_opt(j, "throughput");
  c.throughput_degenerate = j.value("throughput_degenerate", false);
  c.message = j.value("message", std::string());
}

Grid SweepResult::grid(Metric metric) const {
  Grid g = Grid::empty_like(x_a, d);
  std::vector<std::vector<int>> count(x_a.size(), std::vector<int>(d.size(), 0));
  std::vector<std::vector<double>> sum(x_a.size(), std::vector<double>(d.size(), 0.0));
  for (const auto& c : cells) {
    if (c.i >= x_a.size() || c.j >= d.size()) continue;
    if (c.status == CellStatus::Infeasible || c.status == CellStatus::Failed) continue;
    const std::optional<double>& v =
        metric == Metric::EmsTime ? c.ems_time : metric == Metric::CavTime ? c.cav_time : c.throughput;
    if (!v) continue;
    sum[c.i][c.j] += *v;
    ++count[c.i][c.j];
  }
  for (std::size_t i = 0; i < x_a.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (count[i][j] > 0) g.values[i][j] = sum[i][j] / count[i][j];
    }
  }
  return g;
}

void to_json(nlohmann::json& j, const SweepResult& r) {
  j = nlohmann::json{{"network", to_string(r.network)}, {"controller", r.controller}, {"x_a", r.x_a},
                     {"d", r.d},                         {"seeds", r.seeds},           {"cells", r.cells}};
}

void from_json(const nlohmann::json& j, SweepResult& r) {
  r.network = parse_network_kind(j.at("network").get<std::string>());
  r.controller = j.at("controller").get<std::string>();
  r.x_a = j.at("x_a").get<std::vector<double>>();
  r.d = j.at("d").get<std::vector<double>>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  r.cells = j.at("cells").get<std::vector<CellResult>>();
}

CellResult run_cell(const ScenarioSpec& spec, const ControllerConfig& controller, const RunOptions& options) {
  CellResult c;
  c.x_a = spec.x_a;
  c.d = spec.d;
  c.seed = spec.seed;
  try {
    if (controller.kind == ControllerKind::Oracle) {
      build_initial_state(spec, options.scenario);  // same feasibility as the simulated controllers
      auto net = CorridorNetwork::make(spec.network);
      ShockwaveParams<double> p{controller.w, net.speed_limits.regular, net.speed_limits.ems, spec.d, spec.x_a, net.z()};
      auto t = oracle_times(p, spec.network);
      c.ems_time = t.T_ev;
      c.cav_time = t.T_cav;
      c.status = CellStatus::Ok;
      return c;
    }
    auto ctrl = make_controller(controller);
    auto out = run_controlled_episode(spec, *ctrl, options);
    c.ems_time = out.ems_time;
    c.cav_time = out.cav_time;
    if (out.throughput) {
      c.throughput = out.throughput->q;
      c.throughput_degenerate = out.throughput->degenerate;
    }
    c.status = (c.ems_time && c.cav_time) ? CellStatus::Ok : CellStatus::Incomplete;
    if (c.status == CellStatus::Incomplete) c.message = "vehicle did not reach the final stop line within the horizon";
  } catch (const InfeasibleScenario& e) {
    c.status = CellStatus::Infeasible;
    c.message = e.what();
  } catch (const DomainError& e) {
    c.status = CellStatus::Infeasible;
    c.message = e.what();
  } catch (const SimulationFault& e) {
    c.status = CellStatus::Failed;
    c.message = e.what();
  }
  return c;
}

namespace {

struct Job {
  std::size_t controller = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t s = 0;
};

std::filesystem::path cell_file(const std::filesystem::path& dir, std::string_view controller, const Job& job,
                                std::uint64_t seed) {
  return dir / fmt::format("{}_{}_{}_{}.json", controller, job.i, job.j, seed);
}

nlohmann::json controller_tag(const ControllerConfig& c) {
  return {{"kind", to_string(c.kind)}, {"w", c.w}};
}

std::optional<CellResult> load_cell(const std::filesystem::path& file, const ScenarioSpec& spec,
                                    const nlohmann::json& tag) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  try {
    nlohmann::json j;
    in >> j;
    if (j.at("spec").get<ScenarioSpec>() != spec || j.at("controller") != tag) return std::nullopt;
    return j.at("result").get<CellResult>();
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable cell file {}: {}", file.string(), e.what());
    return std::nullopt;
  }
}

void store_cell(const std::filesystem::path& file, const ScenarioSpec& spec, const nlohmann::json& tag,
                const CellResult& c) {
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ConfigError(fmt::format("cannot write {}", tmp.string()));
    out << nlohmann::json{{"spec", spec}, {"controller", tag}, {"result", c}}.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace

std::vector<SweepResult> run_sweep(const SweepConfig& config, const std::optional<std::filesystem::path>& cell_dir,
                                   SweepStats* stats) {
  if (config.workers < 1) throw ConfigError("sweep: workers must be >= 1");
  if (config.seeds.empty()) throw ConfigError("sweep: need at least one seed");
  if (cell_dir) std::filesystem::create_directories(*cell_dir);

  std::vector<SweepResult> results;
  for (const auto& c : config.controllers) {
    SweepResult r;
    r.network = config.base.network;
    r.controller = std::string(to_string(c.kind));
    r.x_a = config.x_a;
    r.d = config.d;
    r.seeds = config.seeds;
    r.cells.resize(config.x_a.size() * config.d.size() * config.seeds.size());
    results.push_back(std::move(r));
  }
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < config.controllers.size(); ++c) {
    for (std::size_t i = 0; i < config.x_a.size(); ++i) {
      for (std::size_t j = 0; j < config.d.size(); ++j) {
        for (std::size_t s = 0; s < config.seeds.size(); ++s) jobs.push_back({c, i, j, s});
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> executed{0};
  std::atomic<std::size_t> reused{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    for (std::size_t n = next++; n < jobs.size(); n = next++) {
      const Job& job = jobs[n];
      try {
        ScenarioSpec spec = config.base;
        spec.x_a = config.x_a[job.i];
        spec.d = config.d[job.j];
        spec.seed = config.seeds[job.s];
        const auto& ctrl = config.controllers[job.controller];
        const auto tag = controller_tag(ctrl);
        std::optional<CellResult> cell;
        std::filesystem::path file;
        if (cell_dir) {
          file = cell_file(*cell_dir, to_string(ctrl.kind), job, spec.seed);
          cell = load_cell(file, spec, tag);
        }
        if (cell) {
          ++reused;
        } else {
          cell = run_cell(spec, ctrl, config.run);
          ++executed;
          if (cell_dir) store_cell(file, spec, tag, *cell);
        }
        cell->i = job.i;
        cell->j = job.j;
        const std::size_t idx = (job.i * config.d.size() + job.j) * config.seeds.size() + job.s;
        results[job.controller].cells[idx] = *cell;
        if (cell->status != CellStatus::Ok) {
          spdlog::warn("{} x_a={} d={} seed={}: {} {}", to_string(ctrl.kind), spec.x_a, spec.d, spec.seed,
                       to_string(cell->status), cell->message);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    }
  };

  const std::size_t n_threads = std::min<std::size_t>(config.workers, std::max<std::size_t>(1, jobs.size()));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  if (stats) {
    stats->executed_runs = executed;
    stats->reused_runs = reused;
  }
  return results;
}

}  // namespace corridor

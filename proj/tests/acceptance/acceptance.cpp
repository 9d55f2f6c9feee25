// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "corridor/control/controllers.hpp"
#include "corridor/control/shockwave.hpp"
#include "corridor/metrics/metrics.hpp"
#include "corridor/metrics/sweep.hpp"
#include "corridor/rl/corridor_env.hpp"
#include "corridor/rl/policy_gradient.hpp"
#include "corridor/rl/reward.hpp"
#include "corridor/rl/rollout.hpp"
#include "corridor/rl/train.hpp"
#include "corridor/scenario/scenario.hpp"

using namespace corridor;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& body) {
  auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++failures;
  std::printf("%s %d %s (%.2fs) %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), secs, v.detail.c_str());
  std::fflush(stdout);
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// 1. closed-form queue-clearance times against a direct evaluation
Verdict analytic_exactness() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    double w = 0.5 + 20.0 * u(rng), U = w + 20.0 * u(rng), V = U + 30.0 * u(rng);
    double d = 300.0 * u(rng), x_a = 300.0 * u(rng);
    auto t = analytic_times(ShockwaveParams<double>{w, U, V, d, x_a, 192.0});
    double x_L = d * (1 / w + 1 / U) / (1 / w + 2 / U - 1 / V);
    double t1 = x_L / w, t2 = d / w;
    double ts = t2 + (d - x_L) / U;
    double tev = ts + x_L / V, tpre = t1 + x_L / U, ta = x_a / w;
    double scale = std::max(1.0, std::abs(tev));
    for (double err : {std::abs(t.x_L - x_L) / std::max(1.0, x_L), std::abs(t.t_1 - t1) / scale,
                       std::abs(t.t_2 - t2) / scale, std::abs(t.t_s - ts) / scale, std::abs(t.t_ev - tev) / scale,
                       std::abs(t.t_pre - tpre) / scale, std::abs(t.t_a - ta) / std::max(1.0, ta),
                       std::abs(t.t_ev - t.t_pre) / scale}) {
      worst = std::max(worst, err);
    }
  }
  ShockwaveParams<double> p{10.0, 15.0, 35.0, 100.0, 0.0, 192.0};
  double xl = optimal_split(p), tev = analytic_times(p).t_ev;
  p.x_a = 50.0;
  double hold = cav_travel_time_single(p);
  p.x_a = 90.0;
  double go = cav_travel_time_single(p);
  bool worked = std::abs(xl - 81.395) < 1e-3 && std::abs(tev - 13.566) < 1e-3 && std::abs(hold - 18.333) < 1e-3 &&
                std::abs(go - 15.0) < 1e-3;
  return {worst < 1e-9 && worked,
          fmt::format("max rel err {:.3g}; x_L {:.4f} t_ev {:.4f} T_cav {:.4f}/{:.4f}", worst, xl, tev, hold, go)};
}

// 2. no-wait exception branch
Verdict no_wait_branch() {
  bool wait_ok = !no_wait_condition(175.0, 100.0, 10.0, 15.0, 50.0, 35.0).proceed;
  bool go_ok = no_wait_condition(175.0, 170.0, 10.0, 15.0, 100.0, 35.0).proceed;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int k = 0; k < 1000; ++k) {
    double w = 1.0 + 15.0 * u(rng), U = w + 15.0 * u(rng), V = U + 25.0 * u(rng);
    double z = 100.0 + 200.0 * u(rng), past = z * u(rng), d = 200.0 * u(rng);
    double remaining = z - past;
    bool direct = remaining / w + remaining / U <= d / w + d / V;
    if (no_wait_condition(z, past, w, U, d, V).proceed != direct) ++mismatches;
  }
  return {wait_ok && go_ok && mismatches == 0,
          fmt::format("wait example {}, proceed example {}, {} / 1000 mismatches", wait_ok ? "ok" : "wrong",
                      go_ok ? "ok" : "wrong", mismatches)};
}

// 3. composite reward
Verdict reward_table() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> speed(0.0, 35.0);
  int cases = 0, bad = 0;
  for (auto c : {RewardCoefficients{0.1, 0.9, 0.0, 1.0}, RewardCoefficients{1.0, 0.6, 1.0, 1.0}}) {
    for (double rel : {-80.0, -0.5, 0.0, 0.5, 80.0}) {
      for (bool same_lane : {false, true}) {
        for (bool present : {false, true}) {
          for (int k = 0; k < 100; ++k) {
            Observation o;
            o.p_cav = 120.0;
            o.l_cav = kLeftLane;
            o.v_cav = std::min(15.0, speed(rng));
            o.ems_in_range = present;
            o.p_ev = present ? o.p_cav - rel : o.p_cav;
            o.l_ev = present && !same_lane ? kRightLane : kLeftLane;
            o.v_ev = present ? speed(rng) : 0.0;
            double expected = o.v_cav;
            if (present && !same_lane) {
              expected = rel <= 0.0 ? c.nu1 * o.v_ev + c.nu2 * o.v_cav : c.nu3 * o.v_ev + c.nu4 * o.v_cav;
            }
            ++cases;
            if (std::abs(reward(o, c) - expected) > 1e-12) ++bad;
          }
        }
      }
    }
  }
  return {bad == 0, fmt::format("{} / {} mismatches", bad, cases)};
}

struct Trace {
  std::vector<double> values;
};

Trace simulate_random(const ScenarioSpec& spec, std::uint64_t seed, std::string& violation) {
  Simulation sim = make_simulation(spec);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cmd(-3.0, 3.0);
  Trace trace;
  const auto& net = sim.network();
  for (int s = 0; s < 600; ++s) {
    std::vector<AccelCommand> commands;
    if (auto id = sim.cav_id(); id && !sim.has_exited(*id)) commands.push_back({*id, cmd(rng)});
    sim.step(commands);
    auto vs = sim.vehicles();
    std::sort(vs.begin(), vs.end(), [](const Vehicle& a, const Vehicle& b) {
      return a.lane != b.lane ? a.lane < b.lane : a.position < b.position;
    });
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const auto& v = vs[i];
      if (v.speed < -1e-9 || v.speed > net.speed_limits.of(v.cls) + 1e-9) {
        violation = fmt::format("speed {} of vehicle {} at step {}", v.speed, v.id, s);
      }
      if (std::abs(v.accel) > 3.0 + 1e-9) violation = fmt::format("accel {} of vehicle {}", v.accel, v.id);
      if (i + 1 < vs.size() && vs[i + 1].lane == v.lane && vs[i + 1].rear() - v.position < -1e-9) {
        violation = fmt::format("overlap between {} and {} at step {}", v.id, vs[i + 1].id, s);
      }
      trace.values.push_back(v.position);
      trace.values.push_back(v.speed);
    }
    if (!violation.empty()) break;
  }
  const auto& rec = sim.record();
  double cycle = rec.program.cycle();
  long period = std::lround(cycle / rec.dt);
  for (std::size_t k = 0; k < rec.intersection_count && violation.empty(); ++k) {
    for (long s = 0; s + period < static_cast<long>(rec.signals.size()); ++s) {
      if (rec.signals[s][k] != rec.signals[s + period][k]) {
        violation = fmt::format("signal {} not periodic at step {}", k, s);
        break;
      }
    }
  }
  return trace;
}

// 4. simulator invariants
Verdict simulator_invariants() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int run = 0, skipped = 0;
  while (run < 100) {
    ScenarioSpec spec;
    spec.network = u(rng) < 0.5 ? NetworkKind::OneIntersection : NetworkKind::TwoIntersection;
    spec.x_a = spec.network == NetworkKind::TwoIntersection && u(rng) < 0.3 ? -191.0 + 40.0 * u(rng) : 1.0 + 60.0 * u(rng);
    spec.d = 1.0 + 60.0 * u(rng);
    spec.inflow_vph = 500.0 + 1500.0 * u(rng);
    spec.seed = rng();
    std::uint64_t cmd_seed = rng();
    std::string violation, again;
    Trace a, b;
    try {
      a = simulate_random(spec, cmd_seed, violation);
    } catch (const InfeasibleScenario&) {
      ++skipped;
      continue;
    }
    if (!violation.empty()) return {false, fmt::format("scenario ({}, {}): {}", spec.x_a, spec.d, violation)};
    b = simulate_random(spec, cmd_seed, again);
    if (a.values != b.values) return {false, fmt::format("non-deterministic rerun of ({}, {})", spec.x_a, spec.d)};
    ++run;
  }
  return {true, fmt::format("100 scenarios x 600 steps clean ({} infeasible draws skipped)", skipped)};
}

// 5. policy-gradient estimator against central differences
Verdict gradient_check() {
  std::mt19937_64 rng(5);
  auto policy = GaussianPolicy<double>::make(9, {4, 4}, rng, std::log(0.5), ActionBounds{});
  // randomize the output layer so the check is not degenerate
  Eigen::VectorXd theta = policy.parameters();
  std::normal_distribution<double> n(0.0, 0.3);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] += n(rng);
  policy.set_parameters(theta);
  std::vector<Trajectory<double>> batch;
  for (int e = 0; e < 3; ++e) {
    Trajectory<double> tr;
    const int T = 7;
    tr.observations = Eigen::MatrixXd::Random(9, T);
    tr.pre_squash.resize(T);
    tr.actions.resize(T);
    tr.log_probs.resize(T);
    tr.rewards = Eigen::VectorXd::Random(T);
    for (int t = 0; t < T; ++t) {
      auto s = policy.sample(tr.observations.col(t), rng);
      tr.pre_squash[t] = s.pre_squash;
      tr.actions[t] = s.action;
      tr.log_probs[t] = s.log_prob;
    }
    batch.push_back(std::move(tr));
  }
  const double gamma = 0.97, h = 1e-5;
  Eigen::VectorXd g = vpg_gradient(policy, batch, gamma);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    auto plus = policy, minus = policy;
    Eigen::VectorXd tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    plus.set_parameters(tp);
    minus.set_parameters(tm);
    double fd = (vpg_surrogate(plus, batch, gamma) - vpg_surrogate(minus, batch, gamma)) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max(1e-3, std::abs(fd) + std::abs(g[i])));
  }
  return {worst < 1e-4, fmt::format("{} parameters, max rel err {:.3g}", theta.size(), worst)};
}

CorridorEnvConfig single_env() {
  CorridorEnvConfig cfg;
  cfg.network = NetworkKind::OneIntersection;
  cfg.scenario.sim.record_rows = false;
  return cfg;
}

// 6. desk-scale learning
Verdict desk_scale_learning() {
  auto env_cfg = single_env();
  EnvFactory factory = [env_cfg] { return std::make_unique<CorridorEnv>(env_cfg); };
  TrainConfig cfg;
  cfg.algorithm = Algorithm::Ppo;
  cfg.episodes = 2000;
  cfg.workers = workers();
  cfg.seed = 2024;
  auto result = train(factory, cfg);

  const int n = 100;
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n; ++i) seeds.push_back(episode_seed(0xACCE97, i));
  auto trained = collect(factory, result.policy, seeds, true, cfg.workers);
  std::vector<double> random_returns;
  for (int i = 0; i < n; ++i) {
    CorridorEnv env(env_cfg);
    env.reset(seeds[i]);
    std::mt19937_64 rng(seeds[i] ^ 0x5A5A);
    std::uniform_real_distribution<double> a(-3.0, 3.0);
    double total = 0.0;
    for (int t = 0; t < env.horizon(); ++t) {
      auto s = env.step(a(rng));
      total += s.reward;
      if (s.done) break;
    }
    random_returns.push_back(total);
  }
  double trained_mean = 0.0;
  for (const auto& e : trained) trained_mean += e.total_return / n;
  double rmean = 0.0, rvar = 0.0;
  for (double r : random_returns) rmean += r / n;
  for (double r : random_returns) rvar += (r - rmean) * (r - rmean) / (n - 1);
  double upper = rmean + 1.96 * std::sqrt(rvar / n);

  auto shared = std::make_shared<const Policy>(result.policy);
  SweepConfig sweep;
  sweep.x_a = {1.0, 12.25, 23.5, 34.75, 46.0};
  sweep.d = {1.0, 12.25, 23.5, 34.75, 46.0};
  sweep.controllers = {ControllerConfig{ControllerKind::Policy, 10.0, shared},
                       ControllerConfig{ControllerKind::IdmBaseline}};
  sweep.workers = cfg.workers;
  sweep.run.scenario.sim.record_rows = false;
  auto grids = run_sweep(sweep);
  auto mean_ev = [](const SweepResult& r) {
    double s = 0.0;
    int k = 0;
    for (const auto& c : r.cells) {
      if (c.ems_time) {
        s += *c.ems_time;
        ++k;
      }
    }
    return std::pair{k ? s / k : NAN, k};
  };
  auto [policy_ev, policy_n] = mean_ev(grids[0]);
  auto [idm_ev, idm_n] = mean_ev(grids[1]);
  bool pass = trained_mean > upper && policy_n == idm_n && policy_n > 0 && policy_ev <= idm_ev + 1e-9;
  return {pass, fmt::format("return {:.2f} vs random upper CI {:.2f} (mean {:.2f}); T_ev {:.3f} vs IDM {:.3f} over {} cells",
                            trained_mean, upper, rmean, policy_ev, idm_ev, policy_n)};
}

struct TsRow {
  long id;
  double t;
  double position;
  std::string cls;
};

std::vector<TsRow> parse_time_space(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<TsRow> rows;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string f[5];
    for (auto& s : f) std::getline(ls, s, ',');
    rows.push_back({std::stol(f[0]), std::stod(f[1]), std::stod(f[2]), f[4]});
  }
  return rows;
}

std::string time_space_of(const ScenarioSpec& spec, ModelBasedController::Branch& branch) {
  ModelBasedController controller;
  auto outcome = run_controlled_episode(spec, controller);
  branch = controller.branch();
  std::ostringstream out;
  write_time_space_csv(out, outcome.record);
  return out.str();
}

// 7. behaviour classes of the model-based controller
Verdict behaviour_classes() {
  auto net2 = CorridorNetwork::make(NetworkKind::TwoIntersection);
  ModelBasedController::Branch b1{}, b2{};
  auto nowait = parse_time_space(time_space_of({NetworkKind::TwoIntersection, -191.0, 8.5}, b1));
  auto hold = parse_time_space(time_space_of({NetworkKind::OneIntersection, 1.0, 16.0}, b2));

  auto crossing = [](const std::vector<TsRow>& rows, const std::string& cls, double line) {
    for (const auto& r : rows) {
      if (r.cls == cls && r.position >= line) return r.t;
    }
    return std::numeric_limits<double>::infinity();
  };
  // no-wait: the CAV is never overtaken and reaches the last stop line first
  double final_line = net2.final_stop_line();
  double cav_cross = crossing(nowait, "cav", final_line);
  double ems_cross = crossing(nowait, "ems", final_line);
  bool nowait_ok = b1 == ModelBasedController::Branch::NoWait && cav_cross < ems_cross;

  // hold: the CAV stands still on its left-lane slot while the EMS closes in,
  // and the EMS crosses the stop line before it
  auto net1 = CorridorNetwork::make(NetworkKind::OneIntersection);
  double start = NAN, still_until = 0.0;
  for (const auto& r : hold) {
    if (r.cls != "cav") continue;
    if (std::isnan(start)) start = r.position;
    if (std::abs(r.position - start) < 1e-9) still_until = r.t;
    else break;
  }
  double hold_cav = crossing(hold, "cav", net1.stop_line(0));
  double hold_ems = crossing(hold, "ems", net1.stop_line(0));
  // a plain queue discharge would start the CAV 1 m from the line at once
  bool hold_ok = b2 == ModelBasedController::Branch::Hold && still_until >= 2.0 && hold_ems < hold_cav;
  return {nowait_ok && hold_ok,
          fmt::format("(-191, 8.5): branch {}, CAV/EMS at last line {:.1f}/{:.1f}s; (1, 16): branch {}, stationary "
                      "{:.1f}s, EMS/CAV at line {:.1f}/{:.1f}s",
                      to_string(b1), cav_cross, ems_cross, to_string(b2), still_until, hold_ems, hold_cav)};
}

// 8. oracle lower-bounds the simulated EMS travel time
Verdict oracle_relation() {
  int feasible = 0, ok = 0;
  std::vector<std::string> violations;
  for (auto kind : {NetworkKind::OneIntersection, NetworkKind::TwoIntersection}) {
    SweepConfig cfg;
    cfg.base.network = kind;
    cfg.x_a = default_x_a_axis(kind);
    cfg.d = default_d_axis(kind);
    cfg.controllers = {ControllerConfig{ControllerKind::ModelBased}, ControllerConfig{ControllerKind::Oracle}};
    cfg.workers = workers();
    cfg.run.scenario.sim.record_rows = false;
    cfg.run.stop_when_measured = true;
    auto r = run_sweep(cfg);
    for (std::size_t c = 0; c < r[0].cells.size(); ++c) {
      const auto& sim = r[0].cells[c];
      const auto& oracle = r[1].cells[c];
      if (!sim.ems_time || !oracle.ems_time) continue;
      ++feasible;
      if (*oracle.ems_time <= *sim.ems_time + 1e-9) {
        ++ok;
      } else {
        violations.push_back(fmt::format("{}({}, {}): oracle {:.3f} > sim {:.3f}", to_string(kind), sim.x_a, sim.d,
                                         *oracle.ems_time, *sim.ems_time));
      }
    }
  }
  for (const auto& v : violations) std::printf("  violation %s\n", v.c_str());
  bool pass = feasible > 0 && ok >= 0.95 * feasible;
  return {pass, fmt::format("{} / {} feasible cells hold", ok, feasible)};
}

}  // namespace

int main() {
  report(1, "analytic_exactness", analytic_exactness);
  report(2, "no_wait_branch", no_wait_branch);
  report(3, "reward_exactness", reward_table);
  report(4, "simulator_invariants", simulator_invariants);
  report(5, "gradient_check", gradient_check);
  report(6, "desk_scale_learning", desk_scale_learning);
  report(7, "behaviour_classes", behaviour_classes);
  report(8, "oracle_relation", oracle_relation);
  return failures == 0 ? 0 : 1;
}

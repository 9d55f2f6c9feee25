#include "corridor/rl/train.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "corridor/error.hpp"

namespace corridor {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("training: gamma must lie in (0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("training: learning_rate must be > 0");
  if (horizon <= 0) throw ConfigError("training: horizon must be > 0");
  if (episodes < 0) throw ConfigError("training: episodes must be >= 0");
  if (workers < 1) throw ConfigError("training: workers must be >= 1");
  if (!(clip_ratio > 0.0)) throw ConfigError("training: clip_ratio must be > 0");
  if (episodes_per_iteration < 1) throw ConfigError("training: episodes_per_iteration must be >= 1");
  if (ppo_epochs < 1) throw ConfigError("training: ppo_epochs must be >= 1");
  if (eval_every < 1 || eval_episodes < 1) throw ConfigError("training: eval_every/eval_episodes must be >= 1");
  if (hidden.empty()) throw ConfigError("training: need at least one hidden layer");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("training: hidden sizes must be >= 1");
  }
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
  j = nlohmann::json{{"algorithm", cfg.algorithm == Algorithm::Ppo ? "ppo" : "vpg"},
                     {"gamma", cfg.gamma},
                     {"learning_rate", cfg.learning_rate},
                     {"horizon", cfg.horizon},
                     {"episodes", cfg.episodes},
                     {"workers", cfg.workers},
                     {"clip_ratio", cfg.clip_ratio},
                     {"episodes_per_iteration", cfg.episodes_per_iteration},
                     {"ppo_epochs", cfg.ppo_epochs},
                     {"eval_every", cfg.eval_every},
                     {"eval_episodes", cfg.eval_episodes},
                     {"hidden", cfg.hidden},
                     {"initial_log_std", cfg.initial_log_std},
                     {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
  static const std::set<std::string> known{"algorithm",  "gamma",         "learning_rate", "horizon",
                                           "episodes",   "workers",       "clip_ratio",    "episodes_per_iteration",
                                           "ppo_epochs", "eval_every",    "eval_episodes", "hidden",
                                           "initial_log_std", "seed"};
  if (!j.is_object()) throw ConfigError("training: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError(fmt::format("training: unknown key '{}'", key));
  }
  TrainConfig d;
  std::string algo = j.value("algorithm", std::string("ppo"));
  if (algo == "ppo") {
    cfg.algorithm = Algorithm::Ppo;
  } else if (algo == "vpg") {
    cfg.algorithm = Algorithm::Vpg;
  } else {
    throw ConfigError(fmt::format("training: unknown algorithm '{}'", algo));
  }
  cfg.gamma = j.value("gamma", d.gamma);
  cfg.learning_rate = j.value("learning_rate", d.learning_rate);
  cfg.horizon = j.value("horizon", d.horizon);
  cfg.episodes = j.value("episodes", d.episodes);
  cfg.workers = j.value("workers", d.workers);
  cfg.clip_ratio = j.value("clip_ratio", d.clip_ratio);
  cfg.episodes_per_iteration = j.value("episodes_per_iteration", d.episodes_per_iteration);
  cfg.ppo_epochs = j.value("ppo_epochs", d.ppo_epochs);
  cfg.eval_every = j.value("eval_every", d.eval_every);
  cfg.eval_episodes = j.value("eval_episodes", d.eval_episodes);
  cfg.hidden = j.value("hidden", d.hidden);
  cfg.initial_log_std = j.value("initial_log_std", d.initial_log_std);
  cfg.seed = j.value("seed", d.seed);
}

double evaluate(const EnvFactory& factory, const Policy& policy, const std::vector<std::uint64_t>& seeds,
                int workers) {
  if (seeds.empty()) return std::numeric_limits<double>::quiet_NaN();
  auto eps = collect(factory, policy, seeds, true, workers);
  double sum = 0.0;
  for (const auto& e : eps) sum += e.total_return;
  return sum / static_cast<double>(eps.size());
}

namespace {

std::optional<double> mean_of(const std::vector<Episode>& eps, std::optional<double> EpisodeInfo::*field) {
  double sum = 0.0;
  int n = 0;
  for (const auto& e : eps) {
    if (auto v = e.info.*field) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

TrainResult train(const EnvFactory& factory, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  int obs_dim = 0;
  ActionBounds bounds;
  {
    auto probe = factory();
    obs_dim = probe->observation_dim();
    bounds = probe->action_bounds();
  }
  std::mt19937_64 init_rng(episode_seed(cfg.seed, 0x1417));
  Policy policy = Policy::make(obs_dim, cfg.hidden, init_rng, cfg.initial_log_std, bounds);

  TrainResult result{policy, policy, {}, std::numeric_limits<double>::quiet_NaN()};
  if (cfg.episodes == 0) return result;

  std::vector<std::uint64_t> eval_seeds;
  for (int i = 0; i < cfg.eval_episodes; ++i) eval_seeds.push_back(episode_seed(cfg.seed ^ 0xE7A1E7A1ULL, i));
  result.best_eval_return = evaluate(factory, policy, eval_seeds, cfg.workers);

  Adam<double> adam(cfg.learning_rate);
  const int iterations = (cfg.episodes + cfg.episodes_per_iteration - 1) / cfg.episodes_per_iteration;
  int done_episodes = 0;
  for (int it = 0; it < iterations; ++it) {
    const int n = std::min(cfg.episodes_per_iteration, cfg.episodes - done_episodes);
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < n; ++k) seeds.push_back(episode_seed(cfg.seed, done_episodes + k));
    auto eps = collect(factory, policy, seeds, false, cfg.workers);
    done_episodes += n;

    CurvePoint point;
    point.iteration = it;
    point.episodes = done_episodes;
    std::vector<Trajectory<double>> trajs;
    double sum = 0.0;
    for (auto& e : eps) {
      sum += e.total_return;
      trajs.push_back(std::move(e.trajectory));
    }
    point.mean_return = sum / n;
    point.ems_travel_time = mean_of(eps, &EpisodeInfo::ems_travel_time);
    point.cav_travel_time = mean_of(eps, &EpisodeInfo::cav_travel_time);

    const Policy before = policy;
    try {
      if (!std::isfinite(point.mean_return)) {
        throw TrainingDivergence(fmt::format("iteration {}: non-finite mean return", it));
      }
      if (cfg.algorithm == Algorithm::Vpg) {
        vpg_update(policy, trajs, cfg.gamma, cfg.learning_rate);
      } else {
        auto batch = make_ppo_batch(trajs, cfg.gamma);
        ppo_update(policy, adam, batch, cfg.clip_ratio, cfg.ppo_epochs);
      }
    } catch (const TrainingDivergence& e) {
      spdlog::error("training diverged: {}", e.what());
      if (hooks.on_abort) hooks.on_abort(before);
      throw;
    }

    if ((it + 1) % cfg.eval_every == 0 || it + 1 == iterations) {
      double eval = evaluate(factory, policy, eval_seeds, cfg.workers);
      point.eval_return = eval;
      if (eval > result.best_eval_return) {
        result.best_eval_return = eval;
        result.policy = policy;
      }
      spdlog::info("iter {} episodes {} return {:.2f} eval {:.2f} (best {:.2f})", it, done_episodes,
                   point.mean_return, eval, result.best_eval_return);
    } else {
      spdlog::debug("iter {} episodes {} return {:.2f}", it, done_episodes, point.mean_return);
    }
    if (hooks.on_iteration) hooks.on_iteration(point);
    result.curve.push_back(point);
  }
  result.final_policy = policy;
  return result;
}

void write_learning_curve(std::ostream& out, const std::vector<CurvePoint>& curve) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  out << "iteration,mean_return,ems_travel_time,cav_travel_time,episodes,eval_return\n";
  for (const auto& p : curve) {
    out << fmt::format("{},{},{},{},{},{}\n", p.iteration, p.mean_return, opt(p.ems_travel_time),
                       opt(p.cav_travel_time), p.episodes, opt(p.eval_return));
  }
}

}  // namespace corridor

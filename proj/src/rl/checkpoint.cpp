#include "corridor/rl/checkpoint.hpp"

#include <fstream>

#include <fmt/format.h>

#include "corridor/error.hpp"

namespace corridor {

nlohmann::json policy_to_json(const Policy& policy) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : policy.net().layers()) {
    std::vector<double> w;
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"weight", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return {{"format", "corridor-policy"},
          {"version", kCheckpointVersion},
          {"activation", "tanh"},
          {"log_std", policy.log_std()},
          {"action_bounds", {policy.bounds().a_min, policy.bounds().a_max}},
          {"layers", layers}};
}

Policy policy_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "corridor-policy") throw ConfigError("checkpoint: wrong format tag");
    int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ConfigError(fmt::format("checkpoint: unsupported version {}", version));
    }
    std::vector<Mlp<double>::Layer> layers;
    Eigen::Index prev_out = -1;
    for (const auto& lj : j.at("layers")) {
      auto rows = lj.at("rows").get<Eigen::Index>();
      auto cols = lj.at("cols").get<Eigen::Index>();
      auto w = lj.at("weight").get<std::vector<double>>();
      auto b = lj.at("bias").get<std::vector<double>>();
      if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(b.size()) != rows || (prev_out >= 0 && prev_out != cols)) {
        throw ConfigError("checkpoint: inconsistent layer shapes");
      }
      Mlp<double>::Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = w[r * cols + c];
        layer.bias(r) = b[r];
      }
      prev_out = rows;
      layers.push_back(std::move(layer));
    }
    if (layers.empty() || prev_out != 1) throw ConfigError("checkpoint: policy must have a scalar output");
    auto bounds = j.at("action_bounds").get<std::vector<double>>();
    if (bounds.size() != 2) throw ConfigError("checkpoint: action_bounds needs two values");
    return Policy(Mlp<double>(std::move(layers)), j.at("log_std").get<double>(), ActionBounds{bounds[0], bounds[1]});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("checkpoint: {}", e.what()));
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("checkpoint: {}", e.what()));
  }
}

void save_checkpoint(const std::filesystem::path& path, const Policy& policy) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write checkpoint {}", path.string()));
  out << policy_to_json(policy).dump(1) << '\n';
}

Policy load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read checkpoint {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("checkpoint {}: {}", path.string(), e.what()));
  }
  return policy_from_json(j);
}

}  // namespace corridor

#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "corridor/rl/rollout.hpp"

namespace corridor {

inline constexpr int kCheckpointVersion = 1;

/// Versioned JSON: a header with layer shapes, then row-major weights.
nlohmann::json policy_to_json(const Policy& policy);
/// Throws ConfigError on a malformed or mismatched document.
Policy policy_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Policy& policy);
Policy load_checkpoint(const std::filesystem::path& path);

}  // namespace corridor

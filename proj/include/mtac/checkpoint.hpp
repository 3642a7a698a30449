#pragma once
#include <filesystem>

#include "mtac/net.hpp"
#include "mtac/norm.hpp"
#include "mtac/variant.hpp"

namespace mtac {

// Flat text format: named parameter arrays with shapes, row-major decimal
// values, the version counter and per-task (mu, nu) pairs. sigma is always
// recomputed from the moments, never stored.
struct Checkpoint {
  AgentVariant variant = AgentVariant::popart;
  Network net;
  TaskStatsVector stats;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mtac

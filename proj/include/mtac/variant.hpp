#pragma once
#include <string>

namespace mtac {

// popart: per-task heads with live normalization statistics.
// multihead: per-task heads, statistics frozen at (mu=0, sigma=1).
// baseline: one shared head, no normalization.
enum class AgentVariant { popart, multihead, baseline };

struct VariantTraits {
  int value_heads = 1;
  bool normalization = false;
};

VariantTraits make_agent_config(AgentVariant variant, int task_count);

std::string variant_to_string(AgentVariant v);
AgentVariant variant_from_string(const std::string& s);
inline constexpr const char* kVariantNames = "popart, multihead, baseline";

}  // namespace mtac

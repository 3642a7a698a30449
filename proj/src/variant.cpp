#include "mtac/variant.hpp"

#include "mtac/errors.hpp"

namespace mtac {

VariantTraits make_agent_config(AgentVariant variant, int task_count) {
  switch (variant) {
    case AgentVariant::popart: return {task_count, true};
    case AgentVariant::multihead: return {task_count, false};
    case AgentVariant::baseline: return {1, false};
  }
  return {1, false};
}

std::string variant_to_string(AgentVariant v) {
  switch (v) {
    case AgentVariant::popart: return "popart";
    case AgentVariant::multihead: return "multihead";
    case AgentVariant::baseline: return "baseline";
  }
  return "?";
}

AgentVariant variant_from_string(const std::string& s) {
  if (s == "popart") return AgentVariant::popart;
  if (s == "multihead") return AgentVariant::multihead;
  if (s == "baseline") return AgentVariant::baseline;
  throw ValidationError("unknown variant '" + s + "' (valid: " + kVariantNames + ")");
}

}  // namespace mtac

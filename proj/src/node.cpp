#include "cliquelab/node.hpp"

#include <algorithm>

namespace cliquelab {

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::undecided: return "undecided";
    case Decision::leader: return "leader";
    case Decision::non_leader: return "non-leader";
  }
  return "unknown";
}

int leader_count(std::span<const Decision> decisions) {
  return static_cast<int>(std::count(decisions.begin(), decisions.end(), Decision::leader));
}

bool decided_all(std::span<const Decision> decisions) {
  return std::none_of(decisions.begin(), decisions.end(),
                      [](Decision d) { return d == Decision::undecided; });
}

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::wake: return "wake";
    case TraceKind::send: return "send";
    case TraceKind::deliver: return "deliver";
    case TraceKind::decide: return "decide";
  }
  return "unknown";
}

}  // namespace cliquelab

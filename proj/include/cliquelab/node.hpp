#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "cliquelab/errors.hpp"
#include "cliquelab/net_model.hpp"

namespace cliquelab {

enum class Decision : std::uint8_t { undecided, leader, non_leader };

std::string_view to_string(Decision d);

enum class TraceKind : std::uint8_t { wake, send, deliver, decide };

std::string_view to_string(TraceKind kind);

enum class WakeCause : std::uint8_t { adversary, message };

// Everything a node may know at start-up in the clean network model.
struct NodeContext {
  Identity id;
  int n = 0;
  std::uint64_t tape_seed = 0;  // derived from (run seed, node index) only
};

// Irrevocable leader/non-leader output shared by sync and async nodes.
class DecisionState {
 public:
  virtual ~DecisionState() = default;

  Decision decision() const { return decision_; }
  bool halted() const { return halted_; }

 protected:
  // Re-deciding the same value is a no-op; changing it is a ProtocolFault.
  void decide(Decision d) {
    if (decision_ != Decision::undecided && d != decision_) {
      throw ProtocolFault("decision revoked");
    }
    decision_ = d;
  }
  void halt() { halted_ = true; }

  // Used by wrappers that mirror an inner node.
  void mirror(const DecisionState& inner) {
    if (inner.decision_ != Decision::undecided) decide(inner.decision_);
    if (inner.halted_) halted_ = true;
  }

 private:
  Decision decision_ = Decision::undecided;
  bool halted_ = false;
};

int leader_count(std::span<const Decision> decisions);
bool decided_all(std::span<const Decision> decisions);

}  // namespace cliquelab

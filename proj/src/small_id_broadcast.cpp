#include <algorithm>

#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"

namespace cliquelab {

namespace {

class SmallIdNode final : public SyncNode {
 public:
  SmallIdNode(const NodeContext& ctx, int d, int g) : id_(ctx.id), n_(ctx.n) {
    block_ = static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(g);
    const std::uint64_t universe = static_cast<std::uint64_t>(ctx.n) * static_cast<std::uint64_t>(g);
    if (d > ctx.n) throw ConfigError("small_id_broadcast: d must not exceed n");
    if (id_.value < 1 || id_.value > universe) {
      throw ConfigError("small_id_broadcast: identity " + std::to_string(id_.value) + " outside [1, " +
                        std::to_string(universe) + "]");
    }
  }

  std::vector<PortMessage> on_send(int round) override {
    const auto r = static_cast<std::uint64_t>(round);
    broadcasting_ = id_.value > (r - 1) * block_ && id_.value <= r * block_;
    std::vector<PortMessage> out;
    if (broadcasting_) {
      for (Port p = 1; p < n_; ++p) out.push_back({p, {MsgKind::id_broadcast, id_.value}});
    }
    return out;
  }

  void on_receive(int, std::span<const PortMessage> inbox) override {
    std::uint64_t smallest = broadcasting_ ? id_.value : 0;
    for (const auto& m : inbox) {
      if (m.payload.kind != MsgKind::id_broadcast) continue;
      if (smallest == 0 || m.payload.value < smallest) smallest = m.payload.value;
    }
    if (smallest == 0) return;
    decide(smallest == id_.value ? Decision::leader : Decision::non_leader);
    halt();
  }

 private:
  Identity id_;
  int n_;
  std::uint64_t block_ = 1;
  bool broadcasting_ = false;
};

class SmallIdBroadcast final : public SyncProtocol {
 public:
  SmallIdBroadcast(int d, int g) : d_(d), g_(g) {}
  std::string name() const override {
    return "small_id(d=" + std::to_string(d_) + ",g=" + std::to_string(g_) + ")";
  }
  std::unique_ptr<SyncNode> make_node(const NodeContext& ctx) const override {
    return std::make_unique<SmallIdNode>(ctx, d_, g_);
  }

 private:
  int d_;
  int g_;
};

}  // namespace

SyncProtocolPtr small_id_broadcast(int d, int g) {
  if (d < 1) throw ConfigError("small_id_broadcast: d must be positive");
  if (g < 1) throw ConfigError("small_id_broadcast: g must be positive");
  return std::make_shared<SmallIdBroadcast>(d, g);
}

}  // namespace cliquelab

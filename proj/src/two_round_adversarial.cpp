#include <algorithm>
#include <cmath>

#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"
#include "sampling.hpp"

namespace cliquelab {

namespace {

class TwoRoundNode final : public SyncNode {
 public:
  TwoRoundNode(const NodeContext& ctx, double epsilon) : n_(ctx.n), rng_(ctx.tape_seed), fanout_(ceil_sqrt(ctx.n)) {
    candidacy_ = std::min(1.0, std::log(1.0 / epsilon) / static_cast<double>(fanout_));
  }

  void on_wake(int round, WakeCause cause) override {
    by_adversary_ = round == 1 && cause == WakeCause::adversary;
  }

  std::vector<PortMessage> on_send(int round) override {
    std::vector<PortMessage> out;
    if (round == 1 && by_adversary_) {
      for (Port p : detail::sample_ports(rng_, n_, fanout_)) out.push_back({p, {MsgKind::wake, 0}});
    } else if (round == 2) {
      // Eligibility comes from receiving a round-1 message, whoever woke us.
      if (heard_round1_ && detail::coin(rng_, candidacy_)) {
        candidate_ = true;
        rank_ = std::uniform_int_distribution<std::uint64_t>(1, rank_upper_bound(n_))(rng_);
        for (Port p = 1; p < n_; ++p) out.push_back({p, {MsgKind::compete, rank_}});
      } else {
        decide(Decision::non_leader);
      }
    }
    return out;
  }

  void on_receive(int round, std::span<const PortMessage> inbox) override {
    if (round == 1) {
      heard_round1_ = !inbox.empty();
      return;
    }
    bool highest = candidate_;
    for (const auto& m : inbox) {
      if (m.payload.kind == MsgKind::compete && m.payload.value >= rank_) highest = false;
    }
    decide(highest ? Decision::leader : Decision::non_leader);
    halt();
  }

 private:
  int n_;
  Rng rng_;
  int fanout_;
  double candidacy_ = 0.0;
  bool by_adversary_ = false;
  bool heard_round1_ = false;
  bool candidate_ = false;
  std::uint64_t rank_ = 0;
};

class TwoRoundAdversarial final : public SyncProtocol {
 public:
  explicit TwoRoundAdversarial(double epsilon) : epsilon_(epsilon) {}
  std::string name() const override { return "two_round"; }
  std::unique_ptr<SyncNode> make_node(const NodeContext& ctx) const override {
    return std::make_unique<TwoRoundNode>(ctx, epsilon_);
  }

 private:
  double epsilon_;
};

}  // namespace

SyncProtocolPtr two_round_adversarial(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw ConfigError("two_round_adversarial: epsilon must lie in (0,1)");
  }
  return std::make_shared<TwoRoundAdversarial>(epsilon);
}

}  // namespace cliquelab

#include <algorithm>
#include <cmath>

#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"
#include "sampling.hpp"

namespace cliquelab {

namespace {

class LasVegasNode final : public SyncNode {
 public:
  LasVegasNode(const NodeContext& ctx, double a, double b)
      : id_(ctx.id), n_(ctx.n), rng_(ctx.tape_seed), referees_(las_vegas_referee_count(ctx.n, b)) {
    const double ln_n = std::log(static_cast<double>(ctx.n));
    candidacy_ = ctx.n == 1 ? 1.0 : std::min(1.0, a * ln_n / static_cast<double>(ctx.n));
  }

  std::vector<PortMessage> on_send(int round) override {
    std::vector<PortMessage> out;
    switch (phase(round)) {
      case 1: {
        candidate_ = detail::coin(rng_, candidacy_);
        provisional_ = false;
        reply_port_ = 0;
        contacted_.clear();
        if (candidate_) {
          rank_ = std::uniform_int_distribution<std::uint64_t>(1, rank_upper_bound(n_))(rng_);
          contacted_ = detail::sample_ports(rng_, n_, referees_);
          for (Port p : contacted_) out.push_back({p, {MsgKind::compete, rank_}});
        }
        break;
      }
      case 2:
        if (reply_port_ != 0) out.push_back({reply_port_, {MsgKind::win, 0}});
        break;
      default:
        if (provisional_) {
          for (Port p = 1; p < n_; ++p) out.push_back({p, {MsgKind::announce, id_.value}});
        }
        break;
    }
    return out;
  }

  void on_receive(int round, std::span<const PortMessage> inbox) override {
    switch (phase(round)) {
      case 1: {
        // Reply only to a strictly unique maximum rank.
        std::uint64_t best = 0;
        int holders = 0;
        for (const auto& m : inbox) {
          if (m.payload.kind != MsgKind::compete) continue;
          if (m.payload.value > best) {
            best = m.payload.value;
            holders = 1;
            reply_port_ = m.port;
          } else if (m.payload.value == best) {
            ++holders;
          }
        }
        if (holders != 1) reply_port_ = 0;
        break;
      }
      case 2:
        if (candidate_) {
          int wins = 0;
          for (const auto& m : inbox) {
            if (m.payload.kind == MsgKind::win &&
                std::find(contacted_.begin(), contacted_.end(), m.port) != contacted_.end()) {
              ++wins;
            }
          }
          provisional_ = wins == static_cast<int>(contacted_.size());
        }
        break;
      default: {
        int announcements = provisional_ ? 1 : 0;
        for (const auto& m : inbox) {
          if (m.payload.kind == MsgKind::announce) ++announcements;
        }
        if (announcements == 1) {
          decide(provisional_ ? Decision::leader : Decision::non_leader);
          halt();
        }
        break;
      }
    }
  }

 private:
  static int phase(int round) { return (round - 1) % 3 + 1; }

  Identity id_;
  int n_;
  Rng rng_;
  int referees_;
  double candidacy_ = 0.0;
  bool candidate_ = false;
  bool provisional_ = false;
  std::uint64_t rank_ = 0;
  std::vector<Port> contacted_;
  Port reply_port_ = 0;
};

class LasVegasThreeRound final : public SyncProtocol {
 public:
  LasVegasThreeRound(double a, double b) : a_(a), b_(b) {}
  std::string name() const override { return "las_vegas"; }
  std::unique_ptr<SyncNode> make_node(const NodeContext& ctx) const override {
    return std::make_unique<LasVegasNode>(ctx, a_, b_);
  }

 private:
  double a_;
  double b_;
};

}  // namespace

int las_vegas_referee_count(int n, double b) {
  if (n <= 1) return 0;
  const double count = std::ceil(b * std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n))));
  return static_cast<int>(std::min(count, static_cast<double>(n - 1)));
}

SyncProtocolPtr las_vegas_three_round(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("las_vegas_three_round: a and b must be positive");
  return std::make_shared<LasVegasThreeRound>(a, b);
}

}  // namespace cliquelab

#include <algorithm>
#include <cmath>

#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"
#include "sampling.hpp"

namespace cliquelab {

namespace {

constexpr Port kSelf = 0;

class AsyncTradeoffNode final : public AsyncNode {
 public:
  AsyncTradeoffNode(const NodeContext& ctx, int k, double gamma)
      : id_(ctx.id),
        n_(ctx.n),
        rng_(ctx.tape_seed),
        wake_fanout_(async_wake_fanout(ctx.n, k, gamma)),
        referee_count_(async_referee_count(ctx.n)) {
    const double n = static_cast<double>(ctx.n);
    candidacy_ = ctx.n == 1 ? 1.0 : std::min(1.0, 4.0 * std::log(n) / n);
  }

  void on_wake(AsyncContext& ctx, WakeCause) override {
    for (Port p : detail::sample_ports(rng_, n_, wake_fanout_)) ctx.send(p, {MsgKind::wake});
    if (!detail::coin(rng_, candidacy_)) {
      decide(Decision::non_leader);
      return;
    }
    candidate_ = true;
    rank_ = std::uniform_int_distribution<std::uint64_t>(1, rank_upper_bound(n_))(rng_);
    winner_ = Winner{rank_, kSelf};
    referees_ = detail::sample_ports(rng_, n_, referee_count_);
    std::sort(referees_.begin(), referees_.end());
    won_.assign(referees_.size(), 0);
    for (Port p : referees_) ctx.send(p, {MsgKind::compete, rank_});
    maybe_elect(ctx);
  }

  void on_message(AsyncContext& ctx, Port port, const Payload& msg) override {
    switch (msg.kind) {
      case MsgKind::compete:
        referee(ctx, port, msg.value);
        break;
      case MsgKind::win: {
        auto it = std::lower_bound(referees_.begin(), referees_.end(), port);
        if (candidate_ && it != referees_.end() && *it == port) {
          auto& seen = won_[static_cast<std::size_t>(it - referees_.begin())];
          if (seen == 0) {
            seen = 1;
            ++wins_;
          }
          maybe_elect(ctx);
        }
        break;
      }
      case MsgKind::lose:
        if (decision() == Decision::undecided) decide(Decision::non_leader);
        break;
      case MsgKind::consult: {
        const bool leader = decision() == Decision::leader;
        if (!leader) decide(Decision::non_leader);
        ctx.send(port, {MsgKind::consult_reply, 0, 0, leader});
        break;
      }
      case MsgKind::consult_reply:
        if (challenger_) {
          const Winner challenger = *challenger_;
          challenger_.reset();
          settle(ctx, challenger, msg.flag);
        }
        break;
      case MsgKind::announce:
        if (decision() == Decision::undecided) decide(Decision::non_leader);
        break;
      default:
        break;
    }
  }

 private:
  struct Winner {
    std::uint64_t rank = 0;
    Port port = kSelf;
  };

  void maybe_elect(AsyncContext& ctx) {
    if (!candidate_ || decision() != Decision::undecided) return;
    if (wins_ != static_cast<int>(referees_.size())) return;
    decide(Decision::leader);
    for (Port p = 1; p < n_; ++p) ctx.send(p, {MsgKind::announce, id_.value});
  }

  void referee(AsyncContext& ctx, Port from, std::uint64_t rank) {
    if (!winner_) {
      winner_ = Winner{rank, from};
      ctx.send(from, {MsgKind::win});
      if (decision() == Decision::undecided) decide(Decision::non_leader);
    } else if (rank <= winner_->rank) {
      ctx.send(from, {MsgKind::lose});
    } else if (challenger_) {
      // A consult is already out. Whatever it returns, the smaller of the
      // two challengers loses, so it is answered now and only the larger
      // one waits for the reply.
      if (rank <= challenger_->rank) {
        ctx.send(from, {MsgKind::lose});
      } else {
        ctx.send(challenger_->port, {MsgKind::lose});
        challenger_ = Winner{rank, from};
      }
    } else if (winner_->port == kSelf) {
      // The stored winner is this node: the consultation is local.
      const bool leader = decision() == Decision::leader;
      if (!leader) decide(Decision::non_leader);
      settle(ctx, Winner{rank, from}, leader);
    } else {
      challenger_ = Winner{rank, from};
      ctx.send(winner_->port, {MsgKind::consult});
    }
  }

  void settle(AsyncContext& ctx, Winner challenger, bool stored_is_leader) {
    if (stored_is_leader) {
      ctx.send(challenger.port, {MsgKind::lose});
    } else {
      winner_ = challenger;
      ctx.send(challenger.port, {MsgKind::win});
    }
  }

  Identity id_;
  int n_;
  Rng rng_;
  int wake_fanout_;
  int referee_count_;
  double candidacy_ = 0.0;

  bool candidate_ = false;
  std::uint64_t rank_ = 0;
  std::vector<Port> referees_;  // sorted
  std::vector<std::uint8_t> won_;
  int wins_ = 0;

  std::optional<Winner> winner_;
  std::optional<Winner> challenger_;  // awaiting the reply to a consult
};

class AsyncTradeoff final : public AsyncProtocol {
 public:
  AsyncTradeoff(int k, double gamma) : k_(k), gamma_(gamma) {}
  std::string name() const override { return "async_tradeoff(k=" + std::to_string(k_) + ")"; }
  std::unique_ptr<AsyncNode> make_node(const NodeContext& ctx) const override {
    if (k_ > async_tradeoff_max_k(ctx.n)) {
      throw ConfigError("async_tradeoff: k=" + std::to_string(k_) + " exceeds " +
                        std::to_string(async_tradeoff_max_k(ctx.n)) + " for n=" + std::to_string(ctx.n));
    }
    return std::make_unique<AsyncTradeoffNode>(ctx, k_, gamma_);
  }

 private:
  int k_;
  double gamma_;
};

}  // namespace

int async_tradeoff_max_k(int n) {
  if (n < 4) return 2;
  const double log_n = std::log2(static_cast<double>(n));
  return static_cast<int>(std::floor(log_n / std::log2(log_n) + 1e-9)) + 1;
}

int async_wake_fanout(int n, int k, double gamma) {
  if (n <= 1) return 0;
  const double f = std::ceil(gamma * std::pow(static_cast<double>(n), 1.0 / static_cast<double>(k)) - 1e-9);
  return static_cast<int>(std::min(f, static_cast<double>(n - 1)));
}

int async_referee_count(int n) {
  if (n <= 1) return 0;
  const double r = std::ceil(4.0 * std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n))));
  return static_cast<int>(std::min(r, static_cast<double>(n - 1)));
}

AsyncProtocolPtr async_tradeoff(int k, double gamma) {
  if (k < 2) throw ConfigError("async_tradeoff: k must be at least 2");
  if (!(gamma > 0.0)) throw ConfigError("async_tradeoff: gamma must be positive");
  return std::make_shared<AsyncTradeoff>(k, gamma);
}

}  // namespace cliquelab

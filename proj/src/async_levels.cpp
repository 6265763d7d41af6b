#include <algorithm>
#include <deque>
#include <utility>

#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"

namespace cliquelab {

namespace {

constexpr Port kSelf = 0;

class LevelsNode final : public AsyncNode {
 public:
  explicit LevelsNode(const NodeContext& ctx) : id_(ctx.id), n_(ctx.n) {}

  int completed() const { return completed_; }

  void on_wake(AsyncContext& ctx, WakeCause cause) override {
    if (cause != WakeCause::adversary) {
      // Woken by someone else's request: referee only.
      decide(Decision::non_leader);
      return;
    }
    candidate_ = true;
    alive_ = true;
    supported_ = Support{id_.value, kSelf, 0};
    start_level(ctx, 0);
  }

  void on_message(AsyncContext& ctx, Port port, const Payload& msg) override {
    switch (msg.kind) {
      case MsgKind::request:
        on_request(ctx, Request{msg.value, port, msg.level});
        break;
      case MsgKind::ack:
        on_ack(ctx, port, msg.level);
        break;
      case MsgKind::lose:
        die();
        break;
      case MsgKind::cancel: {
        const bool accept = !refuses(msg.level, msg.value);
        if (accept) die();
        ctx.send(port, {MsgKind::cancel_reply, 0, msg.level, accept});
        break;
      }
      case MsgKind::cancel_reply:
        on_cancel_reply(ctx, msg.flag);
        break;
      case MsgKind::announce:
        if (decision() == Decision::undecided) decide(Decision::non_leader);
        break;
      default:
        break;
    }
  }

 private:
  struct Support {
    std::uint64_t id = 0;
    Port port = kSelf;
    int level = 0;
  };
  struct Request {
    std::uint64_t id = 0;
    Port port = kSelf;
    int level = 0;
  };

  int coverage(int level) const {
    const long long reach = level >= 62 ? n_ : (1LL << level);
    return static_cast<int>(std::min<long long>(reach, n_));
  }

  // A live candidate refuses to step down for a smaller (level, id) pair.
  bool refuses(int request_level, std::uint64_t challenger) const {
    return alive_ && std::pair(level_, id_.value) > std::pair(request_level, challenger);
  }

  void die() {
    if (alive_) {
      alive_ = false;
      if (supported_ && supported_->port == kSelf) supported_.reset();
    }
    if (decision() == Decision::undecided) decide(Decision::non_leader);
  }

  void start_level(AsyncContext& ctx, int level) {
    level_ = level;
    const int targets = coverage(level) - 1;  // port p reaches neighbour p+1
    acked_.assign(static_cast<std::size_t>(targets), 0);
    pending_acks_ = targets;
    if (supported_ && supported_->port == kSelf) supported_->level = level;
    for (Port p = 1; p <= targets; ++p) ctx.send(p, {MsgKind::request, id_.value, level});
    if (pending_acks_ == 0) finish_level(ctx);
  }

  void finish_level(AsyncContext& ctx) {
    completed_ = level_;
    if (coverage(level_) >= n_) {
      level_ = level_ + 1;  // refuse every later cancel
      decide(Decision::leader);
      for (Port p = 1; p < n_; ++p) ctx.send(p, {MsgKind::announce, id_.value});
      return;
    }
    start_level(ctx, level_ + 1);
  }

  void on_ack(AsyncContext& ctx, Port port, int level) {
    if (!candidate_ || !alive_ || level != level_) return;
    if (port < 1 || port > static_cast<Port>(acked_.size())) return;
    auto& seen = acked_[static_cast<std::size_t>(port - 1)];
    if (seen != 0) return;
    seen = 1;
    if (--pending_acks_ == 0) finish_level(ctx);
  }

  void support(AsyncContext& ctx, const Request& r) {
    supported_ = Support{r.id, r.port, r.level};
    ctx.send(r.port, {MsgKind::ack, 0, r.level});
  }

  void on_request(AsyncContext& ctx, const Request& r) {
    if (!supported_ || supported_->port == r.port) {
      support(ctx, r);
    } else if (std::pair(r.level, r.id) < std::pair(supported_->level, supported_->id)) {
      // Ordered by (level, id): comparing identities alone lets a dead
      // high-id candidate and a live high-level one kill each other.
      ctx.send(r.port, {MsgKind::lose});
    } else if (challenger_) {
      queued_.push_back(r);
    } else if (supported_->port == kSelf) {
      // Conditional cancel addressed to this node itself.
      if (refuses(r.level, r.id)) {
        ctx.send(r.port, {MsgKind::lose});
      } else {
        die();
        support(ctx, r);
      }
    } else {
      challenger_ = r;
      ctx.send(supported_->port, {MsgKind::cancel, r.id, r.level});
    }
  }

  void on_cancel_reply(AsyncContext& ctx, bool accepted) {
    if (!challenger_) return;
    const Request w = *challenger_;
    challenger_.reset();
    if (accepted) {
      // Ack the largest challenger seen meanwhile; the rest lose.
      Request best = w;
      for (const auto& q : queued_) {
        if (std::pair(q.level, q.id) > std::pair(best.level, best.id)) best = q;
      }
      if (best.port != w.port) ctx.send(w.port, {MsgKind::lose});
      for (const auto& q : queued_) {
        if (q.port != best.port) ctx.send(q.port, {MsgKind::lose});
      }
      queued_.clear();
      support(ctx, best);
      return;
    }
    ctx.send(w.port, {MsgKind::lose});
    while (!challenger_ && !queued_.empty()) {
      const Request next = queued_.front();
      queued_.pop_front();
      on_request(ctx, next);
    }
  }

  Identity id_;
  int n_;

  bool candidate_ = false;
  bool alive_ = false;
  int level_ = 0;
  int completed_ = -1;
  std::vector<std::uint8_t> acked_;
  int pending_acks_ = 0;

  std::optional<Support> supported_;
  std::optional<Request> challenger_;  // waiting on a cancel reply
  std::deque<Request> queued_;
};

class AsyncLevels final : public AsyncProtocol {
 public:
  std::string name() const override { return "async_levels"; }
  std::unique_ptr<AsyncNode> make_node(const NodeContext& ctx) const override {
    return std::make_unique<LevelsNode>(ctx);
  }
};

}  // namespace

AsyncProtocolPtr async_levels() { return std::make_shared<AsyncLevels>(); }

std::optional<int> levels_completed(const AsyncNode& node) {
  if (const auto* levels = dynamic_cast<const LevelsNode*>(&node)) return levels->completed();
  return std::nullopt;
}

}  // namespace cliquelab

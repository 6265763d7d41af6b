#include <doctest.h>

#include "cliquelab/acceptance.hpp"
#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"

using namespace cliquelab;

namespace {

// Referees of the wrapped protocol never turn a challenger down: every
// "you lose!" leaves as "you win!".
class RubberStampNode final : public AsyncNode {
 public:
  explicit RubberStampNode(std::unique_ptr<AsyncNode> inner) : inner_(std::move(inner)) {}

  void on_wake(AsyncContext& ctx, WakeCause cause) override {
    Rewriter r(ctx);
    inner_->on_wake(r, cause);
    mirror(*inner_);
  }
  void on_message(AsyncContext& ctx, Port port, const Payload& msg) override {
    Rewriter r(ctx);
    inner_->on_message(r, port, msg);
    mirror(*inner_);
  }

 private:
  class Rewriter final : public AsyncContext {
   public:
    explicit Rewriter(AsyncContext& outer) : outer_(outer) {}
    SimTime now() const override { return outer_.now(); }
    void send(Port port, const Payload& payload) override {
      Payload p = payload;
      if (p.kind == MsgKind::lose) p.kind = MsgKind::win;
      outer_.send(port, p);
    }

   private:
    AsyncContext& outer_;
  };

  std::unique_ptr<AsyncNode> inner_;
};

class RubberStamp final : public AsyncProtocol {
 public:
  explicit RubberStamp(AsyncProtocolPtr inner) : inner_(std::move(inner)) {}
  std::string name() const override { return "rubber_stamp"; }
  std::unique_ptr<AsyncNode> make_node(const NodeContext& ctx) const override {
    return std::make_unique<RubberStampNode>(inner_->make_node(ctx));
  }

 private:
  AsyncProtocolPtr inner_;
};

}  // namespace

TEST_CASE("criteria are listed in order") {
  const auto& all = acceptance_criteria();
  REQUIRE(all.size() == 9);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].id == static_cast<int>(i) + 1);
  CHECK(all[3].name == "las_vegas");
}

TEST_CASE("only runs the named subset") {
  VerifyOptions opts;
  opts.only = {"small_id", "8"};
  const auto results = run_acceptance(opts);
  REQUIRE(results.size() == 2);
  CHECK(results[0].name == "small_id");
  CHECK(results[1].name == "model");
  CHECK(results[0].passed);
  CHECK(format_result(results[0]).rfind("PASS  2 small_id", 0) == 0);

  opts.only = {"no_such_thing"};
  CHECK_THROWS_AS(run_acceptance(opts), ConfigError);
}

TEST_CASE("a sabotaged referee rule fails the tradeoff criterion by name") {
  VerifyOptions opts;
  opts.only = {"async_tradeoff"};
  opts.trial_scale = 0.004;  // two trials per cell
  opts.async_tradeoff_factory = [](int k) { return std::make_shared<RubberStamp>(async_tradeoff(k)); };
  const auto results = run_acceptance(opts);
  REQUIRE(results.size() == 1);
  CHECK_FALSE(results[0].passed);
  CHECK(results[0].name == "async_tradeoff");
  CHECK(results[0].detail.find("unique leader") != std::string::npos);
  CHECK(format_result(results[0]).rfind("FAIL  6 async_tradeoff", 0) == 0);

  // The unmodified protocol passes at the same scale.
  opts.async_tradeoff_factory = nullptr;
  opts.only = {"6"};
  const auto clean = run_acceptance(opts);
  REQUIRE(clean.size() == 1);
  CHECK(clean[0].passed);
}

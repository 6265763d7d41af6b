#include <algorithm>
#include <limits>

#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"

namespace cliquelab {

namespace {

__extension__ using u128 = unsigned __int128;

u128 pow_sat(u128 base, int exp) {
  constexpr u128 cap = static_cast<u128>(1) << 120;
  u128 out = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && out > cap / base) return cap;
    out *= base;
  }
  return out;
}

// Smallest f with f^root >= n^power, i.e. ceil(n^(power/root)).
int ceil_rational_power(int n, int power, int root) {
  const u128 target = pow_sat(static_cast<u128>(n), power);
  int lo = 1, hi = std::max(n, 1);
  while (pow_sat(static_cast<u128>(hi), root) < target) hi *= 2;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (pow_sat(static_cast<u128>(mid), root) >= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

class ImprovedAfekGafniNode final : public SyncNode {
 public:
  ImprovedAfekGafniNode(const NodeContext& ctx, int ell)
      : id_(ctx.id), n_(ctx.n), ell_(ell), fanouts_(improved_ag_fanouts(ctx.n, ell)) {}

  std::vector<PortMessage> on_send(int round) override {
    std::vector<PortMessage> out;
    const int iterations = static_cast<int>(fanouts_.size());
    if (round == ell_) {
      if (survivor_) {
        for (Port p = 1; p < n_; ++p) out.push_back({p, {MsgKind::id_broadcast, id_.value}});
      }
    } else if (round <= 2 * iterations) {
      if (round % 2 == 1) {
        if (survivor_) {
          const int f = fanouts_[static_cast<std::size_t>((round - 1) / 2)];
          first_port_ = used_ + 1;
          used_ += f;
          for (Port p = first_port_; p <= used_; ++p) out.push_back({p, {MsgKind::id_broadcast, id_.value}});
        }
      } else if (reply_port_ != 0) {
        out.push_back({reply_port_, {MsgKind::win, 0}});
        reply_port_ = 0;
      }
    }
    return out;
  }

  void on_receive(int round, std::span<const PortMessage> inbox) override {
    const int iterations = static_cast<int>(fanouts_.size());
    if (round == ell_) {
      bool highest = survivor_;
      for (const auto& m : inbox) {
        if (m.payload.kind == MsgKind::id_broadcast && m.payload.value > id_.value) highest = false;
      }
      decide(highest ? Decision::leader : Decision::non_leader);
      halt();
    } else if (round <= 2 * iterations) {
      if (round % 2 == 1) {
        // Referee: answer only the largest identity of this iteration.
        std::uint64_t best = 0;
        for (const auto& m : inbox) {
          if (m.payload.kind == MsgKind::id_broadcast && m.payload.value > best) {
            best = m.payload.value;
            reply_port_ = m.port;
          }
        }
      } else if (survivor_) {
        std::vector<std::uint8_t> answered(static_cast<std::size_t>(used_ - first_port_ + 1), 0);
        int replies = 0;
        for (const auto& m : inbox) {
          if (m.payload.kind != MsgKind::win || m.port < first_port_ || m.port > used_) continue;
          auto& seen = answered[static_cast<std::size_t>(m.port - first_port_)];
          if (seen == 0) {
            seen = 1;
            ++replies;
          }
        }
        if (replies < used_ - first_port_ + 1) {
          survivor_ = false;
          decide(Decision::non_leader);
        }
      }
    }
  }

 private:
  Identity id_;
  int n_;
  int ell_;
  std::vector<int> fanouts_;
  bool survivor_ = true;
  int used_ = 0;
  int first_port_ = 1;
  Port reply_port_ = 0;
};

class ImprovedAfekGafni final : public SyncProtocol {
 public:
  explicit ImprovedAfekGafni(int ell) : ell_(ell) {}
  std::string name() const override { return "improved_ag(ell=" + std::to_string(ell_) + ")"; }
  std::unique_ptr<SyncNode> make_node(const NodeContext& ctx) const override {
    return std::make_unique<ImprovedAfekGafniNode>(ctx, ell_);
  }

 private:
  int ell_;
};

}  // namespace

std::vector<int> improved_ag_fanouts(int n, int ell) {
  const int k = (ell + 3) / 2;
  std::vector<int> out;
  int used = 0;
  for (int i = 1; i <= k - 2; ++i) {
    const int f = std::min(ceil_rational_power(n, i, k - 1), std::max(n - 1 - used, 0));
    out.push_back(f);
    used += f;
  }
  return out;
}

SyncProtocolPtr improved_afek_gafni(int ell) {
  if (ell < 3 || ell % 2 == 0) {
    throw ConfigError("improved_afek_gafni: ell must be an odd integer >= 3, got " + std::to_string(ell));
  }
  return std::make_shared<ImprovedAfekGafni>(ell);
}

}  // namespace cliquelab

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cliquelab {

enum class MsgKind : std::uint8_t {
  wake,
  compete,
  win,
  lose,
  consult,
  consult_reply,
  request,
  ack,
  cancel,
  cancel_reply,
  announce,
  id_broadcast,
};

std::string_view to_string(MsgKind kind);

// Tagged message record. `value` carries an identity or a rank, `level` a
// level number, `flag` a yes/no answer (consult and cancel replies).
struct Payload {
  MsgKind kind = MsgKind::wake;
  std::uint64_t value = 0;
  std::int32_t level = 0;
  bool flag = false;

  bool operator==(const Payload&) const = default;
};

// Short human-readable digest used in traces, e.g. "compete:8812".
std::string digest(const Payload& p);

}  // namespace cliquelab

#include "cliquelab/payload.hpp"

namespace cliquelab {

std::string_view to_string(MsgKind kind) {
  switch (kind) {
    case MsgKind::wake: return "wake";
    case MsgKind::compete: return "compete";
    case MsgKind::win: return "win";
    case MsgKind::lose: return "lose";
    case MsgKind::consult: return "consult";
    case MsgKind::consult_reply: return "consult-reply";
    case MsgKind::request: return "request";
    case MsgKind::ack: return "ack";
    case MsgKind::cancel: return "cancel";
    case MsgKind::cancel_reply: return "cancel-reply";
    case MsgKind::announce: return "announce";
    case MsgKind::id_broadcast: return "id-broadcast";
  }
  return "unknown";
}

std::string digest(const Payload& p) {
  std::string out(to_string(p.kind));
  switch (p.kind) {
    case MsgKind::compete:
    case MsgKind::announce:
    case MsgKind::id_broadcast:
      out += ":" + std::to_string(p.value);
      break;
    case MsgKind::request:
    case MsgKind::cancel:
      out += ":" + std::to_string(p.value) + "@" + std::to_string(p.level);
      break;
    case MsgKind::ack:
      out += "@" + std::to_string(p.level);
      break;
    case MsgKind::consult_reply:
    case MsgKind::cancel_reply:
      out += p.flag ? ":yes" : ":no";
      break;
    default:
      break;
  }
  return out;
}

}  // namespace cliquelab

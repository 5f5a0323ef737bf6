#include "sixmesh/wire.hpp"

#include <array>
#include <cstdio>

namespace sixmesh {

std::string to_string(Address a) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%04X", a.value);
  return std::string(buf);
}

const char* kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::RREQ: return "RREQ";
    case MessageKind::RREP: return "RREP";
    case MessageKind::LocalRREQ: return "LocalRREQ";
    case MessageKind::LocalRREP: return "LocalRREP";
    case MessageKind::RERR: return "RERR";
    case MessageKind::Data: return "Data";
  }
  return "?";
}

bool is_request_kind(MessageKind k) {
  return k == MessageKind::RREQ || k == MessageKind::LocalRREQ;
}

bool is_reply_kind(MessageKind k) {
  return k == MessageKind::RREP || k == MessageKind::LocalRREP;
}

const char* decode_error_name(DecodeError e) {
  switch (e) {
    case DecodeError::None: return "None";
    case DecodeError::Truncated: return "Truncated";
    case DecodeError::UnknownType: return "UnknownType";
    case DecodeError::InvariantViolation: return "InvariantViolation";
  }
  return "?";
}

namespace {

bool known_type_code(std::uint8_t code) { return code >= 1 && code <= 6; }

void check_invariants(const ControlMessage& msg) {
  if (msg.hop_count > MAX_HOP_COUNT)
    throw InvariantViolation("hop_count exceeds 5-bit field");
  if (msg.weak_links_wl > msg.hop_count)
    throw InvariantViolation("weak-link count exceeds hop count");
  if (msg.originator.is_broadcast())
    throw InvariantViolation("broadcast address is not a valid originator");
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

}  // namespace

ControlMessage make_rerr(const RerrPayload& payload, Address emitter) {
  ControlMessage msg;
  msg.kind = MessageKind::RERR;
  msg.cost_type_ct = static_cast<std::uint8_t>(payload.error_code);
  msg.second_next_hop = payload.failed_dest;
  msg.dest = payload.originator_of_data;
  msg.originator = emitter;
  return msg;
}

RerrPayload rerr_payload(const ControlMessage& msg) {
  RerrPayload p;
  p.error_code = static_cast<RerrCode>(msg.cost_type_ct);
  p.failed_dest = msg.second_next_hop;
  p.originator_of_data = msg.dest;
  return p;
}

std::vector<std::uint8_t> encode_message(const ControlMessage& msg) {
  check_invariants(msg);
  std::vector<std::uint8_t> out;
  out.reserve(CONTROL_FRAME_OCTETS);
  out.push_back(static_cast<std::uint8_t>(msg.kind));
  std::uint8_t packed = static_cast<std::uint8_t>(msg.hop_count & 0x1F);
  if (msg.flag_r) packed |= 0x80;
  if (msg.flag_d) packed |= 0x40;
  if (msg.flag_o) packed |= 0x20;
  out.push_back(packed);
  out.push_back(msg.cost_type_ct);
  out.push_back(msg.weak_links_wl);
  put_u16(out, msg.ael);
  out.push_back(msg.rreq_id);
  out.push_back(msg.rrep_id);
  put_u16(out, msg.dest.value);
  put_u16(out, msg.originator.value);
  put_u16(out, msg.second_next_hop.value);
  return out;
}

DecodeResult decode_message(std::span<const std::uint8_t> bytes) {
  DecodeResult result;
  if (bytes.size() < CONTROL_FRAME_OCTETS) {
    result.error = DecodeError::Truncated;
    return result;
  }
  if (!known_type_code(bytes[0])) {
    result.error = DecodeError::UnknownType;
    return result;
  }
  ControlMessage msg;
  msg.kind = static_cast<MessageKind>(bytes[0]);
  msg.flag_r = (bytes[1] & 0x80) != 0;
  msg.flag_d = (bytes[1] & 0x40) != 0;
  msg.flag_o = (bytes[1] & 0x20) != 0;
  msg.hop_count = bytes[1] & 0x1F;
  msg.cost_type_ct = bytes[2];
  msg.weak_links_wl = bytes[3];
  msg.ael = get_u16(bytes, 4);
  msg.rreq_id = bytes[6];
  msg.rrep_id = bytes[7];
  msg.dest = Address{get_u16(bytes, 8)};
  msg.originator = Address{get_u16(bytes, 10)};
  msg.second_next_hop = Address{get_u16(bytes, 12)};
  if (msg.weak_links_wl > msg.hop_count || msg.originator.is_broadcast()) {
    result.error = DecodeError::InvariantViolation;
    return result;
  }
  result.message = msg;
  return result;
}

std::vector<std::uint8_t> encode_data_envelope(const ControlMessage& header,
                                               std::uint16_t payload_len) {
  if (header.kind != MessageKind::Data)
    throw InvariantViolation("data envelope requires kind == Data");
  std::vector<std::uint8_t> out = encode_message(header);
  put_u16(out, payload_len);
  return out;
}

DataEnvelopeResult decode_data_envelope(std::span<const std::uint8_t> bytes) {
  DataEnvelopeResult result;
  if (bytes.size() < DATA_HEADER_OCTETS) {
    result.error = DecodeError::Truncated;
    return result;
  }
  DecodeResult head = decode_message(bytes.first(CONTROL_FRAME_OCTETS));
  if (!head.ok()) {
    result.error = head.error;
    return result;
  }
  if (head.message->kind != MessageKind::Data) {
    result.error = DecodeError::UnknownType;
    return result;
  }
  result.header = *head.message;
  result.payload_len = get_u16(bytes, 14);
  return result;
}

}  // namespace sixmesh

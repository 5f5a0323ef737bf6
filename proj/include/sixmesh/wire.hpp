// Bit-exact codec for the control-message header and the data-packet
// envelope. Layout, 14 octets for every control kind:
//
//   0      Type
//   1      R|D|O|HopCount   (3 flag bits, then 5 hop bits, MSB first)
//   2      CT               (route-cost selector)
//   3      WL               (weak links on path so far)
//   4..5   AEL              (8.8 fixed-point mAh, big endian)
//   6      RREQ_ID
//   7      RREP_ID
//   8..9   destination      (16-bit short address, big endian)
//   10..11 originator
//   12..13 second next hop
//
// Data frames append a 2-octet payload length to the same header.
#ifndef SIXMESH_WIRE_HPP_
#define SIXMESH_WIRE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sixmesh/units.hpp"

namespace sixmesh {

// 16-bit link-layer short address. 0x0000 is the null address, 0xFFFF the
// reserved broadcast address (never valid as an originator).
struct Address {
  std::uint16_t value = 0;

  constexpr Address() = default;
  constexpr explicit Address(std::uint16_t v) : value(v) {}

  friend constexpr bool operator==(Address a, Address b) { return a.value == b.value; }
  friend constexpr bool operator!=(Address a, Address b) { return a.value != b.value; }
  friend constexpr bool operator<(Address a, Address b) { return a.value < b.value; }

  constexpr bool is_null() const { return value == 0; }
  constexpr bool is_broadcast() const { return value == 0xFFFF; }
};

constexpr Address NULL_ADDRESS{0x0000};
constexpr Address BROADCAST_ADDRESS{0xFFFF};

std::string to_string(Address a);

enum class MessageKind : std::uint8_t {
  RREQ = 1,
  RREP = 2,
  LocalRREQ = 3,
  LocalRREP = 4,
  RERR = 5,
  Data = 6,
};

const char* kind_name(MessageKind k);
bool is_request_kind(MessageKind k);  // RREQ or LocalRREQ
bool is_reply_kind(MessageKind k);    // RREP or LocalRREP

constexpr std::size_t CONTROL_FRAME_OCTETS = 14;
constexpr std::size_t DATA_HEADER_OCTETS = 16;
constexpr std::uint8_t MAX_HOP_COUNT = 31;  // 5-bit field ceiling

struct ControlMessage {
  MessageKind kind = MessageKind::RREQ;
  bool flag_r = false;  // flags are carried opaquely and preserved
  bool flag_d = false;
  bool flag_o = false;
  std::uint8_t hop_count = 0;     // hops traversed, <= 31
  std::uint8_t cost_type_ct = 0;  // 0 = hop count primary, weak links secondary
  std::uint8_t weak_links_wl = 0;
  WireAel ael = 0;  // path-mean residual energy, 8.8 fixed-point mAh
  std::uint8_t rreq_id = 0;
  std::uint8_t rrep_id = 0;
  Address dest;
  Address originator;
  Address second_next_hop;

  friend bool operator==(const ControlMessage&, const ControlMessage&) = default;
};

// RERR cause codes. On the wire a RERR reuses header fields: the code rides
// in the CT octet, the unreachable destination in second_next_hop, and the
// data originator the error travels toward in dest.
enum class RerrCode : std::uint8_t {
  NoRoute = 1,
  RepairFailed = 2,
  NodeUnreachable = 3,
};

struct RerrPayload {
  RerrCode error_code = RerrCode::NoRoute;
  Address failed_dest;
  Address originator_of_data;

  friend bool operator==(const RerrPayload&, const RerrPayload&) = default;
};

ControlMessage make_rerr(const RerrPayload& payload, Address emitter);
RerrPayload rerr_payload(const ControlMessage& msg);  // pre: msg.kind == RERR

// Thrown when a message violates a field invariant the 14-octet layout
// cannot represent (hop_count > 31, wl > hop_count, broadcast originator).
class InvariantViolation : public std::invalid_argument {
 public:
  explicit InvariantViolation(const std::string& what) : std::invalid_argument(what) {}
};

enum class DecodeError : std::uint8_t {
  None = 0,
  Truncated,
  UnknownType,
  InvariantViolation,
};

const char* decode_error_name(DecodeError e);

struct DecodeResult {
  std::optional<ControlMessage> message;
  DecodeError error = DecodeError::None;

  bool ok() const { return message.has_value(); }
};

// Encodes a control message into its canonical 14-octet layout.
// Throws InvariantViolation on field-invariant breaches.
std::vector<std::uint8_t> encode_message(const ControlMessage& msg);

// Decodes a control frame. Never throws: arbitrary input yields either a
// message satisfying all invariants or a typed error.
DecodeResult decode_message(std::span<const std::uint8_t> bytes);

// Data-packet envelope: the 14-octet header (kind == Data) followed by a
// 2-octet big-endian payload length. Payload octets are opaque to the
// simulator and are not materialized.
std::vector<std::uint8_t> encode_data_envelope(const ControlMessage& header,
                                               std::uint16_t payload_len);
struct DataEnvelopeResult {
  std::optional<ControlMessage> header;
  std::uint16_t payload_len = 0;
  DecodeError error = DecodeError::None;
  bool ok() const { return header.has_value(); }
};
DataEnvelopeResult decode_data_envelope(std::span<const std::uint8_t> bytes);

}  // namespace sixmesh

#endif  // SIXMESH_WIRE_HPP_

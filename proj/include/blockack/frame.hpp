#pragma once

// Wire codec for the 802.11 frames used by the block ack mechanism.
//
// Layouts follow 802.11-2020 without the FCS trailer. Multi-octet fields are
// little-endian. Header fields the model does not carry (duration, retry and
// power-management flags, sequence control of management frames, QoS control
// bits other than the TID) are emitted as zero and must be zero on decode, so
// every successfully decoded frame re-encodes to its input octets.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "blockack/types.hpp"

namespace blockack {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint16_t kDefaultBarControl = 0x0004;
inline constexpr std::uint16_t kDefaultBaControl = 0x0004;

std::array<std::uint8_t, 2> encode_ssc(FragNum fn, SeqNum ssn);
std::array<std::uint8_t, 2> encode_ssc(const Ssc& ssc);
/// Throws std::invalid_argument unless exactly two octets are given.
Ssc decode_ssc(std::span<const std::uint8_t> octets);

/// 64-bit block ack bitmap. Bit k (LSB of octet 0 is bit 0) covers SN ssn+k.
class BaBitmap {
 public:
  BaBitmap() = default;
  explicit BaBitmap(const std::array<std::uint8_t, 8>& octets) : octets_(octets) {}

  bool test(int k) const { return (octets_[k / 8] >> (k % 8)) & 1u; }
  void set(int k, bool value = true);
  bool none() const;
  int count() const;

  const std::array<std::uint8_t, 8>& octets() const { return octets_; }
  bool operator==(const BaBitmap&) const = default;

 private:
  std::array<std::uint8_t, 8> octets_{};
};

struct QosData {
  MacAddress ra;
  MacAddress ta;
  MacAddress dest;
  int tid = 0;
  SeqNum sn;
  FragNum fn;
  Bytes payload;

  std::size_t payload_len() const { return payload.size(); }
  bool operator==(const QosData&) const = default;
};

struct Bar {
  MacAddress ra;
  MacAddress ta;
  std::uint16_t bar_control = kDefaultBarControl;
  Ssc ssc;

  /// TID_INFO subfield (bits 12-15 of the control word).
  int tid() const { return bar_control >> 12; }
  bool operator==(const Bar&) const = default;
};

struct Ba {
  MacAddress ra;
  MacAddress ta;
  std::uint16_t ba_control = kDefaultBaControl;
  Ssc ssc;
  BaBitmap bitmap;

  int tid() const { return ba_control >> 12; }
  bool operator==(const Ba&) const = default;
};

struct AddbaRequest {
  MacAddress ra;
  MacAddress ta;
  MacAddress bssid;
  bool robust = false;
  int dialog_token = 0;
  bool amsdu_supported = false;
  BlockAckPolicy policy = BlockAckPolicy::Immediate;
  int tid = 0;
  int buffer_size = 64;
  int timeout = 0;
  Ssc ssc;
  bool operator==(const AddbaRequest&) const = default;
};

struct AddbaResponse {
  MacAddress ra;
  MacAddress ta;
  MacAddress bssid;
  bool robust = false;
  int dialog_token = 0;
  int status = 0;
  bool amsdu_supported = false;
  BlockAckPolicy policy = BlockAckPolicy::Immediate;
  int tid = 0;
  int buffer_size = 64;
  int timeout = 0;
  bool operator==(const AddbaResponse&) const = default;
};

struct Delba {
  MacAddress ra;
  MacAddress ta;
  MacAddress bssid;
  bool robust = false;
  int tid = 0;
  bool initiator = true;
  int reason = 0;
  bool operator==(const Delba&) const = default;
};

using Frame = std::variant<QosData, Bar, Ba, AddbaRequest, AddbaResponse, Delba>;

const MacAddress& frame_ra(const Frame& f);
const MacAddress& frame_ta(const Frame& f);
std::string_view frame_kind_name(const Frame& f);

struct DecodeError {
  enum class Kind { Truncated, UnknownType, ReservedBits, BadValue, TrailingData };
  Kind kind;
  std::string field;
  std::size_t offset = 0;

  std::string message() const;
};

class DecodeResult {
 public:
  DecodeResult(Frame frame) : value_(std::move(frame)) {}
  DecodeResult(DecodeError error) : value_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<Frame>(value_); }
  explicit operator bool() const { return ok(); }
  const Frame& frame() const { return std::get<Frame>(value_); }
  Frame& frame() { return std::get<Frame>(value_); }
  const DecodeError& error() const { return std::get<DecodeError>(value_); }

 private:
  std::variant<Frame, DecodeError> value_;
};

Bytes encode_frame(const Frame& f);
DecodeResult decode_frame(std::span<const std::uint8_t> octets);

enum class Violation { NonzeroFn };
std::string_view violation_name(Violation v);

/// Field values the standard leaves unspecified.
std::vector<Violation> validate_frame(const Frame& f);

std::string to_hex(std::span<const std::uint8_t> octets);
/// Accepts an even-length string of hex digits, whitespace ignored.
Bytes from_hex(std::string_view text);

}  // namespace blockack

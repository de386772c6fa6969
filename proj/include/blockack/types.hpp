#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blockack {

/// Simulation time unit. One tick is one transmission opportunity per node.
using Tick = std::int64_t;

/// Size of the 802.11 sequence number space.
inline constexpr int kSeqSpace = 4096;
inline constexpr int kHalfSeqSpace = kSeqSpace / 2;

class MacAddress {
 public:
  constexpr MacAddress() = default;
  constexpr explicit MacAddress(const std::array<std::uint8_t, 6>& octets) : octets_(octets) {}

  /// Parses "aa:bb:cc:dd:ee:ff" (case-insensitive). Returns nullopt on malformed text.
  static std::optional<MacAddress> parse(std::string_view text);

  const std::array<std::uint8_t, 6>& octets() const { return octets_; }
  bool is_multicast() const { return (octets_[0] & 0x01) != 0; }
  bool is_locally_administered() const { return (octets_[0] & 0x02) != 0; }

  std::string to_string() const;

  auto operator<=>(const MacAddress&) const = default;

 private:
  std::array<std::uint8_t, 6> octets_{};
};

/// 12-bit sequence number. All arithmetic wraps modulo 4096.
class SeqNum {
 public:
  constexpr SeqNum() = default;
  constexpr explicit SeqNum(int value) : value_(static_cast<std::uint16_t>(value)) {
    if (value < 0 || value >= kSeqSpace) throw std::out_of_range("sequence number outside 0..4095");
  }

  /// Reduces any integer into the sequence space.
  static constexpr SeqNum wrap(long long value) {
    long long m = value % kSeqSpace;
    if (m < 0) m += kSeqSpace;
    return SeqNum(static_cast<int>(m));
  }

  constexpr int value() const { return value_; }

  friend constexpr SeqNum operator+(SeqNum s, int delta) { return wrap(static_cast<long long>(s.value_) + delta); }
  friend constexpr SeqNum operator-(SeqNum s, int delta) { return wrap(static_cast<long long>(s.value_) - delta); }

  constexpr bool operator==(const SeqNum&) const = default;

 private:
  std::uint16_t value_ = 0;
};

/// (to - from) mod 4096.
constexpr int seq_distance(SeqNum from, SeqNum to) {
  return (to.value() - from.value() + kSeqSpace) % kSeqSpace;
}

/// Signed modular offset in [-2048, 2047].
constexpr int seq_offset(SeqNum from, SeqNum to) {
  int d = seq_distance(from, to);
  return d >= kHalfSeqSpace ? d - kSeqSpace : d;
}

/// True when `sn` lies in the size-`size` window starting at `start`.
constexpr bool seq_in_window(SeqNum start, int size, SeqNum sn) {
  return seq_distance(start, sn) < size;
}

class FragNum {
 public:
  constexpr FragNum() = default;
  constexpr explicit FragNum(int value) : value_(static_cast<std::uint8_t>(value)) {
    if (value < 0 || value > 15) throw std::out_of_range("fragment number outside 0..15");
  }
  constexpr int value() const { return value_; }
  constexpr bool operator==(const FragNum&) const = default;

 private:
  std::uint8_t value_ = 0;
};

/// Block Ack Starting Sequence Control: FN in bits 0-3, SSN in bits 4-15.
struct Ssc {
  FragNum fn;
  SeqNum ssn;
  constexpr bool operator==(const Ssc&) const = default;
};

/// RSN capability bits relevant to protected block ack.
struct Capabilities {
  bool mfpc = false;
  bool mfpr = false;
  bool pbac = false;

  bool protected_block_ack_capable() const { return mfpc && mfpr && pbac; }
  bool operator==(const Capabilities&) const = default;
};

/// Agreement key within one node: peer address plus TID.
struct AgreementKey {
  MacAddress peer;
  int tid = 0;
  auto operator<=>(const AgreementKey&) const = default;
};

enum class BlockAckPolicy { Delayed = 0, Immediate = 1 };

}  // namespace blockack

template <>
struct std::hash<blockack::MacAddress> {
  std::size_t operator()(const blockack::MacAddress& m) const noexcept {
    std::size_t h = 0;
    for (auto o : m.octets()) h = h * 131 + o;
    return h;
  }
};

#pragma once

// libpcap capture files with LINKTYPE_IEEE802_11 (105): no radiotap, no FCS.
// A tick is stored as one millisecond of capture time.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockack/frame.hpp"

namespace blockack {

inline constexpr std::uint32_t kLinktypeIeee80211 = 105;

struct CapturedFrame {
  Tick tick = 0;
  Bytes octets;
};

class PcapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PcapWriter {
 public:
  /// Writes the global header immediately.
  explicit PcapWriter(std::ostream& out);

  void write(Tick tick, std::span<const std::uint8_t> octets);

 private:
  std::ostream& out_;
};

/// Serializes a whole capture in memory.
Bytes pcap_bytes(const std::vector<CapturedFrame>& frames);

/// Parses a capture. Throws PcapError on malformed input or a link type other than 105.
std::vector<CapturedFrame> parse_pcap(std::span<const std::uint8_t> data);
std::vector<CapturedFrame> read_pcap_file(const std::string& path);

}  // namespace blockack

#include "blockack/pcap.hpp"

#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace blockack {

namespace {

constexpr std::uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNanos = 0xa1b23c4d;
constexpr std::uint32_t kSnapLen = 65535;

void put32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff), static_cast<char>((v >> 16) & 0xff),
               static_cast<char>(v >> 24)};
  out.write(b, 4);
}

void put16(std::ostream& out, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

std::uint32_t swap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

std::uint32_t get32(std::span<const std::uint8_t> d, std::size_t off, bool swapped) {
  std::uint32_t v = static_cast<std::uint32_t>(d[off]) | static_cast<std::uint32_t>(d[off + 1]) << 8 |
                    static_cast<std::uint32_t>(d[off + 2]) << 16 | static_cast<std::uint32_t>(d[off + 3]) << 24;
  return swapped ? swap32(v) : v;
}

}  // namespace

PcapWriter::PcapWriter(std::ostream& out) : out_(out) {
  put32(out_, kMagicMicros);
  put16(out_, 2);
  put16(out_, 4);
  put32(out_, 0);  // thiszone
  put32(out_, 0);  // sigfigs
  put32(out_, kSnapLen);
  put32(out_, kLinktypeIeee80211);
}

void PcapWriter::write(Tick tick, std::span<const std::uint8_t> octets) {
  const auto ms = static_cast<std::uint64_t>(tick < 0 ? 0 : tick);
  put32(out_, static_cast<std::uint32_t>(ms / 1000));
  put32(out_, static_cast<std::uint32_t>((ms % 1000) * 1000));
  put32(out_, static_cast<std::uint32_t>(octets.size()));
  put32(out_, static_cast<std::uint32_t>(octets.size()));
  out_.write(reinterpret_cast<const char*>(octets.data()), static_cast<std::streamsize>(octets.size()));
}

Bytes pcap_bytes(const std::vector<CapturedFrame>& frames) {
  std::ostringstream os(std::ios::binary);
  PcapWriter w(os);
  for (const auto& f : frames) w.write(f.tick, f.octets);
  const std::string s = os.str();
  return Bytes(s.begin(), s.end());
}

std::vector<CapturedFrame> parse_pcap(std::span<const std::uint8_t> data) {
  if (data.size() < 24) throw PcapError("capture shorter than the pcap global header");
  const std::uint32_t raw_magic = get32(data, 0, false);
  bool swapped = false;
  bool nanos = false;
  if (raw_magic == kMagicMicros || raw_magic == kMagicNanos) {
    nanos = raw_magic == kMagicNanos;
  } else if (swap32(raw_magic) == kMagicMicros || swap32(raw_magic) == kMagicNanos) {
    swapped = true;
    nanos = swap32(raw_magic) == kMagicNanos;
  } else {
    throw PcapError("not a pcap file (bad magic)");
  }
  const std::uint32_t linktype = get32(data, 20, swapped) & 0x0fffffff;
  if (linktype != kLinktypeIeee80211)
    throw PcapError("unsupported link type " + std::to_string(linktype) + " (expected 105, IEEE 802.11)");

  std::vector<CapturedFrame> out;
  std::size_t off = 24;
  while (off < data.size()) {
    if (data.size() - off < 16) throw PcapError("truncated record header at offset " + std::to_string(off));
    const std::uint64_t sec = get32(data, off, swapped);
    const std::uint64_t frac = get32(data, off + 4, swapped);
    const std::uint32_t incl = get32(data, off + 8, swapped);
    off += 16;
    if (data.size() - off < incl) throw PcapError("truncated record body at offset " + std::to_string(off));
    const std::uint64_t ms = sec * 1000 + (nanos ? frac / 1000000 : frac / 1000);
    out.push_back({static_cast<Tick>(ms), Bytes(data.begin() + static_cast<std::ptrdiff_t>(off),
                                                data.begin() + static_cast<std::ptrdiff_t>(off + incl))});
    off += incl;
  }
  return out;
}

std::vector<CapturedFrame> read_pcap_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PcapError("cannot open " + path);
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pcap(data);
}

}  // namespace blockack

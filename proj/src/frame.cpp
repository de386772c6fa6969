#include "blockack/frame.hpp"

#include <bit>
#include <optional>
#include <sstream>

namespace blockack {

namespace {

enum FrameType : std::uint8_t { kTypeMgmt = 0, kTypeCtrl = 1, kTypeData = 2 };

constexpr std::uint8_t kSubtypeAction = 13;
constexpr std::uint8_t kSubtypeBar = 8;
constexpr std::uint8_t kSubtypeBa = 9;
constexpr std::uint8_t kSubtypeQosData = 8;

// Frame Control flag octet; only Protected (FC bit 14) is modeled.
constexpr std::uint8_t kFlagProtected = 0x40;

constexpr std::uint8_t kCategoryBlockAck = 3;
constexpr std::uint8_t kActionAddbaRequest = 0;
constexpr std::uint8_t kActionAddbaResponse = 1;
constexpr std::uint8_t kActionDelba = 2;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xff));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void mac(const MacAddress& m) { out_.insert(out_.end(), m.octets().begin(), m.octets().end()); }
  void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void frame_control(std::uint8_t type, std::uint8_t subtype, std::uint8_t flags) {
    u8(static_cast<std::uint8_t>(subtype << 4 | type << 2));
    u8(flags);
    u16(0);  // duration
  }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

  // Every getter records the first truncation against the named field.
  std::uint8_t u8(const char* field) {
    if (!need(1, field)) return 0;
    return in_[pos_++];
  }
  std::uint16_t u16(const char* field) {
    if (!need(2, field)) return 0;
    std::uint16_t v = static_cast<std::uint16_t>(in_[pos_] | in_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  MacAddress mac(const char* field) {
    if (!need(6, field)) return {};
    std::array<std::uint8_t, 6> o{};
    for (auto& b : o) b = in_[pos_++];
    return MacAddress(o);
  }
  Bytes rest() {
    Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.end());
    pos_ = in_.size();
    return b;
  }

  const std::optional<DecodeError>& error() const { return error_; }
  void fail(DecodeError::Kind kind, const char* field, std::size_t offset) {
    if (!error_) error_ = DecodeError{kind, field, offset};
  }
  void expect_end() {
    if (!error_ && remaining() != 0) fail(DecodeError::Kind::TrailingData, "end of frame", pos_);
  }

 private:
  bool need(std::size_t n, const char* field) {
    if (error_) return false;
    if (remaining() < n) {
      error_ = DecodeError{DecodeError::Kind::Truncated, field, pos_};
      return false;
    }
    return true;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::optional<DecodeError> error_;
};

std::uint16_t ssc_word(const Ssc& s) { return static_cast<std::uint16_t>(s.fn.value() | s.ssn.value() << 4); }
Ssc ssc_from_word(std::uint16_t w) { return Ssc{FragNum(w & 0x0f), SeqNum(w >> 4)}; }

std::uint16_t addba_params(bool amsdu, BlockAckPolicy policy, int tid, int buffer_size) {
  return static_cast<std::uint16_t>((amsdu ? 1 : 0) | (policy == BlockAckPolicy::Immediate ? 2 : 0) |
                                    (tid & 0x0f) << 2 | (buffer_size & 0x3ff) << 6);
}

struct AddbaParams {
  bool amsdu;
  BlockAckPolicy policy;
  int tid;
  int buffer_size;
};

AddbaParams parse_addba_params(std::uint16_t w) {
  return {(w & 1) != 0, (w & 2) ? BlockAckPolicy::Immediate : BlockAckPolicy::Delayed, (w >> 2) & 0x0f, w >> 6};
}

void mgmt_header(Writer& w, const MacAddress& ra, const MacAddress& ta, const MacAddress& bssid, bool robust,
                 std::uint8_t action) {
  w.frame_control(kTypeMgmt, kSubtypeAction, robust ? kFlagProtected : 0);
  w.mac(ra);
  w.mac(ta);
  w.mac(bssid);
  w.u16(0);  // sequence control
  w.u8(kCategoryBlockAck);
  w.u8(action);
}

Bytes encode(const QosData& f) {
  Writer w;
  w.frame_control(kTypeData, kSubtypeQosData, 0);
  w.mac(f.ra);
  w.mac(f.ta);
  w.mac(f.dest);
  w.u16(ssc_word(Ssc{f.fn, f.sn}));
  w.u16(static_cast<std::uint16_t>(f.tid & 0x0f));
  w.raw(f.payload);
  return w.take();
}

Bytes encode(const Bar& f) {
  Writer w;
  w.frame_control(kTypeCtrl, kSubtypeBar, 0);
  w.mac(f.ra);
  w.mac(f.ta);
  w.u16(f.bar_control);
  w.u16(ssc_word(f.ssc));
  return w.take();
}

Bytes encode(const Ba& f) {
  Writer w;
  w.frame_control(kTypeCtrl, kSubtypeBa, 0);
  w.mac(f.ra);
  w.mac(f.ta);
  w.u16(f.ba_control);
  w.u16(ssc_word(f.ssc));
  w.raw(f.bitmap.octets());
  return w.take();
}

Bytes encode(const AddbaRequest& f) {
  Writer w;
  mgmt_header(w, f.ra, f.ta, f.bssid, f.robust, kActionAddbaRequest);
  w.u8(static_cast<std::uint8_t>(f.dialog_token));
  w.u16(addba_params(f.amsdu_supported, f.policy, f.tid, f.buffer_size));
  w.u16(static_cast<std::uint16_t>(f.timeout));
  w.u16(ssc_word(f.ssc));
  return w.take();
}

Bytes encode(const AddbaResponse& f) {
  Writer w;
  mgmt_header(w, f.ra, f.ta, f.bssid, f.robust, kActionAddbaResponse);
  w.u8(static_cast<std::uint8_t>(f.dialog_token));
  w.u16(static_cast<std::uint16_t>(f.status));
  w.u16(addba_params(f.amsdu_supported, f.policy, f.tid, f.buffer_size));
  w.u16(static_cast<std::uint16_t>(f.timeout));
  return w.take();
}

Bytes encode(const Delba& f) {
  Writer w;
  mgmt_header(w, f.ra, f.ta, f.bssid, f.robust, kActionDelba);
  w.u16(static_cast<std::uint16_t>((f.initiator ? 1 : 0) << 11 | (f.tid & 0x0f) << 12));
  w.u16(static_cast<std::uint16_t>(f.reason));
  return w.take();
}

DecodeResult finish(Reader& r, Frame f) {
  if (r.error()) return *r.error();
  return f;
}

DecodeResult decode_action(Reader& r, bool robust) {
  MacAddress ra = r.mac("addr1");
  MacAddress ta = r.mac("addr2");
  MacAddress bssid = r.mac("addr3");
  std::size_t sc_off = r.offset();
  if (r.u16("sequence control") != 0) r.fail(DecodeError::Kind::ReservedBits, "sequence control", sc_off);
  std::size_t cat_off = r.offset();
  std::uint8_t category = r.u8("category");
  std::size_t act_off = r.offset();
  std::uint8_t action = r.u8("action");
  if (r.error()) return *r.error();
  if (category != kCategoryBlockAck) return DecodeError{DecodeError::Kind::UnknownType, "category", cat_off};

  switch (action) {
    case kActionAddbaRequest: {
      AddbaRequest f{.ra = ra, .ta = ta, .bssid = bssid, .robust = robust};
      f.dialog_token = r.u8("dialog token");
      auto p = parse_addba_params(r.u16("block ack parameter set"));
      f.amsdu_supported = p.amsdu;
      f.policy = p.policy;
      f.tid = p.tid;
      f.buffer_size = p.buffer_size;
      f.timeout = r.u16("block ack timeout");
      f.ssc = ssc_from_word(r.u16("starting sequence control"));
      r.expect_end();
      return finish(r, f);
    }
    case kActionAddbaResponse: {
      AddbaResponse f{.ra = ra, .ta = ta, .bssid = bssid, .robust = robust};
      f.dialog_token = r.u8("dialog token");
      f.status = r.u16("status code");
      auto p = parse_addba_params(r.u16("block ack parameter set"));
      f.amsdu_supported = p.amsdu;
      f.policy = p.policy;
      f.tid = p.tid;
      f.buffer_size = p.buffer_size;
      f.timeout = r.u16("block ack timeout");
      r.expect_end();
      return finish(r, f);
    }
    case kActionDelba: {
      Delba f{.ra = ra, .ta = ta, .bssid = bssid, .robust = robust};
      std::size_t off = r.offset();
      std::uint16_t params = r.u16("delba parameter set");
      if ((params & 0x07ff) != 0) r.fail(DecodeError::Kind::ReservedBits, "delba parameter set", off);
      f.initiator = (params >> 11) & 1;
      f.tid = params >> 12;
      f.reason = r.u16("reason code");
      r.expect_end();
      return finish(r, f);
    }
    default:
      return DecodeError{DecodeError::Kind::UnknownType, "action", act_off};
  }
}

}  // namespace

std::array<std::uint8_t, 2> encode_ssc(FragNum fn, SeqNum ssn) {
  std::uint16_t w = ssc_word(Ssc{fn, ssn});
  return {static_cast<std::uint8_t>(w & 0xff), static_cast<std::uint8_t>(w >> 8)};
}

std::array<std::uint8_t, 2> encode_ssc(const Ssc& ssc) { return encode_ssc(ssc.fn, ssc.ssn); }

Ssc decode_ssc(std::span<const std::uint8_t> octets) {
  if (octets.size() != 2) throw std::invalid_argument("starting sequence control must be 2 octets");
  return ssc_from_word(static_cast<std::uint16_t>(octets[0] | octets[1] << 8));
}

void BaBitmap::set(int k, bool value) {
  auto mask = static_cast<std::uint8_t>(1u << (k % 8));
  if (value)
    octets_[k / 8] |= mask;
  else
    octets_[k / 8] &= static_cast<std::uint8_t>(~mask);
}

bool BaBitmap::none() const {
  for (auto o : octets_)
    if (o) return false;
  return true;
}

int BaBitmap::count() const {
  int n = 0;
  for (auto o : octets_) n += std::popcount(o);
  return n;
}

const MacAddress& frame_ra(const Frame& f) {
  return std::visit([](const auto& v) -> const MacAddress& { return v.ra; }, f);
}

const MacAddress& frame_ta(const Frame& f) {
  return std::visit([](const auto& v) -> const MacAddress& { return v.ta; }, f);
}

std::string_view frame_kind_name(const Frame& f) {
  static constexpr std::string_view names[] = {"QosData", "Bar", "Ba", "AddbaRequest", "AddbaResponse", "Delba"};
  return names[f.index()];
}

std::string DecodeError::message() const {
  static constexpr const char* kinds[] = {"truncated frame", "unknown type/subtype", "reserved bits set",
                                          "invalid value", "trailing octets"};
  std::ostringstream os;
  os << kinds[static_cast<int>(kind)] << " at offset " << offset << " (" << field << ")";
  return os.str();
}

Bytes encode_frame(const Frame& f) {
  return std::visit([](const auto& v) { return encode(v); }, f);
}

DecodeResult decode_frame(std::span<const std::uint8_t> octets) {
  Reader r(octets);
  std::uint8_t fc0 = r.u8("frame control");
  std::uint8_t flags = r.u8("frame control");
  std::size_t dur_off = r.offset();
  std::uint16_t duration = r.u16("duration");
  if (r.error()) return *r.error();

  if ((fc0 & 0x03) != 0) return DecodeError{DecodeError::Kind::BadValue, "protocol version", 0};
  const std::uint8_t type = (fc0 >> 2) & 0x03;
  const std::uint8_t subtype = fc0 >> 4;
  if (duration != 0) return DecodeError{DecodeError::Kind::ReservedBits, "duration", dur_off};

  const bool is_action = type == kTypeMgmt && subtype == kSubtypeAction;
  const std::uint8_t allowed_flags = is_action ? kFlagProtected : 0;
  if ((flags & ~allowed_flags) != 0) return DecodeError{DecodeError::Kind::ReservedBits, "frame control flags", 1};

  if (is_action) return decode_action(r, (flags & kFlagProtected) != 0);

  if (type == kTypeCtrl && subtype == kSubtypeBar) {
    Bar f;
    f.ra = r.mac("addr1");
    f.ta = r.mac("addr2");
    f.bar_control = r.u16("bar control");
    f.ssc = ssc_from_word(r.u16("starting sequence control"));
    r.expect_end();
    return finish(r, f);
  }
  if (type == kTypeCtrl && subtype == kSubtypeBa) {
    Ba f;
    f.ra = r.mac("addr1");
    f.ta = r.mac("addr2");
    f.ba_control = r.u16("ba control");
    f.ssc = ssc_from_word(r.u16("starting sequence control"));
    std::array<std::uint8_t, 8> bm{};
    for (auto& b : bm) b = r.u8("block ack bitmap");
    f.bitmap = BaBitmap(bm);
    r.expect_end();
    return finish(r, f);
  }
  if (type == kTypeData && subtype == kSubtypeQosData) {
    QosData f;
    f.ra = r.mac("addr1");
    f.ta = r.mac("addr2");
    f.dest = r.mac("addr3");
    auto sc = ssc_from_word(r.u16("sequence control"));
    f.sn = sc.ssn;
    f.fn = sc.fn;
    std::size_t qos_off = r.offset();
    std::uint16_t qos = r.u16("qos control");
    if (r.error()) return *r.error();
    if ((qos & 0xfff0) != 0) return DecodeError{DecodeError::Kind::ReservedBits, "qos control", qos_off};
    f.tid = qos & 0x0f;
    f.payload = r.rest();
    return Frame{std::move(f)};
  }
  return DecodeError{DecodeError::Kind::UnknownType, "frame control", 0};
}

std::string_view violation_name(Violation v) {
  switch (v) {
    case Violation::NonzeroFn:
      return "NonzeroFn";
  }
  return "?";
}

std::vector<Violation> validate_frame(const Frame& f) {
  std::vector<Violation> out;
  if (const auto* bar = std::get_if<Bar>(&f); bar && bar->ssc.fn.value() != 0) out.push_back(Violation::NonzeroFn);
  if (const auto* ba = std::get_if<Ba>(&f); ba && ba->ssc.fn.value() != 0) out.push_back(Violation::NonzeroFn);
  return out;
}

std::string to_hex(std::span<const std::uint8_t> octets) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(octets.size() * 2);
  for (auto o : octets) {
    s.push_back(digits[o >> 4]);
    s.push_back(digits[o & 0x0f]);
  }
  return s;
}

Bytes from_hex(std::string_view text) {
  Bytes out;
  int hi = -1;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    int d;
    if (c >= '0' && c <= '9')
      d = c - '0';
    else if (c >= 'a' && c <= 'f')
      d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      d = c - 'A' + 10;
    else
      throw std::invalid_argument("non-hex character in input");
    if (hi < 0) {
      hi = d;
    } else {
      out.push_back(static_cast<std::uint8_t>(hi << 4 | d));
      hi = -1;
    }
  }
  if (hi >= 0) throw std::invalid_argument("odd number of hex digits");
  return out;
}

}  // namespace blockack

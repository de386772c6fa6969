#include "blockack/originator.hpp"

#include <algorithm>
#include <sstream>

namespace blockack {

std::string_view ba_verdict_name(BaVerdict v) {
  switch (v) {
    case BaVerdict::Processed: return "Processed";
    case BaVerdict::DroppedFn: return "DroppedFn";
    case BaVerdict::DroppedUnknownTa: return "DroppedUnknownTa";
    case BaVerdict::DroppedUnsolicited: return "DroppedUnsolicited";
    case BaVerdict::NoAgreement: return "NoAgreement";
    case BaVerdict::Stalled: return "Stalled";
  }
  return "?";
}

Originator::Originator(MacAddress self, OriginatorConfig config) : self_(self), config_(config) {}

AddbaRequest Originator::initiate_session(const MacAddress& recipient, int tid, const MacAddress& bssid) {
  const AgreementKey key{recipient, tid};
  if (agreements_.count(key) || pending_.count(key))
    throw OriginatorError("block ack session already exists for " + recipient.to_string() + "/" + std::to_string(tid));
  dialog_token_ = dialog_token_ % 255 + 1;
  AddbaRequest req;
  req.ra = recipient;
  req.ta = self_;
  req.bssid = bssid;
  req.dialog_token = dialog_token_;
  req.policy = BlockAckPolicy::Immediate;
  req.tid = tid;
  req.buffer_size = config_.buffer_size;
  req.ssc = Ssc{FragNum(0), sequence_[key]};
  pending_.emplace(key, req);
  return req;
}

bool Originator::on_addba_response(const AddbaResponse& resp, const Capabilities& peer_caps) {
  const AgreementKey key{resp.ta, resp.tid};
  auto p = pending_.find(key);
  if (p == pending_.end() || p->second.dialog_token != resp.dialog_token) return false;
  pending_.erase(p);
  if (resp.status != 0) return false;

  OriginatorAgreement a;
  a.recipient = resp.ta;
  a.tid = resp.tid;
  a.policy = resp.policy;
  a.protected_agreement = config_.caps.protected_block_ack_capable() && peer_caps.protected_block_ack_capable();
  a.window.win_size_o = resp.buffer_size == 0 ? kMaxWindow : std::min(kMaxWindow, resp.buffer_size);
  a.next_sn = sequence_[key];
  a.window.win_start_o = a.next_sn;
  agreements_[key] = std::move(a);
  return true;
}

BlockResult Originator::send_block(const MacAddress& recipient, int tid, std::vector<Bytes> msdus) {
  auto it = agreements_.find(AgreementKey{recipient, tid});
  if (it == agreements_.end()) throw OriginatorError("no block ack agreement with " + recipient.to_string());
  auto& a = it->second;
  if (static_cast<int>(msdus.size()) > a.free_slots()) throw OriginatorError("transmit window full");

  BlockResult out;
  auto qos = [&](SeqNum sn, const Bytes& payload) {
    out.data.push_back(QosData{.ra = recipient, .ta = self_, .dest = recipient, .tid = tid, .sn = sn, .payload = payload});
  };
  for (int k = 0; k < a.window.win_size_o; ++k) {
    const SeqNum sn = a.window.win_start_o + k;
    if (sn == a.next_sn) break;
    auto o = a.window.outstanding.find(sn.value());
    if (o == a.window.outstanding.end() || !o->second.needs_retransmit) continue;
    o->second.needs_retransmit = false;
    ++o->second.retries;
    qos(sn, o->second.payload);
  }
  for (auto& payload : msdus) {
    const SeqNum sn = a.next_sn;
    qos(sn, payload);
    a.window.outstanding.emplace(sn.value(), OutstandingMsdu{.payload = std::move(payload)});
    a.next_sn = a.next_sn + 1;
  }
  sequence_[it->first] = a.next_sn;
  if (out.data.empty()) return out;

  Bar bar;
  bar.ra = recipient;
  bar.ta = self_;
  bar.bar_control = static_cast<std::uint16_t>(kDefaultBarControl | tid << 12);
  bar.ssc = Ssc{FragNum(0), a.window.win_start_o};
  out.bar = bar;
  a.bar_outstanding = true;
  if (!a.protected_agreement) a.needs_window_sync = false;
  return out;
}

void Originator::schedule_or_fail(OriginatorAgreement& a, int sn, BaResult& out) {
  auto o = a.window.outstanding.find(sn);
  if (o->second.retries >= config_.max_retries) {
    out.failed.push_back(Msdu{SeqNum(sn), std::move(o->second.payload)});
    a.window.outstanding.erase(o);
    a.needs_window_sync = true;
    return;
  }
  o->second.needs_retransmit = true;
  out.retransmit.push_back(SeqNum(sn));
}

void Originator::advance_window(OriginatorAgreement& a) {
  auto& w = a.window;
  while (w.win_start_o != a.next_sn) {
    auto o = w.outstanding.find(w.win_start_o.value());
    if (o != w.outstanding.end() && !o->second.acked) break;
    if (o != w.outstanding.end()) w.outstanding.erase(o);
    w.win_start_o = w.win_start_o + 1;
  }
}

BaResult Originator::process_ba(const Ba& f, const BehaviorProfile& policy, const TxContext& ctx) {
  BaResult out;
  auto it = agreements_.find(AgreementKey{f.ta, f.tid()});
  OriginatorAgreement* a = it == agreements_.end() ? nullptr : &it->second;

  if (policy.drop_nonzero_fn && f.ssc.fn.value() != 0) {
    out.verdict = BaVerdict::DroppedFn;
    return out;
  }
  if (policy.require_known_transmitter && ctx.is_associated && !ctx.is_associated(f.ta)) {
    out.verdict = BaVerdict::DroppedUnknownTa;
    return out;
  }
  const bool is_solicited = a && a->bar_outstanding;
  if (policy.drop_unsolicited_ba && !is_solicited) {
    out.verdict = BaVerdict::DroppedUnsolicited;
    return out;
  }

  out.verdict = a ? BaVerdict::Processed : BaVerdict::NoAgreement;
  if (a) {
    auto& w = a->window;
    std::vector<int> zero_bits;
    for (int k = 0; k < w.win_size_o; ++k) {
      const SeqNum sn = w.win_start_o + k;
      if (sn == a->next_sn) break;
      auto o = w.outstanding.find(sn.value());
      if (o == w.outstanding.end() || o->second.acked) continue;
      const int bit = seq_distance(f.ssc.ssn, sn);
      if (bit >= 64) continue;
      if (f.bitmap.test(bit)) {
        o->second.acked = true;
        o->second.needs_retransmit = false;
        out.released.push_back(sn);
      } else {
        zero_bits.push_back(sn.value());
      }
    }
    for (int sn : zero_bits) schedule_or_fail(*a, sn, out);
    advance_window(*a);
    a->bar_outstanding = false;
  }
  if (policy.ba_global_stall && !is_solicited) out.verdict = BaVerdict::Stalled;
  return out;
}

BaResult Originator::on_ba_timeout(const MacAddress& recipient, int tid) {
  BaResult out;
  auto it = agreements_.find(AgreementKey{recipient, tid});
  if (it == agreements_.end()) return out;
  auto& a = it->second;
  out.verdict = BaVerdict::Processed;
  std::vector<int> pending;
  for (const auto& [sn, o] : a.window.outstanding)
    if (!o.acked && !o.needs_retransmit) pending.push_back(sn);
  std::sort(pending.begin(), pending.end(), [&](int x, int y) {
    return seq_distance(a.window.win_start_o, SeqNum(x)) < seq_distance(a.window.win_start_o, SeqNum(y));
  });
  for (int sn : pending) schedule_or_fail(a, sn, out);
  advance_window(a);
  a.bar_outstanding = false;
  return out;
}

std::optional<AddbaRequest> Originator::window_sync_request(const MacAddress& recipient, int tid,
                                                            const MacAddress& bssid) {
  auto it = agreements_.find(AgreementKey{recipient, tid});
  if (it == agreements_.end() || !it->second.protected_agreement || !it->second.needs_window_sync) return std::nullopt;
  auto& a = it->second;
  a.needs_window_sync = false;
  AddbaRequest req;
  req.ra = recipient;
  req.ta = self_;
  req.bssid = bssid;
  req.robust = true;
  dialog_token_ = dialog_token_ % 255 + 1;
  req.dialog_token = dialog_token_;
  req.policy = a.policy;
  req.tid = tid;
  req.buffer_size = a.window.win_size_o;
  req.ssc = Ssc{FragNum(0), a.window.win_start_o};
  return req;
}

Originator::SessionEnd Originator::end_session(const MacAddress& recipient, int tid, int reason,
                                               const MacAddress& bssid) {
  const AgreementKey key{recipient, tid};
  auto it = agreements_.find(key);
  if (it == agreements_.end())
    throw OriginatorError("no block ack session with " + recipient.to_string() + "/" + std::to_string(tid));
  SessionEnd end;
  end.delba = Delba{.ra = recipient, .ta = self_, .bssid = bssid, .tid = tid, .initiator = true, .reason = reason};
  for (auto& [sn, o] : it->second.window.outstanding)
    if (!o.acked) end.abandoned.push_back(Msdu{SeqNum(sn), std::move(o.payload)});
  sequence_[key] = it->second.next_sn;
  agreements_.erase(it);
  return end;
}

std::vector<Msdu> Originator::reset_peer(const MacAddress& recipient) {
  std::vector<Msdu> abandoned;
  for (int tid = 0; tid < 16; ++tid) {
    const AgreementKey key{recipient, tid};
    pending_.erase(key);
    if (!agreements_.count(key)) continue;
    auto end = end_session(recipient, tid, 0, MacAddress{});
    for (auto& m : end.abandoned) abandoned.push_back(std::move(m));
  }
  return abandoned;
}

const OriginatorAgreement* Originator::find(const MacAddress& recipient, int tid) const {
  auto it = agreements_.find(AgreementKey{recipient, tid});
  return it == agreements_.end() ? nullptr : &it->second;
}

SeqNum Originator::next_sn(const MacAddress& recipient, int tid) const {
  const AgreementKey key{recipient, tid};
  if (auto it = agreements_.find(key); it != agreements_.end()) return it->second.next_sn;
  auto s = sequence_.find(key);
  return s == sequence_.end() ? SeqNum(0) : s->second;
}

int Originator::pending_retransmissions(const MacAddress& recipient, int tid) const {
  const auto* a = find(recipient, tid);
  if (!a) return 0;
  return static_cast<int>(std::count_if(a->window.outstanding.begin(), a->window.outstanding.end(),
                                        [](const auto& kv) { return kv.second.needs_retransmit; }));
}

std::string Originator::dump() const {
  std::ostringstream os;
  for (const auto& [key, a] : agreements_) {
    os << key.peer.to_string() << '/' << key.tid << " win_start_o=" << a.window.win_start_o.value()
       << " win_size_o=" << a.window.win_size_o << " next_sn=" << a.next_sn.value() << " outstanding=[";
    bool first = true;
    for (int k = 0; k < a.window.win_size_o; ++k) {
      const SeqNum sn = a.window.win_start_o + k;
      if (sn == a.next_sn) break;
      auto o = a.window.outstanding.find(sn.value());
      if (o == a.window.outstanding.end()) continue;
      os << (first ? "" : ",") << sn.value() << (o->second.acked ? "a" : "") << (o->second.needs_retransmit ? "r" : "");
      first = false;
    }
    os << "] protected=" << a.protected_agreement << '\n';
  }
  return os.str();
}

}  // namespace blockack

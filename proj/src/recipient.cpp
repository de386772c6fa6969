#include "blockack/recipient.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace blockack {

namespace {

std::uint64_t window_mask(int size) { return size >= 64 ? ~0ULL : ((1ULL << size) - 1); }

void realign_end(ReorderBuffer& r) { r.win_end_b = r.win_start_b + (r.win_size_b - 1); }

// Forwards the run of buffered MSDUs starting at WinStartB.
void release_consecutive(RecipientAgreement& a, std::vector<Msdu>& out) {
  auto& r = a.reorder;
  for (auto it = r.buffered.find(r.win_start_b.value()); it != r.buffered.end();
       it = r.buffered.find(r.win_start_b.value())) {
    out.push_back(std::move(it->second));
    r.buffered.erase(it);
    r.win_start_b = r.win_start_b + 1;
  }
  realign_end(r);
}

// Buffered MSDUs sorted by their offset from `origin`.
std::vector<int> buffered_in_order(const ReorderBuffer& r, SeqNum origin) {
  std::vector<int> sns;
  sns.reserve(r.buffered.size());
  for (const auto& [sn, _] : r.buffered) sns.push_back(sn);
  std::sort(sns.begin(), sns.end(),
            [&](int x, int y) { return seq_distance(origin, SeqNum(x)) < seq_distance(origin, SeqNum(y)); });
  return sns;
}

}  // namespace

bool Scoreboard::has(SeqNum sn) const {
  const int k = seq_distance(win_start_r, sn);
  return k < win_size_r && ((received >> k) & 1u);
}

void Scoreboard::mark(SeqNum sn) {
  const int k = seq_distance(win_start_r, sn);
  if (k < win_size_r) {
    received |= 1ULL << k;
    return;
  }
  if (k >= kHalfSeqSpace) return;  // behind the scoreboard window
  const int shift = k - (win_size_r - 1);
  received = shift >= 64 ? 0 : (received >> shift);
  win_start_r = win_start_r + shift;
  received |= 1ULL << (win_size_r - 1);
  received &= window_mask(win_size_r);
}

void Scoreboard::rebase(SeqNum new_start) {
  std::uint64_t bits = 0;
  for (int k = 0; k < win_size_r; ++k) {
    if (!((received >> k) & 1u)) continue;
    const int nk = seq_distance(new_start, win_start_r + k);
    if (nk < win_size_r) bits |= 1ULL << nk;
  }
  win_start_r = new_start;
  received = bits;
}

BaBitmap Scoreboard::bitmap_from(SeqNum ssn) const {
  BaBitmap bm;
  for (int k = 0; k < 64; ++k)
    if (has(ssn + k)) bm.set(k);
  return bm;
}

std::vector<Msdu> move_window(RecipientAgreement& a, SeqNum new_start) {
  std::vector<Msdu> out;
  auto& r = a.reorder;
  const SeqNum old_start = r.win_start_b;
  const bool forward = in_forward_half(old_start, new_start);
  for (int sn : buffered_in_order(r, old_start)) {
    const SeqNum s(sn);
    const bool leaves = forward ? seq_distance(old_start, s) < seq_distance(old_start, new_start)
                                : !seq_in_window(new_start, r.win_size_b, s);
    if (!leaves) continue;
    auto it = r.buffered.find(sn);
    out.push_back(std::move(it->second));
    r.buffered.erase(it);
  }
  r.win_start_b = new_start;
  realign_end(r);
  a.scoreboard.rebase(new_start);
  release_consecutive(a, out);
  return out;
}

std::string_view bar_verdict_name(BarVerdict v) {
  switch (v) {
    case BarVerdict::DroppedFn: return "DroppedFn";
    case BarVerdict::DroppedUnknownTa: return "DroppedUnknownTa";
    case BarVerdict::DroppedUnsolicited: return "DroppedUnsolicited";
    case BarVerdict::DroppedSsnOutOfContext: return "DroppedSsnOutOfContext";
    case BarVerdict::WindowAdvanced: return "WindowAdvanced";
    case BarVerdict::IgnoredProtected: return "IgnoredProtected";
    case BarVerdict::NoChange: return "NoChange";
    case BarVerdict::NoAgreement: return "NoAgreement";
  }
  return "?";
}

bool is_drop(BarVerdict v) {
  return v == BarVerdict::DroppedFn || v == BarVerdict::DroppedUnknownTa || v == BarVerdict::DroppedUnsolicited ||
         v == BarVerdict::DroppedSsnOutOfContext;
}

Recipient::Recipient(MacAddress self, RecipientConfig config) : self_(self), config_(config) {}

EstablishResult Recipient::establish_agreement(const AddbaRequest& req, const Capabilities& local_caps,
                                               const Capabilities& peer_caps, Tick now) {
  EstablishResult result;
  auto& resp = result.response;
  resp.ra = req.ta;
  resp.ta = self_;
  resp.bssid = req.bssid;
  resp.robust = req.robust;
  resp.dialog_token = req.dialog_token;
  resp.amsdu_supported = req.amsdu_supported;
  resp.policy = req.policy;
  resp.tid = req.tid;
  resp.timeout = req.timeout;

  const AgreementKey key{req.ta, req.tid};
  if (agreements_.count(key)) {
    resp.status = kStatusRequestDeclined;
    resp.buffer_size = 0;
    return result;
  }

  const int granted = req.buffer_size == 0 ? kMaxWindow : std::min(kMaxWindow, req.buffer_size);
  resp.status = 0;
  resp.buffer_size = granted;

  RecipientAgreement a;
  a.originator = req.ta;
  a.recipient = self_;
  a.tid = req.tid;
  a.policy = req.policy;
  a.protected_agreement = local_caps.protected_block_ack_capable() && peer_caps.protected_block_ack_capable();
  a.timeout = req.timeout;
  a.reorder.win_size_b = granted;
  a.reorder.win_start_b = req.ssc.ssn;
  realign_end(a.reorder);
  a.scoreboard.win_size_r = granted;
  a.scoreboard.win_start_r = req.ssc.ssn;
  a.last_activity = now;
  agreements_.emplace(key, std::move(a));
  result.created = true;
  return result;
}

TeardownResult Recipient::teardown_agreement(const Delba& delba) {
  TeardownResult result;
  auto it = agreements_.find(AgreementKey{delba.ta, delba.tid});
  if (it == agreements_.end()) return result;
  auto& r = it->second.reorder;
  for (int sn : buffered_in_order(r, r.win_start_b)) result.flushed.push_back(std::move(r.buffered.at(sn)));
  agreements_.erase(it);
  result.removed = true;
  return result;
}

std::vector<Msdu> Recipient::teardown_peer(const MacAddress& originator) {
  std::vector<Msdu> flushed;
  for (int tid = 0; tid < 16; ++tid) {
    auto r = teardown_agreement(Delba{.ra = self_, .ta = originator, .tid = tid});
    for (auto& m : r.flushed) flushed.push_back(std::move(m));
  }
  return flushed;
}

RxResult Recipient::receive_qos_data(const QosData& f, Tick now) {
  RxResult result;
  auto it = agreements_.find(AgreementKey{f.ta, f.tid});
  if (it == agreements_.end()) {
    result.outcome = RxOutcome::Bypassed;
    result.forwarded.push_back(Msdu{f.sn, f.payload});
    return result;
  }
  auto& a = it->second;
  auto& r = a.reorder;
  a.last_activity = now;
  a.last_qos = now;
  a.block_open = true;

  if (a.desynchronized) {
    ++a.stale_drops;
    result.outcome = RxOutcome::Stale;
    return result;
  }

  const int d = seq_distance(r.win_start_b, f.sn);
  if (d >= kHalfSeqSpace) {
    ++a.stale_drops;
    result.outcome = RxOutcome::Stale;
    return result;
  }

  a.scoreboard.mark(f.sn);
  if (d >= r.win_size_b) {
    // Beyond WinEndB: shift so the new SN becomes WinEndB.
    const SeqNum new_start = f.sn - (r.win_size_b - 1);
    for (int sn : buffered_in_order(r, r.win_start_b)) {
      if (seq_distance(r.win_start_b, SeqNum(sn)) >= seq_distance(r.win_start_b, new_start)) break;
      result.forwarded.push_back(std::move(r.buffered.at(sn)));
      r.buffered.erase(sn);
    }
    r.win_start_b = new_start;
    realign_end(r);
  } else if (r.contains(f.sn)) {
    ++a.duplicate_drops;
    result.outcome = RxOutcome::Duplicate;
    return result;
  }

  r.buffered.emplace(f.sn.value(), Msdu{f.sn, f.payload});
  const auto before = result.forwarded.size();
  release_consecutive(a, result.forwarded);
  result.outcome = result.forwarded.size() > before ? RxOutcome::Forwarded : RxOutcome::Buffered;
  a.forwarded += result.forwarded.size();
  return result;
}

bool Recipient::solicited(const RecipientAgreement& a, Tick now) const {
  return a.block_open && a.last_qos && now - *a.last_qos <= config_.solicit_window_ticks;
}

BarResult Recipient::apply_bar_rules(const MacAddress& ta, int tid, const Ssc& ssc, const BehaviorProfile& policy,
                                     const RxContext& ctx) {
  BarResult result;
  auto it = agreements_.find(AgreementKey{ta, tid});
  RecipientAgreement* a = it == agreements_.end() ? nullptr : &it->second;

  if (policy.drop_nonzero_fn && ssc.fn.value() != 0) {
    result.verdict = BarVerdict::DroppedFn;
    return result;
  }
  if (policy.require_known_transmitter && ctx.is_associated && !ctx.is_associated(ta)) {
    result.verdict = BarVerdict::DroppedUnknownTa;
    return result;
  }
  const bool is_solicited = a && solicited(*a, ctx.now);
  if (policy.drop_unsolicited_bar && !is_solicited) {
    result.verdict = BarVerdict::DroppedUnsolicited;
    return result;
  }
  if (policy.require_inwindow_ssn && !(a && a->scoreboard.has(ssc.ssn))) {
    result.verdict = BarVerdict::DroppedSsnOutOfContext;
    return result;
  }
  if (!a) {
    result.verdict = BarVerdict::NoAgreement;
    return result;
  }

  a->last_activity = ctx.now;
  a->block_open = false;
  if (a->protected_agreement) {
    result.verdict = BarVerdict::IgnoredProtected;
    return result;
  }
  const SeqNum start = a->reorder.win_start_b;
  // The skipped check only bites outside a block exchange; a solicited BAR
  // whose SSN trails WinStartB is routine.
  const bool moves = in_forward_half(start, ssc.ssn) ||
                     (policy.skip_forward_half_check && !is_solicited && ssc.ssn != start);
  if (!moves) {
    result.verdict = BarVerdict::NoChange;
    return result;
  }
  result.forwarded = move_window(*a, ssc.ssn);
  a->forwarded += result.forwarded.size();
  result.verdict = BarVerdict::WindowAdvanced;
  if (policy.vulnerable_to_bar_window_jump && !is_solicited && !a->desynchronized) {
    a->desynchronized = true;
    result.desynchronized = true;
  }
  return result;
}

BarResult Recipient::receive_bar(const Bar& f, const BehaviorProfile& policy, const RxContext& ctx) {
  BarResult result = apply_bar_rules(f.ta, f.tid(), f.ssc, policy, ctx);
  if (is_drop(result.verdict)) return result;

  Ba ba;
  ba.ra = f.ta;
  ba.ta = self_;
  ba.ba_control = f.bar_control;
  ba.ssc = Ssc{FragNum(0), f.ssc.ssn};
  if (const auto* a = find(f.ta, f.tid())) ba.bitmap = a->scoreboard.bitmap_from(f.ssc.ssn);
  result.response = ba;
  return result;
}

BarResult Recipient::receive_ba_as_bar(const Ba& f, const BehaviorProfile& policy, const RxContext& ctx) {
  return apply_bar_rules(f.ta, f.tid(), f.ssc, policy, ctx);
}

AddbaUpdateResult Recipient::robust_addba_update(const AddbaRequest& req, Tick now) {
  AddbaUpdateResult result;
  auto it = agreements_.find(AgreementKey{req.ta, req.tid});
  if (it == agreements_.end() || !it->second.protected_agreement) {
    result.verdict = AddbaUpdateVerdict::IgnoredNoProtectedAgreement;
    return result;
  }
  if (!req.robust) {
    result.verdict = AddbaUpdateVerdict::IgnoredNotRobust;
    return result;
  }
  auto& a = it->second;
  a.last_activity = now;
  if (!in_forward_half(a.reorder.win_start_b, req.ssc.ssn)) {
    result.verdict = AddbaUpdateVerdict::NoChange;
    return result;
  }
  result.forwarded = move_window(a, req.ssc.ssn);
  a.forwarded += result.forwarded.size();
  result.verdict = AddbaUpdateVerdict::WindowAdvanced;
  return result;
}

std::vector<AgreementKey> Recipient::expire(Tick now) {
  std::vector<AgreementKey> gone;
  for (auto it = agreements_.begin(); it != agreements_.end();) {
    const auto& a = it->second;
    if (a.timeout > 0 && now - a.last_activity >= a.timeout) {
      gone.push_back(it->first);
      it = agreements_.erase(it);
    } else {
      ++it;
    }
  }
  return gone;
}

const RecipientAgreement* Recipient::find(const MacAddress& originator, int tid) const {
  auto it = agreements_.find(AgreementKey{originator, tid});
  return it == agreements_.end() ? nullptr : &it->second;
}

std::string Recipient::dump() const {
  std::ostringstream os;
  for (const auto& [key, a] : agreements_) {
    os << key.peer.to_string() << '/' << key.tid << " win_start_b=" << a.reorder.win_start_b.value()
       << " win_end_b=" << a.reorder.win_end_b.value() << " win_size_b=" << a.reorder.win_size_b << " buffered=[";
    bool first = true;
    for (int sn : buffered_in_order(a.reorder, a.reorder.win_start_b)) {
      os << (first ? "" : ",") << sn;
      first = false;
    }
    os << "] win_start_r=" << a.scoreboard.win_start_r.value() << " scoreboard=" << std::hex << std::setw(16)
       << std::setfill('0') << a.scoreboard.received << std::dec << std::setfill(' ')
       << " protected=" << a.protected_agreement << " desync=" << a.desynchronized << '\n';
  }
  return os.str();
}

}  // namespace blockack

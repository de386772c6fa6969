#include "blockack/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace blockack {

MacAddress ap_address() { return MacAddress({0x02, 0x00, 0x00, 0x00, 0x01, 0x00}); }

MacAddress sta_address(int index) {
  return MacAddress({0x02, 0x00, 0x00, 0x00, 0x00, static_cast<std::uint8_t>(index)});
}

BehaviorProfile client_profile() {
  BehaviorProfile p = strict_profile();
  p.name = "client";
  p.description = "station-side rules";
  return p;
}

std::string_view recovery_mode_name(RecoveryMode m) {
  switch (m) {
    case RecoveryMode::None: return "none";
    case RecoveryMode::Self: return "self";
    case RecoveryMode::ReassociationOnly: return "reassociation-only";
    case RecoveryMode::NotRecovered: return "not-recovered";
  }
  return "?";
}

namespace {

constexpr int kTid = 0;

Bytes msdu_payload(std::uint64_t id) {
  Bytes b(8);
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(id >> (8 * i));
  return b;
}

std::optional<std::uint64_t> msdu_id(const Bytes& payload) {
  if (payload.size() < 8) return std::nullopt;
  std::uint64_t id = 0;
  for (int i = 7; i >= 0; --i) id = id << 8 | payload[i];
  return id;
}

struct Flow {
  std::vector<std::uint64_t> generated;
  std::unordered_set<std::uint64_t> forwarded;
  std::unordered_set<std::uint64_t> stale;
  std::unordered_set<std::uint64_t> failed;
};

struct Station {
  int index = 0;
  MacAddress mac;
  bool associated = false;
  Originator tx;
  Recipient rx;
  double up_credit = 0;
  double down_credit = 0;
  Flow up;
  Flow down;
  std::uint64_t stale_events = 0;

  Station(int i, const OriginatorConfig& oc, const RecipientConfig& rc)
      : index(i), mac(sta_address(i)), tx(mac, oc), rx(mac, rc) {}
};

Capabilities full_caps() { return Capabilities{true, true, true}; }

}  // namespace

struct Simulator::Impl {
  Scenario sc;
  SimOptions opt;
  BehaviorProfile profile;
  BehaviorProfile client = client_profile();
  MacAddress ap = ap_address();
  Capabilities ap_caps;
  Recipient ap_rx;
  Originator ap_tx;
  std::vector<Station> stas;
  std::optional<AttackEngine> attacker;
  std::optional<Tick> stalled_until;
  Tick now = 0;
  std::uint64_t next_id = 0;
  Detector detector;
  std::vector<CapturedFrame> trace;
  std::vector<std::size_t> attack_refs;
  std::size_t frame_count = 0;
  Metrics m;

  explicit Impl(const Scenario& s, SimOptions o)
      : sc(s),
        opt(std::move(o)),
        profile(lookup_profile(s.profile)),
        ap_caps(profile.protected_block_ack ? full_caps() : Capabilities{}),
        ap_rx(ap, RecipientConfig{s.solicit_window_ticks}),
        ap_tx(ap, OriginatorConfig{s.max_retries, s.traffic.buffer_size, ap_caps}),
        detector(opt.detector) {
    validate_scenario(sc);
    const OriginatorConfig sta_oc{sc.max_retries, sc.traffic.buffer_size, sc.station_caps};
    stas.reserve(sc.sta_count);
    for (int i = 1; i <= sc.sta_count; ++i) stas.emplace_back(i, sta_oc, RecipientConfig{sc.solicit_window_ticks});
    if (const auto& a = sc.attack) {
      AttackSpec spec;
      spec.kind = a->kind;
      spec.target_ap = ap;
      if (a->target_sta) spec.target_sta = sta_address(a->target_sta);
      spec.burst_count = a->burst_count;
      spec.fn_value = a->fn_value;
      spec.repeat = a->repeat;
      spec.rng_seed = sc.rng_seed;
      spec.frames_per_tick = a->frames_per_tick;
      spec.sniff_horizon = a->sniff_horizon;
      spec.raw_sequence_control = a->raw_sequence_control;
      attacker.emplace(spec, a->start_tick, a->stop_tick);
    }
    m.scenario = sc.name;
    m.profile = sc.profile;
    if (sc.attack) m.attack = sc.attack->kind;
    const auto n = static_cast<std::size_t>(sc.duration_ticks);
    m.attack_frames_through.assign(n, 0);
    m.ap_stalled.assign(n, false);
    for (const auto& s : stas) {
      StaMetrics sm;
      sm.address = s.mac;
      sm.goodput.assign(n, 0);
      sm.uplink.assign(n, 0);
      sm.downlink.assign(n, 0);
      sm.associated.assign(n, false);
      sm.offered.assign(n, false);
      m.stas.push_back(std::move(sm));
    }
  }

  static BehaviorProfile lookup_profile(const std::string& name) {
    auto p = find_profile(name);
    if (!p) throw ScenarioError("<scenario>", 0, "unknown profile '" + name + "'");
    return *p;
  }

  bool stalled() const { return stalled_until && now <= *stalled_until; }

  Station* station(const MacAddress& mac) {
    for (auto& s : stas)
      if (s.mac == mac) return &s;
    return nullptr;
  }

  Station& station(int index) {
    if (index < 1 || index > static_cast<int>(stas.size())) throw SimError("no STA #" + std::to_string(index));
    return stas[index - 1];
  }

  std::function<bool(const MacAddress&)> ap_membership() {
    return [this](const MacAddress& mac) {
      const Station* s = station(mac);
      return s && s->associated;
    };
  }

  std::function<bool(const MacAddress&)> sta_membership(const Station& s) {
    return [this, &s](const MacAddress& mac) { return s.associated && mac == ap; };
  }

  Frame medium(const Frame& f) {
    Bytes octets = encode_frame(f);
    const std::size_t ref = frame_count++;
    auto decoded = decode_frame(octets);
    if (!decoded) throw SimError("codec round trip failed: " + decoded.error().message());
    if (opt.record_trace) trace.push_back(CapturedFrame{now, std::move(octets)});
    if (opt.run_detector) detector.inspect(decoded.frame(), now, ref);
    if (attacker)
      if (const auto* q = std::get_if<QosData>(&decoded.frame())) attacker->observe(*q, now);
    return decoded.frame();
  }

  void record_forwarded(Station& s, bool up, const std::vector<Msdu>& msdus) {
    Flow& flow = up ? s.up : s.down;
    for (const auto& msdu : msdus) {
      auto id = msdu_id(msdu.payload);
      if (!id || !flow.forwarded.insert(*id).second) continue;
      auto& series = up ? m.stas[s.index - 1].uplink : m.stas[s.index - 1].downlink;
      ++series[now];
      ++m.stas[s.index - 1].goodput[now];
    }
  }

  void record_failed(Station& s, bool up, const std::vector<Msdu>& msdus) {
    Flow& flow = up ? s.up : s.down;
    for (const auto& msdu : msdus)
      if (auto id = msdu_id(msdu.payload)) flow.failed.insert(*id);
  }

  void deliver_qos(Station& s, bool up, const QosData& q) {
    Recipient& rx = up ? ap_rx : s.rx;
    auto r = rx.receive_qos_data(q, now);
    if (r.outcome == RxOutcome::Stale) {
      ++s.stale_events;
      if (auto id = msdu_id(q.payload)) (up ? s.up : s.down).stale.insert(*id);
    }
    record_forwarded(s, up, r.forwarded);
  }

  // A BA addressed to the AP, legitimate or forged.
  void ap_receive_ba(const Ba& ba) {
    const auto* a = ap_tx.find(ba.ta, ba.tid());
    const bool solicited = a && a->bar_outstanding;
    const auto r = ap_tx.process_ba(ba, profile, TxContext{now, ap_membership()});
    Station* s = station(ba.ta);
    if (s) record_failed(*s, false, r.failed);
    if (r.verdict == BaVerdict::Stalled) {
      const Tick until = now + sc.stall_cooldown_ticks;
      stalled_until = stalled_until ? std::max(*stalled_until, until) : until;
    }
    const bool dropped = r.verdict == BaVerdict::DroppedFn || r.verdict == BaVerdict::DroppedUnknownTa ||
                         r.verdict == BaVerdict::DroppedUnsolicited;
    if (profile.ba_as_bar && !solicited && !dropped) {
      auto br = ap_rx.receive_ba_as_bar(ba, profile, RxContext{now, ap_membership()});
      if (s) record_forwarded(*s, true, br.forwarded);
    }
  }

  // A BA addressed to a STA outside of its own exchange.
  void sta_receive_ba(Station& s, const Ba& ba) {
    if (!s.associated) return;
    const auto r = s.tx.process_ba(ba, client, TxContext{now, sta_membership(s)});
    record_failed(s, true, r.failed);
  }

  void attack_phase() {
    if (!attacker) return;
    for (const auto& forged : attacker->emit(now)) {
      attack_refs.push_back(frame_count);
      ++m.attack_frames;
      const Frame f = medium(forged);
      if (const auto* bar = std::get_if<Bar>(&f)) {
        if (bar->ra != ap || stalled()) continue;
        auto r = ap_rx.receive_bar(*bar, profile, RxContext{now, ap_membership()});
        Station* s = station(bar->ta);
        if (s) record_forwarded(*s, true, r.forwarded);
        if (!r.response) continue;
        const Frame resp = medium(*r.response);
        if (s) sta_receive_ba(*s, std::get<Ba>(resp));
      } else if (const auto* ba = std::get_if<Ba>(&f)) {
        if (ba->ra == ap) ap_receive_ba(*ba);
      }
    }
    m.attack_timed_out = attacker->timed_out();
  }

  // One block exchange: data, BAR, BA (or its absence), optional window sync.
  bool exchange(Station& s, bool up) {
    Originator& orig = up ? s.tx : ap_tx;
    Flow& flow = up ? s.up : s.down;
    const MacAddress peer = up ? ap : s.mac;
    const auto* a = orig.find(peer, kTid);
    if (!a) return false;
    const int retx = orig.pending_retransmissions(peer, kTid);
    const int n_new = std::clamp(sc.traffic.block_size - retx, 0, a->free_slots());
    std::vector<Bytes> payloads;
    for (int i = 0; i < n_new; ++i) {
      flow.generated.push_back(next_id);
      payloads.push_back(msdu_payload(next_id++));
    }
    auto block = orig.send_block(peer, kTid, std::move(payloads));
    if (block.data.empty()) return false;

    // A stalled AP neither receives nor answers.
    const bool receiver_up = !(up && stalled());
    Recipient& rx = up ? ap_rx : s.rx;
    for (const auto& q : block.data) {
      const Frame f = medium(q);
      if (receiver_up) deliver_qos(s, up, std::get<QosData>(f));
    }
    const Frame bar = medium(*block.bar);
    std::optional<Ba> response;
    if (receiver_up) {
      const auto& policy = up ? profile : client;
      auto r = rx.receive_bar(std::get<Bar>(bar), policy,
                              RxContext{now, up ? ap_membership() : sta_membership(s)});
      record_forwarded(s, up, r.forwarded);
      response = r.response;
    }
    BaResult result;
    if (response) {
      const Ba ba = std::get<Ba>(medium(*response));
      if (up) {
        result = s.tx.process_ba(ba, client, TxContext{now, sta_membership(s)});
        record_failed(s, true, result.failed);
      } else {
        ap_receive_ba(ba);
      }
    } else {
      result = orig.on_ba_timeout(peer, kTid);
      record_failed(s, up, result.failed);
    }

    if (auto req = orig.window_sync_request(peer, kTid, ap)) {
      const Frame f = medium(*req);
      if (receiver_up) record_forwarded(s, up, rx.robust_addba_update(std::get<AddbaRequest>(f), now).forwarded);
    }
    return true;
  }

  void uplink_phase() {
    for (auto& s : stas) {
      if (!s.associated) continue;
      s.up_credit += sc.traffic.blocks_per_tick_per_sta;
      while (s.up_credit >= 1.0) {
        s.up_credit -= 1.0;
        if (exchange(s, true)) m.stas[s.index - 1].offered[now] = true;
      }
    }
  }

  bool downlink_suspended(const Station& s) const {
    if (!profile.uplink_stall_blocks_downlink) return false;
    const auto* a = ap_rx.find(s.mac, kTid);
    return a && a->desynchronized;
  }

  void downlink_phase() {
    if (stalled()) return;
    for (auto& s : stas) {
      if (!s.associated) continue;
      s.down_credit += sc.traffic.blocks_per_tick_per_sta;
      while (s.down_credit >= 1.0) {
        s.down_credit -= 1.0;
        if (downlink_suspended(s)) {
          m.stas[s.index - 1].offered[now] = true;
          continue;
        }
        if (exchange(s, false)) m.stas[s.index - 1].offered[now] = true;
      }
    }
  }

  void associate(Station& s) {
    if (s.associated) throw SimError("STA #" + std::to_string(s.index) + " is already associated");
    s.associated = true;

    const AddbaRequest up_req = std::get<AddbaRequest>(medium(s.tx.initiate_session(ap, kTid, ap)));
    auto up = ap_rx.establish_agreement(up_req, ap_caps, sc.station_caps, now);
    s.tx.on_addba_response(std::get<AddbaResponse>(medium(up.response)), ap_caps);

    const AddbaRequest down_req = std::get<AddbaRequest>(medium(ap_tx.initiate_session(s.mac, kTid, ap)));
    auto down = s.rx.establish_agreement(down_req, sc.station_caps, ap_caps, now);
    ap_tx.on_addba_response(std::get<AddbaResponse>(medium(down.response)), sc.station_caps);
  }

  void disassociate(Station& s) {
    if (!s.associated) throw SimError("STA #" + std::to_string(s.index) + " is not associated");
    record_failed(s, true, s.tx.reset_peer(ap));
    record_forwarded(s, true, ap_rx.teardown_peer(s.mac));
    record_failed(s, false, ap_tx.reset_peer(s.mac));
    record_forwarded(s, false, s.rx.teardown_peer(ap));
    s.associated = false;
    s.up_credit = 0;
    s.down_credit = 0;
  }

  void step() {
    if (now >= sc.duration_ticks) throw SimError("simulation already finished");
    if (now == 0)
      for (auto& s : stas) associate(s);
    if (sc.disassociate && sc.disassociate->tick == now) disassociate(station(sc.disassociate->sta));
    if (sc.reassociate && sc.reassociate->tick == now) {
      Station& s = station(sc.reassociate->sta);
      if (s.associated) disassociate(s);
      associate(s);
    }
    attack_phase();
    uplink_phase();
    downlink_phase();

    m.ap_stalled[now] = stalled();
    m.attack_frames_through[now] = m.attack_frames;
    for (const auto& s : stas) m.stas[s.index - 1].associated[now] = s.associated;
    ++now;
  }
};

Simulator::Simulator(const Scenario& scenario, SimOptions options)
    : impl_(std::make_unique<Impl>(scenario, std::move(options))) {}

Simulator::~Simulator() = default;

void Simulator::step() { impl_->step(); }

void Simulator::run() {
  while (!done()) step();
}

bool Simulator::done() const { return impl_->now >= impl_->sc.duration_ticks; }
Tick Simulator::now() const { return impl_->now; }

void Simulator::associate(int sta) { impl_->associate(impl_->station(sta)); }
void Simulator::disassociate(int sta) { impl_->disassociate(impl_->station(sta)); }

void Simulator::reassociate(int sta) {
  auto& s = impl_->station(sta);
  impl_->disassociate(s);
  impl_->associate(s);
}

bool Simulator::associated(int sta) const {
  return const_cast<Impl&>(*impl_).station(sta).associated;
}

Metrics Simulator::metrics() const {
  Metrics m = impl_->m;
  m.ticks = impl_->now;
  m.frames_on_medium = impl_->frame_count;
  for (const auto& s : impl_->stas) {
    auto& sm = m.stas[s.index - 1];
    sm.generated = s.up.generated.size() + s.down.generated.size();
    sm.stale_drops = s.stale_events;
    sm.failed = s.up.failed.size() + s.down.failed.size();
  }
  const auto& alerts = impl_->detector.alerts();
  m.alert_count = alerts.size();
  std::map<std::string, std::uint64_t> by_rule;
  for (const auto& a : alerts) ++by_rule[std::string(alert_rule_name(a.rule))];
  m.alerts_by_rule.assign(by_rule.begin(), by_rule.end());
  derive_verdicts(m, impl_->sc);
  return m;
}

std::vector<FlowConservation> Simulator::conservation() const {
  std::vector<FlowConservation> out;
  const auto& im = *impl_;
  for (const auto& s : im.stas) {
    for (bool up : {true, false}) {
      const Flow& flow = up ? s.up : s.down;
      const Recipient& rx = up ? im.ap_rx : s.rx;
      const Originator& tx = up ? s.tx : im.ap_tx;
      const MacAddress from = up ? s.mac : im.ap;
      const MacAddress to = up ? im.ap : s.mac;

      std::unordered_set<std::uint64_t> buffered, in_flight;
      if (const auto* a = rx.find(from, kTid))
        for (const auto& [sn, msdu] : a->reorder.buffered)
          if (auto id = msdu_id(msdu.payload)) buffered.insert(*id);
      if (const auto* a = tx.find(to, kTid))
        for (const auto& [sn, o] : a->window.outstanding)
          if (auto id = msdu_id(o.payload); id && !o.acked) in_flight.insert(*id);

      FlowConservation c;
      c.flow = s.mac.to_string() + (up ? " uplink" : " downlink");
      c.generated = flow.generated.size();
      for (auto id : flow.generated) {
        if (flow.forwarded.count(id)) ++c.forwarded;
        else if (buffered.count(id)) ++c.buffered;
        else if (in_flight.count(id)) ++c.in_flight;
        else if (flow.failed.count(id)) ++c.failed;
        else if (flow.stale.count(id)) ++c.stale_dropped;
        else ++c.unaccounted;
      }
      out.push_back(c);
    }
  }
  return out;
}

const std::vector<CapturedFrame>& Simulator::trace() const { return impl_->trace; }
const std::vector<Alert>& Simulator::alerts() const { return impl_->detector.alerts(); }
const std::vector<std::size_t>& Simulator::attack_frame_refs() const { return impl_->attack_refs; }
const Recipient& Simulator::ap_recipient() const { return impl_->ap_rx; }
const Originator& Simulator::sta_originator(int sta) const { return const_cast<Impl&>(*impl_).station(sta).tx; }
bool Simulator::ap_stalled() const { return impl_->stalled(); }

RunOutput run_scenario(const Scenario& scenario, SimOptions options) {
  Simulator sim(scenario, std::move(options));
  sim.run();
  RunOutput out;
  out.metrics = sim.metrics();
  out.trace = sim.trace();
  out.alerts = sim.alerts();
  out.attack_frame_refs = sim.attack_frame_refs();
  return out;
}

void derive_verdicts(Metrics& m, const Scenario& sc) {
  const Tick n = m.ticks;
  for (std::size_t i = 0; i < m.stas.size(); ++i) {
    auto& s = m.stas[i];
    s.paralysis_start.reset();
    s.time_to_paralysis.reset();
    s.recovered_without_intervention = false;
    s.recovered_after_reassociation = false;
    s.recovery_tick.reset();
    s.recovery = RecoveryMode::None;

    for (Tick t = 0; t + kParalysisWindowTicks <= n; ++t) {
      bool zero = true, offered = false;
      for (Tick k = t; k < t + kParalysisWindowTicks && zero; ++k) {
        zero = s.associated[k] && s.goodput[k] == 0;
        offered = offered || s.offered[k];
      }
      if (zero && offered) {
        s.paralysis_start = t;
        break;
      }
    }
    if (!s.paralysis_start) continue;
    const Tick p = *s.paralysis_start;
    s.time_to_paralysis = m.attack_frames_through[p];

    std::optional<Tick> resume;
    for (Tick t = p + 1; t < n && !resume; ++t)
      if (s.goodput[t] > 0) resume = t;
    if (!resume) {
      s.recovery = RecoveryMode::NotRecovered;
      continue;
    }
    s.recovery_tick = resume;
    // Reassociation gets the credit only when traffic resumes right after it.
    const bool by_reassoc = sc.reassociate && sc.reassociate->sta == static_cast<int>(i) + 1 &&
                            sc.reassociate->tick > p && sc.reassociate->tick <= *resume &&
                            *resume - sc.reassociate->tick < kParalysisWindowTicks;
    s.recovered_after_reassociation = by_reassoc;
    s.recovered_without_intervention = !by_reassoc;
    s.recovery = by_reassoc ? RecoveryMode::ReassociationOnly : RecoveryMode::Self;
  }
}

}  // namespace blockack

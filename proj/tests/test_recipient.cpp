#include <algorithm>
#include <map>
#include <set>

#include "blockack/recipient.hpp"
#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"

using namespace blockack;

namespace {

const MacAddress kAp({0x02, 0, 0, 0, 1, 0});
const MacAddress kSta({0x02, 0, 0, 0, 0, 1});
const Capabilities kFull{true, true, true};

BehaviorProfile profile(const char* name) { return *find_profile(name); }

AddbaRequest addba(int ssn, bool robust = false, int buffer = 64) {
  AddbaRequest r;
  r.ra = kAp;
  r.ta = kSta;
  r.bssid = kAp;
  r.robust = robust;
  r.dialog_token = 1;
  r.buffer_size = buffer;
  r.ssc = Ssc{FragNum(0), SeqNum(ssn)};
  return r;
}

QosData qos(int sn, std::uint8_t tag = 0) {
  return QosData{kAp, kSta, kAp, 0, SeqNum(sn), FragNum(0), Bytes{tag}};
}

Bar bar(int ssn, int fn = 0) { return Bar{kAp, kSta, kDefaultBarControl, Ssc{FragNum(fn), SeqNum(ssn)}}; }

int win_start(const Recipient& rx) { return rx.find(kSta, 0)->reorder.win_start_b.value(); }

// Textbook receive reordering for one agreement.
struct ReorderModel {
  int start;
  int size;
  std::map<int, bool> held;  // offset from start -> present

  std::vector<int> receive(int sn) {
    std::vector<int> out;
    int d = (sn - start + 4096) % 4096;
    if (d >= 2048) return out;
    if (d >= size) {
      const int shift = d - size + 1;
      for (int k = 0; k < shift; ++k)
        if (held.count(k)) out.push_back((start + k) % 4096);
      std::map<int, bool> moved;
      for (auto [k, v] : held)
        if (k >= shift) moved[k - shift] = v;
      held = moved;
      start = (start + shift) % 4096;
      d = size - 1;
    } else if (held.count(d)) {
      return out;
    }
    held[d] = true;
    while (held.count(0)) {
      out.push_back(start);
      std::map<int, bool> moved;
      for (auto [k, v] : held)
        if (k > 0) moved[k - 1] = v;
      held = moved;
      start = (start + 1) % 4096;
    }
    return out;
  }
};

}  // namespace

TEST_CASE("forward-half predicate matches the oracle on every pair near the edges") {
  for (int start : {0, 1, 1175, 2047, 2048, 4094, 4095})
    for (int ssn = 0; ssn < 4096; ++ssn)
      REQUIRE(in_forward_half(SeqNum(start), SeqNum(ssn)) == oracle::window_advances(start, ssn));
}

TEST_CASE("ADDBA establishment") {
  Recipient rx(kAp);
  auto r = rx.establish_agreement(addba(100, false, 128), {}, {});
  CHECK(r.created);
  CHECK(r.response.status == 0);
  CHECK(r.response.buffer_size == 64);
  CHECK(r.response.dialog_token == 1);
  CHECK(r.response.ra == kSta);
  const auto* a = rx.find(kSta, 0);
  REQUIRE(a);
  CHECK(a->reorder.win_start_b.value() == 100);
  CHECK(a->reorder.win_end_b.value() == 163);
  CHECK_FALSE(a->protected_agreement);

  SUBCASE("duplicate request is declined") {
    auto again = rx.establish_agreement(addba(5), {}, {});
    CHECK_FALSE(again.created);
    CHECK(again.response.status == kStatusRequestDeclined);
    CHECK(win_start(rx) == 100);
  }
  SUBCASE("buffer size 0 means the maximum") {
    Recipient other(kAp);
    CHECK(other.establish_agreement(addba(0, false, 0), {}, {}).response.buffer_size == 64);
  }
  SUBCASE("small windows are honoured") {
    Recipient other(kAp);
    other.establish_agreement(addba(4090, false, 16), {}, {});
    CHECK(other.find(kSta, 0)->reorder.win_end_b.value() == (4090 + 15) % 4096);
  }
}

TEST_CASE("QoS data without an agreement is passed straight through") {
  Recipient rx(kAp);
  auto r = rx.receive_qos_data(qos(9), 0);
  CHECK(r.outcome == RxOutcome::Bypassed);
  REQUIRE(r.forwarded.size() == 1);
  CHECK(r.forwarded[0].sn.value() == 9);
}

TEST_CASE("reordering matches the model under random arrival") {
  gen::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int start = gen::uniform(rng, 0, 4095);
    const int size = gen::uniform(rng, 1, 64);
    Recipient rx(kAp);
    rx.establish_agreement(addba(start, false, size), {}, {});
    ReorderModel model{start, size, {}};
    int base = start;
    std::set<int> seen_forwarded;
    for (int step = 0; step < 400; ++step) {
      // Mostly near the window, sometimes far ahead or behind, with repeats.
      int sn;
      const int pick = gen::uniform(rng, 0, 19);
      if (pick == 0)
        sn = gen::uniform(rng, 0, 4095);
      else
        sn = (base + gen::uniform(rng, -8, size + 8) + 4096) % 4096;
      if (gen::uniform(rng, 0, 3) == 0) base = (base + gen::uniform(rng, 0, 6)) % 4096;

      auto got = rx.receive_qos_data(qos(sn), step);
      std::vector<int> got_sns;
      for (const auto& m : got.forwarded) got_sns.push_back(m.sn.value());
      const auto want = model.receive(sn);
      REQUIRE(got_sns == want);

      const auto* a = rx.find(kSta, 0);
      REQUIRE(a->reorder.win_start_b.value() == model.start);
      REQUIRE(static_cast<int>(a->reorder.buffered.size()) == static_cast<int>(model.held.size()));
      for (const auto& [b, _] : a->reorder.buffered)
        REQUIRE(seq_in_window(a->reorder.win_start_b, a->reorder.win_size_b, SeqNum(b)));
      REQUIRE(a->reorder.win_end_b == a->reorder.win_start_b + (a->reorder.win_size_b - 1));
    }
  }
}

TEST_CASE("in-order delivery") {
  Recipient rx(kAp);
  rx.establish_agreement(addba(4094), {}, {});
  std::vector<int> out;
  for (int sn : {4095, 0, 4094, 2, 1}) {
    for (auto& m : rx.receive_qos_data(qos(sn), 0).forwarded) out.push_back(m.sn.value());
  }
  CHECK(out == std::vector<int>{4094, 4095, 0, 1, 2});
  CHECK(win_start(rx) == 3);
  CHECK(rx.receive_qos_data(qos(1), 0).outcome == RxOutcome::Stale);
}

TEST_CASE("duplicates inside the window are dropped") {
  Recipient rx(kAp);
  rx.establish_agreement(addba(0), {}, {});
  CHECK(rx.receive_qos_data(qos(3), 0).outcome == RxOutcome::Buffered);
  CHECK(rx.receive_qos_data(qos(3), 0).outcome == RxOutcome::Duplicate);
  CHECK(rx.find(kSta, 0)->duplicate_drops == 1);
}

TEST_CASE("solicited BAR follows the forward-half rule") {
  const auto permissive = profile("permissive");
  gen::Rng rng(5);
  for (int i = 0; i < 3000; ++i) {
    const int start = gen::uniform(rng, 0, 4095);
    const int ssn = gen::uniform(rng, 0, 4095);
    Recipient rx(kAp);
    rx.establish_agreement(addba((start + 4095) % 4096), {}, {});
    rx.receive_qos_data(qos((start + 4095) % 4096), 10);
    REQUIRE(win_start(rx) == start);
    auto r = rx.receive_bar(bar(ssn), permissive, RxContext{12, {}});
    const bool moved = oracle::window_advances(start, ssn);
    REQUIRE(win_start(rx) == (moved ? ssn : start));
    REQUIRE(r.verdict == (moved ? BarVerdict::WindowAdvanced : BarVerdict::NoChange));
    REQUIRE_FALSE(rx.find(kSta, 0)->desynchronized);
    REQUIRE(r.response);
  }
}

TEST_CASE("BAR flushes buffered MSDUs that leave the window") {
  Recipient rx(kAp);
  rx.establish_agreement(addba(0), {}, {});
  for (int sn : {2, 3, 6}) rx.receive_qos_data(qos(sn), 0);
  auto r = rx.receive_bar(bar(3), profile("standard"), RxContext{1, {}});
  std::vector<int> out;
  for (auto& m : r.forwarded) out.push_back(m.sn.value());
  CHECK(out == std::vector<int>{2, 3});
  CHECK(win_start(rx) == 4);
  REQUIRE(r.response);
  CHECK(r.response->bitmap.test(0));   // 3 was received
  CHECK(r.response->bitmap.test(3));   // 6
  CHECK_FALSE(r.response->bitmap.test(1));
}

TEST_CASE("unsolicited BAR on the permissive profile") {
  Recipient rx(kAp);
  rx.establish_agreement(addba(500), {}, {});
  for (int sn = 500; sn < 508; ++sn) rx.receive_qos_data(qos(sn), 0);
  rx.receive_bar(bar(500), profile("permissive"), RxContext{1, {}});  // closes the block

  auto r = rx.receive_bar(bar(1700, 4), profile("permissive"), RxContext{2, {}});
  CHECK(r.verdict == BarVerdict::WindowAdvanced);
  CHECK(r.desynchronized);
  REQUIRE(r.response);
  CHECK(r.response->bitmap.none());
  CHECK(r.response->ssc.ssn.value() == 1700);
  CHECK(r.response->ssc.fn.value() == 0);
  CHECK(r.response->ra == kSta);

  // The latch makes every later MSDU stale, even ones inside the new window.
  CHECK(rx.receive_qos_data(qos(508), 3).outcome == RxOutcome::Stale);
  CHECK(rx.receive_qos_data(qos(1700), 3).outcome == RxOutcome::Stale);

  SUBCASE("re-establishing clears it") {
    rx.teardown_peer(kSta);
    rx.establish_agreement(addba(509), {}, {});
    CHECK(rx.receive_qos_data(qos(509), 4).outcome == RxOutcome::Forwarded);
  }
}

TEST_CASE("a BAR long after the last data is unsolicited") {
  Recipient rx(kAp, RecipientConfig{64});
  rx.establish_agreement(addba(0), {}, {});
  rx.receive_qos_data(qos(0), 0);
  auto r = rx.receive_bar(bar(100), profile("asus_like"), RxContext{65, {}});
  CHECK(r.verdict == BarVerdict::DroppedUnsolicited);
  CHECK_FALSE(r.response);
  auto r2 = rx.receive_bar(bar(100), profile("asus_like"), RxContext{64, {}});
  CHECK(r2.verdict == BarVerdict::WindowAdvanced);
}

TEST_CASE("defense checks") {
  Recipient rx(kAp);
  rx.establish_agreement(addba(0), {}, {});
  rx.receive_qos_data(qos(0), 0);
  const auto strict = strict_profile();

  CHECK(rx.receive_bar(bar(1, 4), strict, RxContext{1, {}}).verdict == BarVerdict::DroppedFn);
  auto nobody = [](const MacAddress&) { return false; };
  CHECK(rx.receive_bar(bar(1), strict, RxContext{1, nobody}).verdict == BarVerdict::DroppedUnknownTa);

  auto tplink = profile("tplink_like");
  CHECK(rx.receive_bar(bar(40), tplink, RxContext{1, {}}).verdict == BarVerdict::DroppedSsnOutOfContext);
  CHECK(rx.receive_bar(bar(0), tplink, RxContext{1, {}}).verdict == BarVerdict::NoChange);
  CHECK(win_start(rx) == 1);
}

TEST_CASE("zyxel-like rewind needs a received SSN and no open block") {
  const auto zyxel = profile("zyxel_like");
  Recipient rx(kAp);
  rx.establish_agreement(addba(0), {}, {});
  for (int sn = 0; sn < 8; ++sn) rx.receive_qos_data(qos(sn), 0);

  // Solicited BAR for the block: routine, no rewind.
  auto legit = rx.receive_bar(bar(0), zyxel, RxContext{0, {}});
  CHECK(legit.verdict == BarVerdict::NoChange);
  CHECK(win_start(rx) == 8);

  // Random SSN is not on the scoreboard.
  CHECK(rx.receive_bar(bar(1234), zyxel, RxContext{1, {}}).verdict == BarVerdict::DroppedSsnOutOfContext);

  // A received SN, sent outside the exchange, rewinds and desynchronizes.
  auto forged = rx.receive_bar(bar(3), zyxel, RxContext{1, {}});
  CHECK(forged.verdict == BarVerdict::WindowAdvanced);
  CHECK(forged.desynchronized);
  CHECK(win_start(rx) == 3);
}

TEST_CASE("protected block ack") {
  const auto prot = profile("protected_permissive");
  Recipient rx(kAp);
  rx.establish_agreement(addba(0, true), kFull, kFull);
  REQUIRE(rx.find(kSta, 0)->protected_agreement);

  gen::Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    if (i % 3 == 0) rx.receive_qos_data(qos(win_start(rx)), i);
    const int before = win_start(rx);
    auto r = rx.receive_bar(bar(gen::uniform(rng, 0, 4095), gen::uniform(rng, 0, 1) * 4), prot, RxContext{i, {}});
    CHECK(win_start(rx) == before);
    CHECK(r.verdict == BarVerdict::IgnoredProtected);
  }

  const int start = win_start(rx);
  CHECK(rx.robust_addba_update(addba((start + 10) % 4096, false), 0).verdict == AddbaUpdateVerdict::IgnoredNotRobust);
  CHECK(rx.robust_addba_update(addba((start + 3000) % 4096, true), 0).verdict == AddbaUpdateVerdict::NoChange);
  CHECK(win_start(rx) == start);
  CHECK(rx.robust_addba_update(addba((start + 10) % 4096, true), 0).verdict == AddbaUpdateVerdict::WindowAdvanced);
  CHECK(win_start(rx) == (start + 10) % 4096);

  SUBCASE("one incapable peer leaves the agreement unprotected") {
    Recipient plain(kAp);
    plain.establish_agreement(addba(0), kFull, Capabilities{true, true, false});
    CHECK_FALSE(plain.find(kSta, 0)->protected_agreement);
    CHECK(plain.robust_addba_update(addba(10, true), 0).verdict ==
          AddbaUpdateVerdict::IgnoredNoProtectedAgreement);
    CHECK(plain.receive_bar(bar(10), prot, RxContext{0, {}}).verdict == BarVerdict::WindowAdvanced);
  }
}

TEST_CASE("scoreboard bitmap") {
  Scoreboard sb;
  sb.win_start_r = SeqNum(4090);
  for (int sn : {4090, 4095, 3}) sb.mark(SeqNum(sn));
  auto bm = sb.bitmap_from(SeqNum(4090));
  CHECK(bm.test(0));
  CHECK(bm.test(5));
  CHECK(bm.test(9));
  CHECK(bm.count() == 3);
  sb.mark(SeqNum(4090 + 70 - 4096));  // slides the window by 7
  CHECK(sb.win_start_r.value() == (4090 + 7) % 4096);
  CHECK_FALSE(sb.has(SeqNum(4090)));
  CHECK(sb.has(SeqNum(3)));
}

TEST_CASE("teardown flushes buffered MSDUs in order and expiry honours timeouts") {
  Recipient rx(kAp);
  auto req = addba(10);
  req.timeout = 5;
  rx.establish_agreement(req, {}, {}, 0);
  rx.receive_qos_data(qos(13), 1);
  rx.receive_qos_data(qos(12), 1);
  CHECK(rx.expire(5).empty());
  auto gone = rx.expire(6);
  REQUIRE(gone.size() == 1);
  CHECK(rx.agreement_count() == 0);

  rx.establish_agreement(addba(10), {}, {});
  rx.receive_qos_data(qos(13), 1);
  rx.receive_qos_data(qos(12), 1);
  auto t = rx.teardown_agreement(Delba{kAp, kSta, kAp, false, 0, true, 1});
  CHECK(t.removed);
  REQUIRE(t.flushed.size() == 2);
  CHECK(t.flushed[0].sn.value() == 12);
  CHECK_FALSE(rx.teardown_agreement(Delba{kAp, kSta, kAp, false, 0, true, 1}).removed);
}

#include "blockack/originator.hpp"
#include "doctest.h"

using namespace blockack;

namespace {

const MacAddress kAp({0x02, 0, 0, 0, 1, 0});
const MacAddress kSta({0x02, 0, 0, 0, 0, 1});
const Capabilities kFull{true, true, true};

std::vector<Bytes> payloads(int n, std::uint8_t first = 0) {
  std::vector<Bytes> v;
  for (int i = 0; i < n; ++i) v.push_back(Bytes{static_cast<std::uint8_t>(first + i)});
  return v;
}

Ba ack(const Bar& bar, std::uint64_t bits) {
  Ba ba{bar.ta, bar.ra, bar.bar_control, Ssc{FragNum(0), bar.ssc.ssn}, {}};
  for (int k = 0; k < 64; ++k)
    if (bits >> k & 1) ba.bitmap.set(k);
  return ba;
}

// Originator STA talking to a recipient AP, session already open.
struct Pair {
  Originator tx{kSta, OriginatorConfig{2, 64, {}}};
  Recipient rx{kAp};
  BehaviorProfile policy = standard_profile();

  Pair() {
    auto req = tx.initiate_session(kAp, 0, kAp);
    auto est = rx.establish_agreement(req, {}, {});
    REQUIRE(tx.on_addba_response(est.response, {}));
  }
};

}  // namespace

TEST_CASE("session setup") {
  Originator tx(kSta, OriginatorConfig{4, 32, {}});
  auto req = tx.initiate_session(kAp, 3, kAp);
  CHECK(req.ra == kAp);
  CHECK(req.ta == kSta);
  CHECK(req.tid == 3);
  CHECK(req.buffer_size == 32);
  CHECK(req.dialog_token == 1);
  CHECK(req.ssc.ssn.value() == 0);
  CHECK_THROWS_AS(tx.initiate_session(kAp, 3, kAp), OriginatorError);

  AddbaResponse wrong{kSta, kAp, kAp, false, 9, 0, false, BlockAckPolicy::Immediate, 3, 32, 0};
  CHECK_FALSE(tx.on_addba_response(wrong, {}));  // token mismatch keeps it pending
  CHECK_THROWS_AS(tx.initiate_session(kAp, 3, kAp), OriginatorError);
  wrong.dialog_token = 1;
  wrong.status = kStatusRequestDeclined;
  CHECK_FALSE(tx.on_addba_response(wrong, {}));
  CHECK_FALSE(tx.find(kAp, 3));

  auto again = tx.initiate_session(kAp, 3, kAp);
  CHECK(again.dialog_token == 2);
  AddbaResponse ok{kSta, kAp, kAp, false, 2, 0, false, BlockAckPolicy::Immediate, 3, 16, 0};
  CHECK(tx.on_addba_response(ok, {}));
  const auto* a = tx.find(kAp, 3);
  REQUIRE(a);
  CHECK(a->window.win_size_o == 16);
  CHECK(a->free_slots() == 16);
  CHECK_FALSE(a->protected_agreement);
}

TEST_CASE("dialog tokens cycle through 1..255") {
  Originator tx(kSta);
  int last = 0;
  for (int i = 0; i < 300; ++i) {
    auto req = tx.initiate_session(kAp, 0, kAp);
    CHECK(req.dialog_token >= 1);
    CHECK(req.dialog_token <= 255);
    if (i > 0) CHECK(req.dialog_token == last % 255 + 1);
    last = req.dialog_token;
    tx.reset_peer(kAp);
  }
}

TEST_CASE("send_block numbers MSDUs and trails a BAR") {
  Pair p;
  auto blk = p.tx.send_block(kAp, 0, payloads(8));
  REQUIRE(blk.data.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(blk.data[i].sn.value() == i);
    CHECK(blk.data[i].ra == kAp);
    CHECK(blk.data[i].fn.value() == 0);
  }
  REQUIRE(blk.bar);
  CHECK(blk.bar->ssc.ssn.value() == 0);
  CHECK(blk.bar->ssc.fn.value() == 0);
  CHECK(blk.bar->tid() == 0);
  CHECK(p.tx.find(kAp, 0)->bar_outstanding);
  CHECK(p.tx.find(kAp, 0)->free_slots() == 56);
  CHECK_THROWS_AS(p.tx.send_block(kAp, 0, payloads(57)), OriginatorError);
  CHECK_THROWS_AS(p.tx.send_block(kSta, 0, payloads(1)), OriginatorError);
}

TEST_CASE("full exchange through a recipient") {
  Pair p;
  for (int round = 0; round < 700; ++round) {  // wraps the sequence space
    auto blk = p.tx.send_block(kAp, 0, payloads(8));
    int delivered = 0;
    for (const auto& q : blk.data) delivered += static_cast<int>(p.rx.receive_qos_data(q, round).forwarded.size());
    CHECK(delivered == 8);
    auto bar = p.rx.receive_bar(*blk.bar, p.policy, RxContext{round, {}});
    REQUIRE(bar.response);
    auto res = p.tx.process_ba(*bar.response, p.policy, TxContext{round, {}});
    CHECK(res.verdict == BaVerdict::Processed);
    CHECK(res.released.size() == 8);
    CHECK(res.retransmit.empty());
  }
  CHECK(p.tx.next_sn(kAp, 0).value() == 700 * 8 % 4096);
  CHECK(p.tx.find(kAp, 0)->window.outstanding.empty());
}

TEST_CASE("zero bits trigger retransmission then failure") {
  Pair p;  // max_retries = 2
  auto blk = p.tx.send_block(kAp, 0, payloads(4));
  auto r = p.tx.process_ba(ack(*blk.bar, 0b1011), p.policy, TxContext{});
  CHECK(r.released.size() == 3);
  REQUIRE(r.retransmit.size() == 1);
  CHECK(r.retransmit[0].value() == 2);
  CHECK(p.tx.find(kAp, 0)->window.win_start_o.value() == 2);
  CHECK(p.tx.pending_retransmissions(kAp, 0) == 1);

  for (int attempt = 1; attempt <= 2; ++attempt) {
    auto again = p.tx.send_block(kAp, 0, {});
    REQUIRE(again.data.size() == 1);
    CHECK(again.data[0].sn.value() == 2);
    CHECK(again.data[0].payload == Bytes{2});
    auto res = p.tx.process_ba(ack(*again.bar, 0), p.policy, TxContext{});
    if (attempt < 2) {
      CHECK(res.retransmit.size() == 1);
    } else {
      REQUIRE(res.failed.size() == 1);
      CHECK(res.failed[0].sn.value() == 2);
    }
  }
  const auto* a = p.tx.find(kAp, 0);
  CHECK(a->window.win_start_o.value() == 4);
  CHECK(a->window.outstanding.empty());
}

TEST_CASE("BA timeout schedules every unacked MSDU") {
  Pair p;
  p.tx.send_block(kAp, 0, payloads(5));
  auto r = p.tx.on_ba_timeout(kAp, 0);
  CHECK(r.retransmit.size() == 5);
  CHECK_FALSE(p.tx.find(kAp, 0)->bar_outstanding);
  auto blk = p.tx.send_block(kAp, 0, payloads(1, 50));
  REQUIRE(blk.data.size() == 6);
  CHECK(blk.data[5].sn.value() == 5);
  CHECK(p.tx.on_ba_timeout(kSta, 0).verdict == BaVerdict::NoAgreement);
}

TEST_CASE("BA gates") {
  Pair p;
  auto blk = p.tx.send_block(kAp, 0, payloads(2));
  Ba forged = ack(*blk.bar, 0);
  forged.ssc.fn = FragNum(4);

  CHECK(p.tx.process_ba(forged, strict_profile(), TxContext{}).verdict == BaVerdict::DroppedFn);
  forged.ssc.fn = FragNum(0);
  auto nobody = [](const MacAddress&) { return false; };
  CHECK(p.tx.process_ba(forged, strict_profile(), TxContext{0, nobody}).verdict == BaVerdict::DroppedUnknownTa);

  CHECK(p.tx.process_ba(ack(*blk.bar, 0b11), p.policy, TxContext{}).verdict == BaVerdict::Processed);
  // The BAR has been answered: another BA is unsolicited.
  CHECK(p.tx.process_ba(ack(*blk.bar, 0b11), strict_profile(), TxContext{}).verdict == BaVerdict::DroppedUnsolicited);
  CHECK(p.tx.process_ba(ack(*blk.bar, 0b11), *find_profile("asus_like"), TxContext{}).verdict == BaVerdict::Stalled);

  Ba stranger = forged;
  stranger.ta = MacAddress({0x06, 1, 2, 3, 4, 5});
  CHECK(p.tx.process_ba(stranger, p.policy, TxContext{}).verdict == BaVerdict::NoAgreement);
  CHECK(p.tx.process_ba(stranger, *find_profile("asus_like"), TxContext{}).verdict == BaVerdict::Stalled);
}

TEST_CASE("protected agreements resynchronize with a robust ADDBA") {
  Originator tx(kSta, OriginatorConfig{0, 64, kFull});
  Recipient rx(kAp);
  auto est = rx.establish_agreement(tx.initiate_session(kAp, 0, kAp), kFull, kFull);
  REQUIRE(tx.on_addba_response(est.response, kFull));
  REQUIRE(tx.find(kAp, 0)->protected_agreement);
  CHECK_FALSE(tx.window_sync_request(kAp, 0, kAp));

  auto blk = tx.send_block(kAp, 0, payloads(3));
  rx.receive_qos_data(blk.data[0], 0);  // 1 and 2 are lost
  auto bar = rx.receive_bar(*blk.bar, *find_profile("protected_permissive"), RxContext{0, {}});
  CHECK(bar.verdict == BarVerdict::IgnoredProtected);
  auto res = tx.process_ba(*bar.response, standard_profile(), TxContext{});
  CHECK(res.failed.size() == 2);
  CHECK(tx.find(kAp, 0)->window.win_start_o.value() == 3);
  CHECK(rx.find(kSta, 0)->reorder.win_start_b.value() == 1);

  auto sync = tx.window_sync_request(kAp, 0, kAp);
  REQUIRE(sync);
  CHECK(sync->robust);
  CHECK(sync->ssc.ssn.value() == 3);
  CHECK(rx.robust_addba_update(*sync, 1).verdict == AddbaUpdateVerdict::WindowAdvanced);
  CHECK(rx.find(kSta, 0)->reorder.win_start_b.value() == 3);
  CHECK_FALSE(tx.window_sync_request(kAp, 0, kAp));
}

TEST_CASE("ending a session keeps the sequence counter") {
  Pair p;
  p.tx.send_block(kAp, 0, payloads(5));
  auto end = p.tx.end_session(kAp, 0, 39, kAp);
  CHECK(end.delba.ra == kAp);
  CHECK(end.delba.initiator);
  CHECK(end.delba.reason == 39);
  CHECK(end.abandoned.size() == 5);
  CHECK_FALSE(p.tx.find(kAp, 0));
  CHECK(p.tx.next_sn(kAp, 0).value() == 5);
  CHECK_THROWS_AS(p.tx.end_session(kAp, 0, 1, kAp), OriginatorError);
  CHECK(p.tx.initiate_session(kAp, 0, kAp).ssc.ssn.value() == 5);
  CHECK(p.tx.reset_peer(kAp).empty());
}

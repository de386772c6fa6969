#pragma once

// Originator side: ADDBA initiation, the transmit window, block transmission
// with a trailing BAR, and BA processing.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockack/frame.hpp"
#include "blockack/profile.hpp"
#include "blockack/recipient.hpp"
#include "blockack/types.hpp"

namespace blockack {

class OriginatorError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct OutstandingMsdu {
  Bytes payload;
  bool acked = false;
  bool needs_retransmit = false;
  int retries = 0;
};

struct TransmitWindow {
  SeqNum win_start_o;
  int win_size_o = kMaxWindow;
  std::map<int, OutstandingMsdu> outstanding;  // keyed by SN value
};

struct OriginatorAgreement {
  MacAddress recipient;
  int tid = 0;
  BlockAckPolicy policy = BlockAckPolicy::Immediate;
  bool protected_agreement = false;
  TransmitWindow window;
  SeqNum next_sn;
  bool bar_outstanding = false;
  /// Retry exhaustion moved WinStartO; a protected agreement needs a robust
  /// ADDBA to move the recipient.
  bool needs_window_sync = false;

  int free_slots() const { return window.win_size_o - seq_distance(window.win_start_o, next_sn); }
};

struct OriginatorConfig {
  int max_retries = 4;
  int buffer_size = 64;
  Capabilities caps;
};

struct BlockResult {
  std::vector<QosData> data;
  std::optional<Bar> bar;
};

enum class BaVerdict { Processed, DroppedFn, DroppedUnknownTa, DroppedUnsolicited, NoAgreement, Stalled };
std::string_view ba_verdict_name(BaVerdict v);

struct BaResult {
  BaVerdict verdict = BaVerdict::NoAgreement;
  std::vector<SeqNum> released;
  std::vector<SeqNum> retransmit;
  /// MSDUs given up after max_retries; their payloads.
  std::vector<Msdu> failed;
};

struct TxContext {
  Tick now = 0;
  std::function<bool(const MacAddress&)> is_associated;
};

class Originator {
 public:
  explicit Originator(MacAddress self, OriginatorConfig config = {});

  const MacAddress& address() const { return self_; }

  /// Throws OriginatorError when a session (live or pending) exists for the key.
  AddbaRequest initiate_session(const MacAddress& recipient, int tid, const MacAddress& bssid);
  /// Opens the pending session. Returns false if no request was pending or the
  /// response declined.
  bool on_addba_response(const AddbaResponse& resp, const Capabilities& peer_caps);

  /// Pending retransmissions first, then `msdus` numbered from next_sn.
  /// Throws OriginatorError if `msdus` exceeds the free window slots.
  BlockResult send_block(const MacAddress& recipient, int tid, std::vector<Bytes> msdus);
  BaResult process_ba(const Ba& f, const BehaviorProfile& policy, const TxContext& ctx);
  /// The BAR went unanswered: every unacked MSDU is scheduled for retransmission.
  BaResult on_ba_timeout(const MacAddress& recipient, int tid);

  /// Builds the robust ADDBA request that moves a protected recipient to WinStartO.
  std::optional<AddbaRequest> window_sync_request(const MacAddress& recipient, int tid, const MacAddress& bssid);

  struct SessionEnd {
    Delba delba;
    /// Unacknowledged MSDUs dropped with the session.
    std::vector<Msdu> abandoned;
  };
  /// Throws OriginatorError for an unknown key.
  SessionEnd end_session(const MacAddress& recipient, int tid, int reason, const MacAddress& bssid);
  /// Drops local state for every TID with `recipient` without emitting frames.
  std::vector<Msdu> reset_peer(const MacAddress& recipient);

  const OriginatorAgreement* find(const MacAddress& recipient, int tid) const;
  /// Next SN this node would use toward `recipient`/`tid`.
  SeqNum next_sn(const MacAddress& recipient, int tid) const;
  int pending_retransmissions(const MacAddress& recipient, int tid) const;

  std::string dump() const;

 private:
  void schedule_or_fail(OriginatorAgreement& a, int sn, BaResult& out);
  void advance_window(OriginatorAgreement& a);

  MacAddress self_;
  OriginatorConfig config_;
  int dialog_token_ = 0;
  std::map<AgreementKey, OriginatorAgreement> agreements_;
  std::map<AgreementKey, AddbaRequest> pending_;
  std::map<AgreementKey, SeqNum> sequence_;  // survives session teardown
};

}  // namespace blockack

#pragma once

// Recipient side of a block ack agreement: the receive reordering buffer, the
// scoreboard used to build BA responses, and BAR / robust ADDBA handling.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blockack/frame.hpp"
#include "blockack/profile.hpp"
#include "blockack/types.hpp"

namespace blockack {

inline constexpr int kMaxWindow = 64;
/// Status code used to decline an ADDBA request.
inline constexpr int kStatusRequestDeclined = 37;

/// 0 < (ssn - start) mod 4096 < 2048.
constexpr bool in_forward_half(SeqNum start, SeqNum ssn) {
  const int d = seq_distance(start, ssn);
  return d > 0 && d < kHalfSeqSpace;
}

struct Msdu {
  SeqNum sn;
  Bytes payload;
  bool operator==(const Msdu&) const = default;
};

struct ReorderBuffer {
  SeqNum win_start_b;
  SeqNum win_end_b;
  int win_size_b = kMaxWindow;
  std::map<int, Msdu> buffered;  // keyed by SN value

  bool contains(SeqNum sn) const { return buffered.count(sn.value()) != 0; }
};

struct Scoreboard {
  SeqNum win_start_r;
  int win_size_r = kMaxWindow;
  std::uint64_t received = 0;  // bit k <-> SN win_start_r + k

  SeqNum win_end_r() const { return win_start_r + (win_size_r - 1); }
  bool has(SeqNum sn) const;
  void mark(SeqNum sn);
  void rebase(SeqNum new_start);
  BaBitmap bitmap_from(SeqNum ssn) const;
};

struct RecipientAgreement {
  MacAddress originator;
  MacAddress recipient;
  int tid = 0;
  BlockAckPolicy policy = BlockAckPolicy::Immediate;
  bool protected_agreement = false;
  ReorderBuffer reorder;
  Scoreboard scoreboard;
  Tick timeout = 0;

  Tick last_activity = 0;
  std::optional<Tick> last_qos;
  /// QoS data received since the last BAR: a block is in progress.
  bool block_open = false;
  bool desynchronized = false;

  std::uint64_t forwarded = 0;
  std::uint64_t stale_drops = 0;
  std::uint64_t duplicate_drops = 0;
};

struct RecipientConfig {
  Tick solicit_window_ticks = 64;
};

/// Per-frame environment supplied by the owning node.
struct RxContext {
  Tick now = 0;
  /// Empty means every transmitter counts as associated.
  std::function<bool(const MacAddress&)> is_associated;
};

enum class RxOutcome { Bypassed, Forwarded, Buffered, Duplicate, Stale };

struct RxResult {
  RxOutcome outcome = RxOutcome::Bypassed;
  std::vector<Msdu> forwarded;
};

enum class BarVerdict {
  DroppedFn,
  DroppedUnknownTa,
  DroppedUnsolicited,
  DroppedSsnOutOfContext,
  WindowAdvanced,
  IgnoredProtected,
  NoChange,
  NoAgreement,
};
std::string_view bar_verdict_name(BarVerdict v);
bool is_drop(BarVerdict v);

struct BarResult {
  BarVerdict verdict = BarVerdict::NoAgreement;
  std::optional<Ba> response;
  std::vector<Msdu> forwarded;
  /// The move desynchronized a vulnerable reorder buffer.
  bool desynchronized = false;
};

enum class AddbaUpdateVerdict { WindowAdvanced, NoChange, IgnoredNotRobust, IgnoredNoProtectedAgreement };

struct AddbaUpdateResult {
  AddbaUpdateVerdict verdict = AddbaUpdateVerdict::IgnoredNoProtectedAgreement;
  std::vector<Msdu> forwarded;
};

struct EstablishResult {
  AddbaResponse response;
  bool created = false;
};

struct TeardownResult {
  bool removed = false;
  std::vector<Msdu> flushed;
};

class Recipient {
 public:
  explicit Recipient(MacAddress self, RecipientConfig config = {});

  const MacAddress& address() const { return self_; }

  EstablishResult establish_agreement(const AddbaRequest& req, const Capabilities& local_caps,
                                      const Capabilities& peer_caps, Tick now = 0);
  TeardownResult teardown_agreement(const Delba& delba);
  /// Removes the agreement with `originator` on every TID.
  std::vector<Msdu> teardown_peer(const MacAddress& originator);

  RxResult receive_qos_data(const QosData& f, Tick now);
  BarResult receive_bar(const Bar& f, const BehaviorProfile& policy, const RxContext& ctx);
  /// Applies an unsolicited BA's starting sequence number like a BAR's.
  /// No response is produced.
  BarResult receive_ba_as_bar(const Ba& f, const BehaviorProfile& policy, const RxContext& ctx);
  AddbaUpdateResult robust_addba_update(const AddbaRequest& req, Tick now);

  /// Drops agreements idle for at least their timeout; 0 disables expiry.
  std::vector<AgreementKey> expire(Tick now);

  const RecipientAgreement* find(const MacAddress& originator, int tid) const;
  std::size_t agreement_count() const { return agreements_.size(); }

  /// One line per agreement: key, window, buffered SNs, scoreboard.
  std::string dump() const;

 private:
  bool solicited(const RecipientAgreement& a, Tick now) const;
  BarResult apply_bar_rules(const MacAddress& ta, int tid, const Ssc& ssc, const BehaviorProfile& policy,
                            const RxContext& ctx);

  MacAddress self_;
  RecipientConfig config_;
  std::map<AgreementKey, RecipientAgreement> agreements_;
};

/// Moves WinStartB to `new_start`, forwarding buffered MSDUs that leave the
/// window in SN order followed by the consecutive run at the new start.
std::vector<Msdu> move_window(RecipientAgreement& a, SeqNum new_start);

}  // namespace blockack

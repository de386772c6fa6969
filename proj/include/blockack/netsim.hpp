#pragma once

// Tick-driven simulation of one BSS: an AP, its STAs and an optional attacker.
//
// Each tick runs, in order: scheduled association events, attacker frames,
// one uplink TXOP per STA (block, BAR, BA), one downlink TXOP per STA, then
// metric collection. Every frame passes through the codec on its way across
// the medium.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "blockack/attack.hpp"
#include "blockack/detector.hpp"
#include "blockack/originator.hpp"
#include "blockack/pcap.hpp"
#include "blockack/profile.hpp"
#include "blockack/recipient.hpp"
#include "blockack/scenario.hpp"

namespace blockack {

class SimError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr Tick kParalysisWindowTicks = 10;

MacAddress ap_address();
/// 1-based STA index.
MacAddress sta_address(int index);

/// Client-side rules used by every simulated STA regardless of the AP profile.
BehaviorProfile client_profile();

enum class RecoveryMode { None, Self, ReassociationOnly, NotRecovered };
std::string_view recovery_mode_name(RecoveryMode m);

struct StaMetrics {
  MacAddress address;
  /// MSDUs delivered per tick: uplink at the AP plus downlink at the STA.
  std::vector<std::uint32_t> goodput;
  std::vector<std::uint32_t> uplink;
  std::vector<std::uint32_t> downlink;
  std::vector<bool> associated;
  /// A block was offered in either direction during the tick.
  std::vector<bool> offered;

  std::uint64_t generated = 0;
  std::uint64_t stale_drops = 0;
  std::uint64_t failed = 0;

  std::optional<Tick> paralysis_start;
  /// Attack frames injected up to and including paralysis_start.
  std::optional<std::uint64_t> time_to_paralysis;
  bool recovered_without_intervention = false;
  bool recovered_after_reassociation = false;
  std::optional<Tick> recovery_tick;
  RecoveryMode recovery = RecoveryMode::None;
};

struct Metrics {
  std::string scenario;
  std::string profile;
  std::optional<AttackKind> attack;
  Tick ticks = 0;
  std::vector<StaMetrics> stas;
  std::uint64_t attack_frames = 0;
  /// Cumulative attack frames at the end of each tick.
  std::vector<std::uint64_t> attack_frames_through;
  std::vector<bool> ap_stalled;
  bool attack_timed_out = false;
  std::uint64_t frames_on_medium = 0;
  std::uint64_t alert_count = 0;
  std::vector<std::pair<std::string, std::uint64_t>> alerts_by_rule;
};

/// Partition of one flow's generated MSDUs.
struct FlowConservation {
  std::string flow;
  std::uint64_t generated = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t buffered = 0;
  std::uint64_t stale_dropped = 0;
  std::uint64_t failed = 0;
  std::uint64_t in_flight = 0;
  /// Generated MSDUs in none of the categories above.
  std::uint64_t unaccounted = 0;

  bool balanced() const {
    return unaccounted == 0 && generated == forwarded + buffered + stale_dropped + failed + in_flight;
  }
};

struct SimOptions {
  bool record_trace = false;
  bool run_detector = true;
  DetectorConfig detector;
};

class Simulator {
 public:
  explicit Simulator(const Scenario& scenario, SimOptions options = {});
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Runs one tick. Throws SimError past duration_ticks.
  void step();
  void run();
  bool done() const;
  Tick now() const;

  /// 1-based STA index. Throw SimError on inconsistent membership.
  void associate(int sta);
  void disassociate(int sta);
  void reassociate(int sta);
  bool associated(int sta) const;

  /// Computes the derived paralysis and recovery fields.
  Metrics metrics() const;
  std::vector<FlowConservation> conservation() const;

  const std::vector<CapturedFrame>& trace() const;
  const std::vector<Alert>& alerts() const;
  /// Trace indices of attacker-injected frames.
  const std::vector<std::size_t>& attack_frame_refs() const;

  const Recipient& ap_recipient() const;
  const Originator& sta_originator(int sta) const;
  bool ap_stalled() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct RunOutput {
  Metrics metrics;
  std::vector<CapturedFrame> trace;
  std::vector<Alert> alerts;
  std::vector<std::size_t> attack_frame_refs;
};

RunOutput run_scenario(const Scenario& scenario, SimOptions options = {});

/// Derives paralysis and recovery fields of `m` from its time series.
void derive_verdicts(Metrics& m, const Scenario& scenario);

}  // namespace blockack

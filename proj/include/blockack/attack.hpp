#pragma once

// Forged BAR / BA floods used as simulator inputs.

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "blockack/frame.hpp"
#include "blockack/types.hpp"

namespace blockack {

enum class AttackKind { BarFlood, BarFloodSniffedSsn, BaFloodSpoofedSta, BaFloodRandomTa };

std::string_view attack_kind_name(AttackKind k);
std::optional<AttackKind> parse_attack_kind(std::string_view s);
const std::vector<AttackKind>& all_attack_kinds();

using AttackRng = std::mt19937_64;

struct AttackSpec {
  AttackKind kind = AttackKind::BarFlood;
  MacAddress target_ap;
  std::optional<MacAddress> target_sta;
  int burst_count = 128;
  int fn_value = 4;
  bool repeat = true;
  std::uint64_t rng_seed = 0;
  int frames_per_tick = 1;
  /// Sniffed variant: ticks to wait for a QoS frame before giving up.
  Tick sniff_horizon = 10000;
  /// Sniffed variant: copy the captured sequence control verbatim, FN included.
  bool raw_sequence_control = false;

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
};

class AttackTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `count` defaults to spec.burst_count.
std::vector<Bar> forge_bar_flood(const AttackSpec& spec, AttackRng& rng, std::optional<int> count = std::nullopt);
std::vector<Ba> forge_ba_flood(const AttackSpec& spec, AttackRng& rng, std::optional<int> count = std::nullopt);

/// Random locally administered unicast address.
MacAddress random_local_mac(AttackRng& rng);

/// True if `f` is addressed to or sent by the sniffing target.
bool sniff_matches(const AttackSpec& spec, const QosData& f);

/// Scans `observed` (tick, frame) in order for the first frame to or from the
/// target within `horizon` ticks of `start` and returns `count` BARs carrying
/// its SN. Throws AttackTimeout if nothing matches.
std::vector<Bar> forge_bar_sniffed(const AttackSpec& spec, const std::vector<std::pair<Tick, QosData>>& observed,
                                   Tick start, std::optional<int> count = std::nullopt);

/// Stateful attacker driven by the simulator clock: bursts of
/// burst_count frames at frames_per_tick, repeated while `repeat` is set.
class AttackEngine {
 public:
  AttackEngine(AttackSpec spec, Tick start_tick, Tick stop_tick);

  /// Passive capture for the sniffed variant.
  void observe(const QosData& f, Tick now);
  /// Frames injected this tick; empty outside [start, stop).
  std::vector<Frame> emit(Tick now);

  const AttackSpec& spec() const { return spec_; }
  std::uint64_t frames_sent() const { return sent_; }
  bool timed_out() const { return timed_out_; }
  std::optional<SeqNum> captured_sn() const { return captured_ ? std::optional(captured_->ssn) : std::nullopt; }
  std::optional<Tick> last_emit_tick() const { return last_emit_; }

 private:
  Frame next_frame();

  AttackSpec spec_;
  Tick start_;
  Tick stop_;
  AttackRng rng_;
  std::optional<Ssc> captured_;
  bool timed_out_ = false;
  int in_burst_ = 0;
  bool done_ = false;
  std::uint64_t sent_ = 0;
  std::optional<Tick> last_emit_;
};

}  // namespace blockack

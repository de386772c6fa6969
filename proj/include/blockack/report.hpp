#pragma once

// Run reports, metric serialization and the profile x attack matrix.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blockack/netsim.hpp"

namespace blockack {

struct StaVerdict {
  MacAddress address;
  bool paralyzed = false;
  std::optional<Tick> paralysis_start;
  std::optional<std::uint64_t> time_to_paralysis;
  RecoveryMode recovery = RecoveryMode::None;
  std::optional<Tick> recovery_tick;
  std::uint64_t goodput_total = 0;
  std::uint64_t generated = 0;
  std::uint64_t stale_drops = 0;
  std::uint64_t failed = 0;
};

struct RunReport {
  std::string scenario;
  std::string profile;
  std::uint64_t seed = 0;
  std::optional<AttackConfig> attack;
  Tick ticks = 0;
  std::uint64_t frames_on_medium = 0;
  std::uint64_t attack_frames = 0;
  bool attack_timed_out = false;
  std::vector<StaVerdict> stas;
  std::uint64_t alert_count = 0;
  std::vector<std::pair<std::string, std::uint64_t>> alerts_by_rule;
};

RunReport make_report(const Scenario& scenario, const Metrics& metrics);

/// Human-readable report.
std::string format_report(const RunReport& r);
/// Pretty-printed summary object.
std::string summary_json(const RunReport& r);
/// One JSON object per tick: goodput per STA in both directions and AP stall state.
std::string metrics_jsonl(const Metrics& m);

/// Fixed-shape scenario used by the matrix: 4 STAs, attack on STA #1 over
/// ticks [100, 300), 900 ticks in total.
Scenario matrix_scenario(const std::string& profile, AttackKind kind, std::uint64_t seed);

/// Attack I kinds: the target is paralyzed during the attack, stays silent from
/// stop_tick to the end while another STA carries traffic.
/// BaFloodRandomTa: every STA is paralyzed during the attack.
bool attack_succeeded(const Scenario& scenario, const Metrics& metrics);

struct MatrixCell {
  AttackKind attack = AttackKind::BarFlood;
  bool success = false;
};

struct MatrixRow {
  std::string profile;
  std::vector<MatrixCell> cells;

  std::optional<bool> cell(AttackKind k) const;
  /// BarFlood or its sniffed variant; nullopt when neither was run.
  std::optional<bool> attack1() const;
  /// Only the sniffed variant worked.
  bool attack1_sniffed_only() const;
  /// The BA variant worked too.
  bool attack1_ba_variant() const;
  std::optional<bool> attack2() const;
};

/// Runs every profile x attack pair on `jobs` worker threads. Row and cell
/// order follow the arguments regardless of completion order.
std::vector<MatrixRow> run_matrix(const std::vector<std::string>& profiles, const std::vector<AttackKind>& attacks,
                                  std::uint64_t seed, int jobs = 1);

std::string format_matrix(const std::vector<MatrixRow>& rows, const std::vector<AttackKind>& attacks);
std::string matrix_json(const std::vector<MatrixRow>& rows);

}  // namespace blockack

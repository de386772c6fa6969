#pragma once

// Scenario description and its TOML-style file format (schema 1).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "blockack/attack.hpp"
#include "blockack/types.hpp"

namespace blockack {

inline constexpr int kScenarioSchema = 1;

struct TrafficConfig {
  int block_size = 8;
  double blocks_per_tick_per_sta = 1.0;
  /// Buffer size requested in ADDBA.
  int buffer_size = 64;
};

struct AttackConfig {
  AttackKind kind = AttackKind::BarFlood;
  /// 1-based STA index; 0 for none (BaFloodRandomTa).
  int target_sta = 0;
  Tick start_tick = 0;
  Tick stop_tick = 0;
  int burst_count = 128;
  int fn_value = 4;
  bool repeat = true;
  int frames_per_tick = 1;
  Tick sniff_horizon = 10000;
  bool raw_sequence_control = false;
};

struct StaEvent {
  Tick tick = 0;
  int sta = 0;  // 1-based
};

struct Scenario {
  std::string name = "unnamed";
  std::string profile = "standard";
  int sta_count = 4;
  Tick duration_ticks = 1000;
  std::uint64_t rng_seed = 1;
  TrafficConfig traffic;
  std::optional<AttackConfig> attack;
  std::optional<StaEvent> reassociate;
  std::optional<StaEvent> disassociate;
  Capabilities station_caps;
  Tick stall_cooldown_ticks = 50;
  int max_retries = 4;
  Tick solicit_window_ticks = 64;
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string file, int line, const std::string& message);

  const std::string& file() const { return file_; }
  /// 0 when the problem is not tied to one line.
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

/// Parses scenario text; `file` is used in diagnostics only. Throws ScenarioError.
Scenario parse_scenario(std::string_view text, const std::string& file = "<scenario>");
Scenario load_scenario(const std::string& path);

/// Throws ScenarioError (line 0) on inconsistent values or an unknown profile.
void validate_scenario(const Scenario& s, const std::string& file = "<scenario>");

/// Writes `s` back in the file format.
std::string format_scenario(const Scenario& s);

/// CLI flag beats environment variable beats file value.
std::uint64_t resolve_seed(std::uint64_t file_seed, const char* env_value, std::optional<std::uint64_t> cli_seed);

}  // namespace blockack

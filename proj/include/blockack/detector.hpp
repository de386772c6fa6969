#pragma once

// Passive checks over a frame trace for BAR/BA abuse.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "blockack/frame.hpp"
#include "blockack/pcap.hpp"
#include "blockack/types.hpp"

namespace blockack {

enum class AlertRule { NonzeroFn, UnsolicitedBar, UnsolicitedBa, UnknownTransmitter, SsnJump, ControlBurst };
std::string_view alert_rule_name(AlertRule r);

struct Alert {
  Tick tick = 0;
  AlertRule rule = AlertRule::NonzeroFn;
  std::size_t frame_ref = 0;  // index into the inspected trace
  std::string detail;
};

struct DetectorConfig {
  Tick solicit_window_ticks = 64;
  int jump_threshold = 256;
  int burst_threshold = 20;
  Tick burst_window_ticks = 100;
  /// Transmitters considered associated before any traffic is seen.
  std::vector<MacAddress> known_transmitters;
  /// Add transmitters of QoS data and ADDBA frames to the known set.
  bool learn_transmitters = true;
};

class Detector {
 public:
  explicit Detector(DetectorConfig config = {});

  /// Inspects one frame; returns the alerts it raised (also kept in alerts()).
  std::vector<Alert> inspect(const Frame& f, Tick now, std::size_t frame_ref);

  const std::vector<Alert>& alerts() const { return alerts_; }
  std::size_t frames_inspected() const { return inspected_; }
  bool is_known(const MacAddress& m) const { return known_.count(m) != 0; }

 private:
  using FlowKey = std::tuple<MacAddress, MacAddress, int>;  // (ta, ra, tid) of the data direction

  struct Flow {
    Tick last_qos = 0;
    SeqNum last_sn;
    bool qos_since_bar = false;
  };

  void ssn_jump(const FlowKey& data_flow, SeqNum ssn, std::string_view what, std::vector<Alert>& out, Tick now,
                std::size_t ref);
  void count_control(const MacAddress& ta, std::vector<Alert>& out, Tick now, std::size_t ref);

  DetectorConfig config_;
  std::set<MacAddress> known_;
  std::map<FlowKey, Flow> flows_;
  std::map<FlowKey, Tick> outstanding_bar_;  // keyed by the BAR's (ta, ra, tid)
  std::map<std::optional<MacAddress>, std::deque<Tick>> control_;  // nullopt pools unknown TAs
  std::vector<Alert> alerts_;
  std::size_t inspected_ = 0;
};

struct TraceDetection {
  std::vector<Alert> alerts;
  std::size_t frames = 0;
  std::size_t undecodable = 0;
};

/// Decodes and inspects every captured frame in order. Frames that fail to
/// decode are counted and skipped.
TraceDetection detect_trace(const std::vector<CapturedFrame>& trace, const DetectorConfig& config = {});

/// `<tick> <hex>` per line; blank lines and lines starting with '#' are skipped.
/// Throws std::invalid_argument with the line number on malformed input.
std::vector<CapturedFrame> parse_hex_trace(std::string_view text);

std::string alert_json(const Alert& a);
void write_alerts_jsonl(std::ostream& os, const std::vector<Alert>& alerts);

}  // namespace blockack

#include "blockack/detector.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

namespace blockack {

std::string_view alert_rule_name(AlertRule r) {
  switch (r) {
    case AlertRule::NonzeroFn: return "NonzeroFn";
    case AlertRule::UnsolicitedBar: return "UnsolicitedBar";
    case AlertRule::UnsolicitedBa: return "UnsolicitedBa";
    case AlertRule::UnknownTransmitter: return "UnknownTransmitter";
    case AlertRule::SsnJump: return "SsnJump";
    case AlertRule::ControlBurst: return "ControlBurst";
  }
  return "?";
}

Detector::Detector(DetectorConfig config) : config_(std::move(config)) {
  known_.insert(config_.known_transmitters.begin(), config_.known_transmitters.end());
}

void Detector::ssn_jump(const FlowKey& data_flow, SeqNum ssn, std::string_view what, std::vector<Alert>& out,
                        Tick now, std::size_t ref) {
  auto it = flows_.find(data_flow);
  if (it == flows_.end()) return;
  const int d = seq_offset(it->second.last_sn, ssn);
  if (std::abs(d) <= config_.jump_threshold) return;
  out.push_back(Alert{now, AlertRule::SsnJump, ref,
                      std::string(what) + " ssn " + std::to_string(ssn.value()) + " is " + std::to_string(d) +
                          " from last data sn " + std::to_string(it->second.last_sn.value())});
}

void Detector::count_control(const MacAddress& ta, std::vector<Alert>& out, Tick now, std::size_t ref) {
  std::optional<MacAddress> bucket;
  if (known_.count(ta)) bucket = ta;
  auto& q = control_[bucket];
  q.push_back(now);
  while (!q.empty() && q.front() <= now - config_.burst_window_ticks) q.pop_front();
  if (static_cast<int>(q.size()) > config_.burst_threshold)
    out.push_back(Alert{now, AlertRule::ControlBurst, ref,
                        std::to_string(q.size()) + " out-of-exchange control frames from " +
                            (bucket ? bucket->to_string() : std::string("unassociated transmitters")) + " in " +
                            std::to_string(config_.burst_window_ticks) + " ticks"});
}

std::vector<Alert> Detector::inspect(const Frame& frame, Tick now, std::size_t ref) {
  ++inspected_;
  std::vector<Alert> out;

  if (const auto* q = std::get_if<QosData>(&frame)) {
    if (config_.learn_transmitters) known_.insert(q->ta);
    auto& flow = flows_[FlowKey{q->ta, q->ra, q->tid}];
    flow.last_qos = now;
    flow.last_sn = q->sn;
    flow.qos_since_bar = true;
  } else if (const auto* r = std::get_if<AddbaRequest>(&frame)) {
    if (config_.learn_transmitters) known_.insert(r->ta);
  } else if (const auto* r = std::get_if<AddbaResponse>(&frame)) {
    if (config_.learn_transmitters) known_.insert(r->ta);
  } else if (const auto* bar = std::get_if<Bar>(&frame)) {
    const FlowKey key{bar->ta, bar->ra, bar->tid()};
    if (bar->ssc.fn.value() != 0)
      out.push_back(Alert{now, AlertRule::NonzeroFn, ref, "BAR fn=" + std::to_string(bar->ssc.fn.value())});
    if (!known_.count(bar->ta))
      out.push_back(Alert{now, AlertRule::UnknownTransmitter, ref, "BAR from " + bar->ta.to_string()});
    auto flow = flows_.find(key);
    const bool solicited = flow != flows_.end() && flow->second.qos_since_bar &&
                           now - flow->second.last_qos <= config_.solicit_window_ticks;
    if (!solicited)
      out.push_back(Alert{now, AlertRule::UnsolicitedBar, ref,
                          "no data block from " + bar->ta.to_string() + " tid " + std::to_string(bar->tid())});
    ssn_jump(key, bar->ssc.ssn, "BAR", out, now, ref);
    if (flow != flows_.end()) flow->second.qos_since_bar = false;
    outstanding_bar_[key] = now;
    if (!solicited) count_control(bar->ta, out, now, ref);
  } else if (const auto* ba = std::get_if<Ba>(&frame)) {
    if (ba->ssc.fn.value() != 0)
      out.push_back(Alert{now, AlertRule::NonzeroFn, ref, "BA fn=" + std::to_string(ba->ssc.fn.value())});
    if (!known_.count(ba->ta))
      out.push_back(Alert{now, AlertRule::UnknownTransmitter, ref, "BA from " + ba->ta.to_string()});
    const FlowKey bar_key{ba->ra, ba->ta, ba->tid()};
    auto pending = outstanding_bar_.find(bar_key);
    const bool solicited =
        pending != outstanding_bar_.end() && now - pending->second <= config_.solicit_window_ticks;
    if (pending != outstanding_bar_.end()) outstanding_bar_.erase(pending);
    if (!solicited)
      out.push_back(Alert{now, AlertRule::UnsolicitedBa, ref, "no BAR outstanding from " + ba->ra.to_string() +
                                                                  " to " + ba->ta.to_string()});
    ssn_jump(bar_key, ba->ssc.ssn, "BA", out, now, ref);
    if (!solicited) count_control(ba->ta, out, now, ref);
  }

  alerts_.insert(alerts_.end(), out.begin(), out.end());
  return out;
}

TraceDetection detect_trace(const std::vector<CapturedFrame>& trace, const DetectorConfig& config) {
  TraceDetection result;
  Detector det(config);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    ++result.frames;
    auto decoded = decode_frame(trace[i].octets);
    if (!decoded) {
      ++result.undecodable;
      continue;
    }
    det.inspect(decoded.frame(), trace[i].tick, i);
  }
  result.alerts = det.alerts();
  return result;
}

std::vector<CapturedFrame> parse_hex_trace(std::string_view text) {
  std::vector<CapturedFrame> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tick_text, hex, extra;
    ls >> tick_text >> hex >> extra;
    Tick tick = 0;
    auto [ptr, ec] = std::from_chars(tick_text.data(), tick_text.data() + tick_text.size(), tick);
    if (ec != std::errc() || ptr != tick_text.data() + tick_text.size() || hex.empty() || !extra.empty())
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected '<tick> <hex>'");
    try {
      out.push_back(CapturedFrame{tick, from_hex(hex)});
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string alert_json(const Alert& a) {
  nlohmann::ordered_json j;
  j["tick"] = a.tick;
  j["rule"] = alert_rule_name(a.rule);
  j["frame_ref"] = a.frame_ref;
  j["detail"] = a.detail;
  return j.dump();
}

void write_alerts_jsonl(std::ostream& os, const std::vector<Alert>& alerts) {
  for (const auto& a : alerts) os << alert_json(a) << '\n';
}

}  // namespace blockack

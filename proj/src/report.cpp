#include "blockack/report.hpp"

#include <atomic>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace blockack {

using nlohmann::ordered_json;

namespace {

template <typename T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <typename T>
std::string opt_text(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string("-");
}

}  // namespace

RunReport make_report(const Scenario& scenario, const Metrics& m) {
  RunReport r;
  r.scenario = m.scenario;
  r.profile = m.profile;
  r.seed = scenario.rng_seed;
  r.attack = scenario.attack;
  r.ticks = m.ticks;
  r.frames_on_medium = m.frames_on_medium;
  r.attack_frames = m.attack_frames;
  r.attack_timed_out = m.attack_timed_out;
  r.alert_count = m.alert_count;
  r.alerts_by_rule = m.alerts_by_rule;
  for (const auto& s : m.stas) {
    StaVerdict v;
    v.address = s.address;
    v.paralyzed = s.paralysis_start.has_value();
    v.paralysis_start = s.paralysis_start;
    v.time_to_paralysis = s.time_to_paralysis;
    v.recovery = s.recovery;
    v.recovery_tick = s.recovery_tick;
    v.goodput_total = std::accumulate(s.goodput.begin(), s.goodput.end(), std::uint64_t{0});
    v.generated = s.generated;
    v.stale_drops = s.stale_drops;
    v.failed = s.failed;
    r.stas.push_back(v);
  }
  return r;
}

std::string format_report(const RunReport& r) {
  std::ostringstream os;
  os << "scenario: " << r.scenario << '\n' << "profile:  " << r.profile << '\n' << "seed:     " << r.seed << '\n';
  if (r.attack) {
    os << "attack:   " << attack_kind_name(r.attack->kind);
    if (r.attack->target_sta) os << " -> STA#" << r.attack->target_sta;
    os << " ticks [" << r.attack->start_tick << ", " << r.attack->stop_tick << "), " << r.attack_frames
       << " frames injected";
    if (r.attack_timed_out) os << " (sniffing timed out)";
    os << '\n';
  } else {
    os << "attack:   none\n";
  }
  os << "ticks:    " << r.ticks << ", frames on medium " << r.frames_on_medium << "\n\n";

  os << std::left << std::setw(6) << "STA" << std::setw(19) << "address" << std::setw(10) << "paralysis"
     << std::setw(8) << "onset" << std::setw(8) << "frames" << std::setw(20) << "recovery" << std::setw(10)
     << "recovered" << "goodput\n";
  for (std::size_t i = 0; i < r.stas.size(); ++i) {
    const auto& s = r.stas[i];
    os << std::setw(6) << ("#" + std::to_string(i + 1)) << std::setw(19) << s.address.to_string() << std::setw(10)
       << (s.paralyzed ? "yes" : "no") << std::setw(8) << opt_text(s.paralysis_start) << std::setw(8)
       << opt_text(s.time_to_paralysis) << std::setw(20) << recovery_mode_name(s.recovery) << std::setw(10)
       << opt_text(s.recovery_tick) << s.goodput_total << '\n';
  }
  os << "\nalerts: " << r.alert_count;
  if (!r.alerts_by_rule.empty()) {
    os << " (";
    for (std::size_t i = 0; i < r.alerts_by_rule.size(); ++i)
      os << (i ? ", " : "") << r.alerts_by_rule[i].first << '=' << r.alerts_by_rule[i].second;
    os << ')';
  }
  os << '\n';
  return os.str();
}

std::string summary_json(const RunReport& r) {
  ordered_json j;
  j["schema"] = kScenarioSchema;
  j["scenario"] = r.scenario;
  j["profile"] = r.profile;
  j["seed"] = r.seed;
  if (r.attack) {
    ordered_json a;
    a["kind"] = attack_kind_name(r.attack->kind);
    a["target_sta"] = r.attack->target_sta ? ordered_json(r.attack->target_sta) : ordered_json(nullptr);
    a["start_tick"] = r.attack->start_tick;
    a["stop_tick"] = r.attack->stop_tick;
    a["frames"] = r.attack_frames;
    a["sniff_timed_out"] = r.attack_timed_out;
    j["attack"] = a;
  } else {
    j["attack"] = nullptr;
  }
  j["ticks"] = r.ticks;
  j["frames_on_medium"] = r.frames_on_medium;
  ordered_json stas = ordered_json::array();
  for (const auto& s : r.stas) {
    ordered_json o;
    o["address"] = s.address.to_string();
    o["paralyzed"] = s.paralyzed;
    o["paralysis_start"] = opt(s.paralysis_start);
    o["time_to_paralysis"] = opt(s.time_to_paralysis);
    o["recovery"] = recovery_mode_name(s.recovery);
    o["recovery_tick"] = opt(s.recovery_tick);
    o["goodput_total"] = s.goodput_total;
    o["generated"] = s.generated;
    o["stale_drops"] = s.stale_drops;
    o["failed"] = s.failed;
    stas.push_back(o);
  }
  j["stas"] = stas;
  ordered_json alerts;
  alerts["total"] = r.alert_count;
  ordered_json by_rule = ordered_json::object();
  for (const auto& [rule, n] : r.alerts_by_rule) by_rule[rule] = n;
  alerts["by_rule"] = by_rule;
  j["alerts"] = alerts;
  return j.dump(2) + "\n";
}

std::string metrics_jsonl(const Metrics& m) {
  std::string out;
  for (Tick t = 0; t < m.ticks; ++t) {
    ordered_json j;
    j["tick"] = t;
    ordered_json goodput = ordered_json::array(), up = ordered_json::array(), down = ordered_json::array();
    for (const auto& s : m.stas) {
      goodput.push_back(s.goodput[t]);
      up.push_back(s.uplink[t]);
      down.push_back(s.downlink[t]);
    }
    j["goodput"] = goodput;
    j["uplink"] = up;
    j["downlink"] = down;
    j["ap_stalled"] = static_cast<bool>(m.ap_stalled[t]);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Scenario matrix_scenario(const std::string& profile, AttackKind kind, std::uint64_t seed) {
  Scenario s;
  s.name = "matrix-" + profile + "-" + std::string(attack_kind_name(kind));
  s.profile = profile;
  s.sta_count = 4;
  s.duration_ticks = 900;
  s.rng_seed = seed;
  AttackConfig a;
  a.kind = kind;
  a.target_sta = kind == AttackKind::BaFloodRandomTa ? 0 : 1;
  a.start_tick = 100;
  a.stop_tick = 300;
  s.attack = a;
  return s;
}

bool attack_succeeded(const Scenario& sc, const Metrics& m) {
  if (!sc.attack) return false;
  const auto& a = *sc.attack;
  auto paralyzed_during = [&](const StaMetrics& s) {
    return s.paralysis_start && *s.paralysis_start >= a.start_tick && *s.paralysis_start < a.stop_tick;
  };
  if (a.kind == AttackKind::BaFloodRandomTa) {
    for (const auto& s : m.stas)
      if (!paralyzed_during(s)) return false;
    return !m.stas.empty();
  }
  if (a.target_sta < 1 || a.target_sta > static_cast<int>(m.stas.size())) return false;
  const auto& victim = m.stas[a.target_sta - 1];
  if (!paralyzed_during(victim)) return false;
  Tick end = m.ticks;
  if (sc.reassociate && sc.reassociate->sta == a.target_sta && sc.reassociate->tick >= a.stop_tick)
    end = sc.reassociate->tick;
  for (Tick t = a.stop_tick; t < end; ++t)
    if (victim.goodput[t] > 0) return false;
  for (std::size_t i = 0; i < m.stas.size(); ++i) {
    if (static_cast<int>(i) + 1 == a.target_sta) continue;
    for (Tick t = a.stop_tick; t < m.ticks; ++t)
      if (m.stas[i].goodput[t] > 0) return true;
  }
  return false;
}

std::optional<bool> MatrixRow::cell(AttackKind k) const {
  for (const auto& c : cells)
    if (c.attack == k) return c.success;
  return std::nullopt;
}

std::optional<bool> MatrixRow::attack1() const {
  auto a = cell(AttackKind::BarFlood);
  auto b = cell(AttackKind::BarFloodSniffedSsn);
  if (!a && !b) return std::nullopt;
  return a.value_or(false) || b.value_or(false);
}

bool MatrixRow::attack1_sniffed_only() const {
  return !cell(AttackKind::BarFlood).value_or(false) && cell(AttackKind::BarFloodSniffedSsn).value_or(false);
}

bool MatrixRow::attack1_ba_variant() const { return cell(AttackKind::BaFloodSpoofedSta).value_or(false); }

std::optional<bool> MatrixRow::attack2() const { return cell(AttackKind::BaFloodRandomTa); }

std::vector<MatrixRow> run_matrix(const std::vector<std::string>& profiles, const std::vector<AttackKind>& attacks,
                                  std::uint64_t seed, int jobs) {
  std::vector<MatrixRow> rows(profiles.size());
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    rows[p].profile = profiles[p];
    rows[p].cells.resize(attacks.size());
  }
  const std::size_t total = profiles.size() * attacks.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t p = i / attacks.size(), k = i % attacks.size();
      const Scenario sc = matrix_scenario(profiles[p], attacks[k], seed);
      SimOptions opt;
      opt.run_detector = false;
      Simulator sim(sc, opt);
      sim.run();
      rows[p].cells[k] = MatrixCell{attacks[k], attack_succeeded(sc, sim.metrics())};
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string format_matrix(const std::vector<MatrixRow>& rows, const std::vector<AttackKind>& attacks) {
  std::ostringstream os;
  std::size_t name_w = 8;
  for (const auto& r : rows) name_w = std::max(name_w, r.profile.size() + 2);
  os << std::left << std::setw(static_cast<int>(name_w)) << "profile";
  for (auto k : attacks) os << std::setw(static_cast<int>(attack_kind_name(k).size()) + 2) << attack_kind_name(k);
  os << "| Attack I           Attack II\n";
  auto mark = [](std::optional<bool> v) -> std::string {
    if (!v) return "n/a";
    return *v ? "✓" : "✗";
  };
  for (const auto& r : rows) {
    os << std::setw(static_cast<int>(name_w)) << r.profile;
    for (const auto& c : r.cells)
      os << std::setw(static_cast<int>(attack_kind_name(c.attack).size()) + 2) << (c.success ? "yes" : "no");
    std::string a1 = mark(r.attack1());
    if (r.attack1().value_or(false) && r.attack1_ba_variant()) a1 += "*";
    if (r.attack1_sniffed_only()) a1 += " (sniffed SSN)";
    // setw counts bytes; the check marks are three bytes wide in UTF-8.
    const int pad = 19 - static_cast<int>(a1.size()) + (a1.rfind("n/a", 0) == 0 ? 0 : 2);
    os << "| " << a1 << std::string(std::max(1, pad), ' ') << mark(r.attack2()) << '\n';
  }
  os << "\n* also effective with spoofed BA frames\n";
  return os.str();
}

std::string matrix_json(const std::vector<MatrixRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["profile"] = r.profile;
    ordered_json cells = ordered_json::object();
    for (const auto& c : r.cells) cells[std::string(attack_kind_name(c.attack))] = c.success;
    j["cells"] = cells;
    j["attack1"] = opt(r.attack1());
    j["attack1_sniffed_only"] = r.attack1_sniffed_only();
    j["attack1_ba_variant"] = r.attack1_ba_variant();
    j["attack2"] = opt(r.attack2());
    out.push_back(j);
  }
  return out.dump(2) + "\n";
}

}  // namespace blockack

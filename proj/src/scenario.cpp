#include "blockack/scenario.hpp"

#include <charconv>
#include <climits>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "blockack/profile.hpp"

namespace blockack {

ScenarioError::ScenarioError(std::string file, int line, const std::string& message)
    : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      file_(std::move(file)),
      line_(line) {}

namespace {

struct Value {
  enum class Type { Integer, Float, Bool, String } type;
  long long i = 0;
  double f = 0;
  bool b = false;
  std::string s;
};

std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::optional<Value> parse_value(std::string_view text) {
  Value v;
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    v.type = Value::Type::String;
    v.s = std::string(text.substr(1, text.size() - 2));
    if (v.s.find('"') != std::string::npos) return std::nullopt;
    return v;
  }
  if (text == "true" || text == "false") {
    v.type = Value::Type::Bool;
    v.b = text == "true";
    return v;
  }
  const char* end = text.data() + text.size();
  if (auto [p, ec] = std::from_chars(text.data(), end, v.i); ec == std::errc() && p == end) {
    v.type = Value::Type::Integer;
    return v;
  }
  if (auto [p, ec] = std::from_chars(text.data(), end, v.f); ec == std::errc() && p == end) {
    v.type = Value::Type::Float;
    return v;
  }
  return std::nullopt;
}

class Parser {
 public:
  Parser(Scenario& s, std::string file) : s_(s), file_(std::move(file)) { register_keys(); }

  void parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::string section;
    std::set<std::string> sections_seen;
    bool schema_seen = false;
    while (std::getline(in, raw)) {
      ++line_;
      const auto line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail("unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (!known_sections_.count(section)) fail("unknown section [" + section + "]");
        if (!sections_seen.insert(section).second) fail("duplicate section [" + section + "]");
        if (section == "attack") s_.attack.emplace();
        if (section == "reassociate") s_.reassociate.emplace();
        if (section == "disassociate") s_.disassociate.emplace();
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail("expected 'key = value'");
      const std::string key(trim(line.substr(0, eq)));
      const auto value_text = trim(line.substr(eq + 1));
      if (key.empty()) fail("missing key");
      const std::string full = section.empty() ? key : section + "." + key;
      auto handler = handlers_.find(full);
      if (handler == handlers_.end()) fail("unknown key '" + full + "'");
      if (!seen_.insert(full).second) fail("duplicate key '" + full + "'");
      auto v = parse_value(value_text);
      if (!v) fail("malformed value for '" + full + "'");
      if (full == "schema") schema_seen = true;
      handler->second(*v);
    }
    if (!schema_seen) throw ScenarioError(file_, 0, "missing 'schema' key");
    if (s_.attack) {
      for (const char* k : {"attack.kind", "attack.start_tick", "attack.stop_tick"})
        if (!seen_.count(k)) throw ScenarioError(file_, 0, std::string("missing '") + k + "'");
    }
    for (const char* sec : {"reassociate", "disassociate"}) {
      if (!sections_seen.count(sec)) continue;
      for (const char* k : {"tick", "sta"})
        if (!seen_.count(std::string(sec) + "." + k))
          throw ScenarioError(file_, 0, std::string("missing '") + sec + "." + k + "'");
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ScenarioError(file_, line_, msg); }

  long long integer(const Value& v, long long lo, long long hi) const {
    if (v.type != Value::Type::Integer) fail("expected an integer");
    if (v.i < lo || v.i > hi) fail("value " + std::to_string(v.i) + " outside " + std::to_string(lo) + ".." + std::to_string(hi));
    return v.i;
  }
  double number(const Value& v) const {
    if (v.type == Value::Type::Integer) return static_cast<double>(v.i);
    if (v.type != Value::Type::Float) fail("expected a number");
    return v.f;
  }
  bool boolean(const Value& v) const {
    if (v.type != Value::Type::Bool) fail("expected true or false");
    return v.b;
  }
  const std::string& string(const Value& v) const {
    if (v.type != Value::Type::String) fail("expected a quoted string");
    return v.s;
  }

  void register_keys() {
    constexpr long long kBig = 1'000'000'000;
    auto& h = handlers_;
    h["schema"] = [this](const Value& v) {
      if (integer(v, 0, kBig) != kScenarioSchema) fail("unsupported schema version");
    };
    h["name"] = [this](const Value& v) { s_.name = string(v); };
    h["profile"] = [this](const Value& v) { s_.profile = string(v); };
    h["sta_count"] = [this](const Value& v) { s_.sta_count = static_cast<int>(integer(v, 1, 64)); };
    h["duration_ticks"] = [this](const Value& v) { s_.duration_ticks = integer(v, 1, kBig); };
    h["rng_seed"] = [this](const Value& v) { s_.rng_seed = static_cast<std::uint64_t>(integer(v, 0, LLONG_MAX)); };

    h["traffic.block_size"] = [this](const Value& v) { s_.traffic.block_size = static_cast<int>(integer(v, 1, 64)); };
    h["traffic.blocks_per_tick_per_sta"] = [this](const Value& v) {
      const double r = number(v);
      if (r < 0 || r > 16) fail("blocks_per_tick_per_sta outside 0..16");
      s_.traffic.blocks_per_tick_per_sta = r;
    };
    h["traffic.buffer_size"] = [this](const Value& v) { s_.traffic.buffer_size = static_cast<int>(integer(v, 1, 64)); };

    h["attack.kind"] = [this](const Value& v) {
      auto k = parse_attack_kind(string(v));
      if (!k) fail("unknown attack kind '" + v.s + "'");
      s_.attack->kind = *k;
    };
    h["attack.target_sta"] = [this](const Value& v) { s_.attack->target_sta = static_cast<int>(integer(v, 0, 64)); };
    h["attack.start_tick"] = [this](const Value& v) { s_.attack->start_tick = integer(v, 0, kBig); };
    h["attack.stop_tick"] = [this](const Value& v) { s_.attack->stop_tick = integer(v, 0, kBig); };
    h["attack.burst_count"] = [this](const Value& v) { s_.attack->burst_count = static_cast<int>(integer(v, 1, kBig)); };
    h["attack.fn_value"] = [this](const Value& v) { s_.attack->fn_value = static_cast<int>(integer(v, 0, 15)); };
    h["attack.repeat"] = [this](const Value& v) { s_.attack->repeat = boolean(v); };
    h["attack.frames_per_tick"] = [this](const Value& v) {
      s_.attack->frames_per_tick = static_cast<int>(integer(v, 1, 1024));
    };
    h["attack.sniff_horizon"] = [this](const Value& v) { s_.attack->sniff_horizon = integer(v, 1, kBig); };
    h["attack.raw_sequence_control"] = [this](const Value& v) { s_.attack->raw_sequence_control = boolean(v); };

    for (const char* sec : {"reassociate", "disassociate"}) {
      const std::string p(sec);
      auto target = [this, p]() -> StaEvent& { return p == "reassociate" ? *s_.reassociate : *s_.disassociate; };
      h[p + ".tick"] = [this, target](const Value& v) { target().tick = integer(v, 0, kBig); };
      h[p + ".sta"] = [this, target](const Value& v) { target().sta = static_cast<int>(integer(v, 1, 64)); };
    }

    h["stations.mfpc"] = [this](const Value& v) { s_.station_caps.mfpc = boolean(v); };
    h["stations.mfpr"] = [this](const Value& v) { s_.station_caps.mfpr = boolean(v); };
    h["stations.pbac"] = [this](const Value& v) { s_.station_caps.pbac = boolean(v); };

    h["sim.stall_cooldown_ticks"] = [this](const Value& v) { s_.stall_cooldown_ticks = integer(v, 0, kBig); };
    h["sim.max_retries"] = [this](const Value& v) { s_.max_retries = static_cast<int>(integer(v, 0, 64)); };
    h["sim.solicit_window_ticks"] = [this](const Value& v) { s_.solicit_window_ticks = integer(v, 1, kBig); };
  }

  Scenario& s_;
  std::string file_;
  int line_ = 0;
  std::map<std::string, std::function<void(const Value&)>> handlers_;
  std::set<std::string> seen_;
  const std::set<std::string> known_sections_{"traffic", "attack", "reassociate", "disassociate", "stations", "sim"};
};

std::string quote(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& file) {
  Scenario s;
  Parser(s, file).parse(text);
  validate_scenario(s, file);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

void validate_scenario(const Scenario& s, const std::string& file) {
  auto fail = [&](const std::string& msg) { throw ScenarioError(file, 0, msg); };
  if (!find_profile(s.profile)) fail("unknown profile '" + s.profile + "'");
  if (s.sta_count < 1 || s.sta_count > 64) fail("sta_count outside 1..64");
  if (s.duration_ticks < 1) fail("duration_ticks must be positive");
  if (s.traffic.block_size < 1 || s.traffic.block_size > 64) fail("block_size outside 1..64");
  if (s.traffic.buffer_size < 1 || s.traffic.buffer_size > 64) fail("buffer_size outside 1..64");
  if (s.traffic.blocks_per_tick_per_sta < 0) fail("blocks_per_tick_per_sta must not be negative");
  if (const auto& a = s.attack) {
    if (!(a->start_tick < a->stop_tick && a->stop_tick <= s.duration_ticks))
      fail("attack needs start_tick < stop_tick <= duration_ticks");
    const bool needs_sta = a->kind != AttackKind::BaFloodRandomTa;
    if (needs_sta && (a->target_sta < 1 || a->target_sta > s.sta_count))
      fail(std::string(attack_kind_name(a->kind)) + " needs target_sta in 1.." + std::to_string(s.sta_count));
    if (!needs_sta && a->target_sta != 0) fail("BaFloodRandomTa does not take target_sta");
  }
  for (const auto* ev : {&s.reassociate, &s.disassociate}) {
    if (!*ev) continue;
    if ((*ev)->sta < 1 || (*ev)->sta > s.sta_count) fail("event sta outside 1.." + std::to_string(s.sta_count));
    if ((*ev)->tick >= s.duration_ticks) fail("event tick beyond duration_ticks");
  }
  if (s.reassociate && s.disassociate && s.reassociate->sta == s.disassociate->sta &&
      s.reassociate->tick > s.disassociate->tick)
    fail("cannot reassociate a STA after it was disassociated");
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "schema = " << kScenarioSchema << '\n'
     << "name = " << quote(s.name) << '\n'
     << "profile = " << quote(s.profile) << '\n'
     << "sta_count = " << s.sta_count << '\n'
     << "duration_ticks = " << s.duration_ticks << '\n'
     << "rng_seed = " << s.rng_seed << "\n\n"
     << "[traffic]\n"
     << "block_size = " << s.traffic.block_size << '\n'
     << "blocks_per_tick_per_sta = " << s.traffic.blocks_per_tick_per_sta << '\n'
     << "buffer_size = " << s.traffic.buffer_size << '\n';
  if (const auto& a = s.attack) {
    os << "\n[attack]\n"
       << "kind = " << quote(std::string(attack_kind_name(a->kind))) << '\n';
    if (a->target_sta) os << "target_sta = " << a->target_sta << '\n';
    os << "start_tick = " << a->start_tick << '\n'
       << "stop_tick = " << a->stop_tick << '\n'
       << "burst_count = " << a->burst_count << '\n'
       << "fn_value = " << a->fn_value << '\n'
       << "repeat = " << (a->repeat ? "true" : "false") << '\n'
       << "frames_per_tick = " << a->frames_per_tick << '\n'
       << "sniff_horizon = " << a->sniff_horizon << '\n'
       << "raw_sequence_control = " << (a->raw_sequence_control ? "true" : "false") << '\n';
  }
  for (auto [sec, ev] : {std::pair{"reassociate", &s.reassociate}, std::pair{"disassociate", &s.disassociate}}) {
    if (*ev) os << "\n[" << sec << "]\ntick = " << (*ev)->tick << "\nsta = " << (*ev)->sta << '\n';
  }
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << "\n[stations]\nmfpc = " << b(s.station_caps.mfpc) << "\nmfpr = " << b(s.station_caps.mfpr)
     << "\npbac = " << b(s.station_caps.pbac) << '\n'
     << "\n[sim]\nstall_cooldown_ticks = " << s.stall_cooldown_ticks << "\nmax_retries = " << s.max_retries
     << "\nsolicit_window_ticks = " << s.solicit_window_ticks << '\n';
  return os.str();
}

std::uint64_t resolve_seed(std::uint64_t file_seed, const char* env_value, std::optional<std::uint64_t> cli_seed) {
  if (cli_seed) return *cli_seed;
  if (env_value && *env_value) {
    std::string_view text(env_value);
    std::uint64_t seed = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc() || p != text.data() + text.size())
      throw std::invalid_argument("BLOCKACK_LAB_SEED is not an unsigned integer: '" + std::string(text) + "'");
    return seed;
  }
  return file_seed;
}

}  // namespace blockack

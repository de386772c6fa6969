// blockack_lab: scenario runner, profile browser, attack matrix, trace
// detector and frame forger.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "blockack/attack.hpp"
#include "blockack/detector.hpp"
#include "blockack/netsim.hpp"
#include "blockack/pcap.hpp"
#include "blockack/profile.hpp"
#include "blockack/report.hpp"
#include "blockack/scenario.hpp"

namespace fs = std::filesystem;
using namespace blockack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUser = 2;

// Bad input from the user: exit code 2.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write " + path.string());
  out << content;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

MacAddress parse_mac_arg(const std::string& text, const char* what) {
  auto m = MacAddress::parse(text);
  if (!m) throw UserError(std::string("malformed ") + what + " address '" + text + "'");
  return *m;
}

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool pcap = false;
  bool hex_trace = false;
  bool json = false;
};

int cmd_run(const RunArgs& a) {
  Scenario sc = load_scenario(a.scenario);
  try {
    sc.rng_seed = resolve_seed(sc.rng_seed, std::getenv("BLOCKACK_LAB_SEED"), a.seed);
  } catch (const std::invalid_argument& e) {
    throw UserError(e.what());
  }
  SimOptions opt;
  opt.record_trace = a.pcap || a.hex_trace;
  const RunOutput run = run_scenario(sc, opt);
  const RunReport report = make_report(sc, run.metrics);

  const fs::path dir = a.out_dir.empty() ? fs::path("out") / sc.name : fs::path(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UserError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "metrics.jsonl", metrics_jsonl(run.metrics));
  write_file(dir / "summary.json", summary_json(report));
  write_file(dir / "report.txt", format_report(report));
  std::ostringstream alerts;
  write_alerts_jsonl(alerts, run.alerts);
  write_file(dir / "alerts.jsonl", alerts.str());
  if (a.pcap) {
    const Bytes b = pcap_bytes(run.trace);
    write_file(dir / "trace.pcap", std::string(b.begin(), b.end()));
  }
  if (a.hex_trace) {
    std::ostringstream hex;
    for (const auto& f : run.trace) hex << f.tick << ' ' << to_hex(f.octets) << '\n';
    write_file(dir / "trace.hex", hex.str());
  }
  std::cout << (a.json ? summary_json(report) : format_report(report));
  return kExitOk;
}

int cmd_profiles() {
  for (const auto& p : builtin_profiles()) std::cout << p.name << "  " << p.description << '\n';
  return kExitOk;
}

int cmd_profile(const std::string& name) {
  auto p = find_profile(name);
  if (!p) throw UserError("unknown profile '" + name + "'");
  std::cout << describe_profile(*p);
  return kExitOk;
}

struct MatrixArgs {
  std::string profiles = "vendors";
  std::string attacks = "all";
  std::uint64_t seed = 1;
  int jobs = 0;
  bool json = false;
};

int cmd_matrix(const MatrixArgs& a) {
  std::vector<std::string> profiles;
  if (a.profiles == "vendors") {
    profiles = vendor_profile_names();
  } else if (a.profiles == "all") {
    for (const auto& p : builtin_profiles()) profiles.push_back(p.name);
  } else {
    profiles = split_list(a.profiles);
    for (const auto& p : profiles)
      if (!find_profile(p)) throw UserError("unknown profile '" + p + "'");
  }
  std::vector<AttackKind> attacks;
  if (a.attacks == "all") {
    attacks = all_attack_kinds();
  } else {
    for (const auto& name : split_list(a.attacks)) {
      auto k = parse_attack_kind(name);
      if (!k) throw UserError("unknown attack kind '" + name + "'");
      attacks.push_back(*k);
    }
  }
  if (profiles.empty() || attacks.empty()) throw UserError("empty profile or attack list");
  const int jobs = a.jobs > 0 ? a.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto rows = run_matrix(profiles, attacks, a.seed, jobs);
  std::cout << (a.json ? matrix_json(rows) : format_matrix(rows, attacks));
  return kExitOk;
}

std::vector<CapturedFrame> load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  if (data.size() >= 4) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(data.data());
    const std::uint32_t le = p[0] | p[1] << 8 | p[2] << 16 | static_cast<std::uint32_t>(p[3]) << 24;
    const std::uint32_t be = p[3] | p[2] << 8 | p[1] << 16 | static_cast<std::uint32_t>(p[0]) << 24;
    for (std::uint32_t magic : {0xa1b2c3d4u, 0xa1b23c4du})
      if (le == magic || be == magic) return parse_pcap(std::span(p, data.size()));
  }
  return parse_hex_trace(data);
}

int cmd_detect(const std::string& path, bool json) {
  const auto trace = load_trace(path);
  const auto result = detect_trace(trace);
  if (json) {
    write_alerts_jsonl(std::cout, result.alerts);
    return kExitOk;
  }
  std::map<std::string, std::size_t> by_rule;
  for (const auto& a : result.alerts) ++by_rule[std::string(alert_rule_name(a.rule))];
  std::cout << "frames: " << result.frames << " (undecodable " << result.undecodable << ")\n"
            << "alerts: " << result.alerts.size() << '\n';
  for (const auto& [rule, n] : by_rule) std::cout << "  " << rule << ": " << n << '\n';
  return kExitOk;
}

struct ForgeArgs {
  std::string kind;
  std::string out;
  int count = 128;
  std::uint64_t seed = 1;
  int fn = 4;
  std::string ap = "02:00:00:00:01:00";
  std::string sta = "02:00:00:00:00:01";
  int sniffed_sn = -1;
  bool raw_sc = false;
};

int cmd_forge(const ForgeArgs& a) {
  auto kind = parse_attack_kind(a.kind);
  if (!kind) throw UserError("unknown attack kind '" + a.kind + "'");
  AttackSpec spec;
  spec.kind = *kind;
  spec.target_ap = parse_mac_arg(a.ap, "AP");
  if (*kind != AttackKind::BaFloodRandomTa) spec.target_sta = parse_mac_arg(a.sta, "STA");
  spec.burst_count = a.count;
  spec.fn_value = a.fn;
  spec.rng_seed = a.seed;
  spec.raw_sequence_control = a.raw_sc;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UserError(e.what());
  }

  AttackRng rng(spec.rng_seed);
  std::vector<CapturedFrame> frames;
  auto add = [&](const Frame& f) { frames.push_back(CapturedFrame{static_cast<Tick>(frames.size()), encode_frame(f)}); };
  switch (*kind) {
    case AttackKind::BarFlood:
      for (const auto& f : forge_bar_flood(spec, rng)) add(f);
      break;
    case AttackKind::BaFloodSpoofedSta:
    case AttackKind::BaFloodRandomTa:
      for (const auto& f : forge_ba_flood(spec, rng)) add(f);
      break;
    case AttackKind::BarFloodSniffedSsn: {
      if (a.sniffed_sn < 0 || a.sniffed_sn >= kSeqSpace) throw UserError("BarFloodSniffedSsn needs --sniffed-sn 0..4095");
      QosData seen;
      seen.ra = spec.target_ap;
      seen.ta = *spec.target_sta;
      seen.dest = spec.target_ap;
      seen.sn = SeqNum(a.sniffed_sn);
      for (const auto& f : forge_bar_sniffed(spec, {{0, seen}}, 0)) add(f);
      break;
    }
  }
  const Bytes b = pcap_bytes(frames);
  write_file(a.out, std::string(b.begin(), b.end()));
  std::cout << "wrote " << frames.size() << " frames to " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block ack attack lab: simulate, detect and forge BAR/BA abuse"};
  app.require_subcommand(1);
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("scenario", run_args.scenario, "Scenario file")->required();
  run->add_option("--seed", run_args.seed, "Override the scenario seed (beats BLOCKACK_LAB_SEED)");
  run->add_option("--out-dir", run_args.out_dir, "Output directory (default out/<scenario name>)");
  run->add_flag("--pcap", run_args.pcap, "Also write trace.pcap");
  run->add_flag("--hex-trace", run_args.hex_trace, "Also write trace.hex ('<tick> <hex>' per frame)");
  run->add_flag("--json", run_args.json, "Print the summary as JSON");

  auto* profiles = app.add_subcommand("profiles", "List built-in behavior profiles");
  std::string profile_name;
  auto* profile = app.add_subcommand("profile", "Describe one profile");
  profile->add_option("name", profile_name, "Profile name")->required();

  MatrixArgs matrix_args;
  auto* matrix = app.add_subcommand("matrix", "Profile x attack outcome matrix");
  matrix->add_option("--profiles", matrix_args.profiles, "vendors (default), all, or a comma list");
  matrix->add_option("--attacks", matrix_args.attacks, "all (default) or a comma list of attack kinds");
  matrix->add_option("--seed", matrix_args.seed, "Attacker seed");
  matrix->add_option("--jobs", matrix_args.jobs, "Worker threads (default: hardware concurrency)");
  matrix->add_flag("--json", matrix_args.json, "Print JSON");

  std::string detect_path;
  bool detect_json = false;
  auto* detect = app.add_subcommand("detect", "Run the detector over a pcap or hex trace");
  detect->add_option("trace", detect_path, "pcap (link type 105) or '<tick> <hex>' text trace")->required();
  detect->add_flag("--json", detect_json, "Print alerts as JSON lines");

  ForgeArgs forge_args;
  auto* forge = app.add_subcommand("forge", "Write forged attack frames to a pcap");
  forge->add_option("--kind", forge_args.kind, "Attack kind")->required();
  forge->add_option("--out", forge_args.out, "Output pcap")->required();
  forge->add_option("--count", forge_args.count, "Frames to forge");
  forge->add_option("--seed", forge_args.seed, "RNG seed");
  forge->add_option("--fn", forge_args.fn, "Fragment number in the SSC");
  forge->add_option("--ap", forge_args.ap, "Target AP address");
  forge->add_option("--sta", forge_args.sta, "Spoofed STA address");
  forge->add_option("--sniffed-sn", forge_args.sniffed_sn, "Captured SN for BarFloodSniffedSsn");
  forge->add_flag("--raw-sc", forge_args.raw_sc, "Copy the captured sequence control verbatim");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUser;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*profiles) return cmd_profiles();
    if (*profile) return cmd_profile(profile_name);
    if (*matrix) return cmd_matrix(matrix_args);
    if (*detect) return cmd_detect(detect_path, detect_json);
    if (*forge) return cmd_forge(forge_args);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const PcapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const AttackTimeout& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

#include <json.hpp>
#include <sstream>

#include "blockack/report.hpp"
#include "doctest.h"

using namespace blockack;

namespace {

RunOutput attack_run(Scenario& sc) {
  sc = matrix_scenario("permissive", AttackKind::BarFlood, 1);
  sc.duration_ticks = 400;
  sc.reassociate = StaEvent{350, 1};
  return run_scenario(sc);
}

}  // namespace

TEST_CASE("report text and summary agree with the metrics") {
  Scenario sc;
  const auto out = attack_run(sc);
  const auto rep = make_report(sc, out.metrics);
  REQUIRE(rep.stas.size() == 4);
  CHECK(rep.stas[0].paralyzed);
  CHECK(rep.stas[0].recovery == RecoveryMode::ReassociationOnly);
  CHECK_FALSE(rep.stas[1].paralyzed);

  const std::string text = format_report(rep);
  CHECK(text.find("attack:   BarFlood -> STA#1 ticks [100, 300)") != std::string::npos);
  CHECK(text.find("reassociation-only") != std::string::npos);
  CHECK(text.find("alerts: ") != std::string::npos);

  const auto j = nlohmann::json::parse(summary_json(rep));
  CHECK(j["schema"] == 1);
  CHECK(j["profile"] == "permissive");
  CHECK(j["attack"]["kind"] == "BarFlood");
  CHECK(j["attack"]["frames"] == out.metrics.attack_frames);
  CHECK(j["stas"].size() == 4);
  CHECK(j["stas"][0]["paralyzed"] == true);
  CHECK(j["stas"][0]["recovery_tick"] == 350);
  CHECK(j["stas"][1]["paralysis_start"].is_null());
  CHECK(j["alerts"]["total"] == out.metrics.alert_count);
}

TEST_CASE("metrics lines") {
  Scenario sc;
  const auto out = attack_run(sc);
  std::istringstream in(metrics_jsonl(out.metrics));
  std::string line;
  Tick t = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["tick"] == t);
    REQUIRE(j["goodput"].size() == 4);
    for (int i = 0; i < 4; ++i)
      CHECK(j["goodput"][i].get<int>() == j["uplink"][i].get<int>() + j["downlink"][i].get<int>());
    ++t;
  }
  CHECK(t == 400);
}

TEST_CASE("attack success criteria") {
  Scenario sc = matrix_scenario("huawei_like", AttackKind::BarFlood, 1);
  auto m = run_scenario(sc, SimOptions{.run_detector = false}).metrics;
  CHECK(attack_succeeded(sc, m));
  Scenario strict = matrix_scenario("strict", AttackKind::BarFlood, 1);
  CHECK_FALSE(attack_succeeded(strict, run_scenario(strict, SimOptions{.run_detector = false}).metrics));
  Scenario none;
  CHECK_FALSE(attack_succeeded(none, m));
}

TEST_CASE("matrix output is independent of the worker count") {
  const std::vector<std::string> profiles{"huawei_like", "asus_like", "strict"};
  const auto& kinds = all_attack_kinds();
  const auto one = run_matrix(profiles, kinds, 1, 1);
  const auto many = run_matrix(profiles, kinds, 1, 5);
  CHECK(matrix_json(one) == matrix_json(many));
  CHECK(format_matrix(one, kinds) == format_matrix(many, kinds));
  REQUIRE(one.size() == 3);
  CHECK(one[0].profile == "huawei_like");
  CHECK(one[0].attack1() == true);
  CHECK(one[1].attack2() == true);
  CHECK(one[2].attack1() == false);
  CHECK(one[2].attack2() == false);
  const auto j = nlohmann::json::parse(matrix_json(one));
  CHECK(j[1]["cells"]["BaFloodRandomTa"] == true);
}

TEST_CASE("matrix row summaries") {
  MatrixRow r{"x", {{AttackKind::BarFlood, false}, {AttackKind::BarFloodSniffedSsn, true}}};
  CHECK(r.attack1() == true);
  CHECK(r.attack1_sniffed_only());
  CHECK_FALSE(r.attack1_ba_variant());
  CHECK_FALSE(r.attack2());
  MatrixRow empty{"y", {}};
  CHECK_FALSE(empty.attack1());
}

TEST_CASE("profiles") {
  CHECK(builtin_profiles().size() == 10);
  CHECK(vendor_profile_names().size() == 6);
  for (const auto& name : vendor_profile_names()) CHECK(find_profile(name));
  CHECK_FALSE(find_profile("linksys"));
  const auto s = strict_profile();
  CHECK(s.drop_nonzero_fn);
  CHECK(s.protected_block_ack);
  CHECK_FALSE(s.vulnerable_to_bar_window_jump);
  CHECK(describe_profile(s).find("drop_nonzero_fn: true") != std::string::npos);
}

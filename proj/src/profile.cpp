#include "blockack/profile.hpp"

#include <sstream>

namespace blockack {

namespace {

std::vector<BehaviorProfile> make_presets() {
  std::vector<BehaviorProfile> v;

  BehaviorProfile asus{.name = "asus_like",
                       .description = "drops unsolicited BARs; unsolicited BAs from any address stall the scheduler"};
  asus.drop_unsolicited_bar = true;
  asus.vulnerable_to_bar_window_jump = true;
  asus.ba_global_stall = true;
  v.push_back(asus);

  BehaviorProfile tplink{.name = "tplink_like",
                         .description = "drops unsolicited or out-of-context BARs; unsolicited BAs stall the scheduler"};
  tplink.drop_unsolicited_bar = true;
  tplink.require_inwindow_ssn = true;
  tplink.vulnerable_to_bar_window_jump = true;
  tplink.ba_global_stall = true;
  v.push_back(tplink);

  BehaviorProfile mediatek{.name = "mediatek_like",
                           .description = "accepts spoofed BARs and applies unsolicited BAs like BARs"};
  mediatek.vulnerable_to_bar_window_jump = true;
  mediatek.ba_as_bar = true;
  v.push_back(mediatek);

  BehaviorProfile zyxel{.name = "zyxel_like",
                        .description = "drops FN!=0 and SSNs it has not received, but an out-of-exchange BAR rewinds to any received SSN"};
  zyxel.drop_nonzero_fn = true;
  zyxel.require_inwindow_ssn = true;
  zyxel.vulnerable_to_bar_window_jump = true;
  zyxel.skip_forward_half_check = true;
  v.push_back(zyxel);

  BehaviorProfile huawei{.name = "huawei_like", .description = "accepts spoofed BARs; ignores unsolicited BAs"};
  huawei.vulnerable_to_bar_window_jump = true;
  v.push_back(huawei);

  BehaviorProfile hostapd{.name = "hostapd_intel_like",
                          .description = "accepts spoofed BARs and BAs; unsolicited BAs also stall the scheduler"};
  hostapd.vulnerable_to_bar_window_jump = true;
  hostapd.ba_as_bar = true;
  hostapd.ba_global_stall = true;
  v.push_back(hostapd);

  v.push_back(strict_profile());

  BehaviorProfile permissive{.name = "permissive", .description = "no defenses, every defect"};
  permissive.vulnerable_to_bar_window_jump = true;
  permissive.skip_forward_half_check = true;
  permissive.ba_as_bar = true;
  permissive.ba_global_stall = true;
  v.push_back(permissive);

  BehaviorProfile prot{.name = "protected_permissive",
                       .description = "no defenses besides protected block ack (effective only when peers are capable)"};
  prot.protected_block_ack = true;
  prot.vulnerable_to_bar_window_jump = true;
  prot.ba_as_bar = true;
  v.push_back(prot);

  v.push_back(standard_profile());
  return v;
}

}  // namespace

BehaviorProfile strict_profile() {
  BehaviorProfile p{.name = "strict", .description = "every defense enabled"};
  p.drop_nonzero_fn = true;
  p.require_known_transmitter = true;
  p.drop_unsolicited_bar = true;
  p.drop_unsolicited_ba = true;
  p.require_inwindow_ssn = true;
  p.protected_block_ack = true;
  p.uplink_stall_blocks_downlink = false;
  return p;
}

BehaviorProfile standard_profile() {
  BehaviorProfile p{.name = "standard", .description = "bare standard rules, no extra checks and no defects"};
  p.uplink_stall_blocks_downlink = false;
  return p;
}

const std::vector<BehaviorProfile>& builtin_profiles() {
  static const std::vector<BehaviorProfile> presets = make_presets();
  return presets;
}

std::vector<std::string> vendor_profile_names() {
  return {"asus_like", "tplink_like", "mediatek_like", "zyxel_like", "huawei_like", "hostapd_intel_like"};
}

std::optional<BehaviorProfile> find_profile(std::string_view name) {
  for (const auto& p : builtin_profiles())
    if (p.name == name) return p;
  return std::nullopt;
}

std::string describe_profile(const BehaviorProfile& p) {
  std::ostringstream os;
  auto flag = [&](const char* key, bool v) { os << "  " << key << ": " << (v ? "true" : "false") << '\n'; };
  os << p.name << " - " << p.description << '\n';
  flag("drop_nonzero_fn", p.drop_nonzero_fn);
  flag("require_known_transmitter", p.require_known_transmitter);
  flag("drop_unsolicited_bar", p.drop_unsolicited_bar);
  flag("drop_unsolicited_ba", p.drop_unsolicited_ba);
  flag("require_inwindow_ssn", p.require_inwindow_ssn);
  flag("protected_block_ack", p.protected_block_ack);
  flag("vulnerable_to_bar_window_jump", p.vulnerable_to_bar_window_jump);
  flag("skip_forward_half_check", p.skip_forward_half_check);
  flag("ba_as_bar", p.ba_as_bar);
  flag("ba_global_stall", p.ba_global_stall);
  flag("uplink_stall_blocks_downlink", p.uplink_stall_blocks_downlink);
  return os.str();
}

}  // namespace blockack

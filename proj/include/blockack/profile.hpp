#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blockack {

/// How one AP implementation handles BAR and BA frames.
///
/// The first group of flags are defenses (checks a hardened implementation
/// performs); the second group are firmware defects observed on real devices.
struct BehaviorProfile {
  std::string name;
  std::string description;

  // Defenses.
  bool drop_nonzero_fn = false;
  bool require_known_transmitter = false;
  bool drop_unsolicited_bar = false;
  bool drop_unsolicited_ba = false;
  bool require_inwindow_ssn = false;
  bool protected_block_ack = false;

  // Defects.
  /// A window move driven by an out-of-exchange BAR desynchronizes the
  /// reorder buffer; every later MSDU fails the SN check until the agreement
  /// is re-established.
  bool vulnerable_to_bar_window_jump = false;
  /// Out-of-exchange BARs set WinStartB = SSN even when the SSN lies behind
  /// the window.
  bool skip_forward_half_check = false;
  /// Unsolicited BAs are also applied to the recipient agreement of their
  /// transmitter, as though they were BARs.
  bool ba_as_bar = false;
  /// An unsolicited BA that reaches processing wedges the transmit scheduler.
  bool ba_global_stall = false;
  /// While a STA's uplink agreement is desynchronized the AP stops serving
  /// its downlink too.
  bool uplink_stall_blocks_downlink = true;

  bool operator==(const BehaviorProfile&) const = default;
};

/// Every built-in preset, in display order.
const std::vector<BehaviorProfile>& builtin_profiles();

/// The six presets that model rows of the published vendor results.
std::vector<std::string> vendor_profile_names();

std::optional<BehaviorProfile> find_profile(std::string_view name);

/// Profile with every defense enabled and every defect disabled.
BehaviorProfile strict_profile();
/// Profile with every flag false: the bare standard rules.
BehaviorProfile standard_profile();

/// One "key: value" line per flag.
std::string describe_profile(const BehaviorProfile& p);

}  // namespace blockack

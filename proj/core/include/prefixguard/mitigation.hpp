#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prefixguard/detection.hpp"
#include "prefixguard/feeds.hpp"
#include "prefixguard/route_sim.hpp"

namespace prefixguard {

enum class ActionKind : std::uint8_t { Manual, Deaggregate, Outsource, Both };
std::string_view to_string(ActionKind k);

struct RuleMatcher {
  std::optional<Prefix> prefix;
  /// With `prefix`: exact match only, otherwise anything inside it.
  bool exact = false;
  std::optional<unsigned> max_length;
  std::size_t min_monitors = 0;
  Confidence min_confidence = Confidence::Stage1Suspicious;

  [[nodiscard]] bool matches(const Alert& alert) const;
  [[nodiscard]] bool is_catch_all() const;
};

struct PolicyRule {
  std::string name;
  RuleMatcher match;
  ActionKind action = ActionKind::Manual;
  std::vector<Asn> mitigators;
};

/// Ordered, first match wins; always ends with a catch-all rule.
struct MitigationPolicy {
  std::vector<PolicyRule> rules;

  /// Appends a Manual catch-all if missing. Throws ConfigError on rules after
  /// a catch-all, or outsourcing rules without mitigators.
  void normalize();

  /// /23-and-shorter prefixes deaggregate, /24 outsources to `mitigators`
  /// (left to the operator when none are given).
  static MitigationPolicy defaults(std::vector<Asn> mitigators);
};

/// Key-tree (YAML) form:
///   rules:
///     - name: short
///       match: {max_length: 23}
///       action: deaggregate
///     - match: {max_length: 24, min_confidence: certain}
///       action: outsource
///       mitigators: [64500]
///     - action: manual
/// Matcher keys: prefix, scope (exact | within), max_length, min_monitors, min_confidence.
MitigationPolicy parse_policy(std::string_view text);
MitigationPolicy load_policy(const std::filesystem::path& path);

struct MitigationAnnouncement {
  Asn origin;
  Prefix prefix;
  AsPath seed;
};

struct MitigationAction {
  ActionKind kind = ActionKind::Manual;
  std::uint64_t event_id = 0;
  std::int64_t issued_at = 0;
  std::string rule;
  std::vector<MitigationAnnouncement> announcements;
  /// Why a chosen automatic action fell back to Manual, if it did.
  std::string note;
};

/// The two halves of `prefix`, each originated by `origin`.
/// Throws SimulationError at /24 or longer (IPv4) or /48 or longer (IPv6).
std::vector<MitigationAnnouncement> deaggregate(const Prefix& prefix, Asn origin);

/// One announcement of `prefix` per distinct mitigator. Throws SimulationError if empty.
std::vector<MitigationAnnouncement> moas_announcements(const Prefix& prefix, const std::vector<Asn>& mitigators);

/// Lowest authorized origin of the announced entry equal to or covering `prefix`.
std::optional<Asn> legitimate_origin(const DetectionConfig& config, const Prefix& prefix);

/// First-match policy evaluation. `origin` originates deaggregated halves;
/// without it, or when the prefix cannot be split, the action becomes Manual.
MitigationAction decide(const MitigationPolicy& policy, const Alert& alert, std::optional<Asn> origin);

/// Compact JSON line with keys event_id, action, announcements, ts.
std::string to_json_line(const MitigationAction& action);

/// Announcement intents grouped per prefix, ready for route_sim.
std::vector<Announcement> to_route_announcements(const MitigationAction& action);

// --- Recovery ----------------------------------------------------------------

struct RecoveryContext {
  std::vector<Prefix> victim_prefixes;
  std::set<Asn> legitimate_origins;
  std::set<Asn> mitigator_origins;
  /// Routes through any of these ASes count as polluted.
  std::set<Asn> offending;
  /// Pollution before this time is ignored.
  std::int64_t hijack_ts = 0;
};

struct MonitorRecovery {
  Asn monitor;
  std::int64_t polluted_at = 0;
  std::optional<std::int64_t> recovered_at;

  [[nodiscard]] std::optional<std::int64_t> delay() const;
};

struct RecoveryReport {
  std::vector<MonitorRecovery> monitors;  // by ASN
  std::optional<double> median_delay;
  std::optional<std::int64_t> max_delay;
  std::vector<Asn> unrecovered;
};

/// Streaming per-monitor route view restricted to the victim prefixes.
class RecoveryTracker {
 public:
  explicit RecoveryTracker(RecoveryContext context);
  void observe(const BgpUpdate& update);
  [[nodiscard]] RecoveryReport report() const;
  /// Offending and mitigator sets may grow while the stream is consumed.
  [[nodiscard]] RecoveryContext& context() { return ctx_; }

 private:
  [[nodiscard]] bool polluted(Asn monitor) const;

  RecoveryContext ctx_;
  std::map<Asn, std::map<Prefix, AsPath>> routes_;
  std::map<Asn, MonitorRecovery> state_;
};

RecoveryReport track_recovery(FeedSource& feed, RecoveryContext context);

}  // namespace prefixguard

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prefixguard/types.hpp"

namespace prefixguard {

// --- Operator ground truth ----------------------------------------------------

struct AnnouncedPrefix {
  std::set<Asn> origins;
  std::set<Asn> neighbors;
};

struct DetectionConfig {
  std::set<Prefix> owned;
  std::map<Prefix, AnnouncedPrefix> announced;
  /// Links the operator already trusts (seeded into LinkStores::verified).
  std::vector<DirectedLink> verified_links;
  /// Monitors that are the operator's own routers; their updates feed local history.
  std::set<Asn> local_routers;

  /// Throws ConfigError if an announced prefix lies outside owned space or
  /// has no origins / neighbors.
  void validate() const;

  /// Most specific owned prefix containing `p`, or nullptr.
  [[nodiscard]] const Prefix* owner_of(const Prefix& p) const;
  /// Most specific announced prefix strictly containing `p`, or nullptr.
  [[nodiscard]] const std::pair<const Prefix, AnnouncedPrefix>* covering_announced(const Prefix& p) const;
};

/// Key-tree (YAML) form:
///   owned: [10.0.0.0/22]
///   announced:
///     10.0.0.0/23: {origins: [1], neighbors: [2, 3]}
///   verified_links: [[5, 4]]     # optional
///   local_routers: [1]           # optional
DetectionConfig parse_detection_config(std::string_view text);
DetectionConfig load_detection_config(const std::filesystem::path& path);
std::string to_yaml(const DetectionConfig& config);

// --- Link history ---------------------------------------------------------

inline constexpr std::int64_t kDefaultRetentionSeconds = 300LL * 86400;

struct LinkHistory {
  std::int64_t first_seen = 0;
  std::int64_t last_seen = 0;
  /// Intersection over every observed path of the ASes strictly left of the
  /// link's `from` AS. Sorted.
  std::vector<Asn> left_common;
  std::uint64_t observations = 0;
};

enum class LinkSource : std::uint8_t { Monitor, LocalRouter };

struct LinkStores {
  std::unordered_set<DirectedLink> verified;
  std::unordered_map<DirectedLink, LinkHistory> monitor_history;
  std::unordered_map<DirectedLink, LinkHistory> local_history;
  std::int64_t retention_seconds = kDefaultRetentionSeconds;

  [[nodiscard]] const LinkHistory* seen(const DirectedLink& link, LinkSource source) const;
  /// Latest observation of `link` in either history.
  [[nodiscard]] std::optional<std::int64_t> last_seen(const DirectedLink& link) const;
};

/// Records every link of an announcement's path. Looped paths and withdrawals are ignored.
void ingest_history(LinkStores& stores, const BgpUpdate& update, LinkSource source);

/// Drops history entries with last_seen < now - retention. Verified links are kept.
void expire_history(LinkStores& stores, std::int64_t now);

// --- Verdicts ----------------------------------------------------------------

enum class Stage1Verdict : std::uint8_t { Legitimate, SuspiciousRule2, SuspiciousRule1 };
std::string_view to_string(Stage1Verdict v);

/// Bidirectionality and left-AS intersection checks for an unverified link
/// X->Y of `path`. A Legitimate result promotes the link to verified.
Stage1Verdict stage1_filter(LinkStores& stores, const AsPath& path, const DirectedLink& link);

enum class Confidence : std::uint8_t { Stage1Suspicious, Stage2Confirmed, Certain };
std::string_view to_string(Confidence c);
/// "stage1", "stage2", "certain".
Confidence parse_confidence(std::string_view text);

struct Verdict {
  enum class Kind : std::uint8_t { NotMine, Legitimate, Alert, Pending };
  Kind kind = Kind::NotMine;
  HijackClass cls;
  std::vector<Asn> offending;
  /// Type-N only: the reported link and its Stage-1 outcome.
  std::optional<DirectedLink> link;
  Stage1Verdict rule = Stage1Verdict::Legitimate;
  /// Type-N only: more than one unverified link was found, so N is uncertain.
  bool ambiguous = false;
  /// Looped path on an owned prefix that passed the origin checks.
  bool discarded = false;
};

/// Classifies one announcement against the configuration and link stores.
/// Dispatch: not owned, sub-prefix / squatting, Type-0, Type-1, Type-N scan.
/// May promote links to verified (Stage-1 Rule 2 legitimacy).
Verdict check_update(const DetectionConfig& config, LinkStores& stores, const BgpUpdate& update);

// --- Engine -------------------------------------------------------------------

struct Alert {
  std::uint64_t event_id = 0;
  Prefix prefix;
  HijackClass cls;
  Confidence confidence = Confidence::Certain;
  std::vector<Asn> offending;
  std::size_t polluted_monitors = 0;
  BgpUpdate first_update;
  std::int64_t detected_at = 0;
  std::optional<DirectedLink> link;
};

/// Compact JSON line with keys event_id, ts, prefix, prefix_dim, path_type,
/// confidence, offending, monitors, trigger_update.
std::string to_json_line(const Alert& alert);

struct PendingEvent {
  std::uint64_t event_id = 0;
  Prefix prefix;
  DirectedLink link;
  std::vector<Asn> left_new;
  BgpUpdate trigger;
  std::int64_t deadline = 0;
  std::set<Asn> monitors;
};

enum class Stage2Outcome : std::uint8_t { Confirmed, DismissedReverseSeen, DismissedBelowThreshold };

/// Resolves a pending event at `now` >= deadline. Promotes the link when the
/// reverse direction appeared after the trigger.
Stage2Outcome stage2_evaluate(LinkStores& stores, const PendingEvent& pending, std::size_t threshold);

struct DetectionOptions {
  std::int64_t ts2 = 300;
  std::size_t th2 = 2;
  std::int64_t expiry_interval = 86400;
};

struct DetectionStats {
  std::uint64_t updates = 0;
  std::uint64_t announcements = 0;
  std::uint64_t withdrawals = 0;
  std::uint64_t not_mine = 0;
  std::uint64_t legitimate = 0;
  std::uint64_t discarded = 0;
  std::uint64_t alerts = 0;
  std::uint64_t stage2_confirmed = 0;
  std::uint64_t stage2_dismissed = 0;
};

/// Single-consumer detection loop. Alerts go to `sink` synchronously, in
/// stream order; Stage-2 resolutions happen before the first update past the
/// deadline and at finish().
class DetectionEngine {
 public:
  using Sink = std::function<void(const Alert&)>;

  DetectionEngine(DetectionConfig config, DetectionOptions options, Sink sink);

  void process(const BgpUpdate& update);
  /// Resolves every pending event.
  void finish();
  /// Swaps in a new configuration; verified links from it are added.
  void reload(DetectionConfig config);
  /// Operator override: removes a link from the verified list.
  void revoke(const DirectedLink& link);

  [[nodiscard]] const DetectionConfig& config() const { return config_; }
  [[nodiscard]] LinkStores& stores() { return stores_; }
  [[nodiscard]] const LinkStores& stores() const { return stores_; }
  [[nodiscard]] const DetectionStats& stats() const { return stats_; }
  [[nodiscard]] std::size_t pending_count() const { return pending_.size(); }

 private:
  struct EventKey {
    Prefix prefix;
    PrefixDim prefix_dim;
    PathDim path_dim;
    std::vector<Asn> offending;
    std::optional<DirectedLink> link;
    friend bool operator==(const EventKey&, const EventKey&) = default;
  };
  struct EventKeyHash {
    std::size_t operator()(const EventKey& k) const noexcept;
  };
  struct EventState {
    std::uint64_t id = 0;
    std::set<Asn> monitors;
    bool pending = false;
  };

  void resolve_until(std::int64_t now, bool all);
  void handle(const BgpUpdate& update, const Verdict& verdict);

  DetectionConfig config_;
  DetectionOptions options_;
  Sink sink_;
  LinkStores stores_;
  DetectionStats stats_;
  std::unordered_map<EventKey, EventState, EventKeyHash> events_;
  std::deque<PendingEvent> pending_;  // deadlines non-decreasing
  std::uint64_t next_event_id_ = 1;
  std::optional<std::int64_t> last_expiry_;
};

}  // namespace prefixguard

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefixguard/detection.hpp"
#include "prefixguard/hijack.hpp"
#include "prefixguard/types.hpp"

namespace prefixguard {

// --- Wire records ----------------------------------------------------------

/// Canonical single-line JSON: keys ts, monitor, kind, prefix, path in that
/// order, no whitespace, no trailing newline. Withdrawals omit "path".
std::string to_record_line(const BgpUpdate& update);

/// Parses one record line. Prepending runs in the path are collapsed.
/// Throws ParseError on malformed JSON or invariant violations.
BgpUpdate parse_record_line(std::string_view line);

void write_records(std::ostream& out, const std::vector<BgpUpdate>& updates);

// --- Sources ---------------------------------------------------------------

/// An ordered stream of updates with non-decreasing timestamps.
class FeedSource {
 public:
  virtual ~FeedSource() = default;
  [[nodiscard]] virtual const std::string& label() const = 0;
  /// Next update, or nullopt at end of stream. May block.
  virtual std::optional<BgpUpdate> next() = 0;
};

struct ReplaySpeed {
  /// 0 = as fast as possible; otherwise stream seconds per wall-clock second.
  double multiplier = 0;

  static ReplaySpeed fast() { return {0}; }
  static ReplaySpeed real_time(double multiplier) { return {multiplier}; }
  /// "fast" or "real:X".
  static ReplaySpeed parse(std::string_view text);
};

struct ReplayOptions {
  ReplaySpeed speed;
  /// Abort on the first malformed or out-of-order record instead of skipping it.
  bool strict = false;
};

struct ReplayStats {
  std::size_t delivered = 0;
  std::size_t skipped = 0;
};

/// Newline-delimited record file, delivered in file order.
class ReplaySource : public FeedSource {
 public:
  ReplaySource(const std::filesystem::path& path, ReplayOptions options, std::string label = {});
  ReplaySource(std::unique_ptr<std::istream> in, ReplayOptions options, std::string label);
  ~ReplaySource() override;

  [[nodiscard]] const std::string& label() const override { return label_; }
  std::optional<BgpUpdate> next() override;
  [[nodiscard]] const ReplayStats& stats() const { return stats_; }

 private:
  std::unique_ptr<std::istream> in_;
  ReplayOptions options_;
  std::string label_;
  ReplayStats stats_;
  std::size_t line_no_ = 0;
  std::optional<std::int64_t> last_ts_;
  std::optional<std::chrono::steady_clock::time_point> wall_start_;
  std::int64_t stream_start_ = 0;
};

/// In-memory source; throws FeedError if timestamps go backwards.
class VectorSource : public FeedSource {
 public:
  VectorSource(std::string label, std::vector<BgpUpdate> updates);
  [[nodiscard]] const std::string& label() const override { return label_; }
  std::optional<BgpUpdate> next() override;

 private:
  std::string label_;
  std::vector<BgpUpdate> updates_;
  std::size_t pos_ = 0;
};

/// Stable k-way merge: global non-decreasing ts; ties go to the source with
/// the smaller label, then the earlier source position, then per-source order.
class MergedSource : public FeedSource {
 public:
  explicit MergedSource(std::vector<std::unique_ptr<FeedSource>> sources, std::string label = "merged");
  [[nodiscard]] const std::string& label() const override { return label_; }
  std::optional<BgpUpdate> next() override;

 private:
  struct Head {
    BgpUpdate update;
    std::size_t source;
  };
  void refill(std::size_t source);

  std::vector<std::unique_ptr<FeedSource>> sources_;
  std::vector<std::optional<std::int64_t>> last_ts_;
  std::vector<Head> heap_;
  std::string label_;
};

std::unique_ptr<FeedSource> merge(std::vector<std::unique_ptr<FeedSource>> sources);

/// Runs an inner source on its own producer thread behind a bounded queue.
/// The producer blocks while the queue is full; errors are rethrown by next().
class BufferedSource : public FeedSource {
 public:
  BufferedSource(std::unique_ptr<FeedSource> inner, std::size_t capacity);
  ~BufferedSource() override;
  BufferedSource(const BufferedSource&) = delete;
  BufferedSource& operator=(const BufferedSource&) = delete;

  [[nodiscard]] const std::string& label() const override;
  std::optional<BgpUpdate> next() override;

 private:
  struct Shared;
  std::unique_ptr<FeedSource> inner_;
  std::shared_ptr<Shared> shared_;
};

/// Background churn for load and latency tests: random loop-free paths over a
/// fixed AS pool toward a fixed prefix pool. With `pace_per_second` set, the
/// source emits in wall-clock time and stamps updates with the current epoch.
struct SyntheticFeedParams {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  std::int64_t start_ts = 1'500'000'000;
  std::size_t updates_per_second = 1000;
  std::uint32_t as_pool = 2000;
  std::uint32_t first_asn = 100000;
  std::size_t prefix_pool = 5000;
  std::size_t monitors = 50;
  std::size_t min_path = 2;
  std::size_t max_path = 7;
  double withdrawal_ratio = 0.05;
  std::optional<double> pace_per_second;
};

class SyntheticSource : public FeedSource {
 public:
  explicit SyntheticSource(SyntheticFeedParams params, std::string label = "synthetic");
  ~SyntheticSource() override;
  [[nodiscard]] const std::string& label() const override { return label_; }
  std::optional<BgpUpdate> next() override;

 private:
  struct State;
  SyntheticFeedParams params_;
  std::string label_;
  std::unique_ptr<State> state_;
};

// --- Hijack replay synthesis ------------------------------------------------

struct JitterRange {
  std::int64_t lo = 1;
  std::int64_t hi = 10;
};

/// Metadata written next to a synthesized replay so detection delay can be measured.
struct SynthManifest {
  std::int64_t hijack_ts = 0;
  std::int64_t legit_ts = 0;
  Asn victim;
  Asn hijacker;
  std::string victim_prefix;
  std::string hijacked_prefix;
  std::string hijack_type;
  std::string prefix_dim;
  std::vector<Asn> polluted_monitors;
  JitterRange jitter;
  std::uint64_t seed = 0;

  [[nodiscard]] std::string to_json() const;
  static SynthManifest from_json(std::string_view text);
};

struct SynthFeed {
  std::vector<BgpUpdate> updates;  // sorted by (ts, monitor)
  SynthManifest manifest;
};

/// Seconds between the legitimate announcement phase and the hijack.
inline constexpr std::int64_t kLegitLeadSeconds = 1200;

/// Legitimate routes of every monitor at base_ts - 1200, then one announcement
/// per polluted monitor carrying its post-hijack route at base_ts + U[jitter].
/// Monitor paths start with the monitor's own ASN, as collector feeds do.
SynthFeed synth_hijack_feed(const AsGraph& graph, const SimOutcome& outcome, std::int64_t base_ts,
                            JitterRange jitter, std::uint64_t seed);

/// Recovery records after a mitigation: every monitor polluted in `hijack_feed`
/// whose post-mitigation routing is clean re-announces its new routes at
/// max(pollution ts, issued_at) + U[jitter].
std::vector<BgpUpdate> synth_recovery_feed(const AsGraph& graph, const SimOutcome& mitigated,
                                           const SynthFeed& hijack_feed, std::int64_t issued_at,
                                           JitterRange jitter, std::uint64_t seed);

/// Operator ground truth for a synthesized scenario: the victim prefix is owned
/// (and announced by the victim unless squatting); every link of the monitors'
/// pre-hijack paths is verified.
DetectionConfig synth_detection_config(const AsGraph& graph, const SimOutcome& outcome);

/// Path as a monitor would export it to a collector: its own ASN first.
std::optional<AsPath> monitor_path(const RibState& rib, NodeId monitor, const Prefix& prefix);

}  // namespace prefixguard

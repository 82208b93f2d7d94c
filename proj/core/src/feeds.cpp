#include "prefixguard/feeds.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "prefixguard/errors.hpp"

namespace prefixguard {

using ordered_json = nlohmann::ordered_json;

std::string to_record_line(const BgpUpdate& u) {
  ordered_json j;
  j["ts"] = u.timestamp;
  j["monitor"] = u.monitor.value;
  j["kind"] = u.kind == UpdateKind::Announcement ? "A" : "W";
  j["prefix"] = u.prefix.to_string();
  if (u.path) {
    auto arr = ordered_json::array();
    for (Asn a : u.path->hops()) arr.push_back(a.value);
    j["path"] = std::move(arr);
  }
  return j.dump();
}

BgpUpdate parse_record_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("malformed record: {}", e.what()));
  }
  try {
    if (!j.is_object()) throw ParseError("record is not a JSON object");
    BgpUpdate u;
    if (!j.at("ts").is_number_integer()) throw ParseError("record ts is not an integer");
    u.timestamp = j.at("ts").get<std::int64_t>();
    const auto& mon = j.at("monitor");
    if (!mon.is_number_unsigned() || mon.get<std::uint64_t>() == 0 || mon.get<std::uint64_t>() > 0xFFFFFFFFULL) {
      throw ParseError("record monitor is not a valid AS number");
    }
    u.monitor = Asn(mon.get<std::uint32_t>());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "A") {
      u.kind = UpdateKind::Announcement;
    } else if (kind == "W") {
      u.kind = UpdateKind::Withdrawal;
    } else {
      throw ParseError(fmt::format("record kind '{}' is neither A nor W", kind));
    }
    u.prefix = parse_prefix(j.at("prefix").get<std::string>());
    if (j.contains("path")) {
      if (u.kind == UpdateKind::Withdrawal) throw ParseError("withdrawal carries a path");
      std::vector<Asn> hops;
      for (const auto& a : j.at("path")) {
        if (!a.is_number_unsigned() || a.get<std::uint64_t>() == 0 || a.get<std::uint64_t>() > 0xFFFFFFFFULL) {
          throw ParseError("path element is not a valid AS number");
        }
        hops.emplace_back(a.get<std::uint32_t>());
      }
      if (hops.empty()) throw ParseError("announcement with an empty path");
      u.path = AsPath::collapsed(std::move(hops));
    } else if (u.kind == UpdateKind::Announcement) {
      throw ParseError("announcement without a path");
    }
    return u;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("malformed record: {}", e.what()));
  }
}

void write_records(std::ostream& out, const std::vector<BgpUpdate>& updates) {
  for (const auto& u : updates) out << to_record_line(u) << '\n';
}

ReplaySpeed ReplaySpeed::parse(std::string_view text) {
  if (text == "fast") return fast();
  if (text.substr(0, 5) == "real:") {
    try {
      double m = std::stod(std::string(text.substr(5)));
      if (m > 0) return real_time(m);
    } catch (const std::exception&) {
    }
  }
  throw ParseError(fmt::format("speed '{}' is neither 'fast' nor 'real:X' with X > 0", text));
}

ReplaySource::ReplaySource(const std::filesystem::path& path, ReplayOptions options, std::string label)
    : options_(options), label_(label.empty() ? path.filename().string() : std::move(label)) {
  auto file = std::make_unique<std::ifstream>(path);
  if (!*file) throw FeedError(fmt::format("cannot open replay file {}", path.string()));
  in_ = std::move(file);
}

ReplaySource::ReplaySource(std::unique_ptr<std::istream> in, ReplayOptions options, std::string label)
    : in_(std::move(in)), options_(options), label_(std::move(label)) {}

ReplaySource::~ReplaySource() = default;

std::optional<BgpUpdate> ReplaySource::next() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    BgpUpdate u;
    try {
      u = parse_record_line(line);
    } catch (const ParseError& e) {
      if (options_.strict) throw FeedError(fmt::format("{}:{}: {}", label_, line_no_, e.what()));
      ++stats_.skipped;
      continue;
    }
    if (last_ts_ && u.timestamp < *last_ts_) {
      if (options_.strict) {
        throw FeedError(fmt::format("{}:{}: timestamp {} precedes {}", label_, line_no_, u.timestamp, *last_ts_));
      }
      ++stats_.skipped;
      continue;
    }
    last_ts_ = u.timestamp;
    if (options_.speed.multiplier > 0) {
      if (!wall_start_) {
        wall_start_ = std::chrono::steady_clock::now();
        stream_start_ = u.timestamp;
      }
      auto offset = std::chrono::duration<double>(static_cast<double>(u.timestamp - stream_start_) / options_.speed.multiplier);
      std::this_thread::sleep_until(*wall_start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(offset));
    }
    ++stats_.delivered;
    return u;
  }
  return std::nullopt;
}

VectorSource::VectorSource(std::string label, std::vector<BgpUpdate> updates)
    : label_(std::move(label)), updates_(std::move(updates)) {}

std::optional<BgpUpdate> VectorSource::next() {
  if (pos_ >= updates_.size()) return std::nullopt;
  if (pos_ > 0 && updates_[pos_].timestamp < updates_[pos_ - 1].timestamp) {
    throw FeedError(fmt::format("{}: timestamps go backwards at position {}", label_, pos_));
  }
  return updates_[pos_++];
}

MergedSource::MergedSource(std::vector<std::unique_ptr<FeedSource>> sources, std::string label)
    : sources_(std::move(sources)), last_ts_(sources_.size()), label_(std::move(label)) {
  if (sources_.empty()) throw FeedError("merge needs at least one source");
  for (std::size_t i = 0; i < sources_.size(); ++i) refill(i);
}

namespace {

// Min-heap order on (ts, label, source position).
struct HeadAfter {
  const std::vector<std::unique_ptr<FeedSource>>* sources;
  template <class H>
  bool operator()(const H& a, const H& b) const {
    if (a.update.timestamp != b.update.timestamp) return a.update.timestamp > b.update.timestamp;
    const auto& la = (*sources)[a.source]->label();
    const auto& lb = (*sources)[b.source]->label();
    if (la != lb) return la > lb;
    return a.source > b.source;
  }
};

}  // namespace

void MergedSource::refill(std::size_t source) {
  auto u = sources_[source]->next();
  if (!u) return;
  if (last_ts_[source] && u->timestamp < *last_ts_[source]) {
    throw FeedError(fmt::format("source '{}' delivered ts {} after {}", sources_[source]->label(), u->timestamp,
                                *last_ts_[source]));
  }
  last_ts_[source] = u->timestamp;
  heap_.push_back(Head{std::move(*u), source});
  std::push_heap(heap_.begin(), heap_.end(), HeadAfter{&sources_});
}

std::optional<BgpUpdate> MergedSource::next() {
  if (heap_.empty()) return std::nullopt;
  std::pop_heap(heap_.begin(), heap_.end(), HeadAfter{&sources_});
  Head head = std::move(heap_.back());
  heap_.pop_back();
  refill(head.source);
  return std::move(head.update);
}

std::unique_ptr<FeedSource> merge(std::vector<std::unique_ptr<FeedSource>> sources) {
  if (sources.size() == 1) return std::move(sources.front());
  return std::make_unique<MergedSource>(std::move(sources));
}

struct BufferedSource::Shared {
  std::mutex mutex;
  std::condition_variable not_full;
  std::condition_variable not_empty;
  std::deque<BgpUpdate> queue;
  std::size_t capacity = 1;
  bool done = false;
  bool cancelled = false;
  std::exception_ptr error;
  std::thread producer;
};

BufferedSource::BufferedSource(std::unique_ptr<FeedSource> inner, std::size_t capacity)
    : inner_(std::move(inner)), shared_(std::make_shared<Shared>()) {
  shared_->capacity = std::max<std::size_t>(1, capacity);
  shared_->producer = std::thread([shared = shared_, src = inner_.get()] {
    try {
      while (auto u = src->next()) {
        std::unique_lock lock(shared->mutex);
        shared->not_full.wait(lock, [&] { return shared->queue.size() < shared->capacity || shared->cancelled; });
        if (shared->cancelled) return;
        shared->queue.push_back(std::move(*u));
        shared->not_empty.notify_one();
      }
    } catch (...) {
      std::lock_guard lock(shared->mutex);
      shared->error = std::current_exception();
    }
    std::lock_guard lock(shared->mutex);
    shared->done = true;
    shared->not_empty.notify_all();
  });
}

BufferedSource::~BufferedSource() {
  {
    std::lock_guard lock(shared_->mutex);
    shared_->cancelled = true;
  }
  shared_->not_full.notify_all();
  if (shared_->producer.joinable()) shared_->producer.join();
}

const std::string& BufferedSource::label() const { return inner_->label(); }

// GCC 11 reports a spurious -Wuninitialized on the nested optional move.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wuninitialized"
std::optional<BgpUpdate> BufferedSource::next() {
  std::unique_lock lock(shared_->mutex);
  shared_->not_empty.wait(lock, [&] { return !shared_->queue.empty() || shared_->done; });
  if (!shared_->queue.empty()) {
    std::optional<BgpUpdate> u(std::in_place, std::move(shared_->queue.front()));
    shared_->queue.pop_front();
    shared_->not_full.notify_one();
    return u;
  }
  if (shared_->error) std::rethrow_exception(shared_->error);
  return std::nullopt;
}
#pragma GCC diagnostic pop

struct SyntheticSource::State {
  std::mt19937_64 rng;
  std::size_t emitted = 0;
  std::vector<Prefix> prefixes;
  std::vector<Asn> origins;  // per prefix
  std::vector<Asn> monitors;
  std::optional<std::chrono::steady_clock::time_point> wall_start;
};

SyntheticSource::SyntheticSource(SyntheticFeedParams params, std::string label)
    : params_(params), label_(std::move(label)), state_(std::make_unique<State>()) {
  if (params_.as_pool < params_.max_path + 1 || params_.min_path < 1 || params_.max_path < params_.min_path) {
    throw FeedError("synthetic feed: AS pool too small for the requested path lengths");
  }
  state_->rng.seed(params_.seed);
  std::uniform_int_distribution<std::uint32_t> pick_as(0, params_.as_pool - 1);
  for (std::size_t i = 0; i < params_.prefix_pool; ++i) {
    // 100.64.0.0/10 style space: spread /24s from 11.0.0.0 upward.
    state_->prefixes.push_back(Prefix::ipv4(0x0B000000U + static_cast<std::uint32_t>(i << 8), 24));
    state_->origins.push_back(Asn(params_.first_asn + pick_as(state_->rng)));
  }
  for (std::size_t i = 0; i < params_.monitors; ++i) state_->monitors.push_back(Asn(params_.first_asn + pick_as(state_->rng)));
}

SyntheticSource::~SyntheticSource() = default;

std::optional<BgpUpdate> SyntheticSource::next() {
  State& s = *state_;
  if (s.emitted >= params_.count) return std::nullopt;
  std::int64_t ts;
  if (params_.pace_per_second) {
    if (!s.wall_start) s.wall_start = std::chrono::steady_clock::now();
    auto due = *s.wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(static_cast<double>(s.emitted) / *params_.pace_per_second));
    std::this_thread::sleep_until(due);
    ts = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
  } else {
    ts = params_.start_ts + static_cast<std::int64_t>(s.emitted / std::max<std::size_t>(1, params_.updates_per_second));
  }
  ++s.emitted;

  std::uniform_int_distribution<std::size_t> pick_prefix(0, s.prefixes.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_monitor(0, s.monitors.size() - 1);
  std::size_t p = pick_prefix(s.rng);
  Asn monitor = s.monitors[pick_monitor(s.rng)];
  if (std::bernoulli_distribution(params_.withdrawal_ratio)(s.rng)) {
    return BgpUpdate::withdrawal(ts, monitor, s.prefixes[p]);
  }
  std::uniform_int_distribution<std::size_t> len_dist(params_.min_path, params_.max_path);
  std::uniform_int_distribution<std::uint32_t> pick_as(0, params_.as_pool - 1);
  std::size_t len = len_dist(s.rng);
  std::vector<Asn> hops{monitor};
  Asn origin = s.origins[p];
  while (hops.size() + 1 < len) {
    Asn a(params_.first_asn + pick_as(s.rng));
    if (a == origin || std::find(hops.begin(), hops.end(), a) != hops.end()) continue;
    hops.push_back(a);
  }
  if (hops.back() != origin && std::find(hops.begin(), hops.end(), origin) == hops.end()) hops.push_back(origin);
  return BgpUpdate::announcement(ts, monitor, s.prefixes[p], AsPath(std::move(hops)));
}

std::string SynthManifest::to_json() const {
  ordered_json j;
  j["hijack_ts"] = hijack_ts;
  j["legit_ts"] = legit_ts;
  j["victim"] = victim.value;
  j["hijacker"] = hijacker.value;
  j["victim_prefix"] = victim_prefix;
  j["hijacked_prefix"] = hijacked_prefix;
  j["hijack_type"] = hijack_type;
  j["prefix_dim"] = prefix_dim;
  auto mons = ordered_json::array();
  for (Asn m : polluted_monitors) mons.push_back(m.value);
  j["polluted_monitors"] = std::move(mons);
  j["jitter"] = {jitter.lo, jitter.hi};
  j["seed"] = seed;
  return j.dump(2);
}

SynthManifest SynthManifest::from_json(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    SynthManifest m;
    m.hijack_ts = j.at("hijack_ts").get<std::int64_t>();
    m.legit_ts = j.at("legit_ts").get<std::int64_t>();
    m.victim = Asn(j.at("victim").get<std::uint32_t>());
    m.hijacker = Asn(j.at("hijacker").get<std::uint32_t>());
    m.victim_prefix = j.at("victim_prefix").get<std::string>();
    m.hijacked_prefix = j.at("hijacked_prefix").get<std::string>();
    m.hijack_type = j.at("hijack_type").get<std::string>();
    m.prefix_dim = j.at("prefix_dim").get<std::string>();
    for (const auto& a : j.at("polluted_monitors")) m.polluted_monitors.emplace_back(a.get<std::uint32_t>());
    m.jitter = {j.at("jitter").at(0).get<std::int64_t>(), j.at("jitter").at(1).get<std::int64_t>()};
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("malformed synth manifest: {}", e.what()));
  }
}

std::optional<AsPath> monitor_path(const RibState& rib, NodeId monitor, const Prefix& prefix) {
  const PrefixRib* r = rib.find(prefix);
  if (!r || !r->entries[monitor].has_route()) return std::nullopt;
  auto path = rib.path(monitor, *r);
  if (r->entries[monitor].cls == RouteClass::Self) return path;
  return path->prepended(rib.graph().asn(monitor));
}

namespace {

void sort_feed(std::vector<BgpUpdate>& updates) {
  std::stable_sort(updates.begin(), updates.end(), [](const BgpUpdate& a, const BgpUpdate& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.monitor < b.monitor;
  });
}

}  // namespace

SynthFeed synth_hijack_feed(const AsGraph& graph, const SimOutcome& outcome, std::int64_t base_ts, JitterRange jitter,
                            std::uint64_t seed) {
  if (jitter.lo < 0 || jitter.hi < jitter.lo) throw SimulationError("jitter range must satisfy 0 <= lo <= hi");
  SynthFeed feed;
  auto& m = feed.manifest;
  m.hijack_ts = base_ts;
  m.legit_ts = base_ts - kLegitLeadSeconds;
  m.victim = outcome.scenario.victim;
  m.hijacker = outcome.scenario.hijacker;
  m.victim_prefix = outcome.scenario.victim_prefix.to_string();
  m.hijacked_prefix = outcome.hijacked_prefix.to_string();
  m.hijack_type = to_string(outcome.scenario.hijack.path_dim);
  m.prefix_dim = std::string(to_string(outcome.scenario.hijack.prefix_dim));
  m.polluted_monitors = outcome.polluted_monitors;
  m.jitter = jitter;
  m.seed = seed;

  for (NodeId mon : graph.monitors()) {
    for (const auto& ann : outcome.legitimate) {
      if (auto p = monitor_path(outcome.pre_rib, mon, ann.prefix)) {
        feed.updates.push_back(BgpUpdate::announcement(m.legit_ts, graph.asn(mon), ann.prefix, std::move(*p)));
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> delay(jitter.lo, jitter.hi);
  for (Asn mon : outcome.polluted_monitors) {
    auto p = monitor_path(outcome.rib, graph.id(mon), outcome.hijacked_prefix);
    std::int64_t ts = base_ts + delay(rng);
    if (p) feed.updates.push_back(BgpUpdate::announcement(ts, mon, outcome.hijacked_prefix, std::move(*p)));
  }
  sort_feed(feed.updates);
  return feed;
}

std::vector<BgpUpdate> synth_recovery_feed(const AsGraph& graph, const SimOutcome& mitigated, const SynthFeed& hijack_feed,
                                           std::int64_t issued_at, JitterRange jitter, std::uint64_t seed) {
  if (jitter.lo < 0 || jitter.hi < jitter.lo) throw SimulationError("jitter range must satisfy 0 <= lo <= hi");
  std::vector<bool> still_polluted(graph.node_count(), false);
  for (Asn a : mitigated.polluted) still_polluted[graph.id(a)] = true;

  std::vector<Prefix> watched{mitigated.hijacked_prefix};
  for (const auto& ann : mitigated.mitigation)
    if (std::find(watched.begin(), watched.end(), ann.prefix) == watched.end()) watched.push_back(ann.prefix);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> delay(jitter.lo, jitter.hi);
  std::vector<BgpUpdate> out;
  for (const auto& u : hijack_feed.updates) {
    if (u.timestamp < hijack_feed.manifest.hijack_ts || u.kind != UpdateKind::Announcement) continue;
    NodeId mon = graph.id(u.monitor);
    if (still_polluted[mon]) continue;
    std::int64_t ts = std::max(u.timestamp, issued_at) + delay(rng);
    for (const Prefix& p : watched) {
      auto path = monitor_path(mitigated.rib, mon, p);
      if (!path) continue;
      if (p == u.prefix && u.path && *path == *u.path) continue;
      out.push_back(BgpUpdate::announcement(ts, u.monitor, p, std::move(*path)));
    }
  }
  sort_feed(out);
  return out;
}

DetectionConfig synth_detection_config(const AsGraph& graph, const SimOutcome& outcome) {
  const auto& s = outcome.scenario;
  DetectionConfig cfg;
  cfg.owned.insert(s.victim_prefix);
  if (s.hijack.prefix_dim != PrefixDim::Squatting) {
    AnnouncedPrefix ann;
    ann.origins.insert(s.victim);
    for (Asn n : graph.neighbors(s.victim)) ann.neighbors.insert(n);
    if (ann.neighbors.empty()) ann.neighbors.insert(s.victim);
    cfg.announced.emplace(s.victim_prefix, std::move(ann));
  }
  std::set<DirectedLink> links;
  for (NodeId m : graph.monitors()) {
    for (const auto& ann : outcome.legitimate) {
      auto p = monitor_path(outcome.pre_rib, m, ann.prefix);
      if (!p || path_has_loop(*p)) continue;
      for (const auto& l : links_of(*p)) links.insert(l);
    }
  }
  cfg.verified_links.assign(links.begin(), links.end());
  return cfg;
}

}  // namespace prefixguard

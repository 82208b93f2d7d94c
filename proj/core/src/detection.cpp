#include "prefixguard/detection.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "prefixguard/errors.hpp"
#include "prefixguard/feeds.hpp"

namespace prefixguard {

// --- Config ---------------------------------------------------------------------

void DetectionConfig::validate() const {
  for (const auto& [prefix, ann] : announced) {
    if (!owner_of(prefix)) {
      throw ConfigError(fmt::format("announced prefix {} is not inside any owned prefix", prefix.to_string()));
    }
    if (ann.origins.empty()) throw ConfigError(fmt::format("announced prefix {} has no origins", prefix.to_string()));
    if (ann.neighbors.empty()) {
      throw ConfigError(fmt::format("announced prefix {} has no neighbors", prefix.to_string()));
    }
  }
  for (const auto& l : verified_links) {
    if (l.from == l.to || l.from.value == 0 || l.to.value == 0) {
      throw ConfigError(fmt::format("invalid verified link {}->{}", l.from.value, l.to.value));
    }
  }
}

const Prefix* DetectionConfig::owner_of(const Prefix& p) const {
  const Prefix* best = nullptr;
  for (const auto& o : owned) {
    if (o.contains(p) && (!best || o.length() > best->length())) best = &o;
  }
  return best;
}

const std::pair<const Prefix, AnnouncedPrefix>* DetectionConfig::covering_announced(const Prefix& p) const {
  const std::pair<const Prefix, AnnouncedPrefix>* best = nullptr;
  for (const auto& entry : announced) {
    if (entry.first != p && entry.first.contains(p) && (!best || entry.first.length() > best->first.length())) {
      best = &entry;
    }
  }
  return best;
}

namespace {

Asn yaml_asn(const YAML::Node& n) {
  try {
    return Asn::parse(n.as<std::string>());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

std::set<Asn> yaml_asn_set(const YAML::Node& n, std::string_view what) {
  if (!n || !n.IsSequence()) throw ConfigError(fmt::format("'{}' must be a list of AS numbers", what));
  std::set<Asn> out;
  for (const auto& a : n) out.insert(yaml_asn(a));
  return out;
}

Prefix yaml_prefix(const std::string& text) {
  try {
    return parse_prefix(text);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

DetectionConfig parse_detection_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("detection config: {}", e.what()));
  }
  if (!root.IsMap()) throw ConfigError("detection config must be a mapping");
  DetectionConfig cfg;
  try {
    for (const auto& key : root) {
      auto name = key.first.as<std::string>();
      if (name != "owned" && name != "announced" && name != "verified_links" && name != "local_routers") {
        throw ConfigError(fmt::format("detection config: unknown key '{}'", name));
      }
    }
    const auto owned = root["owned"];
    if (!owned || !owned.IsSequence()) throw ConfigError("detection config: 'owned' must be a list of prefixes");
    for (const auto& p : owned) cfg.owned.insert(yaml_prefix(p.as<std::string>()));
    if (const auto ann = root["announced"]) {
      if (!ann.IsMap()) throw ConfigError("detection config: 'announced' must be a mapping");
      for (const auto& entry : ann) {
        Prefix p = yaml_prefix(entry.first.as<std::string>());
        AnnouncedPrefix a;
        a.origins = yaml_asn_set(entry.second["origins"], "origins");
        a.neighbors = yaml_asn_set(entry.second["neighbors"], "neighbors");
        if (!cfg.announced.emplace(p, std::move(a)).second) {
          throw ConfigError(fmt::format("detection config: duplicate announced prefix {}", p.to_string()));
        }
      }
    }
    if (const auto links = root["verified_links"]) {
      if (!links.IsSequence()) throw ConfigError("detection config: 'verified_links' must be a list of pairs");
      for (const auto& l : links) {
        if (!l.IsSequence() || l.size() != 2) throw ConfigError("detection config: verified link must be [from, to]");
        cfg.verified_links.push_back({yaml_asn(l[0]), yaml_asn(l[1])});
      }
    }
    if (const auto local = root["local_routers"]) cfg.local_routers = yaml_asn_set(local, "local_routers");
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("detection config: {}", e.what()));
  }
  cfg.validate();
  return cfg;
}

DetectionConfig load_detection_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open detection config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_detection_config(ss.str());
}

std::string to_yaml(const DetectionConfig& config) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "owned" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& p : config.owned) out << p.to_string();
  out << YAML::EndSeq;
  out << YAML::Key << "announced" << YAML::Value << YAML::BeginMap;
  for (const auto& [p, a] : config.announced) {
    out << YAML::Key << p.to_string() << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "origins" << YAML::Value << YAML::BeginSeq;
    for (Asn o : a.origins) out << o.value;
    out << YAML::EndSeq << YAML::Key << "neighbors" << YAML::Value << YAML::BeginSeq;
    for (Asn n : a.neighbors) out << n.value;
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndMap;
  if (!config.verified_links.empty()) {
    out << YAML::Key << "verified_links" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : config.verified_links) out << YAML::Flow << YAML::BeginSeq << l.from.value << l.to.value << YAML::EndSeq;
    out << YAML::EndSeq;
  }
  if (!config.local_routers.empty()) {
    out << YAML::Key << "local_routers" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (Asn a : config.local_routers) out << a.value;
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// --- History --------------------------------------------------------------------

const LinkHistory* LinkStores::seen(const DirectedLink& link, LinkSource source) const {
  const auto& h = source == LinkSource::Monitor ? monitor_history : local_history;
  auto it = h.find(link);
  return it == h.end() ? nullptr : &it->second;
}

std::optional<std::int64_t> LinkStores::last_seen(const DirectedLink& link) const {
  std::optional<std::int64_t> out;
  for (auto src : {LinkSource::Monitor, LinkSource::LocalRouter}) {
    if (const auto* h = seen(link, src)) out = std::max(out.value_or(h->last_seen), h->last_seen);
  }
  return out;
}

void ingest_history(LinkStores& stores, const BgpUpdate& update, LinkSource source) {
  if (update.kind != UpdateKind::Announcement || !update.path || path_has_loop(*update.path)) return;
  auto& history = source == LinkSource::Monitor ? stores.monitor_history : stores.local_history;
  const auto hops = update.path->hops();
  for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
    auto left = hops.first(i);
    auto [it, inserted] = history.try_emplace(DirectedLink{hops[i], hops[i + 1]});
    LinkHistory& h = it->second;
    if (inserted) {
      h.first_seen = update.timestamp;
      h.left_common.assign(left.begin(), left.end());
      std::sort(h.left_common.begin(), h.left_common.end());
    } else {
      std::erase_if(h.left_common, [&](Asn a) { return std::find(left.begin(), left.end(), a) == left.end(); });
    }
    h.last_seen = std::max(h.last_seen, update.timestamp);
    ++h.observations;
  }
}

void expire_history(LinkStores& stores, std::int64_t now) {
  const std::int64_t cutoff = now - stores.retention_seconds;
  for (auto* h : {&stores.monitor_history, &stores.local_history}) {
    std::erase_if(*h, [&](const auto& kv) { return kv.second.last_seen < cutoff; });
  }
}

// --- Stage 1 ----------------------------------------------------------------------

std::string_view to_string(Stage1Verdict v) {
  switch (v) {
    case Stage1Verdict::Legitimate: return "legitimate";
    case Stage1Verdict::SuspiciousRule1: return "rule1";
    case Stage1Verdict::SuspiciousRule2: return "rule2";
  }
  return "?";
}

namespace {

std::vector<Asn> left_of(const AsPath& path, Asn asn) {
  const auto hops = path.hops();
  auto it = std::find(hops.begin(), hops.end(), asn);
  std::vector<Asn> out(hops.begin(), it);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Stage1Verdict stage1_filter(LinkStores& stores, const AsPath& path, const DirectedLink& link) {
  const DirectedLink reverse = link.reversed();
  const LinkHistory* hm = stores.seen(reverse, LinkSource::Monitor);
  const LinkHistory* hl = stores.seen(reverse, LinkSource::LocalRouter);
  if (!hm && !hl) return Stage1Verdict::SuspiciousRule1;

  std::vector<Asn> old_common;
  if (hm && hl) {
    std::set_intersection(hm->left_common.begin(), hm->left_common.end(), hl->left_common.begin(),
                          hl->left_common.end(), std::back_inserter(old_common));
  } else {
    old_common = (hm ? hm : hl)->left_common;
  }
  if (!old_common.empty()) {
    const auto left_new = left_of(path, link.from);
    std::vector<Asn> both;
    std::set_intersection(old_common.begin(), old_common.end(), left_new.begin(), left_new.end(),
                          std::back_inserter(both));
    if (!both.empty()) return Stage1Verdict::SuspiciousRule2;
  }
  stores.verified.insert(link);
  return Stage1Verdict::Legitimate;
}

// --- Dispatch ------------------------------------------------------------------

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::Stage1Suspicious: return "stage1";
    case Confidence::Stage2Confirmed: return "stage2";
    case Confidence::Certain: return "certain";
  }
  return "?";
}

Confidence parse_confidence(std::string_view text) {
  if (text == "stage1") return Confidence::Stage1Suspicious;
  if (text == "stage2") return Confidence::Stage2Confirmed;
  if (text == "certain") return Confidence::Certain;
  throw ConfigError(fmt::format("unknown confidence '{}' (stage1, stage2, certain)", text));
}

namespace {

Verdict certain(PrefixDim prefix_dim, PathDim path_dim, std::vector<Asn> offending) {
  Verdict v;
  v.kind = Verdict::Kind::Alert;
  v.cls = HijackClass{prefix_dim, path_dim, DataPlaneDim::Unknown};
  v.offending = std::move(offending);
  return v;
}

/// Origin and first-hop checks against one announced entry.
std::optional<Verdict> origin_checks(PrefixDim prefix_dim, const AnnouncedPrefix& ann, const AsPath& path) {
  if (!ann.origins.contains(path.origin())) return certain(prefix_dim, PathDim::type(0), {path.origin()});
  if (path.size() >= 2) {
    Asn second = path[path.size() - 2];
    if (!ann.neighbors.contains(second)) return certain(prefix_dim, PathDim::type(1), {second});
  }
  return std::nullopt;
}

}  // namespace

Verdict check_update(const DetectionConfig& config, LinkStores& stores, const BgpUpdate& update) {
  if (update.kind != UpdateKind::Announcement || !update.path) {
    throw std::invalid_argument("check_update expects an announcement");
  }
  const AsPath& path = *update.path;
  if (!config.owner_of(update.prefix)) return Verdict{};

  auto exact = config.announced.find(update.prefix);
  if (exact == config.announced.end()) {
    if (const auto* cover = config.covering_announced(update.prefix)) {
      if (auto v = origin_checks(PrefixDim::SubPrefix, cover->second, path)) return *v;
      return certain(PrefixDim::SubPrefix, PathDim::type_u(), {});
    }
    return certain(PrefixDim::Squatting, PathDim::type(0), {path.origin()});
  }

  if (auto v = origin_checks(PrefixDim::ExactPrefix, exact->second, path)) return *v;

  Verdict out;
  out.kind = Verdict::Kind::Legitimate;
  if (path_has_loop(path)) {
    out.discarded = true;
    return out;
  }

  const auto hops = path.hops();
  const std::size_t k = hops.size();
  std::optional<std::size_t> reported_hop;
  std::size_t unverified = 0;
  // Link at hop j (j >= 2) is hops[k-1-j] -> hops[k-j]; scan from the origin side.
  for (std::size_t j = 2; j < k; ++j) {
    DirectedLink link{hops[k - 1 - j], hops[k - j]};
    if (stores.verified.contains(link)) continue;
    ++unverified;
    Stage1Verdict s = stage1_filter(stores, path, link);
    if (s == Stage1Verdict::Legitimate) continue;
    if (!reported_hop) reported_hop = j;
    out.rule = std::max(out.rule, s);
  }
  if (!reported_hop) return out;
  const std::size_t j = *reported_hop;
  out.kind = Verdict::Kind::Pending;
  out.link = DirectedLink{hops[k - 1 - j], hops[k - j]};
  out.cls = HijackClass{PrefixDim::ExactPrefix, PathDim::type(static_cast<std::uint8_t>(std::min<std::size_t>(j, 255))),
                        DataPlaneDim::Unknown};
  out.offending = {out.link->from};
  out.ambiguous = unverified > 1;
  return out;
}

// --- Alerts ------------------------------------------------------------------

std::string to_json_line(const Alert& alert) {
  nlohmann::ordered_json j;
  j["event_id"] = alert.event_id;
  j["ts"] = alert.detected_at;
  j["prefix"] = alert.prefix.to_string();
  j["prefix_dim"] = to_string(alert.cls.prefix_dim);
  j["path_type"] = to_string(alert.cls.path_dim);
  j["confidence"] = to_string(alert.confidence);
  auto off = nlohmann::ordered_json::array();
  for (Asn a : alert.offending) off.push_back(a.value);
  j["offending"] = std::move(off);
  j["monitors"] = alert.polluted_monitors;
  j["trigger_update"] = nlohmann::ordered_json::parse(to_record_line(alert.first_update));
  return j.dump();
}

// --- Stage 2 ----------------------------------------------------------------

Stage2Outcome stage2_evaluate(LinkStores& stores, const PendingEvent& pending, std::size_t threshold) {
  auto seen = stores.last_seen(pending.link.reversed());
  if (seen && *seen >= pending.trigger.timestamp) {
    stores.verified.insert(pending.link);
    return Stage2Outcome::DismissedReverseSeen;
  }
  if (pending.monitors.size() < threshold) return Stage2Outcome::DismissedBelowThreshold;
  return Stage2Outcome::Confirmed;
}

// --- Engine ----------------------------------------------------------------------

std::size_t DetectionEngine::EventKeyHash::operator()(const EventKey& k) const noexcept {
  std::size_t h = std::hash<Prefix>{}(k.prefix);
  auto mix = [&](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  mix(static_cast<std::size_t>(k.prefix_dim));
  mix(k.path_dim.unaltered ? 1000 : k.path_dim.n);
  for (Asn a : k.offending) mix(a.value);
  if (k.link) mix(std::hash<DirectedLink>{}(*k.link));
  return h;
}

DetectionEngine::DetectionEngine(DetectionConfig config, DetectionOptions options, Sink sink)
    : options_(options), sink_(std::move(sink)) {
  if (options_.ts2 < 0) throw ConfigError("T_s2 must be non-negative");
  reload(std::move(config));
}

void DetectionEngine::reload(DetectionConfig config) {
  config.validate();
  for (const auto& l : config.verified_links) stores_.verified.insert(l);
  config_ = std::move(config);
}

void DetectionEngine::revoke(const DirectedLink& link) { stores_.verified.erase(link); }

void DetectionEngine::resolve_until(std::int64_t now, bool all) {
  while (!pending_.empty() && (all || pending_.front().deadline < now)) {
    PendingEvent ev = std::move(pending_.front());
    pending_.pop_front();
    Stage2Outcome outcome = stage2_evaluate(stores_, ev, options_.th2);
    if (outcome != Stage2Outcome::Confirmed) {
      ++stats_.stage2_dismissed;
      continue;
    }
    ++stats_.stage2_confirmed;
    ++stats_.alerts;
    const auto hops = ev.trigger.path->hops();
    std::size_t j = 0;
    for (std::size_t i = 0; i + 1 < hops.size(); ++i)
      if (hops[i] == ev.link.from) j = hops.size() - 1 - i;
    Alert a;
    a.event_id = ev.event_id;
    a.prefix = ev.prefix;
    a.cls = HijackClass{PrefixDim::ExactPrefix, PathDim::type(static_cast<std::uint8_t>(std::min<std::size_t>(j, 255))),
                        DataPlaneDim::Unknown};
    a.confidence = Confidence::Stage2Confirmed;
    a.offending = {ev.link.from};
    a.polluted_monitors = ev.monitors.size();
    a.first_update = ev.trigger;
    a.detected_at = ev.deadline;
    a.link = ev.link;
    sink_(a);
  }
}

void DetectionEngine::process(const BgpUpdate& update) {
  ++stats_.updates;
  resolve_until(update.timestamp, false);
  if (!last_expiry_) {
    last_expiry_ = update.timestamp;
  } else if (update.timestamp - *last_expiry_ >= options_.expiry_interval) {
    expire_history(stores_, update.timestamp);
    last_expiry_ = update.timestamp;
  }
  if (update.kind == UpdateKind::Withdrawal) {
    ++stats_.withdrawals;
    return;
  }
  ++stats_.announcements;
  Verdict v = check_update(config_, stores_, update);
  handle(update, v);
  ingest_history(stores_, update,
                 config_.local_routers.contains(update.monitor) ? LinkSource::LocalRouter : LinkSource::Monitor);
}

void DetectionEngine::handle(const BgpUpdate& update, const Verdict& v) {
  switch (v.kind) {
    case Verdict::Kind::NotMine: ++stats_.not_mine; return;
    case Verdict::Kind::Legitimate:
      ++(v.discarded ? stats_.discarded : stats_.legitimate);
      return;
    case Verdict::Kind::Alert:
    case Verdict::Kind::Pending: break;
  }
  const bool from_monitor = !config_.local_routers.contains(update.monitor);
  const bool type_n = v.kind == Verdict::Kind::Pending;
  EventKey key{update.prefix, v.cls.prefix_dim, type_n ? PathDim{} : v.cls.path_dim, v.offending, v.link};
  auto [it, fresh] = events_.try_emplace(key);
  EventState& ev = it->second;
  if (from_monitor) ev.monitors.insert(update.monitor);
  if (!fresh) {
    if (ev.pending) {
      auto pit = std::lower_bound(pending_.begin(), pending_.end(), ev.id,
                                  [](const PendingEvent& p, std::uint64_t id) { return p.event_id < id; });
      if (pit != pending_.end() && pit->event_id == ev.id) {
        if (from_monitor) pit->monitors.insert(update.monitor);
      } else {
        ev.pending = false;
      }
    }
    return;
  }
  ev.id = next_event_id_++;
  ++stats_.alerts;
  Alert a;
  a.event_id = ev.id;
  a.prefix = update.prefix;
  a.cls = v.cls;
  a.confidence = type_n ? Confidence::Stage1Suspicious : Confidence::Certain;
  a.offending = v.offending;
  a.polluted_monitors = ev.monitors.size();
  a.first_update = update;
  a.detected_at = update.timestamp;
  a.link = v.link;
  sink_(a);
  if (type_n) {
    PendingEvent p;
    p.event_id = ev.id;
    p.prefix = update.prefix;
    p.link = *v.link;
    p.left_new = left_of(*update.path, v.link->from);
    p.trigger = update;
    p.deadline = update.timestamp + options_.ts2;
    if (from_monitor) p.monitors.insert(update.monitor);
    pending_.push_back(std::move(p));
    ev.pending = true;
  }
}

void DetectionEngine::finish() { resolve_until(0, true); }

}  // namespace prefixguard

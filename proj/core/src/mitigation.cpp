#include "prefixguard/mitigation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "prefixguard/errors.hpp"

namespace prefixguard {

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::Manual: return "manual";
    case ActionKind::Deaggregate: return "deaggregate";
    case ActionKind::Outsource: return "outsource";
    case ActionKind::Both: return "both";
  }
  return "?";
}

bool RuleMatcher::matches(const Alert& alert) const {
  if (prefix) {
    if (exact ? alert.prefix != *prefix : !prefix->contains(alert.prefix)) return false;
  }
  if (max_length && alert.prefix.length() > *max_length) return false;
  if (alert.polluted_monitors < min_monitors) return false;
  return alert.confidence >= min_confidence;
}

bool RuleMatcher::is_catch_all() const {
  return !prefix && !max_length && min_monitors == 0 && min_confidence == Confidence::Stage1Suspicious;
}

void MitigationPolicy::normalize() {
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    if ((r.action == ActionKind::Outsource || r.action == ActionKind::Both) && r.mitigators.empty()) {
      throw ConfigError(fmt::format("policy rule {} outsources without mitigators", i + 1));
    }
    if (r.match.is_catch_all() && i + 1 < rules.size()) {
      throw ConfigError(fmt::format("policy rule {} matches everything; later rules are unreachable", i + 1));
    }
  }
  if (rules.empty() || !rules.back().match.is_catch_all()) {
    rules.push_back(PolicyRule{"default", RuleMatcher{}, ActionKind::Manual, {}});
  }
}

MitigationPolicy MitigationPolicy::defaults(std::vector<Asn> mitigators) {
  MitigationPolicy p;
  RuleMatcher shorter;
  shorter.max_length = 23;
  p.rules.push_back({"deaggregate-short", shorter, ActionKind::Deaggregate, {}});
  if (!mitigators.empty()) {
    RuleMatcher slash24;
    slash24.max_length = 24;
    p.rules.push_back({"outsource-24", slash24, ActionKind::Outsource, std::move(mitigators)});
  }
  p.normalize();
  return p;
}

namespace {

ActionKind parse_action(const std::string& s) {
  if (s == "manual") return ActionKind::Manual;
  if (s == "deaggregate") return ActionKind::Deaggregate;
  if (s == "outsource") return ActionKind::Outsource;
  if (s == "both") return ActionKind::Both;
  throw ConfigError(fmt::format("unknown policy action '{}'", s));
}

}  // namespace

MitigationPolicy parse_policy(std::string_view text) {
  MitigationPolicy policy;
  try {
    YAML::Node root = YAML::Load(std::string(text));
    if (!root.IsMap() || !root["rules"] || !root["rules"].IsSequence()) {
      throw ConfigError("policy must be a mapping with a 'rules' list");
    }
    std::size_t index = 0;
    for (const auto& node : root["rules"]) {
      ++index;
      PolicyRule rule;
      rule.name = node["name"] ? node["name"].as<std::string>() : fmt::format("rule-{}", index);
      if (!node["action"]) throw ConfigError(fmt::format("policy rule {} has no action", index));
      rule.action = parse_action(node["action"].as<std::string>());
      if (const auto m = node["match"]) {
        for (const auto& kv : m) {
          auto key = kv.first.as<std::string>();
          if (key == "prefix") {
            rule.match.prefix = parse_prefix(kv.second.as<std::string>());
          } else if (key == "scope") {
            auto scope = kv.second.as<std::string>();
            if (scope != "exact" && scope != "within") throw ConfigError("scope must be 'exact' or 'within'");
            rule.match.exact = scope == "exact";
          } else if (key == "max_length") {
            rule.match.max_length = kv.second.as<unsigned>();
          } else if (key == "min_monitors") {
            rule.match.min_monitors = kv.second.as<std::size_t>();
          } else if (key == "min_confidence") {
            rule.match.min_confidence = parse_confidence(kv.second.as<std::string>());
          } else {
            throw ConfigError(fmt::format("policy rule {}: unknown matcher key '{}'", index, key));
          }
        }
      }
      if (const auto mit = node["mitigators"]) {
        for (const auto& a : mit) rule.mitigators.push_back(Asn::parse(a.as<std::string>()));
      }
      policy.rules.push_back(std::move(rule));
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("policy: {}", e.what()));
  } catch (const ParseError& e) {
    throw ConfigError(fmt::format("policy: {}", e.what()));
  }
  policy.normalize();
  return policy;
}

MitigationPolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open policy {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_policy(ss.str());
}

std::vector<MitigationAnnouncement> deaggregate(const Prefix& prefix, Asn origin) {
  const unsigned limit = prefix.family() == AddressFamily::IPv4 ? 24 : 48;
  if (prefix.length() >= limit) {
    throw SimulationError(fmt::format("cannot deaggregate {}: halves would be longer than /{}", prefix.to_string(), limit));
  }
  return {{origin, prefix.half(false), AsPath({origin})}, {origin, prefix.half(true), AsPath({origin})}};
}

std::vector<MitigationAnnouncement> moas_announcements(const Prefix& prefix, const std::vector<Asn>& mitigators) {
  if (mitigators.empty()) throw SimulationError("MOAS outsourcing needs at least one mitigator");
  std::vector<MitigationAnnouncement> out;
  std::set<Asn> seen;
  for (Asn m : mitigators) {
    if (seen.insert(m).second) out.push_back({m, prefix, AsPath({m})});
  }
  return out;
}

std::optional<Asn> legitimate_origin(const DetectionConfig& config, const Prefix& prefix) {
  if (auto it = config.announced.find(prefix); it != config.announced.end()) return *it->second.origins.begin();
  if (const auto* cover = config.covering_announced(prefix)) return *cover->second.origins.begin();
  return std::nullopt;
}

MitigationAction decide(const MitigationPolicy& policy, const Alert& alert, std::optional<Asn> origin) {
  MitigationAction action;
  action.event_id = alert.event_id;
  action.issued_at = alert.detected_at;
  for (const auto& rule : policy.rules) {
    if (!rule.match.matches(alert)) continue;
    action.rule = rule.name;
    action.kind = rule.action;
    bool deagg = rule.action == ActionKind::Deaggregate || rule.action == ActionKind::Both;
    bool outsource = rule.action == ActionKind::Outsource || rule.action == ActionKind::Both;
    if (deagg) {
      if (!origin) {
        action.note = "no legitimate origin known for deaggregation";
      } else {
        try {
          action.announcements = deaggregate(alert.prefix, *origin);
        } catch (const SimulationError& e) {
          action.note = e.what();
        }
      }
      if (action.announcements.empty() && !outsource) action.kind = ActionKind::Manual;
      if (action.announcements.empty() && outsource) action.kind = ActionKind::Outsource;
    }
    if (outsource) {
      auto moas = moas_announcements(alert.prefix, rule.mitigators);
      action.announcements.insert(action.announcements.end(), moas.begin(), moas.end());
    }
    return action;
  }
  return action;  // unreachable after normalize()
}

std::string to_json_line(const MitigationAction& action) {
  nlohmann::ordered_json j;
  j["event_id"] = action.event_id;
  j["action"] = to_string(action.kind);
  auto anns = nlohmann::ordered_json::array();
  for (const auto& a : action.announcements) {
    nlohmann::ordered_json e;
    e["origin"] = a.origin.value;
    e["prefix"] = a.prefix.to_string();
    anns.push_back(std::move(e));
  }
  j["announcements"] = std::move(anns);
  j["ts"] = action.issued_at;
  return j.dump();
}

std::vector<Announcement> to_route_announcements(const MitigationAction& action) {
  std::vector<Announcement> out;
  for (const auto& a : action.announcements) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Announcement& x) { return x.prefix == a.prefix; });
    if (it == out.end()) {
      out.push_back({a.prefix, {a.seed}});
    } else {
      it->seeds.push_back(a.seed);
    }
  }
  return out;
}

// --- Recovery --------------------------------------------------------------------

std::optional<std::int64_t> MonitorRecovery::delay() const {
  if (!recovered_at) return std::nullopt;
  return *recovered_at - polluted_at;
}

RecoveryTracker::RecoveryTracker(RecoveryContext context) : ctx_(std::move(context)) {
  if (ctx_.victim_prefixes.empty()) throw SimulationError("recovery tracking needs at least one victim prefix");
}

namespace {

/// Does the route for `owner` decide forwarding for some address in `q`?
bool governs(const Prefix& q, const Prefix& owner, const std::map<Prefix, AsPath>& held) {
  bool partial = false;
  for (const auto& [s, _] : held) {
    if (s.length() <= owner.length() || !s.overlaps(q)) continue;
    if (s.contains(q)) return false;
    partial = true;
  }
  if (!partial) return true;
  return governs(q.half(false), owner, held) || governs(q.half(true), owner, held);
}

}  // namespace

bool RecoveryTracker::polluted(Asn monitor) const {
  auto it = routes_.find(monitor);
  if (it == routes_.end()) return false;
  const auto& held = it->second;
  for (const auto& [p, path] : held) {
    bool clean = (ctx_.legitimate_origins.contains(path.origin()) || ctx_.mitigator_origins.contains(path.origin())) &&
                 std::none_of(path.hops().begin(), path.hops().end(),
                              [&](Asn a) { return ctx_.offending.contains(a); });
    if (clean) continue;
    for (const auto& v : ctx_.victim_prefixes) {
      if (!p.overlaps(v)) continue;
      const Prefix& q = v.contains(p) ? p : v;
      if (governs(q, p, held)) return true;
    }
  }
  return false;
}

void RecoveryTracker::observe(const BgpUpdate& update) {
  if (std::none_of(ctx_.victim_prefixes.begin(), ctx_.victim_prefixes.end(),
                   [&](const Prefix& v) { return v.overlaps(update.prefix); })) {
    return;
  }
  auto& held = routes_[update.monitor];
  if (update.kind == UpdateKind::Withdrawal) {
    held.erase(update.prefix);
  } else {
    held.insert_or_assign(update.prefix, *update.path);
  }
  if (update.timestamp < ctx_.hijack_ts) return;
  bool dirty = polluted(update.monitor);
  auto st = state_.find(update.monitor);
  if (st == state_.end()) {
    if (dirty) state_.emplace(update.monitor, MonitorRecovery{update.monitor, update.timestamp, std::nullopt});
  } else if (!dirty && !st->second.recovered_at) {
    st->second.recovered_at = update.timestamp;
  }
}

RecoveryReport RecoveryTracker::report() const {
  RecoveryReport r;
  std::vector<std::int64_t> delays;
  for (const auto& [asn, m] : state_) {
    r.monitors.push_back(m);
    if (auto d = m.delay()) {
      delays.push_back(*d);
    } else {
      r.unrecovered.push_back(asn);
    }
  }
  if (!delays.empty()) {
    std::sort(delays.begin(), delays.end());
    std::size_t n = delays.size();
    r.median_delay = n % 2 ? static_cast<double>(delays[n / 2]) : (delays[n / 2 - 1] + delays[n / 2]) / 2.0;
    r.max_delay = delays.back();
  }
  return r;
}

RecoveryReport track_recovery(FeedSource& feed, RecoveryContext context) {
  RecoveryTracker tracker(std::move(context));
  while (auto u = feed.next()) tracker.observe(*u);
  return tracker.report();
}

}  // namespace prefixguard

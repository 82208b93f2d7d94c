#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "compare.hpp"
#include "oracle.hpp"
#include "prefixguard/detection.hpp"
#include "prefixguard/errors.hpp"
#include "prefixguard/experiment.hpp"
#include "prefixguard/feeds.hpp"
#include "prefixguard/hijack.hpp"
#include "prefixguard/mitigation.hpp"
#include "prefixguard/route_sim.hpp"
#include "prefixguard/topology.hpp"
#include "prefixguard/topology_gen.hpp"

using namespace prefixguard;

namespace {

enum class Status { Pass, Fail, Skipped };

struct Result {
  Status status;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

const Prefix kVictimPrefix = Prefix::ipv4(0x0A000000U, 23);

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string percent(double x) { return fmt::format("{:.2f}%", 100.0 * x); }

std::string join_pct(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + percent(x);
  return s;
}

// --- Shared large-graph runs ---------------------------------------------------

struct LargeGraph {
  AsGraph graph;
  std::vector<Asn> monitors_all;
  std::vector<Asn> monitors_subset;
  DegreeRankings rankings;
};

LargeGraph build_large_graph() {
  TopologyParams p;
  p.nodes = 10000;
  p.seed = 2017;
  LargeGraph lg{generate_topology(p), {}, {}, {}};
  lg.monitors_all = pick_monitors(lg.graph, 218, 7);
  std::mt19937_64 rng(65);
  std::sample(lg.monitors_all.begin(), lg.monitors_all.end(), std::back_inserter(lg.monitors_subset), 65, rng);
  lg.graph.set_monitors(lg.monitors_all);
  lg.rankings = degree_rankings(lg.graph);
  return lg;
}

struct TypeStats {
  std::vector<double> impact;
  std::size_t invisible_all = 0;
  std::size_t invisible_subset = 0;
  std::size_t runs = 0;
};

struct MitigationStats {
  std::map<std::size_t, std::vector<double>> moas_top;  // K -> residuals
  std::vector<double> moas_random1;
  std::vector<double> filter_top10;
  std::size_t deagg_runs = 0;
  std::size_t deagg_nonempty = 0;
};

struct LargeRuns {
  std::size_t pairs = 0;
  std::vector<TypeStats> types;  // index = N
  MitigationStats mitigation;
  double seconds = 0;
};

LargeRuns run_large(const LargeGraph& lg) {
  constexpr std::size_t kPairs = 1000;
  constexpr std::size_t kMitigationPairs = 500;
  constexpr std::size_t kDeaggPerType = 40;
  const std::vector<std::size_t> ks{1, 2, 3, 5, 10};
  auto start = Clock::now();
  LargeRuns r;
  r.pairs = kPairs;
  r.types.resize(5);
  std::set<Asn> subset(lg.monitors_subset.begin(), lg.monitors_subset.end());
  auto pairs = draw_pairs(lg.graph, kPairs, 99);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [victim, hijacker] = pairs[i];
    for (std::uint8_t n = 0; n <= 4; ++n) {
      HijackScenario s{victim, hijacker, {PrefixDim::ExactPrefix, PathDim::type(n), DataPlaneDim::Unknown},
                       kVictimPrefix, FillerMode::Synthetic};
      SimOutcome out = simulate_hijack(lg.graph, s);
      TypeStats& ts = r.types[n];
      ++ts.runs;
      ts.impact.push_back(impact(out));
      if (out.polluted_monitors.empty()) ++ts.invisible_all;
      if (std::none_of(out.polluted_monitors.begin(), out.polluted_monitors.end(),
                       [&](Asn m) { return subset.contains(m); })) {
        ++ts.invisible_subset;
      }
      if (i < kDeaggPerType) {
        ++r.mitigation.deagg_runs;
        if (!simulate_mitigation(lg.graph, out, MitigationStrategy::deaggregation()).polluted.empty()) {
          ++r.mitigation.deagg_nonempty;
        }
      }
      if (n == 0 && i < kMitigationPairs) {
        for (std::size_t k : ks) {
          StrategySpec spec{StrategySpec::Kind::Moas, StrategySpec::Selection::TopCone, k, {}};
          auto ases = select_ases(lg.graph, lg.rankings, spec, victim, hijacker, i);
          r.mitigation.moas_top[k].push_back(impact(simulate_mitigation(lg.graph, out, MitigationStrategy::moas(ases))));
        }
        StrategySpec rnd{StrategySpec::Kind::Moas, StrategySpec::Selection::Random, 1, {}};
        auto one = select_ases(lg.graph, lg.rankings, rnd, victim, hijacker, 1000 + i);
        r.mitigation.moas_random1.push_back(impact(simulate_mitigation(lg.graph, out, MitigationStrategy::moas(one))));
        StrategySpec flt{StrategySpec::Kind::Filtering, StrategySpec::Selection::TopCone, 10, {}};
        auto filters = select_ases(lg.graph, lg.rankings, flt, victim, hijacker, i);
        r.mitigation.filter_top10.push_back(
            impact(simulate_mitigation(lg.graph, out, MitigationStrategy::filtering(filters))));
      }
    }
  }
  r.seconds = seconds_since(start);
  return r;
}

// --- Criteria -------------------------------------------------------------------

Result c1_oracle() {
  auto start = Clock::now();
  std::mt19937_64 rng(20170601);
  constexpr int kInstances = 300;
  int matched = 0;
  std::string first_diff;
  for (int i = 0; i < kInstances; ++i) {
    auto g = oracle::random_toy_graph(rng, 12);
    auto seeds = oracle::random_seeds(rng, g);
    std::optional<std::pair<std::vector<std::uint32_t>, std::uint32_t>> filter;
    if (seeds.size() > 1 && rng() % 4 == 0) filter = std::make_pair(std::vector<std::uint32_t>{1, 2, 3}, seeds[1][0]);
    auto d = oracle::diff_against_oracle(g, seeds, filter, false, static_cast<std::uint64_t>(i));
    if (d.empty()) {
      ++matched;
    } else if (first_diff.empty()) {
      first_diff = fmt::format("instance {}: {}", i, d);
    }
  }
  double secs = seconds_since(start);
  bool ok = matched == kInstances && secs < 60;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("{}/{} random graphs (<=12 ASes) match the oracle in {:.1f}s{}", matched, kInstances, secs,
                      first_diff.empty() ? "" : "; " + first_diff)};
}

Result c2_subprefix() {
  auto start = Clock::now();
  TopologyParams p;
  p.nodes = 1000;
  p.seed = 22;
  AsGraph g = generate_topology(p);
  auto pairs = draw_pairs(g, 100, 5);
  std::size_t total = 0;
  double worst = 1.0;
  std::vector<std::size_t> forged_short(5, 0);
  for (const auto& [victim, hijacker] : pairs) {
    for (std::uint8_t n = 0; n <= 4; ++n) {
      HijackScenario s{victim, hijacker, {PrefixDim::SubPrefix, PathDim::type(n), DataPlaneDim::Unknown},
                       kVictimPrefix};
      double x = impact(simulate_hijack(g, s));
      if (n == 0) {
        worst = std::min(worst, x);
        total += x == 1.0;
      } else {
        forged_short[n] += x != 1.0;
      }
    }
  }
  double secs = seconds_since(start);
  bool ok = total == pairs.size() && secs < 60;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("{}/{} origin sub-prefix hijacks with impact exactly 1.0 (min {:.6f}) in {:.1f}s; with the "
                      "victim on a forged path, Type-1..4 fall short in {}/{}/{}/{} pairs",
                      total, pairs.size(), worst, secs, forged_short[1], forged_short[2], forged_short[3],
                      forged_short[4])};
}

Result c3_monotone(const LargeRuns& r) {
  std::vector<double> means;
  for (const auto& t : r.types) means.push_back(mean(t.impact));
  double worst_gap = 1.0;
  for (std::size_t n = 1; n < means.size(); ++n) worst_gap = std::min(worst_gap, means[n - 1] - means[n]);
  bool ok = worst_gap >= -0.01 && r.seconds < 1800;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("mean impact Type-0..4 over {} pairs on 10000 ASes: {}; smallest gap {:+.2f} pp; {:.0f}s", r.pairs,
                      join_pct(means), 100 * worst_gap, r.seconds)};
}

Result c4_type0(const LargeRuns& r) {
  double m = mean(r.types[0].impact);
  return {Status::Skipped,
          fmt::format("full CAIDA serial-1 graph not available; 10000-AS synthetic graph gives Type-0 mean {} over {} "
                      "pairs ({} the 40-60% band)",
                      percent(m), r.types[0].runs, (m >= 0.4 && m <= 0.6) ? "inside" : "outside")};
}

Result c5_invisible(const LargeRuns& r) {
  std::vector<double> all, sub;
  for (const auto& t : r.types) {
    all.push_back(static_cast<double>(t.invisible_all) / static_cast<double>(t.runs));
    sub.push_back(static_cast<double>(t.invisible_subset) / static_cast<double>(t.runs));
  }
  bool subset_higher = true, all_increasing = true, sub_increasing = true;
  for (std::size_t n = 0; n < all.size(); ++n) {
    subset_higher = subset_higher && sub[n] > all[n];
    if (n > 0) {
      all_increasing = all_increasing && all[n] > all[n - 1];
      sub_increasing = sub_increasing && sub[n] > sub[n - 1];
    }
  }
  bool ok = subset_higher && all_increasing && sub_increasing;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("invisible Type-0..4, 218 monitors: {}; 65-monitor subset: {} (subset higher: {}, increasing: "
                      "{}/{})",
                      join_pct(all), join_pct(sub), subset_higher ? "yes" : "no", all_increasing ? "yes" : "no",
                      sub_increasing ? "yes" : "no")};
}

// Consistent updates: every path ends at an authorized origin through an
// authorized neighbor and every link two or more hops from the origin is verified.
std::size_t consistent_update_alerts(std::size_t& delivered) {
  std::mt19937_64 rng(4242);
  std::size_t alerts = 0;
  delivered = 0;
  for (int round = 0; round < 50; ++round) {
    DetectionConfig cfg;
    cfg.owned.insert(Prefix::ipv4(0x0A000000U | (static_cast<std::uint32_t>(round) << 16), 16));
    std::vector<std::pair<Prefix, std::vector<AsPath>>> pool;
    std::set<DirectedLink> verified;
    for (int k = 0; k < 4; ++k) {
      Prefix p = Prefix::ipv4(0x0A000000U | (static_cast<std::uint32_t>(round) << 16) |
                                  (static_cast<std::uint32_t>(k * 64 + 2 * static_cast<int>(rng() % 32)) << 8),
                              24 - static_cast<unsigned>(rng() % 2));
      if (cfg.announced.contains(p)) continue;
      AnnouncedPrefix ap;
      for (std::size_t o = rng() % 2 + 1; o > 0; --o) ap.origins.insert(Asn(static_cast<std::uint32_t>(rng() % 10 + 1)));
      for (std::size_t n = rng() % 3 + 1; n > 0; --n) {
        ap.neighbors.insert(Asn(static_cast<std::uint32_t>(rng() % 20 + 100)));
      }
      std::vector<AsPath> paths;
      for (int i = 0; i < 30; ++i) {
        std::vector<Asn> hops;
        std::size_t extra = rng() % 7;
        for (std::size_t e = 0; e < extra; ++e) {
          hops.emplace_back(static_cast<std::uint32_t>(1000 + e * 1000 + rng() % 40));
          if (rng() % 5 == 0) hops.push_back(hops.back());  // prepending
        }
        if (extra > 0 || rng() % 3 != 0) {
          hops.push_back(*std::next(ap.neighbors.begin(), static_cast<long>(rng() % ap.neighbors.size())));
        }
        hops.push_back(*std::next(ap.origins.begin(), static_cast<long>(rng() % ap.origins.size())));
        AsPath path = AsPath::collapsed(hops);
        for (std::size_t j = 0; j + 2 < path.size(); ++j) verified.insert({path[j], path[j + 1]});
        paths.push_back(path);
      }
      cfg.announced[p] = ap;
      pool.emplace_back(p, std::move(paths));
    }
    cfg.verified_links.assign(verified.begin(), verified.end());
    DetectionEngine engine(cfg, {}, [&](const Alert&) { ++alerts; });
    std::int64_t ts = 1'600'000'000 + round * 100000;
    for (int u = 0; u < 200; ++u) {
      const auto& [prefix, paths] = pool[rng() % pool.size()];
      const AsPath& path = paths[rng() % paths.size()];
      engine.process(BgpUpdate::announcement(ts++, path.first(), prefix, path));
      ++delivered;
    }
    engine.finish();
  }
  return alerts;
}

struct SimulatedEvent {
  SimOutcome outcome;
  SynthFeed feed;
};

AsGraph mid_graph(std::uint64_t seed) {
  TopologyParams p;
  p.nodes = 2000;
  p.seed = seed;
  AsGraph g = generate_topology(p);
  auto mons = pick_monitors(g, 100, seed);
  g.set_monitors(mons);
  return g;
}

/// Draws scenarios until one is visible to at least one monitor.
std::optional<SimulatedEvent> visible_event(const AsGraph& g, std::mt19937_64& rng, HijackClass cls, FillerMode fillers,
                                            std::uint64_t seed) {
  std::uniform_int_distribution<std::size_t> pick(0, g.node_count() - 1);
  for (int attempt = 0; attempt < 200; ++attempt) {
    Asn v = g.asn(static_cast<NodeId>(pick(rng)));
    Asn h = g.asn(static_cast<NodeId>(pick(rng)));
    if (v == h) continue;
    SimOutcome out;
    try {
      out = simulate_hijack(g, {v, h, cls, kVictimPrefix, fillers});
    } catch (const SimulationError&) {
      continue;
    }
    if (out.polluted_monitors.empty()) continue;
    auto feed = synth_hijack_feed(g, out, 1'600'000'000, {1, 10}, seed);
    return SimulatedEvent{std::move(out), std::move(feed)};
  }
  return std::nullopt;
}

Result c6_zero_fp_fn() {
  auto start = Clock::now();
  std::size_t delivered = 0;
  std::size_t fp = consistent_update_alerts(delivered);

  AsGraph g = mid_graph(6);
  std::mt19937_64 rng(66);
  const std::vector<std::pair<std::string, HijackClass>> kinds{
      {"subprefix", {PrefixDim::SubPrefix, PathDim::type(0), DataPlaneDim::Unknown}},
      {"squatting", {PrefixDim::Squatting, PathDim::type(0), DataPlaneDim::Unknown}},
      {"type0", {PrefixDim::ExactPrefix, PathDim::type(0), DataPlaneDim::Unknown}},
      {"type1", {PrefixDim::ExactPrefix, PathDim::type(1), DataPlaneDim::Unknown}},
  };
  std::size_t events = 0, correct = 0;
  std::string first_problem;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& [name, cls] = kinds[i % kinds.size()];
    auto ev = visible_event(g, rng, cls, FillerMode::RealPath, i);
    if (!ev) continue;
    ++events;
    std::vector<Alert> alerts;
    DetectionEngine engine(synth_detection_config(g, ev->outcome), {}, [&](const Alert& a) { alerts.push_back(a); });
    std::int64_t first_hijack = INT64_MAX;
    for (const auto& u : ev->feed.updates) {
      if (u.timestamp >= ev->feed.manifest.hijack_ts) first_hijack = std::min(first_hijack, u.timestamp);
      engine.process(u);
    }
    engine.finish();
    bool ok = alerts.size() == 1 && alerts[0].confidence == Confidence::Certain &&
              alerts[0].detected_at == first_hijack && alerts[0].cls.prefix_dim == cls.prefix_dim &&
              alerts[0].cls.path_dim == cls.path_dim &&
              alerts[0].offending == std::vector<Asn>{ev->outcome.scenario.hijacker};
    if (ok) {
      ++correct;
    } else if (first_problem.empty()) {
      first_problem = fmt::format("{} event {} (AS{} -> AS{}) gave {} alerts", name, i,
                                  ev->outcome.scenario.hijacker.value, ev->outcome.scenario.victim.value, alerts.size());
    }
  }
  bool ok = fp == 0 && events == 1000 && correct == events;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("{} alerts on {} consistent updates; {}/{} sub-prefix/squatting/Type-0/Type-1 events raised "
                      "exactly one Certain alert at the first polluted-monitor record ({:.1f}s){}",
                      fp, delivered, correct, events, seconds_since(start),
                      first_problem.empty() ? "" : "; " + first_problem)};
}

Result c7_stage1() {
  auto start = Clock::now();
  AsGraph g = mid_graph(7);
  std::mt19937_64 rng(77);
  std::size_t events = 0, evaded = 0, legit_records = 0, records = 0, rule1 = 0, rule2 = 0, type_exact = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    HijackClass cls{PrefixDim::ExactPrefix, PathDim::type(static_cast<std::uint8_t>(2 + i % 2)), DataPlaneDim::Unknown};
    auto ev = visible_event(g, rng, cls, FillerMode::RealPath, i);
    if (!ev) continue;
    ++events;
    DetectionConfig cfg = synth_detection_config(g, ev->outcome);
    LinkStores stores;
    stores.verified.insert(cfg.verified_links.begin(), cfg.verified_links.end());
    bool first = true;
    for (const auto& u : ev->feed.updates) {
      if (u.timestamp >= ev->feed.manifest.hijack_ts && u.prefix == ev->outcome.hijacked_prefix) {
        auto v = check_update(cfg, stores, u);
        ++records;
        if (v.kind == Verdict::Kind::Legitimate) {
          ++legit_records;
          if (first) ++evaded;
        } else if (v.kind == Verdict::Kind::Pending) {
          (v.rule == Stage1Verdict::SuspiciousRule1 ? rule1 : rule2) += first;
          type_exact += first && v.cls.path_dim == cls.path_dim;
        }
        first = false;
      }
      ingest_history(stores, u, LinkSource::Monitor);
    }
  }
  bool ok = events == 500 && evaded == 0 && legit_records == 0;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("{} visible Type-2/3 hijacks: {} Rule-1, {} Rule-2, {} legitimate at first delivery; {} of {} "
                      "polluted-monitor records legitimate; type attributed exactly in {}/{} ({:.1f}s)",
                      events, rule1, rule2, evaded, legit_records, records, type_exact, events, seconds_since(start))};
}

Result c8_rule2() {
  const Prefix victim = parse_prefix("10.0.0.0/23");
  const Prefix other = parse_prefix("192.0.2.0/24");
  DetectionConfig cfg;
  cfg.owned.insert(victim);
  cfg.announced[victim] = AnnouncedPrefix{{Asn(1)}, {Asn(2)}};

  // Hijacker 666 (really linked to 5, reached by monitor 33) first advertises a
  // path for another prefix carrying the reverse of the link it is about to
  // fake, then forges 5 -> 2 toward the victim.
  LinkStores attack;
  attack.verified = {{Asn(33), Asn(666)}, {Asn(666), Asn(5)}};
  ingest_history(attack, BgpUpdate::announcement(100, Asn(31), other, AsPath{31, 666, 2, 5, 9}), LinkSource::Monitor);
  ingest_history(attack, BgpUpdate::announcement(101, Asn(32), other, AsPath{32, 40, 666, 2, 5, 9}), LinkSource::Monitor);
  auto hijack = check_update(cfg, attack, BgpUpdate::announcement(200, Asn(33), victim, AsPath{33, 666, 5, 2, 1}));
  bool attack_ok = hijack.kind == Verdict::Kind::Pending && hijack.rule == Stage1Verdict::SuspiciousRule2 &&
                   hijack.link == DirectedLink{Asn(5), Asn(2)} && hijack.cls.path_dim == PathDim::type(2) && !hijack.ambiguous &&
                   !attack.verified.contains({Asn(5), Asn(2)});

  // A genuinely new link 5 -> 2 whose reverse was seen behind unrelated ASes.
  LinkStores benign;
  ingest_history(benign, BgpUpdate::announcement(100, Asn(31), other, AsPath{31, 2, 5, 9}), LinkSource::Monitor);
  ingest_history(benign, BgpUpdate::announcement(101, Asn(32), other, AsPath{32, 2, 5, 6}), LinkSource::Monitor);
  auto fine = check_update(cfg, benign, BgpUpdate::announcement(200, Asn(33), victim, AsPath{5, 2, 1}));
  bool benign_ok = fine.kind == Verdict::Kind::Legitimate && benign.verified.contains({Asn(5), Asn(2)});

  bool ok = attack_ok && benign_ok;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("two-sided fake link -> {} ({}); disjoint historical left sets -> {}",
                      hijack.kind == Verdict::Kind::Pending ? std::string(to_string(hijack.rule)) : "legitimate",
                      hijack.link ? fmt::format("link {}->{}", hijack.link->from.value, hijack.link->to.value) : "no link",
                      fine.kind == Verdict::Kind::Legitimate ? "legitimate" : std::string(to_string(fine.rule)))};
}

Result c9_mitigation(const LargeRuns& r) {
  const auto& m = r.mitigation;
  std::vector<double> means;
  std::string per_k;
  for (const auto& [k, v] : m.moas_top) {
    means.push_back(mean(v));
    per_k += fmt::format("{}K={}: {}", per_k.empty() ? "" : ", ", k, percent(means.back()));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] <= means[i - 1];
  double k3 = mean(m.moas_top.at(3));
  double filter10 = mean(m.filter_top10);
  double random1 = mean(m.moas_random1);
  bool ok = k3 < 0.10 && monotone && filter10 >= random1;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("Type-0 residual over {} pairs, MOAS top-cone {} (monotone: {}); filtering top-10 {} vs MOAS "
                      "random K=1 {}",
                      m.moas_random1.size(), per_k, monotone ? "yes" : "no", percent(filter10), percent(random1))};
}

Result c10_deaggregation(const LargeRuns& r) {
  const auto& m = r.mitigation;
  bool ok = m.deagg_runs >= 200 && m.deagg_nonempty == 0;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("{} exact-prefix /23 hijacks (Type-0..4): {} with residual pollution after deaggregation",
                      m.deagg_runs, m.deagg_nonempty)};
}

Result c11_end_to_end() {
  AsGraph g = mid_graph(11);
  std::mt19937_64 rng(1111);
  auto policy = MitigationPolicy::defaults({});
  std::size_t scenarios = 0, delay_exact = 0, same_tick = 0;
  std::int64_t min_delay = INT64_MAX, max_delay = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    auto ev = visible_event(g, rng, {}, FillerMode::RealPath, 500 + i);
    if (!ev) continue;
    ++scenarios;
    DetectionConfig cfg = synth_detection_config(g, ev->outcome);
    std::optional<Alert> first_alert;
    std::optional<MitigationAction> action;
    std::int64_t action_tick = -1;
    std::int64_t tick = 0;
    DetectionEngine engine(cfg, {}, [&](const Alert& a) {
      if (first_alert) return;
      first_alert = a;
      action = decide(policy, a, legitimate_origin(cfg, a.prefix));
      action_tick = tick;
    });
    std::int64_t alert_tick = -1;
    std::int64_t min_jitter = INT64_MAX;
    for (const auto& u : ev->feed.updates) {
      ++tick;
      if (u.timestamp >= ev->feed.manifest.hijack_ts) {
        min_jitter = std::min(min_jitter, u.timestamp - ev->feed.manifest.hijack_ts);
      }
      engine.process(u);
      if (first_alert && alert_tick < 0) alert_tick = tick;
    }
    engine.finish();
    if (!first_alert) continue;
    std::int64_t delay = first_alert->detected_at - ev->feed.manifest.hijack_ts;
    min_delay = std::min(min_delay, delay);
    max_delay = std::max(max_delay, delay);
    delay_exact += delay == min_jitter && first_alert->confidence == Confidence::Certain;
    same_tick += action && action_tick == alert_tick && action->issued_at == first_alert->detected_at &&
                 action->kind == ActionKind::Deaggregate && action->announcements.size() == 2;
  }
  bool ok = scenarios == 50 && delay_exact == scenarios && same_tick == scenarios;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("{} Type-0 replays with jitter [1,10]s: delay == min drawn jitter in {}, deaggregation action in "
                      "the alert's tick in {}; delays ranged {}..{}s",
                      scenarios, delay_exact, same_tick, min_delay, max_delay)};
}

std::size_t rss_kib() {
  std::ifstream in("/proc/self/status");
  std::string key;
  while (in >> key) {
    if (key == "VmRSS:") {
      std::size_t v = 0;
      in >> v;
      return v;
    }
    in.ignore(4096, '\n');
  }
  return 0;
}

Result c12_throughput() {
  SyntheticFeedParams p;
  p.count = 1'000'000;
  p.seed = 12;
  p.updates_per_second = 2000;

  DetectionConfig cfg;
  cfg.owned.insert(parse_prefix("11.0.0.0/20"));
  {
    SyntheticSource scan(p);
    while (auto u = scan.next()) {
      if (!u->path || !cfg.owner_of(u->prefix)) continue;
      auto& ap = cfg.announced[u->prefix];
      if (ap.origins.empty()) ap.origins.insert(u->path->origin());
      if (u->path->size() >= 2 && ap.neighbors.size() < 4) ap.neighbors.insert((*u->path)[u->path->size() - 2]);
      if (ap.neighbors.empty()) ap.neighbors.insert(u->path->origin());
    }
  }

  auto file = std::filesystem::temp_directory_path() / "prefixguard_acceptance_1m.jsonl";
  {
    std::ofstream out(file, std::ios::binary);
    SyntheticSource src(p);
    while (auto u = src.next()) out << to_record_line(*u) << '\n';
  }

  std::size_t alerts = 0;
  DetectionEngine engine(cfg, {}, [&](const Alert&) { ++alerts; });
  std::size_t rss_mid = 0;
  auto start = Clock::now();
  ReplaySource replay(file, {});
  while (auto u = replay.next()) {
    engine.process(*u);
    if (engine.stats().updates == 200'000) rss_mid = rss_kib();
  }
  engine.finish();
  double secs = seconds_since(start);
  std::size_t rss_end = rss_kib();
  std::filesystem::remove(file);

  const auto& st = engine.stats();
  double rate = static_cast<double>(st.updates) / secs;
  std::size_t links = engine.stores().monitor_history.size() + engine.stores().local_history.size();
  bool ok = st.updates == 1'000'000 && rate >= 50'000;
  return {ok ? Status::Pass : Status::Fail,
          fmt::format("{} updates replayed through detection in {:.2f}s = {:.0f} updates/s ({} alerts); {} history "
                      "links, RSS {} MiB at 200k updates, {} MiB at 1M",
                      st.updates, secs, rate, alerts, links, rss_mid / 1024, rss_end / 1024)};
}

}  // namespace

int main(int argc, char** argv) {
  // --allow-fail=N[,M...]: report criterion N as FAIL without failing the run.
  std::set<int> allowed;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    const std::string flag = "--allow-fail=";
    if (arg.rfind(flag, 0) != 0) {
      std::fprintf(stderr, "unknown argument %s\n", arg.c_str());
      return 2;
    }
    std::size_t pos = flag.size();
    while (pos < arg.size()) {
      std::size_t next = arg.find(',', pos);
      allowed.insert(std::stoi(arg.substr(pos, next - pos)));
      pos = next == std::string::npos ? arg.size() : next + 1;
    }
  }

  int failures = 0, tolerated = 0;
  auto report = [&](int id, const char* name, const Result& v) {
    const char* tag = v.status == Status::Pass ? "PASS" : v.status == Status::Fail ? "FAIL" : "SKIPPED";
    if (v.status == Status::Fail) ++(allowed.contains(id) ? tolerated : failures);
    std::printf("[%s] criterion %2d  %s: %s%s\n", tag, id, name, v.detail.c_str(),
                v.status == Status::Fail && allowed.contains(id) ? " (known red, allowed)" : "");
    std::fflush(stdout);
  };

  report(1, "oracle equivalence", c1_oracle());
  report(2, "sub-prefix totality", c2_subprefix());

  LargeGraph lg = build_large_graph();
  LargeRuns runs = run_large(lg);
  report(3, "impact monotone in type", c3_monotone(runs));
  report(4, "Type-0 mean impact", c4_type0(runs));
  report(5, "invisible-event ordering", c5_invisible(runs));
  report(6, "detection zero FP / zero FN", c6_zero_fp_fn());
  report(7, "stage-1 zero FN", c7_stage1());
  report(8, "rule-2 discrimination", c8_rule2());
  report(9, "MOAS / filtering effectiveness", c9_mitigation(runs));
  report(10, "deaggregation totality", c10_deaggregation(runs));
  report(11, "end-to-end replay timing", c11_end_to_end());
  report(12, "replay throughput", c12_throughput());

  std::printf("%d criterion(s) failed, %d known-red criterion(s) failed\n", failures, tolerated);
  return failures == 0 ? 0 : 1;
}

#include <doctest.h>

#include <random>
#include <sstream>

#include "prefixguard/detection.hpp"
#include "prefixguard/errors.hpp"
#include "prefixguard/feeds.hpp"

using namespace prefixguard;

namespace {

const Prefix k23 = parse_prefix("10.0.0.0/23");
const Prefix k24 = parse_prefix("10.0.0.0/24");

DetectionConfig base_config() {
  return parse_detection_config(R"(
owned: [10.0.0.0/22]
announced:
  10.0.0.0/23: {origins: [1], neighbors: [2, 3]}
)");
}

BgpUpdate ann(std::int64_t ts, std::uint32_t monitor, const Prefix& p, AsPath path) {
  return BgpUpdate::announcement(ts, Asn(monitor), p, std::move(path));
}

struct Collector {
  std::vector<Alert> alerts;
  DetectionEngine::Sink sink() {
    return [this](const Alert& a) { alerts.push_back(a); };
  }
};

}  // namespace

TEST_SUITE("detection") {
  TEST_CASE("config parsing and validation") {
    auto c = base_config();
    CHECK(c.owned.size() == 1);
    CHECK(c.announced.at(k23).neighbors == std::set<Asn>{Asn(2), Asn(3)});
    CHECK(parse_detection_config(to_yaml(c)).announced.at(k23).origins == c.announced.at(k23).origins);

    CHECK_THROWS_AS(parse_detection_config("owned: [10.0.0.0/22]\nannounced:\n  192.0.2.0/24: {origins: [1], neighbors: [2]}\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_detection_config("owned: [10.0.0.0/22]\nannounced:\n  10.0.0.0/23: {origins: [], neighbors: [2]}\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_detection_config("owned: [10.0.0.0/22]\nannouncd: {}\n"), ConfigError);
    CHECK_THROWS_AS(parse_detection_config("owned: [10.0.1.0/22]\n"), ConfigError);
    CHECK_THROWS_AS(parse_detection_config("owned: [10.0.0.0/22\n"), ConfigError);

    auto full = parse_detection_config(R"(
owned: [10.0.0.0/22]
announced:
  10.0.0.0/23: {origins: [1], neighbors: [2]}
verified_links: [[5, 4], [4, 2]]
local_routers: [1]
)");
    CHECK(full.verified_links.size() == 2);
    CHECK(full.verified_links[0] == DirectedLink{Asn(5), Asn(4)});
    CHECK(full.local_routers.contains(Asn(1)));
  }

  TEST_CASE("dispatch examples") {
    auto c = base_config();
    LinkStores s;
    auto sub = check_update(c, s, ann(1, 9, k24, AsPath{9, 2, 1}));
    CHECK(sub.kind == Verdict::Kind::Alert);
    CHECK(sub.cls.prefix_dim == PrefixDim::SubPrefix);

    auto sub0 = check_update(c, s, ann(1, 9, k24, AsPath{9}));
    CHECK(sub0.cls.prefix_dim == PrefixDim::SubPrefix);
    CHECK(sub0.cls.path_dim == PathDim::type(0));

    auto t0 = check_update(c, s, ann(1, 9, k23, AsPath{9, 7, 2}));
    CHECK(t0.kind == Verdict::Kind::Alert);
    CHECK(t0.cls == HijackClass{PrefixDim::ExactPrefix, PathDim::type(0), DataPlaneDim::Unknown});
    CHECK(t0.offending == std::vector<Asn>{Asn(2)});

    auto t1 = check_update(c, s, ann(1, 9, k23, AsPath{9, 7, 1}));
    CHECK(t1.cls.path_dim == PathDim::type(1));
    CHECK(t1.offending == std::vector<Asn>{Asn(7)});

    auto squat = check_update(c, s, ann(1, 9, parse_prefix("10.0.2.0/24"), AsPath{9, 8}));
    CHECK(squat.cls.prefix_dim == PrefixDim::Squatting);
    CHECK(squat.kind == Verdict::Kind::Alert);

    CHECK(check_update(c, s, ann(1, 9, parse_prefix("192.0.2.0/24"), AsPath{9, 8})).kind == Verdict::Kind::NotMine);
    CHECK(check_update(c, s, ann(1, 2, k23, AsPath{2, 1})).kind == Verdict::Kind::Legitimate);
    CHECK(check_update(c, s, ann(1, 1, k23, AsPath{1})).kind == Verdict::Kind::Legitimate);

    s.verified = {{Asn(5), Asn(4)}, {Asn(4), Asn(2)}};
    CHECK(check_update(c, s, ann(1, 5, k23, AsPath{5, 4, 2, 1})).kind == Verdict::Kind::Legitimate);

    auto looped = check_update(c, s, ann(1, 5, k23, AsPath{2, 5, 2, 1}));
    CHECK(looped.kind == Verdict::Kind::Legitimate);
    CHECK(looped.discarded);
  }

  TEST_CASE("stage1 rule 1") {
    auto c = base_config();
    LinkStores s;
    auto v = check_update(c, s, ann(1, 5, k23, AsPath{5, 4, 2, 1}));
    CHECK(v.kind == Verdict::Kind::Pending);
    CHECK(v.rule == Stage1Verdict::SuspiciousRule1);
    REQUIRE(v.link.has_value());
    CHECK(*v.link == DirectedLink{Asn(4), Asn(2)});
    CHECK(v.cls.path_dim == PathDim::type(2));
    CHECK(v.offending == std::vector<Asn>{Asn(4)});
    CHECK(v.ambiguous);
    CHECK(stage1_filter(s, AsPath{5, 4, 2, 1}, {Asn(4), Asn(2)}) == Stage1Verdict::SuspiciousRule1);
  }

  TEST_CASE("stage1 rule 2") {
    LinkStores s;
    ingest_history(s, ann(1, 9, parse_prefix("192.0.2.0/24"), AsPath{9, 2, 4, 6}), LinkSource::Monitor);
    ingest_history(s, ann(2, 9, parse_prefix("198.51.100.0/24"), AsPath{9, 3, 2, 4, 7}), LinkSource::Monitor);
    CHECK(s.seen({Asn(2), Asn(4)}, LinkSource::Monitor)->left_common == std::vector<Asn>{Asn(9)});
    CHECK(stage1_filter(s, AsPath{9, 4, 2, 1}, {Asn(4), Asn(2)}) == Stage1Verdict::SuspiciousRule2);
    CHECK_FALSE(s.verified.contains({Asn(4), Asn(2)}));
    CHECK(stage1_filter(s, AsPath{8, 4, 2, 1}, {Asn(4), Asn(2)}) == Stage1Verdict::Legitimate);
    CHECK(s.verified.contains({Asn(4), Asn(2)}));
  }

  TEST_CASE("stage1 disjoint left sets are legitimate") {
    LinkStores s;
    ingest_history(s, ann(1, 8, parse_prefix("192.0.2.0/24"), AsPath{8, 2, 4, 6}), LinkSource::Monitor);
    ingest_history(s, ann(2, 9, parse_prefix("198.51.100.0/24"), AsPath{9, 2, 4, 7}), LinkSource::Monitor);
    CHECK(s.seen({Asn(2), Asn(4)}, LinkSource::Monitor)->left_common.empty());
    CHECK(stage1_filter(s, AsPath{9, 4, 2, 1}, {Asn(4), Asn(2)}) == Stage1Verdict::Legitimate);
    CHECK(s.verified.contains({Asn(4), Asn(2)}));
  }

  TEST_CASE("stage1 reverse link seen at a local router") {
    LinkStores s;
    ingest_history(s, ann(1, 1, parse_prefix("192.0.2.0/24"), AsPath{2, 4}), LinkSource::LocalRouter);
    CHECK(stage1_filter(s, AsPath{9, 4, 2, 1}, {Asn(4), Asn(2)}) == Stage1Verdict::Legitimate);
  }

  TEST_CASE("history ingest and expiry") {
    LinkStores s;
    ingest_history(s, ann(10, 1, k23, AsPath{1, 2, 1}), LinkSource::Monitor);
    CHECK(s.monitor_history.empty());
    ingest_history(s, BgpUpdate::withdrawal(10, Asn(1), k23), LinkSource::Monitor);
    CHECK(s.monitor_history.empty());

    ingest_history(s, ann(10, 5, k23, AsPath{5, 4, 3}), LinkSource::Monitor);
    CHECK(s.monitor_history.size() == 2);
    CHECK(s.seen({Asn(5), Asn(4)}, LinkSource::Monitor) != nullptr);
    CHECK(s.seen({Asn(4), Asn(3)}, LinkSource::Monitor) != nullptr);
    CHECK(s.seen({Asn(4), Asn(3)}, LinkSource::LocalRouter) == nullptr);
    ingest_history(s, ann(20, 5, k23, AsPath{5, 4, 3}), LinkSource::Monitor);
    const auto* h = s.seen({Asn(5), Asn(4)}, LinkSource::Monitor);
    CHECK(h->first_seen == 10);
    CHECK(h->last_seen == 20);
    CHECK(s.last_seen({Asn(4), Asn(3)}) == 20);

    const std::int64_t day = 86400;
    LinkStores e;
    e.verified.insert({Asn(7), Asn(8)});
    ingest_history(e, ann(0, 5, k23, AsPath{5, 4}), LinkSource::Monitor);
    ingest_history(e, ann(2 * day, 6, k23, AsPath{6, 4}), LinkSource::LocalRouter);
    auto verified_before = e.verified;
    expire_history(e, 299 * day);
    CHECK(e.seen({Asn(5), Asn(4)}, LinkSource::Monitor) != nullptr);
    expire_history(e, 301 * day);
    CHECK(e.seen({Asn(5), Asn(4)}, LinkSource::Monitor) == nullptr);
    CHECK(e.seen({Asn(6), Asn(4)}, LinkSource::LocalRouter) != nullptr);
    CHECK(e.verified == verified_before);
  }

  TEST_CASE("stage2 evaluate") {
    LinkStores s;
    PendingEvent p;
    p.link = {Asn(4), Asn(2)};
    p.trigger = ann(100, 5, k23, AsPath{5, 4, 2, 1});
    p.deadline = 400;
    p.monitors = {Asn(5)};
    CHECK(stage2_evaluate(s, p, 2) == Stage2Outcome::DismissedBelowThreshold);
    p.monitors = {Asn(5), Asn(6), Asn(7), Asn(8), Asn(9)};
    CHECK(stage2_evaluate(s, p, 2) == Stage2Outcome::Confirmed);
    ingest_history(s, ann(399, 6, parse_prefix("192.0.2.0/24"), AsPath{6, 2, 4}), LinkSource::Monitor);
    CHECK(stage2_evaluate(s, p, 2) == Stage2Outcome::DismissedReverseSeen);
    CHECK(s.verified.contains({Asn(4), Asn(2)}));
  }

  TEST_CASE("engine: stage1 alert then stage2 confirmation") {
    Collector c;
    DetectionEngine e(base_config(), {}, c.sink());
    for (std::uint32_t m = 5; m < 10; ++m) e.process(ann(1000 + m, m, k23, AsPath{m, 40, 4, 2, 1}));
    REQUIRE(c.alerts.size() == 1);
    CHECK(c.alerts[0].confidence == Confidence::Stage1Suspicious);
    CHECK(c.alerts[0].detected_at == 1005);
    CHECK(e.pending_count() == 1);
    e.process(BgpUpdate::withdrawal(1400, Asn(5), parse_prefix("192.0.2.0/24")));
    REQUIRE(c.alerts.size() == 2);
    const Alert& a = c.alerts[1];
    CHECK(a.confidence == Confidence::Stage2Confirmed);
    CHECK(a.event_id == c.alerts[0].event_id);
    CHECK(a.polluted_monitors == 5);
    CHECK(a.detected_at == 1305);
    CHECK(a.cls.path_dim == PathDim::type(2));
    CHECK(e.stats().stage2_confirmed == 1);
  }

  TEST_CASE("engine: one monitor is below threshold") {
    Collector c;
    DetectionEngine e(base_config(), {}, c.sink());
    e.process(ann(1000, 5, k23, AsPath{5, 4, 2, 1}));
    e.finish();
    CHECK(c.alerts.size() == 1);
    CHECK(e.stats().stage2_dismissed == 1);
  }

  TEST_CASE("engine: reverse link before the deadline dismisses") {
    Collector c;
    DetectionEngine e(base_config(), {}, c.sink());
    e.process(ann(1000, 5, k23, AsPath{5, 4, 2, 1}));
    e.process(ann(1001, 6, k23, AsPath{6, 4, 2, 1}));
    e.process(ann(1299, 7, parse_prefix("192.0.2.0/24"), AsPath{7, 2, 4}));
    e.finish();
    CHECK(c.alerts.size() == 1);
    CHECK(e.stores().verified.contains({Asn(4), Asn(2)}));
  }

  TEST_CASE("engine: certain alerts are deduplicated per event") {
    Collector c;
    DetectionEngine e(base_config(), {}, c.sink());
    e.process(ann(10, 5, k23, AsPath{5, 9}));
    e.process(ann(11, 6, k23, AsPath{6, 9}));
    e.process(ann(12, 7, k23, AsPath{7, 8}));
    e.process(BgpUpdate::withdrawal(13, Asn(5), k23));
    REQUIRE(c.alerts.size() == 2);
    CHECK(c.alerts[0].event_id == 1);
    CHECK(c.alerts[1].event_id == 2);
    CHECK(c.alerts[0].confidence == Confidence::Certain);
    CHECK(e.stats().withdrawals == 1);
    CHECK(e.stats().alerts == 2);
  }

  TEST_CASE("engine: local routers feed local history and are not monitors") {
    auto cfg = base_config();
    cfg.local_routers = {Asn(1)};
    Collector c;
    DetectionEngine e(cfg, {}, c.sink());
    e.process(ann(10, 1, parse_prefix("192.0.2.0/24"), AsPath{1, 2, 4}));
    CHECK(e.stores().seen({Asn(2), Asn(4)}, LinkSource::LocalRouter) != nullptr);
    CHECK(e.stores().seen({Asn(2), Asn(4)}, LinkSource::Monitor) == nullptr);
    e.process(ann(20, 1, k23, AsPath{1, 9}));
    REQUIRE(c.alerts.size() == 1);
    CHECK(c.alerts[0].polluted_monitors == 0);
  }

  TEST_CASE("engine: reload and revoke") {
    auto cfg = base_config();
    cfg.verified_links = {{Asn(4), Asn(2)}};
    Collector c;
    DetectionEngine e(cfg, {}, c.sink());
    e.process(ann(10, 4, k23, AsPath{4, 2, 1}));
    CHECK(c.alerts.empty());
    e.revoke({Asn(4), Asn(2)});
    e.process(ann(20, 5, k23, AsPath{5, 4, 2, 1}));
    CHECK(c.alerts.size() == 1);

    auto next = e.config();
    next.announced[k24] = AnnouncedPrefix{{Asn(1)}, {Asn(2)}};
    e.reload(next);
    e.process(ann(30, 2, k24, AsPath{2, 1}));
    CHECK(c.alerts.size() == 1);
    auto broken = e.config();
    broken.announced[parse_prefix("192.0.2.0/24")] = AnnouncedPrefix{{Asn(1)}, {Asn(2)}};
    CHECK_THROWS_AS(e.reload(broken), ConfigError);
  }

  TEST_CASE("alert JSON line") {
    Alert a;
    a.event_id = 3;
    a.prefix = k24;
    a.cls = {PrefixDim::SubPrefix, PathDim::type_u(), DataPlaneDim::Unknown};
    a.offending = {};
    a.polluted_monitors = 2;
    a.first_update = ann(50, 9, k24, AsPath{9, 2, 1});
    a.detected_at = 50;
    CHECK(to_json_line(a) ==
          R"({"event_id":3,"ts":50,"prefix":"10.0.0.0/24","prefix_dim":"subprefix","path_type":"Type-U",)"
          R"("confidence":"certain","offending":[],"monitors":2,)"
          R"("trigger_update":{"ts":50,"monitor":9,"kind":"A","prefix":"10.0.0.0/24","path":[9,2,1]}})");
    CHECK(parse_confidence("stage2") == Confidence::Stage2Confirmed);
    CHECK_THROWS_AS(parse_confidence("sure"), ConfigError);
  }

  TEST_CASE("golden alert log") {
    std::vector<BgpUpdate> stream{
        ann(100, 2, k23, AsPath{2, 1}),
        ann(200, 5, k24, AsPath{5, 9}),
        ann(201, 6, parse_prefix("10.0.2.0/24"), AsPath{6, 9}),
        ann(300, 7, k23, AsPath{7, 8, 1}),
        ann(400, 6, k23, AsPath{6, 44, 2, 1}),
        ann(410, 7, k23, AsPath{7, 44, 2, 1}),
        BgpUpdate::withdrawal(800, Asn(7), k23),
    };
    auto run = [&] {
      std::ostringstream log;
      DetectionEngine e(base_config(), {}, [&](const Alert& a) { log << to_json_line(a) << '\n'; });
      for (const auto& u : stream) e.process(u);
      e.finish();
      return log.str();
    };
    const std::string expected =
        R"({"event_id":1,"ts":200,"prefix":"10.0.0.0/24","prefix_dim":"subprefix","path_type":"Type-0","confidence":"certain","offending":[9],"monitors":1,"trigger_update":{"ts":200,"monitor":5,"kind":"A","prefix":"10.0.0.0/24","path":[5,9]}})"
        "\n"
        R"({"event_id":2,"ts":201,"prefix":"10.0.2.0/24","prefix_dim":"squatting","path_type":"Type-0","confidence":"certain","offending":[9],"monitors":1,"trigger_update":{"ts":201,"monitor":6,"kind":"A","prefix":"10.0.2.0/24","path":[6,9]}})"
        "\n"
        R"({"event_id":3,"ts":300,"prefix":"10.0.0.0/23","prefix_dim":"exact","path_type":"Type-1","confidence":"certain","offending":[8],"monitors":1,"trigger_update":{"ts":300,"monitor":7,"kind":"A","prefix":"10.0.0.0/23","path":[7,8,1]}})"
        "\n"
        R"({"event_id":4,"ts":400,"prefix":"10.0.0.0/23","prefix_dim":"exact","path_type":"Type-2","confidence":"stage1","offending":[44],"monitors":1,"trigger_update":{"ts":400,"monitor":6,"kind":"A","prefix":"10.0.0.0/23","path":[6,44,2,1]}})"
        "\n"
        R"({"event_id":4,"ts":700,"prefix":"10.0.0.0/23","prefix_dim":"exact","path_type":"Type-2","confidence":"stage2","offending":[44],"monitors":2,"trigger_update":{"ts":400,"monitor":6,"kind":"A","prefix":"10.0.0.0/23","path":[6,44,2,1]}})"
        "\n";
    auto first = run();
    CHECK(first == expected);
    CHECK(run() == first);
  }

  TEST_CASE("consistent updates never alert") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 200; ++round) {
      DetectionConfig cfg;
      cfg.owned.insert(parse_prefix("10.0.0.0/16"));
      std::vector<Prefix> announced;
      for (int i = 0; i < 3; ++i) {
        Prefix p = Prefix::ipv4(0x0A000000U | (static_cast<std::uint32_t>(rng() % 256) << 8), 24);
        AnnouncedPrefix ap;
        ap.origins = {Asn(static_cast<std::uint32_t>(rng() % 5 + 1))};
        ap.neighbors = {Asn(static_cast<std::uint32_t>(rng() % 5 + 100)), Asn(static_cast<std::uint32_t>(rng() % 5 + 100))};
        cfg.announced[p] = ap;
        announced.push_back(p);
      }
      LinkStores stores;
      for (int u = 0; u < 50; ++u) {
        const Prefix& p = announced[rng() % announced.size()];
        const auto& ap = cfg.announced.at(p);
        std::vector<Asn> hops;
        std::size_t extra = rng() % 6;
        for (std::size_t k = 0; k < extra; ++k) hops.emplace_back(static_cast<std::uint32_t>(1000 + k * 50 + rng() % 50));
        if (extra > 0 || rng() % 4 != 0) hops.push_back(*std::next(ap.neighbors.begin(), static_cast<long>(rng() % ap.neighbors.size())));
        hops.push_back(*ap.origins.begin());
        AsPath path(hops);
        if (path.size() >= 3)
          for (std::size_t k = 0; k + 2 < path.size(); ++k) stores.verified.insert({path[k], path[k + 1]});
        auto v = check_update(cfg, stores, ann(u, 7, p, path));
        CHECK(v.kind == Verdict::Kind::Legitimate);
      }
    }
  }
}

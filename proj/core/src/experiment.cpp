#include "prefixguard/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "prefixguard/errors.hpp"

namespace prefixguard {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    auto pos = text.find(sep);
    out.push_back(text.substr(0, pos));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::string type_label(PathDim t) { return t.unaltered ? "U" : std::to_string(t.n); }

}  // namespace

std::string_view to_string(ExperimentFamily f) {
  switch (f) {
    case ExperimentFamily::Impact: return "impact";
    case ExperimentFamily::Visibility: return "visibility";
    case ExperimentFamily::Mitigation: return "mitigation";
  }
  return "?";
}

ExperimentFamily parse_experiment_family(std::string_view text) {
  if (text == "impact") return ExperimentFamily::Impact;
  if (text == "visibility") return ExperimentFamily::Visibility;
  if (text == "mitigation") return ExperimentFamily::Mitigation;
  throw ParseError(fmt::format("unknown experiment '{}'", text));
}

StrategySpec StrategySpec::parse(std::string_view text) {
  StrategySpec s;
  if (text.empty() || text == "none") return s;
  if (text == "deagg") {
    s.kind = Kind::Deaggregation;
    return s;
  }
  auto parts = split(text, ':');
  if (parts.size() < 2) throw ParseError(fmt::format("malformed strategy '{}'", text));
  if (parts[0] == "moas") {
    s.kind = Kind::Moas;
  } else if (parts[0] == "filter") {
    s.kind = Kind::Filtering;
  } else {
    throw ParseError(fmt::format("unknown strategy '{}'", parts[0]));
  }
  if (parts[1] == "asn") {
    if (parts.size() != 3) throw ParseError(fmt::format("malformed strategy '{}'", text));
    s.selection = Selection::Explicit;
    for (auto a : split(parts[2], ',')) s.explicit_ases.push_back(Asn::parse(a));
    s.k = s.explicit_ases.size();
    return s;
  }
  if (parts.size() != 3) throw ParseError(fmt::format("strategy '{}' needs a count", text));
  if (parts[1] == "top-cone") {
    s.selection = Selection::TopCone;
  } else if (parts[1] == "top-providers") {
    s.selection = Selection::TopProviders;
  } else if (parts[1] == "random") {
    s.selection = Selection::Random;
  } else {
    throw ParseError(fmt::format("unknown selection '{}'", parts[1]));
  }
  try {
    s.k = std::stoul(std::string(parts[2]));
  } catch (const std::exception&) {
    throw ParseError(fmt::format("bad count in strategy '{}'", text));
  }
  if (s.k == 0) throw ParseError("strategy count must be positive");
  return s;
}

std::string StrategySpec::label() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Deaggregation: return "deagg";
    default: break;
  }
  std::string head = kind == Kind::Moas ? "moas" : "filter";
  switch (selection) {
    case Selection::TopCone: return fmt::format("{}:top-cone:{}", head, k);
    case Selection::TopProviders: return fmt::format("{}:top-providers:{}", head, k);
    case Selection::Random: return fmt::format("{}:random:{}", head, k);
    case Selection::Explicit: {
      std::string list;
      for (Asn a : explicit_ases) list += (list.empty() ? "" : ",") + std::to_string(a.value);
      return fmt::format("{}:asn:{}", head, list);
    }
  }
  return head;
}

std::vector<std::pair<Asn, Asn>> draw_pairs(const AsGraph& graph, std::size_t count, std::uint64_t seed) {
  const std::uint64_t n = graph.node_count();
  const std::uint64_t available = n < 2 ? 0 : n * (n - 1);
  if (count > available) {
    throw SimulationError(fmt::format("{} pairs requested but only {} victim/hijacker pairs exist", count, available));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Asn, Asn>> out;
  out.reserve(count);
  if (count * 2 > available) {
    std::vector<std::pair<NodeId, NodeId>> all;
    all.reserve(available);
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b = 0; b < n; ++b)
        if (a != b) all.emplace_back(a, b);
    std::shuffle(all.begin(), all.end(), rng);
    for (std::size_t i = 0; i < count; ++i) out.emplace_back(graph.asn(all[i].first), graph.asn(all[i].second));
    return out;
  }
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::set<std::pair<NodeId, NodeId>> seen;
  while (out.size() < count) {
    NodeId v = pick(rng);
    NodeId h = pick(rng);
    if (v == h || !seen.emplace(v, h).second) continue;
    out.emplace_back(graph.asn(v), graph.asn(h));
  }
  return out;
}

std::vector<Asn> select_ases(const AsGraph& graph, const DegreeRankings& rankings, const StrategySpec& strategy,
                             Asn victim, Asn hijacker, std::uint64_t run_seed) {
  std::vector<Asn> out;
  auto take_ranked = [&](const std::vector<Asn>& ranked) {
    for (Asn a : ranked) {
      if (out.size() == strategy.k) break;
      if (a != victim && a != hijacker) out.push_back(a);
    }
  };
  switch (strategy.selection) {
    case StrategySpec::Selection::TopCone: take_ranked(rankings.by_cone); break;
    case StrategySpec::Selection::TopProviders: take_ranked(rankings.by_providers); break;
    case StrategySpec::Selection::Explicit:
      for (Asn a : strategy.explicit_ases)
        if (a != hijacker) out.push_back(a);
      break;
    case StrategySpec::Selection::Random: {
      std::mt19937_64 rng(run_seed);
      std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(graph.node_count() - 1));
      std::set<Asn> chosen;
      const std::size_t want = std::min<std::size_t>(strategy.k, graph.node_count() - 2);
      while (chosen.size() < want) {
        Asn a = graph.asn(pick(rng));
        if (a != victim && a != hijacker) chosen.insert(a);
      }
      out.assign(chosen.begin(), chosen.end());
      break;
    }
  }
  return out;
}

ExperimentResult run_experiment(const AsGraph& graph, const ExperimentSpec& spec) {
  if (spec.types.empty()) throw SimulationError("experiment needs at least one hijack type");
  if (spec.family == ExperimentFamily::Mitigation && spec.strategy.kind == StrategySpec::Kind::None) {
    throw SimulationError("mitigation experiment needs a strategy");
  }
  const auto pairs = draw_pairs(graph, spec.pairs, spec.seed);
  std::optional<DegreeRankings> rankings;
  if (spec.strategy.kind == StrategySpec::Kind::Moas || spec.strategy.kind == StrategySpec::Kind::Filtering) {
    rankings = degree_rankings(graph);
  }
  const bool mitigate = spec.family == ExperimentFamily::Mitigation;
  const std::string label = mitigate ? spec.strategy.label() : "none";

  std::vector<std::vector<ExperimentRow>> per_run(pairs.size());
  auto run_one = [&](std::size_t run) {
    auto [victim, hijacker] = pairs[run];
    std::vector<Asn> helpers;
    if (mitigate && rankings) {
      std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                        static_cast<std::uint32_t>(run)};
      std::uint32_t words[2];
      seq.generate(words, words + 2);
      helpers = select_ases(graph, *rankings, spec.strategy, victim, hijacker,
                            (std::uint64_t{words[0]} << 32) | words[1]);
    }
    for (PathDim type : spec.types) {
      HijackScenario scenario{victim, hijacker, HijackClass{spec.prefix_dim, type, DataPlaneDim::Unknown},
                              spec.victim_prefix, FillerMode::Synthetic};
      SimOutcome outcome = simulate_hijack(graph, scenario);
      ExperimentRow row{run, victim, hijacker, type, spec.prefix_dim, impact(outcome),
                        visibility(outcome).polluted_monitors, label, std::nullopt};
      if (mitigate) {
        MitigationStrategy strategy;
        switch (spec.strategy.kind) {
          case StrategySpec::Kind::Deaggregation: strategy = MitigationStrategy::deaggregation(); break;
          case StrategySpec::Kind::Moas: strategy = MitigationStrategy::moas(helpers); break;
          case StrategySpec::Kind::Filtering: strategy = MitigationStrategy::filtering(helpers); break;
          case StrategySpec::Kind::None: break;
        }
        row.residual_impact = impact(simulate_mitigation(graph, outcome, strategy));
      }
      per_run[run].push_back(std::move(row));
    }
  };

  unsigned threads = spec.threads ? spec.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, pairs.size())));
  if (threads <= 1) {
    for (std::size_t r = 0; r < pairs.size(); ++r) run_one(r);
  } else {
    (void)graph.customer_first_order();  // warm the shared cache before fanning out
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < pairs.size(); r = next++) {
          try {
            run_one(r);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentResult result;
  for (auto& rows : per_run)
    for (auto& row : rows) result.rows.push_back(std::move(row));
  for (PathDim type : spec.types) {
    std::vector<double> impacts, residuals;
    std::size_t invisible = 0;
    for (const auto& row : result.rows) {
      if (!(row.type == type)) continue;
      impacts.push_back(row.impact);
      if (row.visible_monitors == 0) ++invisible;
      if (row.residual_impact) residuals.push_back(*row.residual_impact);
    }
    GroupSummary g;
    g.type = type;
    g.runs = impacts.size();
    g.impact_mean = mean(impacts);
    g.impact_median = median(impacts);
    g.invisible_fraction = impacts.empty() ? 0 : static_cast<double>(invisible) / static_cast<double>(impacts.size());
    if (!residuals.empty()) {
      g.residual_mean = mean(residuals);
      g.residual_median = median(residuals);
    }
    result.summary.push_back(g);
  }
  return result;
}

void write_rows_csv(const ExperimentResult& result, std::ostream& out) {
  out << "run,victim,hijacker,type,prefix_dim,impact,visible_monitors,strategy,residual_impact\n";
  for (const auto& r : result.rows) {
    out << fmt::format("{},{},{},{},{},{:.6f},{},{},", r.run, r.victim.value, r.hijacker.value, type_label(r.type),
                       to_string(r.prefix_dim), r.impact, r.visible_monitors, r.strategy);
    if (r.residual_impact) out << fmt::format("{:.6f}", *r.residual_impact);
    out << '\n';
  }
}

void write_summary_json(const ExperimentSpec& spec, const ExperimentResult& result, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["experiment"] = to_string(spec.family);
  doc["prefix_dim"] = to_string(spec.prefix_dim);
  doc["pairs"] = spec.pairs;
  doc["seed"] = spec.seed;
  doc["strategy"] = spec.family == ExperimentFamily::Mitigation ? spec.strategy.label() : "none";
  auto groups = nlohmann::ordered_json::array();
  for (const auto& g : result.summary) {
    nlohmann::ordered_json j;
    j["type"] = type_label(g.type);
    j["runs"] = g.runs;
    j["impact_mean"] = g.impact_mean;
    j["impact_median"] = g.impact_median;
    j["invisible_fraction"] = g.invisible_fraction;
    if (g.residual_mean) {
      j["residual_mean"] = *g.residual_mean;
      j["residual_median"] = *g.residual_median;
    }
    groups.push_back(std::move(j));
  }
  doc["groups"] = std::move(groups);
  out << doc.dump(2) << '\n';
}

}  // namespace prefixguard

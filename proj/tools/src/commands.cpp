#include "prefixguard_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "prefixguard/detection.hpp"
#include "prefixguard/errors.hpp"
#include "prefixguard/experiment.hpp"
#include "prefixguard/feeds.hpp"
#include "prefixguard/mitigation.hpp"
#include "prefixguard/topology_gen.hpp"
#include "prefixguard/version.hpp"

namespace prefixguard::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

/// Bad user input detected by the CLI itself.
class InputError : public Error {
 public:
  using Error::Error;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError(fmt::format("cannot create output directory {}", dir.string()));
}

void require_file(const fs::path& p, std::string_view what) {
  if (!fs::is_regular_file(p)) throw InputError(fmt::format("{} file not found: {}", what, p.string()));
}

JitterRange parse_jitter(const std::string& text) {
  auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument("missing comma");
    std::size_t used = 0;
    JitterRange r{std::stoll(text.substr(0, comma), &used), std::stoll(text.substr(comma + 1))};
    if (r.lo < 0 || r.hi < r.lo) throw std::invalid_argument("range");
    return r;
  } catch (const std::exception&) {
    throw InputError(fmt::format("jitter '{}' must be LO,HI with 0 <= LO <= HI", text));
  }
}

AsGraph load_graph(const fs::path& topology, const fs::path& monitors, RunManifest& manifest, std::ostream& log) {
  require_file(topology, "topology");
  require_file(monitors, "monitor");
  manifest.add_input(topology);
  manifest.add_input(monitors);
  auto load = load_monitors(load_as_rel_file(topology), load_monitor_file(monitors));
  if (load.skipped > 0) fmt::print(log, "warning: {} monitor(s) not in the topology were skipped\n", load.skipped);
  return std::move(load.graph);
}

std::string join_asns(const std::vector<Asn>& asns) {
  std::string out;
  for (Asn a : asns) out += (out.empty() ? "" : " ") + std::to_string(a.value);
  return out;
}

}  // namespace

std::vector<PathDim> parse_type_list(const std::string& text) {
  std::vector<PathDim> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (auto dots = item.find(".."); dots != std::string::npos) {
      PathDim lo = parse_path_dim(item.substr(0, dots));
      PathDim hi = parse_path_dim(item.substr(dots + 2));
      if (lo.unaltered || hi.unaltered || hi.n < lo.n) throw InputError(fmt::format("invalid type range '{}'", item));
      for (unsigned n = lo.n; n <= hi.n; ++n) out.push_back(PathDim::type(static_cast<std::uint8_t>(n)));
    } else {
      out.push_back(parse_path_dim(item));
    }
  }
  if (out.empty()) throw InputError("empty type list");
  return out;
}

// --- simulate ---------------------------------------------------------------

void cmd_simulate(const SimulateOptions& o, RunManifest manifest, std::ostream& log) {
  ExperimentSpec spec;
  spec.family = parse_experiment_family(o.experiment);
  spec.types = parse_type_list(o.types);
  spec.prefix_dim = parse_prefix_dim(o.prefix_dim);
  spec.victim_prefix = parse_prefix(o.victim_prefix);
  spec.pairs = o.pairs;
  spec.seed = o.seed;
  spec.threads = o.threads;
  if (!o.strategy.empty()) spec.strategy = StrategySpec::parse(o.strategy);
  if (spec.family == ExperimentFamily::Mitigation && spec.strategy.kind == StrategySpec::Kind::None) {
    throw InputError("--experiment mitigation requires --strategy");
  }
  if (spec.family != ExperimentFamily::Mitigation && spec.strategy.kind != StrategySpec::Kind::None) {
    throw InputError("--strategy is only valid with --experiment mitigation");
  }
  AsGraph graph = load_graph(o.topology, o.monitors, manifest, log);
  if (spec.family == ExperimentFamily::Visibility && graph.monitors().empty()) {
    throw InputError("visibility experiment needs at least one monitor in the topology");
  }
  ensure_dir(o.out);
  manifest.seed = o.seed;

  auto start = std::chrono::steady_clock::now();
  ExperimentResult result = run_experiment(graph, spec);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  {
    auto out = open_out(o.out / "rows.csv");
    write_rows_csv(result, out);
  }
  {
    auto out = open_out(o.out / "summary.json");
    write_summary_json(spec, result, out);
  }
  manifest.write(o.out / "manifest.json");

  fmt::print(log, "{} runs on {} ASes ({} monitors) in {:.1f}s\n", result.rows.size(), graph.node_count(),
             graph.monitors().size(), secs);
  for (const auto& g : result.summary) {
    fmt::print(log, "  {:<7} impact mean {:.4f} median {:.4f} invisible {:.4f}", to_string(g.type), g.impact_mean,
               g.impact_median, g.invisible_fraction);
    if (g.residual_mean) fmt::print(log, " residual mean {:.4f}", *g.residual_mean);
    fmt::print(log, "\n");
  }
}

// --- detect -------------------------------------------------------------------

void cmd_detect(const DetectOptions& o, RunManifest manifest, std::ostream& log) {
  if (o.replays.empty()) throw InputError("at least one --replay is required");
  if (o.th2 == 0) throw InputError("--th2 must be at least 1");
  if (o.ts2 < 0) throw InputError("--ts2 must be non-negative");
  if (o.buffer == 0) throw InputError("--buffer must be at least 1");
  require_file(o.config, "config");
  manifest.add_input(o.config);
  const DetectionConfig config = load_detection_config(o.config);
  std::optional<MitigationPolicy> policy;
  if (o.policy) {
    require_file(*o.policy, "policy");
    manifest.add_input(*o.policy);
    policy = load_policy(*o.policy);
  }
  const ReplayOptions ropts{ReplaySpeed::parse(o.speed), o.strict};
  std::optional<SynthManifest> synth;
  for (const auto& r : o.replays) {
    require_file(r, "replay");
    manifest.add_input(r);
    fs::path side = r;
    side += ".manifest.json";
    if (fs::is_regular_file(side)) {
      std::ifstream in(side);
      std::stringstream ss;
      ss << in.rdbuf();
      auto m = SynthManifest::from_json(ss.str());
      if (!synth || m.hijack_ts < synth->hijack_ts) synth = std::move(m);
    }
  }
  ensure_dir(o.out);

  std::vector<std::unique_ptr<FeedSource>> sources;
  std::vector<ReplaySource*> replays;
  for (const auto& r : o.replays) {
    auto src = std::make_unique<ReplaySource>(r, ropts, r.string());
    replays.push_back(src.get());
    sources.push_back(std::move(src));
  }
  BufferedSource feed(merge(std::move(sources)), o.buffer);

  std::optional<RecoveryTracker> recovery;
  if (synth) {
    RecoveryContext ctx;
    ctx.victim_prefixes.push_back(parse_prefix(synth->victim_prefix));
    Prefix hijacked = parse_prefix(synth->hijacked_prefix);
    if (hijacked != ctx.victim_prefixes.front()) ctx.victim_prefixes.push_back(hijacked);
    for (const auto& [p, ann] : config.announced) {
      for (const auto& v : ctx.victim_prefixes) {
        if (p.overlaps(v)) ctx.legitimate_origins.insert(ann.origins.begin(), ann.origins.end());
      }
    }
    ctx.hijack_ts = synth->hijack_ts;
    recovery.emplace(std::move(ctx));
  }

  auto alerts_out = open_out(o.out / "alerts.jsonl");
  auto actions_out = open_out(o.out / "actions.jsonl");
  std::optional<std::int64_t> first_alert_ts;
  std::map<std::string, std::size_t> by_confidence;
  std::map<std::string, std::size_t> by_action;
  // The operator's own deaggregated halves become announced prefixes once issued.
  std::vector<MitigationAnnouncement> issued_halves;

  DetectionEngine engine(config, DetectionOptions{o.ts2, o.th2}, [&](const Alert& a) {
    alerts_out << to_json_line(a) << '\n';
    if (!first_alert_ts) first_alert_ts = a.detected_at;
    ++by_confidence[std::string(to_string(a.confidence))];
    if (recovery) recovery->context().offending.insert(a.offending.begin(), a.offending.end());
    if (!policy) return;
    MitigationAction action = decide(*policy, a, legitimate_origin(config, a.prefix));
    actions_out << to_json_line(action) << '\n';
    ++by_action[std::string(to_string(action.kind))];
    for (const auto& ann : action.announcements) {
      if (ann.prefix != a.prefix && a.prefix.contains(ann.prefix)) issued_halves.push_back(ann);
    }
    if (recovery) {
      for (const auto& ann : action.announcements) {
        if (!recovery->context().legitimate_origins.contains(ann.origin)) {
          recovery->context().mitigator_origins.insert(ann.origin);
        }
      }
    }
  });

  auto start = std::chrono::steady_clock::now();
  while (auto u = feed.next()) {
    engine.process(*u);
    if (recovery) recovery->observe(*u);
    if (!issued_halves.empty()) {
      DetectionConfig next = engine.config();
      for (const auto& h : issued_halves) {
        auto parent = std::find_if(next.announced.begin(), next.announced.end(),
                                   [&](const auto& kv) { return kv.first != h.prefix && kv.first.contains(h.prefix); });
        if (parent == next.announced.end() || next.announced.contains(h.prefix)) continue;
        AnnouncedPrefix entry = parent->second;
        entry.origins.insert(h.origin);
        next.announced.emplace(h.prefix, std::move(entry));
      }
      issued_halves.clear();
      engine.reload(std::move(next));
    }
  }
  engine.finish();
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  alerts_out.flush();
  actions_out.flush();

  const auto& st = engine.stats();
  ordered_json summary;
  summary["updates"] = st.updates;
  summary["announcements"] = st.announcements;
  summary["withdrawals"] = st.withdrawals;
  std::size_t skipped = 0;
  for (const auto* r : replays) skipped += r->stats().skipped;
  summary["skipped_records"] = skipped;
  summary["not_mine"] = st.not_mine;
  summary["legitimate"] = st.legitimate;
  summary["discarded_looped"] = st.discarded;
  summary["alerts"] = st.alerts;
  ordered_json conf = ordered_json::object();
  for (const auto& [k, v] : by_confidence) conf[k] = v;
  summary["alerts_by_confidence"] = std::move(conf);
  summary["stage2_confirmed"] = st.stage2_confirmed;
  summary["stage2_dismissed"] = st.stage2_dismissed;
  ordered_json acts = ordered_json::object();
  for (const auto& [k, v] : by_action) acts[k] = v;
  summary["actions"] = std::move(acts);
  if (synth) {
    summary["hijack_ts"] = synth->hijack_ts;
    summary["detection_delay"] =
        first_alert_ts ? ordered_json(*first_alert_ts - synth->hijack_ts) : ordered_json(nullptr);
    RecoveryReport rep = recovery->report();
    ordered_json rec;
    rec["polluted_monitors"] = rep.monitors.size();
    rec["recovered"] = rep.monitors.size() - rep.unrecovered.size();
    rec["median_delay"] = rep.median_delay ? ordered_json(*rep.median_delay) : ordered_json(nullptr);
    rec["max_delay"] = rep.max_delay ? ordered_json(*rep.max_delay) : ordered_json(nullptr);
    auto un = ordered_json::array();
    for (Asn a : rep.unrecovered) un.push_back(a.value);
    rec["unrecovered"] = std::move(un);
    summary["recovery"] = std::move(rec);
  }
  {
    auto out = open_out(o.out / "summary.json");
    out << summary.dump(2) << '\n';
  }
  manifest.write(o.out / "manifest.json");

  fmt::print(log, "{} updates in {:.2f}s ({:.0f}/s), {} alerts", st.updates, secs,
             secs > 0 ? static_cast<double>(st.updates) / secs : 0.0, st.alerts);
  if (skipped) fmt::print(log, ", {} malformed records skipped", skipped);
  if (synth && first_alert_ts) fmt::print(log, ", detection delay {}s", *first_alert_ts - synth->hijack_ts);
  fmt::print(log, "\n");
}

// --- synth ------------------------------------------------------------------

void cmd_synth(const SynthOptions& o, RunManifest manifest, std::ostream& log) {
  if (o.victim == 0 || o.hijacker == 0) throw InputError("--victim and --hijacker are required AS numbers");
  if (o.victim == o.hijacker) throw InputError("victim and hijacker must differ");
  if (o.out.empty()) throw InputError("--out FILE is required");
  HijackScenario scenario;
  scenario.victim = Asn(o.victim);
  scenario.hijacker = Asn(o.hijacker);
  scenario.hijack.prefix_dim = parse_prefix_dim(o.prefix_dim);
  scenario.hijack.path_dim = parse_path_dim(o.type);
  scenario.victim_prefix = parse_prefix(o.prefix);
  if (o.fillers == "real") {
    scenario.fillers = FillerMode::RealPath;
  } else if (o.fillers == "synthetic") {
    scenario.fillers = FillerMode::Synthetic;
  } else {
    throw InputError(fmt::format("--fillers must be 'real' or 'synthetic', got '{}'", o.fillers));
  }
  JitterRange jitter = parse_jitter(o.jitter);
  std::optional<StrategySpec> mitigation;
  if (!o.mitigation.empty()) {
    mitigation = StrategySpec::parse(o.mitigation);
    if (mitigation->kind == StrategySpec::Kind::None) mitigation.reset();
  }
  JitterRange rjitter = parse_jitter(o.recovery_jitter);

  AsGraph graph = load_graph(o.topology, o.monitors, manifest, log);
  if (graph.monitors().empty()) fmt::print(log, "warning: empty monitor set; the hijack phase will be empty\n");
  manifest.seed = o.seed;

  SimOutcome outcome = simulate_hijack(graph, scenario);
  SynthFeed feed = synth_hijack_feed(graph, outcome, o.base_ts, jitter, o.seed);
  std::vector<BgpUpdate> records = feed.updates;

  std::optional<SimOutcome> mitigated;
  if (mitigation) {
    MitigationStrategy strategy;
    if (mitigation->kind == StrategySpec::Kind::Deaggregation) {
      strategy = MitigationStrategy::deaggregation();
    } else {
      auto ases = select_ases(graph, degree_rankings(graph), *mitigation, scenario.victim, scenario.hijacker, o.seed);
      strategy = mitigation->kind == StrategySpec::Kind::Moas ? MitigationStrategy::moas(std::move(ases))
                                                             : MitigationStrategy::filtering(std::move(ases));
    }
    mitigated = simulate_mitigation(graph, outcome, strategy);
    std::int64_t first = o.base_ts;
    for (const auto& u : feed.updates)
      if (u.timestamp >= o.base_ts) {
        first = u.timestamp;
        break;
      }
    auto rec = synth_recovery_feed(graph, *mitigated, feed, first + o.mitigation_delay, rjitter, o.seed + 1);
    records.insert(records.end(), rec.begin(), rec.end());
    std::stable_sort(records.begin(), records.end(), [](const BgpUpdate& a, const BgpUpdate& b) {
      return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.monitor < b.monitor;
    });
  }

  if (o.out.has_parent_path()) ensure_dir(o.out.parent_path());
  {
    auto out = open_out(o.out);
    write_records(out, records);
  }
  auto sidecar = [&](std::string_view suffix) {
    fs::path p = o.out;
    p += suffix;
    return p;
  };
  {
    auto out = open_out(sidecar(".manifest.json"));
    out << feed.manifest.to_json() << '\n';
  }
  {
    auto out = open_out(sidecar(".config.yaml"));
    out << to_yaml(synth_detection_config(graph, outcome));
  }
  manifest.write(sidecar(".run.json"));

  fmt::print(log, "victim AS{} hijacker AS{} {} {} on {}\n", o.victim, o.hijacker, to_string(scenario.hijack.prefix_dim),
             to_string(scenario.hijack.path_dim), outcome.hijacked_prefix.to_string());
  if (outcome.hijack_path) fmt::print(log, "hijack seed path: {}\n", outcome.hijack_path->to_string());
  fmt::print(log, "impact {:.6f} ({} of {} ASes polluted)\n", impact(outcome), outcome.polluted.size(),
             graph.node_count());
  if (outcome.polluted.size() <= 50) fmt::print(log, "polluted: {}\n", join_asns(outcome.polluted));
  fmt::print(log, "polluted monitors: {} of {}\n", outcome.polluted_monitors.size(), graph.monitors().size());
  if (mitigated) {
    fmt::print(log, "after {}: impact {:.6f} ({} polluted)\n", mitigation->label(), impact(*mitigated),
               mitigated->polluted.size());
  }
  fmt::print(log, "wrote {} records to {}\n", records.size(), o.out.string());
}

// --- gen-topology -----------------------------------------------------------

void cmd_gen_topology(const GenTopologyOptions& o, RunManifest manifest, std::ostream& log) {
  if (o.nodes < 2) throw InputError("--nodes must be at least 2");
  if (o.tier1 == 0 || o.tier1 > o.nodes) throw InputError("--tier1 must be between 1 and --nodes");
  if (o.monitors > o.nodes) throw InputError("--monitors cannot exceed --nodes");
  TopologyParams params;
  params.nodes = o.nodes;
  params.tier1 = o.tier1;
  params.seed = o.seed;
  AsGraph graph = generate_topology(params);
  auto monitors = pick_monitors(graph, o.monitors, o.seed);
  ensure_dir(o.out);
  {
    auto out = open_out(o.out / "topology.txt");
    write_as_rel(graph, out);
  }
  {
    auto out = open_out(o.out / "monitors.txt");
    for (Asn m : monitors) out << m.value << '\n';
  }
  manifest.seed = o.seed;
  manifest.write(o.out / "manifest.json");
  fmt::print(log, "{} ASes, {} monitors written to {}\n", graph.node_count(), monitors.size(), o.out.string());
}

// --- entry point ---------------------------------------------------------------

namespace {

std::map<std::string, std::vector<std::string>> collect_flags(const CLI::App& sub) {
  std::map<std::string, std::vector<std::string>> out;
  for (const CLI::Option* opt : sub.get_options()) {
    std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    if (opt->count() > 0) {
      out[name] = opt->results();
    } else if (!opt->get_default_str().empty()) {
      out[name] = {opt->get_default_str()};
    }
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"BGP prefix-hijack simulation, detection and mitigation toolkit", "prefixguard"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Run a hijack impact / visibility / mitigation experiment");
  s->add_option("--topology", sim.topology, "AS relationship file (serial-1)")->required();
  s->add_option("--monitors", sim.monitors, "Monitor ASN list")->required();
  s->add_option("--experiment", sim.experiment, "impact | visibility | mitigation")->capture_default_str();
  s->add_option("--types", sim.types, "Hijack types, e.g. 0..4 or 0,2,U")->capture_default_str();
  s->add_option("--prefix-dim", sim.prefix_dim, "exact | subprefix | squatting")->capture_default_str();
  s->add_option("--victim-prefix", sim.victim_prefix, "Victim prefix")->capture_default_str();
  s->add_option("--pairs", sim.pairs, "Random victim/hijacker pairs")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  s->add_option("--strategy", sim.strategy, "deagg | moas:SEL:K | filter:SEL:K (SEL: top-cone, top-providers, random, asn)");
  s->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")->capture_default_str();
  s->add_option("--out", sim.out, "Output directory")->required();

  DetectOptions det;
  std::vector<std::string> replay_args;
  std::string policy_arg;
  auto* d = app.add_subcommand("detect", "Replay update streams through detection and mitigation");
  d->add_option("--config", det.config, "Detection config (YAML)")->required();
  d->add_option("--replay", replay_args, "Replay file(s); merged by timestamp")->required();
  d->add_option("--policy", policy_arg, "Mitigation policy (YAML)");
  d->add_option("--ts2", det.ts2, "Stage-2 window in seconds")->capture_default_str();
  d->add_option("--th2", det.th2, "Stage-2 monitor threshold")->capture_default_str();
  d->add_option("--speed", det.speed, "fast | real:X")->capture_default_str();
  d->add_flag("--strict", det.strict, "Abort on malformed or out-of-order records");
  d->add_option("--buffer", det.buffer, "Merge buffer capacity")->capture_default_str();
  d->add_option("--out", det.out, "Output directory")->required();

  SynthOptions syn;
  auto* y = app.add_subcommand("synth", "Simulate one hijack and write its replay feed");
  y->add_option("--topology", syn.topology, "AS relationship file (serial-1)")->required();
  y->add_option("--monitors", syn.monitors, "Monitor ASN list")->required();
  y->add_option("--victim", syn.victim, "Victim ASN")->required();
  y->add_option("--hijacker", syn.hijacker, "Hijacker ASN")->required();
  y->add_option("--type", syn.type, "Hijack type N or U")->capture_default_str();
  y->add_option("--prefix-dim", syn.prefix_dim, "exact | subprefix | squatting")->capture_default_str();
  y->add_option("--prefix", syn.prefix, "Victim prefix")->capture_default_str();
  y->add_option("--fillers", syn.fillers, "real | synthetic intermediate ASes for Type-N")->capture_default_str();
  y->add_option("--jitter", syn.jitter, "Propagation jitter LO,HI seconds")->capture_default_str();
  y->add_option("--seed", syn.seed, "RNG seed")->capture_default_str();
  y->add_option("--base-ts", syn.base_ts, "Hijack timestamp")->capture_default_str();
  y->add_option("--mitigation", syn.mitigation, "Append recovery records: deagg | moas:SEL:K | filter:SEL:K");
  y->add_option("--mitigation-delay", syn.mitigation_delay, "Seconds from first hijack record to mitigation")
      ->capture_default_str();
  y->add_option("--recovery-jitter", syn.recovery_jitter, "Recovery jitter LO,HI seconds")->capture_default_str();
  y->add_option("--out", syn.out, "Replay file to write")->required();

  GenTopologyOptions gen;
  auto* g = app.add_subcommand("gen-topology", "Generate a synthetic Internet-like topology and monitor list");
  g->add_option("--nodes", gen.nodes, "Number of ASes")->capture_default_str();
  g->add_option("--tier1", gen.tier1, "Tier-1 clique size")->capture_default_str();
  g->add_option("--monitors", gen.monitors, "Number of monitors")->capture_default_str();
  g->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunManifest manifest;
  manifest.version = kVersion;
  try {
    if (s->parsed()) {
      manifest.subcommand = "simulate";
      manifest.flags = collect_flags(*s);
      cmd_simulate(sim, std::move(manifest), out);
    } else if (d->parsed()) {
      manifest.subcommand = "detect";
      manifest.flags = collect_flags(*d);
      for (const auto& r : replay_args) det.replays.emplace_back(r);
      if (!policy_arg.empty()) det.policy = policy_arg;
      cmd_detect(det, std::move(manifest), out);
    } else if (y->parsed()) {
      manifest.subcommand = "synth";
      manifest.flags = collect_flags(*y);
      cmd_synth(syn, std::move(manifest), out);
    } else if (g->parsed()) {
      manifest.subcommand = "gen-topology";
      manifest.flags = collect_flags(*g);
      cmd_gen_topology(gen, std::move(manifest), out);
    }
  } catch (const InputError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInput;
  } catch (const ParseError& e) {
    fmt::print(err, "input error: {}\n", e.what());
    return kExitInput;
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitInput;
  } catch (const FeedError& e) {
    fmt::print(err, "feed error: {}\n", e.what());
    return kExitInput;
  } catch (const SimulationError& e) {
    fmt::print(err, "simulation error: {}\n", e.what());
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    fmt::print(err, "internal error: {}\n", e.what());
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace prefixguard::cli

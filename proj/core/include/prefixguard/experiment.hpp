#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prefixguard/hijack.hpp"

namespace prefixguard {

enum class ExperimentFamily : std::uint8_t { Impact, Visibility, Mitigation };

std::string_view to_string(ExperimentFamily f);
ExperimentFamily parse_experiment_family(std::string_view text);

/// How mitigator / filter ASes are picked for each run.
struct StrategySpec {
  enum class Kind : std::uint8_t { None, Deaggregation, Moas, Filtering };
  enum class Selection : std::uint8_t { TopCone, TopProviders, Random, Explicit };

  Kind kind = Kind::None;
  Selection selection = Selection::TopCone;
  std::size_t k = 0;
  std::vector<Asn> explicit_ases;

  /// "deagg", "moas:top-cone:3", "filter:random:5", "moas:asn:174,3356".
  static StrategySpec parse(std::string_view text);
  [[nodiscard]] std::string label() const;
};

struct ExperimentSpec {
  ExperimentFamily family = ExperimentFamily::Impact;
  std::vector<PathDim> types{PathDim::type(0)};
  PrefixDim prefix_dim = PrefixDim::ExactPrefix;
  std::size_t pairs = 1000;
  std::uint64_t seed = 1;
  Prefix victim_prefix = Prefix::ipv4(0x0A000000, 23);
  StrategySpec strategy;
  /// Worker threads; 0 = hardware concurrency.
  unsigned threads = 0;
};

struct ExperimentRow {
  std::size_t run = 0;
  Asn victim;
  Asn hijacker;
  PathDim type;
  PrefixDim prefix_dim = PrefixDim::ExactPrefix;
  double impact = 0;
  std::size_t visible_monitors = 0;
  std::string strategy;
  std::optional<double> residual_impact;
};

struct GroupSummary {
  PathDim type;
  std::size_t runs = 0;
  double impact_mean = 0;
  double impact_median = 0;
  double invisible_fraction = 0;
  std::optional<double> residual_mean;
  std::optional<double> residual_median;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;     // ordered by (run, type)
  std::vector<GroupSummary> summary;   // one per requested type, in request order
};

/// Victim/hijacker pairs drawn uniformly without replacement. Deterministic per seed.
std::vector<std::pair<Asn, Asn>> draw_pairs(const AsGraph& graph, std::size_t count, std::uint64_t seed);

/// Mitigator or filter ASes for one run, excluding victim and hijacker.
std::vector<Asn> select_ases(const AsGraph& graph, const DegreeRankings& rankings, const StrategySpec& strategy,
                             Asn victim, Asn hijacker, std::uint64_t run_seed);

/// Runs every (pair, type) scenario. Results are identical for any thread count.
ExperimentResult run_experiment(const AsGraph& graph, const ExperimentSpec& spec);

/// run,victim,hijacker,type,prefix_dim,impact,visible_monitors,strategy,residual_impact
void write_rows_csv(const ExperimentResult& result, std::ostream& out);
void write_summary_json(const ExperimentSpec& spec, const ExperimentResult& result, std::ostream& out);

}  // namespace prefixguard

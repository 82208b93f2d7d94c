#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prefixguard/types.hpp"
#include "prefixguard_cli/run_manifest.hpp"

namespace prefixguard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitInternal = 4;

/// Parses and runs one command line (argv[0] excluded). Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SimulateOptions {
  std::filesystem::path topology;
  std::filesystem::path monitors;
  std::string experiment = "impact";
  std::string types = "0..4";
  std::string prefix_dim = "exact";
  std::string victim_prefix = "10.0.0.0/23";
  std::size_t pairs = 1000;
  std::uint64_t seed = 1;
  std::string strategy;
  unsigned threads = 0;
  std::filesystem::path out;
};

struct DetectOptions {
  std::filesystem::path config;
  std::vector<std::filesystem::path> replays;
  std::optional<std::filesystem::path> policy;
  std::int64_t ts2 = 300;
  std::size_t th2 = 2;
  std::string speed = "fast";
  bool strict = false;
  std::size_t buffer = 4096;
  std::filesystem::path out;
};

struct SynthOptions {
  std::filesystem::path topology;
  std::filesystem::path monitors;
  std::uint32_t victim = 0;
  std::uint32_t hijacker = 0;
  std::string type = "0";
  std::string prefix_dim = "exact";
  std::string prefix = "10.0.0.0/23";
  std::string fillers = "real";
  std::string jitter = "1,10";
  std::uint64_t seed = 1;
  std::int64_t base_ts = 1'600'000'000;
  std::string mitigation;
  std::int64_t mitigation_delay = 0;
  std::string recovery_jitter = "10,50";
  std::filesystem::path out;
};

struct GenTopologyOptions {
  std::size_t nodes = 1000;
  std::size_t tier1 = 12;
  std::size_t monitors = 50;
  std::uint64_t seed = 1;
  std::filesystem::path out;
};

void cmd_simulate(const SimulateOptions& o, RunManifest manifest, std::ostream& log);
void cmd_detect(const DetectOptions& o, RunManifest manifest, std::ostream& log);
void cmd_synth(const SynthOptions& o, RunManifest manifest, std::ostream& log);
void cmd_gen_topology(const GenTopologyOptions& o, RunManifest manifest, std::ostream& log);

/// "0..4", "0,2,U", "U".
std::vector<PathDim> parse_type_list(const std::string& text);

}  // namespace prefixguard::cli

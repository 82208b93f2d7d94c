#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prefixguard::cli {

/// Lower-case hex SHA-256 of a file's bytes. Throws std::runtime_error if unreadable.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

struct InputDigest {
  std::string path;
  std::uintmax_t bytes = 0;
  std::string sha256;
};

/// Everything needed to reproduce a run. Contains no wall-clock data, so two
/// identical invocations produce identical manifests.
struct RunManifest {
  std::string tool = "prefixguard";
  std::string version;
  std::string subcommand;
  std::map<std::string, std::vector<std::string>> flags;
  std::optional<std::uint64_t> seed;
  std::vector<InputDigest> inputs;

  void add_input(const std::filesystem::path& path);
  [[nodiscard]] std::string to_json() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace prefixguard::cli

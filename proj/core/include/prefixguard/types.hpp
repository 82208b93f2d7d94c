#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prefixguard/prefix.hpp"

namespace prefixguard {

/// A 32-bit AS number. Zero is reserved and never constructed by parse().
struct Asn {
  std::uint32_t value = 0;

  constexpr Asn() = default;
  constexpr explicit Asn(std::uint32_t v) : value(v) {}

  static Asn parse(std::string_view text);

  friend constexpr auto operator<=>(Asn, Asn) = default;
};

std::string to_string(Asn asn);

/// Directed AS adjacency as read from an AS path: `from` sits farther from the origin.
struct DirectedLink {
  Asn from;
  Asn to;

  [[nodiscard]] DirectedLink reversed() const { return {to, from}; }

  friend constexpr auto operator<=>(const DirectedLink&, const DirectedLink&) = default;
};

/// Sequence of ASes, leftmost = most recent appender, rightmost = origin. Never empty.
class AsPath {
 public:
  /// Throws std::invalid_argument on an empty sequence.
  explicit AsPath(std::vector<Asn> hops);
  AsPath(std::initializer_list<std::uint32_t> hops);

  /// Collapses runs of identical consecutive ASNs (prepending) before construction.
  static AsPath collapsed(std::vector<Asn> hops);

  [[nodiscard]] Asn origin() const { return hops_.back(); }
  [[nodiscard]] Asn first() const { return hops_.front(); }
  [[nodiscard]] std::size_t size() const { return hops_.size(); }
  [[nodiscard]] std::span<const Asn> hops() const { return hops_; }
  [[nodiscard]] Asn operator[](std::size_t i) const { return hops_[i]; }
  [[nodiscard]] bool contains(Asn asn) const;

  /// New path with `asn` prepended on the left, as an exporting AS does.
  [[nodiscard]] AsPath prepended(Asn asn) const;

  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const AsPath&, const AsPath&) = default;
  friend auto operator<=>(const AsPath&, const AsPath&) = default;

 private:
  std::vector<Asn> hops_;
};

/// True iff some ASN appears more than once.
bool path_has_loop(const AsPath& path);

/// Links (a1->a2), (a2->a3), ... for a loop-free path. Throws std::invalid_argument on loops.
std::vector<DirectedLink> links_of(const AsPath& path);

enum class UpdateKind : std::uint8_t { Announcement, Withdrawal };

/// One BGP update as observed at a monitor (vantage point).
struct BgpUpdate {
  std::int64_t timestamp = 0;
  Asn monitor;
  UpdateKind kind = UpdateKind::Announcement;
  Prefix prefix;
  std::optional<AsPath> path;

  /// Throws std::invalid_argument unless path presence matches `kind`.
  void validate() const;

  static BgpUpdate announcement(std::int64_t ts, Asn monitor, Prefix prefix, AsPath path);
  static BgpUpdate withdrawal(std::int64_t ts, Asn monitor, Prefix prefix);

  friend bool operator==(const BgpUpdate&, const BgpUpdate&) = default;
};

// Attack taxonomy: prefix dimension, path dimension, data-plane dimension.

enum class PrefixDim : std::uint8_t { ExactPrefix, SubPrefix, Squatting };
enum class DataPlaneDim : std::uint8_t { BH, IM, MM, Unknown };

/// Type-N (position of the rightmost fake link) or Type-U (path unaltered).
struct PathDim {
  bool unaltered = false;
  std::uint8_t n = 0;

  static constexpr PathDim type(std::uint8_t n) { return {false, n}; }
  static constexpr PathDim type_u() { return {true, 0}; }

  friend constexpr bool operator==(PathDim, PathDim) = default;
};

struct HijackClass {
  PrefixDim prefix_dim = PrefixDim::ExactPrefix;
  PathDim path_dim;
  DataPlaneDim data_plane_dim = DataPlaneDim::Unknown;

  friend constexpr bool operator==(const HijackClass&, const HijackClass&) = default;
};

std::string_view to_string(PrefixDim d);
std::string_view to_string(DataPlaneDim d);
/// "Type-0", "Type-3", "Type-U".
std::string to_string(PathDim d);

/// "exact", "subprefix", "squatting". Throws ParseError otherwise.
PrefixDim parse_prefix_dim(std::string_view text);
/// "3", "Type-3", "U", "Type-U". Throws ParseError otherwise.
PathDim parse_path_dim(std::string_view text);

}  // namespace prefixguard

template <>
struct std::hash<prefixguard::Asn> {
  std::size_t operator()(prefixguard::Asn a) const noexcept { return std::hash<std::uint32_t>{}(a.value); }
};

template <>
struct std::hash<prefixguard::DirectedLink> {
  std::size_t operator()(const prefixguard::DirectedLink& l) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{l.from.value} << 32) | l.to.value);
  }
};

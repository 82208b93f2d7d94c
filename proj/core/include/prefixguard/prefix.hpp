#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>

namespace prefixguard {

enum class AddressFamily : std::uint8_t { IPv4, IPv6 };

/// An IPv4 or IPv6 prefix in canonical form (all host bits zero).
///
/// Addresses are stored as 16 network-order bytes; IPv4 uses the first four.
class Prefix {
 public:
  using Bytes = std::array<std::uint8_t, 16>;

  /// The IPv4 default route, 0.0.0.0/0.
  Prefix() = default;

  /// Throws ParseError when `length` exceeds the family bound or host bits
  /// below `length` are set.
  Prefix(AddressFamily family, const Bytes& bytes, unsigned length);

  static Prefix ipv4(std::uint32_t address, unsigned length);

  [[nodiscard]] AddressFamily family() const { return family_; }
  [[nodiscard]] unsigned length() const { return length_; }
  [[nodiscard]] const Bytes& bytes() const { return bytes_; }
  [[nodiscard]] unsigned max_length() const { return family_ == AddressFamily::IPv4 ? 32 : 128; }

  /// IPv4 base address as a host-order integer. Only meaningful for IPv4.
  [[nodiscard]] std::uint32_t ipv4_address() const;

  /// Bit `i` of the base address, counting from the most significant bit.
  [[nodiscard]] bool bit(unsigned i) const;

  /// True if `other` lies within this prefix (equal prefixes included).
  /// Prefixes of different families never contain each other.
  [[nodiscard]] bool contains(const Prefix& other) const;

  /// True if the two prefixes share at least one address.
  [[nodiscard]] bool overlaps(const Prefix& other) const;

  /// The lower (`upper == false`) or upper half, one bit longer.
  [[nodiscard]] Prefix half(bool upper) const;

  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Prefix&, const Prefix&) = default;
  friend std::strong_ordering operator<=>(const Prefix& a, const Prefix& b);

 private:
  AddressFamily family_ = AddressFamily::IPv4;
  Bytes bytes_{};
  std::uint8_t length_ = 0;
};

/// Strict "addr/len" parsing: host bits must already be zero.
Prefix parse_prefix(std::string_view text);

/// True iff `candidate` is strictly more specific than `parent` and inside it.
/// Throws std::invalid_argument on address-family mismatch.
bool is_subprefix(const Prefix& candidate, const Prefix& parent);

}  // namespace prefixguard

template <>
struct std::hash<prefixguard::Prefix> {
  std::size_t operator()(const prefixguard::Prefix& p) const noexcept;
};

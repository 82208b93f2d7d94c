#include "prefixguard/prefix.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

#include "prefixguard/errors.hpp"

namespace prefixguard {

namespace {

bool host_bits_clear(const Prefix::Bytes& bytes, unsigned length, unsigned max_length) {
  for (unsigned i = length; i < max_length; ++i) {
    if ((bytes[i / 8] >> (7 - i % 8)) & 1U) return false;
  }
  return true;
}

}  // namespace

Prefix::Prefix(AddressFamily family, const Bytes& bytes, unsigned length)
    : family_(family), bytes_(bytes), length_(static_cast<std::uint8_t>(length)) {
  if (length > max_length()) {
    throw ParseError(fmt::format("prefix length {} out of range (max {})", length, max_length()));
  }
  if (family == AddressFamily::IPv4) {
    for (std::size_t i = 4; i < bytes_.size(); ++i) {
      if (bytes_[i] != 0) throw ParseError("IPv4 prefix carries bytes beyond the address");
    }
  }
  if (!host_bits_clear(bytes_, length, max_length())) {
    throw ParseError(fmt::format("non-canonical prefix {}: host bits set below /{}", to_string(), length));
  }
}

Prefix Prefix::ipv4(std::uint32_t address, unsigned length) {
  Bytes b{};
  b[0] = static_cast<std::uint8_t>(address >> 24);
  b[1] = static_cast<std::uint8_t>(address >> 16);
  b[2] = static_cast<std::uint8_t>(address >> 8);
  b[3] = static_cast<std::uint8_t>(address);
  return Prefix(AddressFamily::IPv4, b, length);
}

std::uint32_t Prefix::ipv4_address() const {
  return (std::uint32_t{bytes_[0]} << 24) | (std::uint32_t{bytes_[1]} << 16) |
         (std::uint32_t{bytes_[2]} << 8) | std::uint32_t{bytes_[3]};
}

bool Prefix::bit(unsigned i) const { return (bytes_[i / 8] >> (7 - i % 8)) & 1U; }

bool Prefix::contains(const Prefix& other) const {
  if (family_ != other.family_ || other.length_ < length_) return false;
  unsigned full = length_ / 8;
  for (unsigned i = 0; i < full; ++i) {
    if (bytes_[i] != other.bytes_[i]) return false;
  }
  unsigned rest = length_ % 8;
  if (rest == 0) return true;
  auto mask = static_cast<std::uint8_t>(0xFFU << (8 - rest));
  return (bytes_[full] & mask) == (other.bytes_[full] & mask);
}

bool Prefix::overlaps(const Prefix& other) const { return contains(other) || other.contains(*this); }

Prefix Prefix::half(bool upper) const {
  if (length_ >= max_length()) throw std::invalid_argument("cannot split a host prefix");
  Bytes b = bytes_;
  if (upper) b[length_ / 8] |= static_cast<std::uint8_t>(1U << (7 - length_ % 8));
  return Prefix(family_, b, length_ + 1U);
}

std::string Prefix::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  int af = family_ == AddressFamily::IPv4 ? AF_INET : AF_INET6;
  inet_ntop(af, bytes_.data(), buf, sizeof(buf));
  return fmt::format("{}/{}", buf, length_);
}

std::strong_ordering operator<=>(const Prefix& a, const Prefix& b) {
  if (auto c = a.family_ <=> b.family_; c != 0) return c;
  if (auto c = a.bytes_ <=> b.bytes_; c != 0) return c;
  return a.length_ <=> b.length_;
}

Prefix parse_prefix(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) throw ParseError(fmt::format("prefix '{}' lacks '/len'", text));
  std::string addr(text.substr(0, slash));
  std::string_view len_text = text.substr(slash + 1);

  unsigned length = 0;
  auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), length);
  if (ec != std::errc{} || ptr != len_text.data() + len_text.size() || len_text.empty()) {
    throw ParseError(fmt::format("prefix '{}' has a malformed length", text));
  }

  Prefix::Bytes bytes{};
  AddressFamily family;
  if (addr.find(':') != std::string::npos) {
    if (inet_pton(AF_INET6, addr.c_str(), bytes.data()) != 1) {
      throw ParseError(fmt::format("malformed IPv6 address in '{}'", text));
    }
    family = AddressFamily::IPv6;
  } else {
    if (inet_pton(AF_INET, addr.c_str(), bytes.data()) != 1) {
      throw ParseError(fmt::format("malformed IPv4 address in '{}'", text));
    }
    family = AddressFamily::IPv4;
  }
  return Prefix(family, bytes, length);
}

bool is_subprefix(const Prefix& candidate, const Prefix& parent) {
  if (candidate.family() != parent.family()) {
    throw std::invalid_argument("is_subprefix: address family mismatch");
  }
  return candidate.length() > parent.length() && parent.contains(candidate);
}

}  // namespace prefixguard

std::size_t std::hash<prefixguard::Prefix>::operator()(const prefixguard::Prefix& p) const noexcept {
  std::size_t h = static_cast<std::size_t>(p.family()) * 1315423911U + p.length();
  for (auto b : p.bytes()) h = h * 131 + b;
  return h;
}

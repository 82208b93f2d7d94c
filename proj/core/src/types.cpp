#include "prefixguard/types.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "prefixguard/errors.hpp"

namespace prefixguard {

Asn Asn::parse(std::string_view text) {
  if (text.size() > 2 && (text.substr(0, 2) == "AS" || text.substr(0, 2) == "as")) text.remove_prefix(2);
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(fmt::format("malformed AS number '{}'", text));
  }
  if (v == 0) throw ParseError("AS number 0 is reserved");
  return Asn(v);
}

std::string to_string(Asn asn) { return std::to_string(asn.value); }

AsPath::AsPath(std::vector<Asn> hops) : hops_(std::move(hops)) {
  if (hops_.empty()) throw std::invalid_argument("AS path must not be empty");
}

AsPath::AsPath(std::initializer_list<std::uint32_t> hops) {
  hops_.reserve(hops.size());
  for (auto h : hops) hops_.emplace_back(h);
  if (hops_.empty()) throw std::invalid_argument("AS path must not be empty");
}

AsPath AsPath::collapsed(std::vector<Asn> hops) {
  hops.erase(std::unique(hops.begin(), hops.end()), hops.end());
  return AsPath(std::move(hops));
}

bool AsPath::contains(Asn asn) const { return std::find(hops_.begin(), hops_.end(), asn) != hops_.end(); }

AsPath AsPath::prepended(Asn asn) const {
  std::vector<Asn> h;
  h.reserve(hops_.size() + 1);
  h.push_back(asn);
  h.insert(h.end(), hops_.begin(), hops_.end());
  return AsPath(std::move(h));
}

std::string AsPath::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < hops_.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(hops_[i].value);
  }
  return out;
}

bool path_has_loop(const AsPath& path) {
  auto hops = path.hops();
  if (hops.size() <= 8) {
    for (std::size_t i = 0; i < hops.size(); ++i)
      for (std::size_t j = i + 1; j < hops.size(); ++j)
        if (hops[i] == hops[j]) return true;
    return false;
  }
  std::unordered_set<Asn> seen;
  for (auto a : hops)
    if (!seen.insert(a).second) return true;
  return false;
}

std::vector<DirectedLink> links_of(const AsPath& path) {
  if (path_has_loop(path)) throw std::invalid_argument("links_of: path " + path.to_string() + " has a loop");
  std::vector<DirectedLink> links;
  auto hops = path.hops();
  links.reserve(hops.size() - 1);
  for (std::size_t i = 0; i + 1 < hops.size(); ++i) links.push_back({hops[i], hops[i + 1]});
  return links;
}

void BgpUpdate::validate() const {
  if (kind == UpdateKind::Announcement && !path) throw std::invalid_argument("announcement without AS path");
  if (kind == UpdateKind::Withdrawal && path) throw std::invalid_argument("withdrawal carrying an AS path");
}

BgpUpdate BgpUpdate::announcement(std::int64_t ts, Asn monitor, Prefix prefix, AsPath path) {
  return BgpUpdate{ts, monitor, UpdateKind::Announcement, prefix, std::move(path)};
}

BgpUpdate BgpUpdate::withdrawal(std::int64_t ts, Asn monitor, Prefix prefix) {
  return BgpUpdate{ts, monitor, UpdateKind::Withdrawal, prefix, std::nullopt};
}

std::string_view to_string(PrefixDim d) {
  switch (d) {
    case PrefixDim::ExactPrefix: return "exact";
    case PrefixDim::SubPrefix: return "subprefix";
    case PrefixDim::Squatting: return "squatting";
  }
  return "?";
}

std::string_view to_string(DataPlaneDim d) {
  switch (d) {
    case DataPlaneDim::BH: return "BH";
    case DataPlaneDim::IM: return "IM";
    case DataPlaneDim::MM: return "MM";
    case DataPlaneDim::Unknown: return "unknown";
  }
  return "?";
}

std::string to_string(PathDim d) { return d.unaltered ? "Type-U" : fmt::format("Type-{}", d.n); }

PrefixDim parse_prefix_dim(std::string_view text) {
  if (text == "exact") return PrefixDim::ExactPrefix;
  if (text == "subprefix") return PrefixDim::SubPrefix;
  if (text == "squatting") return PrefixDim::Squatting;
  throw ParseError(fmt::format("unknown prefix dimension '{}' (exact, subprefix, squatting)", text));
}

PathDim parse_path_dim(std::string_view text) {
  std::string_view body = text;
  if (body.substr(0, 5) == "Type-") body.remove_prefix(5);
  if (body == "U" || body == "u") return PathDim::type_u();
  unsigned n = 0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), n);
  if (body.empty() || ec != std::errc{} || ptr != body.data() + body.size() || n > 255) {
    throw ParseError(fmt::format("invalid hijack type '{}'", text));
  }
  return PathDim::type(static_cast<std::uint8_t>(n));
}

}  // namespace prefixguard

#include <doctest.h>

#include <random>
#include <stdexcept>

#include "prefixguard/errors.hpp"
#include "prefixguard/prefix.hpp"
#include "prefixguard/types.hpp"

using namespace prefixguard;

TEST_SUITE("core_types") {
  TEST_CASE("parse_prefix accepts canonical prefixes") {
    Prefix p = parse_prefix("10.0.0.0/23");
    CHECK(p.family() == AddressFamily::IPv4);
    CHECK(p.length() == 23);
    CHECK(p.ipv4_address() == 0x0A000000U);
    CHECK(p.to_string() == "10.0.0.0/23");

    Prefix d = parse_prefix("0.0.0.0/0");
    CHECK(d.length() == 0);
    CHECK(d == Prefix{});
    CHECK(d.contains(parse_prefix("192.0.2.0/24")));

    Prefix v6 = parse_prefix("2001:db8::/32");
    CHECK(v6.family() == AddressFamily::IPv6);
    CHECK(v6.to_string() == "2001:db8::/32");
  }

  TEST_CASE("parse_prefix rejects host bits and malformed input") {
    // 10.0.1.0 has bit 23 set, inside the host part of a /23.
    CHECK_THROWS_AS(parse_prefix("10.0.1.0/23"), ParseError);
    CHECK_THROWS_AS(parse_prefix("10.0.0.0/33"), ParseError);
    CHECK_THROWS_AS(parse_prefix("10.0.0/24"), ParseError);
    CHECK_THROWS_AS(parse_prefix("10.0.0.0"), ParseError);
    CHECK_THROWS_AS(parse_prefix("10.0.0.0/"), ParseError);
    CHECK_THROWS_AS(parse_prefix("10.0.0.0/-1"), ParseError);
    CHECK_THROWS_AS(parse_prefix("10.0.0.0/ 8"), ParseError);
    CHECK_THROWS_AS(parse_prefix("2001:db8::1/64"), ParseError);
    CHECK_THROWS_AS(parse_prefix("2001:db8::/129"), ParseError);
    CHECK_THROWS_AS(parse_prefix(""), ParseError);
  }

  TEST_CASE("is_subprefix") {
    CHECK(is_subprefix(parse_prefix("10.0.0.0/24"), parse_prefix("10.0.0.0/23")));
    CHECK(is_subprefix(parse_prefix("10.0.1.0/24"), parse_prefix("10.0.0.0/23")));
    CHECK_FALSE(is_subprefix(parse_prefix("10.0.0.0/23"), parse_prefix("10.0.0.0/23")));
    CHECK_FALSE(is_subprefix(parse_prefix("10.0.2.0/24"), parse_prefix("10.0.0.0/23")));
    CHECK_FALSE(is_subprefix(parse_prefix("10.0.0.0/22"), parse_prefix("10.0.0.0/23")));
    CHECK_THROWS_AS((void)is_subprefix(parse_prefix("::/0"), parse_prefix("0.0.0.0/0")), std::invalid_argument);
  }

  TEST_CASE("is_subprefix agrees with range enumeration") {
    // Independent check: a /24 is inside 10.0.0.0/23 iff its base is in [10.0.0.0, 10.0.1.255].
    Prefix parent = parse_prefix("10.0.0.0/23");
    for (std::uint32_t third = 0; third < 8; ++third) {
      Prefix c = Prefix::ipv4(0x0A000000U | (third << 8), 24);
      std::uint32_t base = c.ipv4_address();
      bool inside = base >= 0x0A000000U && base <= 0x0A0001FFU;
      CHECK(is_subprefix(c, parent) == inside);
    }
  }

  TEST_CASE("prefix containment is a strict partial order") {
    std::mt19937_64 rng(11);
    std::vector<Prefix> ps;
    for (int i = 0; i < 300; ++i) {
      unsigned len = std::uniform_int_distribution<unsigned>(0, 12)(rng) + 8;
      std::uint32_t addr = static_cast<std::uint32_t>(rng()) & 0x0A0FFFFFU;
      addr &= len == 0 ? 0 : ~((len == 32 ? 0U : (0xFFFFFFFFU >> len)));
      ps.push_back(Prefix::ipv4(addr, len));
    }
    for (const auto& a : ps) {
      CHECK_FALSE(is_subprefix(a, a));
      for (const auto& b : ps) {
        if (!is_subprefix(a, b)) continue;
        CHECK_FALSE(is_subprefix(b, a));
        for (const auto& c : ps)
          if (is_subprefix(b, c)) CHECK(is_subprefix(a, c));
      }
    }
  }

  TEST_CASE("prefix render/parse round trip") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
      unsigned len = std::uniform_int_distribution<unsigned>(0, 32)(rng);
      std::uint32_t mask = len == 0 ? 0 : ~((len == 32) ? 0U : (0xFFFFFFFFU >> len));
      Prefix p = Prefix::ipv4(static_cast<std::uint32_t>(rng()) & mask, len);
      CHECK(parse_prefix(p.to_string()) == p);
    }
    for (int i = 0; i < 500; ++i) {
      Prefix::Bytes b{};
      for (auto& x : b) x = static_cast<std::uint8_t>(rng());
      unsigned len = std::uniform_int_distribution<unsigned>(0, 128)(rng);
      for (unsigned bit = len; bit < 128; ++bit) b[bit / 8] &= static_cast<std::uint8_t>(~(0x80U >> (bit % 8)));
      Prefix p(AddressFamily::IPv6, b, len);
      CHECK(parse_prefix(p.to_string()) == p);
    }
  }

  TEST_CASE("prefix halves") {
    Prefix p = parse_prefix("10.0.0.0/22");
    CHECK(p.half(false) == parse_prefix("10.0.0.0/23"));
    CHECK(p.half(true) == parse_prefix("10.0.2.0/23"));
    CHECK(p.overlaps(parse_prefix("10.0.3.0/24")));
    CHECK_FALSE(p.overlaps(parse_prefix("10.0.4.0/24")));
  }

  TEST_CASE("Asn parsing") {
    CHECK(Asn::parse("65000") == Asn(65000));
    CHECK(Asn::parse("AS174") == Asn(174));
    CHECK(Asn::parse("4294967295") == Asn(4294967295U));
    CHECK_THROWS_AS(Asn::parse("0"), ParseError);
    CHECK_THROWS_AS(Asn::parse("4294967296"), ParseError);
    CHECK_THROWS_AS(Asn::parse("-1"), ParseError);
    CHECK_THROWS_AS(Asn::parse("12a"), ParseError);
    CHECK_THROWS_AS(Asn::parse(""), ParseError);
  }

  TEST_CASE("AsPath basics") {
    AsPath p{2, 1};
    CHECK(p.origin() == Asn(1));
    CHECK(p.first() == Asn(2));
    CHECK(p.size() == 2);
    CHECK(p.prepended(Asn(3)) == AsPath{3, 2, 1});
    CHECK_THROWS_AS(AsPath(std::vector<Asn>{}), std::invalid_argument);
    CHECK(AsPath::collapsed({Asn(3), Asn(3), Asn(2), Asn(2), Asn(2), Asn(1)}) == AsPath{3, 2, 1});
  }

  TEST_CASE("path_has_loop") {
    CHECK_FALSE(path_has_loop(AsPath{2, 1}));
    CHECK(path_has_loop(AsPath{1, 2, 1}));
    CHECK_FALSE(path_has_loop(AsPath{7}));
    // Prepending is collapsed before loop detection.
    CHECK_FALSE(path_has_loop(AsPath::collapsed({Asn(5), Asn(5), Asn(4)})));
  }

  TEST_CASE("links_of") {
    auto l = links_of(AsPath{2, 1});
    REQUIRE(l.size() == 1);
    CHECK(l[0] == DirectedLink{Asn(2), Asn(1)});
    auto l4 = links_of(AsPath{5, 4, 3, 1});
    CHECK(l4 == std::vector<DirectedLink>{{Asn(5), Asn(4)}, {Asn(4), Asn(3)}, {Asn(3), Asn(1)}});
    CHECK(links_of(AsPath{7}).empty());
    CHECK_THROWS_AS(links_of(AsPath{1, 2, 1}), std::invalid_argument);
  }

  TEST_CASE("links_of length property") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
      std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
      std::vector<Asn> hops;
      for (std::size_t k = 0; k < n; ++k) hops.emplace_back(static_cast<std::uint32_t>(k * 7 + 1 + (rng() % 5) * 100));
      AsPath p(hops);
      if (path_has_loop(p)) continue;
      CHECK(links_of(p).size() == p.size() - 1);
    }
  }

  TEST_CASE("BgpUpdate invariants") {
    auto a = BgpUpdate::announcement(5, Asn(1), parse_prefix("10.0.0.0/23"), AsPath{2, 1});
    CHECK_NOTHROW(a.validate());
    auto w = BgpUpdate::withdrawal(5, Asn(1), parse_prefix("10.0.0.0/23"));
    CHECK_NOTHROW(w.validate());
    w.path = AsPath{1};
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    a.path.reset();
    CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  }

  TEST_CASE("taxonomy labels") {
    CHECK(to_string(PathDim::type(0)) == "Type-0");
    CHECK(to_string(PathDim::type(3)) == "Type-3");
    CHECK(to_string(PathDim::type_u()) == "Type-U");
    CHECK(parse_path_dim("Type-2") == PathDim::type(2));
    CHECK(parse_path_dim("U") == PathDim::type_u());
    CHECK(parse_path_dim("4") == PathDim::type(4));
    CHECK_THROWS_AS(parse_path_dim("x"), ParseError);
    CHECK(to_string(PrefixDim::SubPrefix) == "subprefix");
    CHECK(parse_prefix_dim("squatting") == PrefixDim::Squatting);
    CHECK_THROWS_AS(parse_prefix_dim("exactly"), ParseError);
    HijackClass c;
    CHECK(c.data_plane_dim == DataPlaneDim::Unknown);
  }
}

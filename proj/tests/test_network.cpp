#include "doctest.h"
#include "support.hpp"

#include "multipath/error.hpp"

using namespace mpt;

TEST_CASE("users_inside on the four-resource circle") {
  const auto net = ring4();
  CHECK(users_inside(net, set_of({1, 2})) == set_of({1}));
  CHECK(users_inside(net, net.all_resources()) == net.all_users());
  CHECK(users_inside(net, 0) == 0);
  CHECK(users_touching(net, set_of({1})) == set_of({1, 4}));
  CHECK_THROWS_AS(users_inside(net, set_of({5})), InputError);
}

TEST_CASE("is_connected") {
  const auto net = ring4();
  CHECK(is_connected(net, net.all_users(), set_of({1, 2, 3})));
  CHECK(is_connected(net, 0, set_of({3})));
  CHECK_FALSE(is_connected(net, 0, set_of({1, 2})));

  const Network split({{"a", Rational(1)}, {"b", Rational(1)}, {"c", Rational(1)}, {"d", Rational(1)}},
                      {{"x", {0, 1}}, {"y", {2, 3}}});
  CHECK_FALSE(is_connected(split, split.all_users(), split.all_resources()));
  CHECK_FALSE(is_connected(split, split.all_users(), set_of({2, 3})));
  CHECK(is_connected(split, set_of({1}), set_of({1, 2})));
}

TEST_CASE("strong connectivity on the reference figures") {
  CHECK(is_strongly_connected(ring4(), set_of({1, 2, 3})));
  const auto f3 = chain3();
  CHECK(is_connected(f3, f3.all_users(), set_of({1, 2, 3})));
  CHECK_FALSE(is_strongly_connected(f3, set_of({1, 2, 3})));
  CHECK(users_inside(f3, set_of({1, 2, 3})) == users_inside(f3, set_of({1, 2})));

  const Network single({{"j", Rational(3)}}, {{"i", {0}}});
  CHECK(is_strongly_connected(single, 1));
  CHECK(enumerate_strongly_connected(single) == std::vector<ResourceMask>{1});
}

TEST_CASE("enumerations on the figures match brute force") {
  for (const auto& net : {ring4(), chain3()}) {
    std::vector<ResourceMask> sc, c;
    for (auto s : subsets(net.all_resources())) {
      if (bf_strong(net, s)) sc.push_back(s);
      if (bf_connected(net, net.all_users(), s)) c.push_back(s);
    }
    std::sort(sc.begin(), sc.end(), canonical_less);
    std::sort(c.begin(), c.end(), canonical_less);
    CHECK(enumerate_strongly_connected(net) == sc);
    CHECK(enumerate_connected(net) == c);
  }
  const auto f3 = chain3();
  const auto sc = enumerate_strongly_connected(f3);
  const auto c = enumerate_connected(f3);
  CHECK(std::find(sc.begin(), sc.end(), set_of({1, 2, 3})) == sc.end());
  CHECK(std::find(c.begin(), c.end(), set_of({1, 2, 3})) != c.end());

  // Circle of four: every proper arc of length 1..3 plus the full set.
  CHECK(enumerate_strongly_connected(ring4()).size() == 4 + 4 + 4 + 1);
}

TEST_CASE("canonical order: cardinality, then index list") {
  CHECK(canonical_less(set_of({3}), set_of({1, 2})));
  CHECK(canonical_less(set_of({1, 3}), set_of({2, 3})));
  CHECK(canonical_less(set_of({1, 2, 4}), set_of({1, 3, 4})));
  CHECK_FALSE(canonical_less(set_of({2}), set_of({2})));
  Gen g(7);
  for (int rep = 0; rep < 50; ++rep) {
    const auto net = random_network(g);
    const auto list = enumerate_connected(net);
    CHECK(std::is_sorted(list.begin(), list.end(), canonical_less));
  }
}

TEST_CASE("enumeration cap") {
  std::vector<Resource> rs;
  std::vector<User> us;
  for (int j = 0; j < 21; ++j) {
    rs.push_back({"r" + std::to_string(j), Rational(1)});
    us.push_back({"u" + std::to_string(j), {static_cast<std::size_t>(j)}});
  }
  const Network big(rs, us);
  try {
    enumerate_strongly_connected(big);
    FAIL("expected SizeError");
  } catch (const SizeError& e) {
    CHECK(e.cap() == kDefaultEnumerationCap);
  }
}

TEST_CASE("network validation") {
  CHECK_THROWS_AS(Network({{"a", Rational(0)}}, {{"u", {0}}}), InputError);
  CHECK_THROWS_AS(Network({{"a", Rational(1)}}, {{"u", {}}}), InputError);
  CHECK_THROWS_AS(Network({{"a", Rational(1)}}, {{"u", {1}}}), InputError);
  CHECK_THROWS_AS(Network({{"a", Rational(1)}, {"a", Rational(1)}}, {{"u", {0}}}), InputError);
  CHECK_THROWS_AS(Network({{"a", Rational(1)}}, {{"u", {0}}, {"u", {0}}}), InputError);
  CHECK_THROWS_AS(Network::from_ids({{"a", Rational(1)}}, {{"u", {"b"}}}), InputError);
}

TEST_CASE("random networks: predicates, enumerations and components") {
  Gen g(20240601);
  for (int rep = 0; rep < 300; ++rep) {
    const auto net = random_network(g, 8, rep < 60 ? 10 : 8);
    const auto sc = enumerate_strongly_connected(net);
    const auto c = enumerate_connected(net);
    std::vector<ResourceMask> want_sc, want_c;
    for (auto s : subsets(net.all_resources())) {
      CHECK(users_inside(net, s) == bf_inside(net, s));
      CHECK(users_touching(net, s) == bf_touching(net, s));
      const bool strong = is_strongly_connected(net, s);
      CHECK(strong == bf_strong(net, s));
      if (strong) CHECK(is_connected(net, net.all_users(), s));
      if (strong) want_sc.push_back(s);
      if (bf_connected(net, net.all_users(), s)) want_c.push_back(s);

      const auto parts = strongly_connected_components(net, s);
      ResourceMask cover = 0;
      UserMask inside = 0;
      for (auto p : parts) {
        CHECK((cover & p) == 0);
        cover |= p;
        CHECK(bf_strong(net, p));
        const auto in = bf_inside(net, p);
        CHECK((inside & in) == 0);
        inside |= in;
      }
      CHECK(cover == s);
      CHECK(inside == bf_inside(net, s));
    }
    std::sort(want_sc.begin(), want_sc.end(), canonical_less);
    std::sort(want_c.begin(), want_c.end(), canonical_less);
    CHECK(sc == want_sc);
    CHECK(c == want_c);
  }
}

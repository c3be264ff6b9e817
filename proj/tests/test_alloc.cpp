#include "doctest.h"
#include "flow_oracle.hpp"
#include "support.hpp"

#include "multipath/alloc.hpp"
#include "multipath/convex_oracle.hpp"
#include "multipath/error.hpp"

using namespace mpt;

TEST_CASE("weighted harmonic mean") {
  const std::vector<Rational> v{Rational(1, 2), Rational(2, 3)}, w{Rational(2), Rational(2)};
  CHECK(weighted_harmonic_mean(v, w) == Rational(4, 7));
  const std::vector<Rational> same{Rational(3, 5), Rational(3, 5), Rational(3, 5)}, w3{Rational(1), Rational(7), Rational(2)};
  CHECK(weighted_harmonic_mean(same, w3) == Rational(3, 5));
  const std::vector<Rational> one{Rational(9, 4)}, w1{Rational(5)};
  CHECK(weighted_harmonic_mean(one, w1) == Rational(9, 4));
  CHECK_THROWS_AS(weighted_harmonic_mean({}, {}), InputError);
  CHECK_THROWS_AS(weighted_harmonic_mean(one, w), InputError);
  const std::vector<Rational> zero{Rational(0)};
  CHECK_THROWS_AS(weighted_harmonic_mean(zero, w1), InputError);
}

TEST_CASE("the full-circle rate is the weighted harmonic mean of the level rates") {
  const auto net = ring4();
  const auto n = counts({4, 1, 1, 1});
  CHECK(cluster_rate(net, n, net.all_users(), net.all_resources()) == ExtRational(Rational(4, 7)));
}

TEST_CASE("cluster_rate") {
  const auto net = ring4();
  const auto n = counts({4, 1, 1, 1});
  CHECK(cluster_rate(net, n, set_of({1}), set_of({1, 2})) == ExtRational(Rational(1, 2)));
  CHECK(cluster_rate(net, n, set_of({2, 3, 4}), set_of({3, 4})) == ExtRational(Rational(2, 3)));
  CHECK(cluster_rate(net, counts({0, 1, 1, 1}), set_of({1}), set_of({1, 2})).is_infinite());
  const Network single({{"j", Rational(7, 3)}}, {{"i", {0}}});
  CHECK(cluster_rate(single, counts({1}), 1, 1) == ExtRational(Rational(7, 3)));
}

TEST_CASE("allocation on the four-resource circle") {
  const auto net = ring4();
  const auto n = counts({4, 1, 1, 1});
  const auto dec = allocate(net, n);
  REQUIRE(dec.levels.size() == 2);
  CHECK(dec.levels[0].users == set_of({1}));
  CHECK(dec.levels[0].resources == set_of({1, 2}));
  CHECK(dec.levels[0].rate == ExtRational(Rational(1, 2)));
  CHECK(dec.levels[1].users == set_of({2, 3, 4}));
  CHECK(dec.levels[1].resources == set_of({3, 4}));
  CHECK(dec.levels[1].rate == ExtRational(Rational(2, 3)));
  CHECK(dec.redundant == 0);
  CHECK(dec.rate == std::vector<Rational>{Rational(1, 2), Rational(2, 3), Rational(2, 3), Rational(2, 3)});
  CHECK(dec.min_level_rate() == Rational(1, 2));
  CHECK(dec.max_level_rate() == Rational(2, 3));

  const auto split = split_rates(net, n, dec);
  CHECK(n[0] * split.value[0][0] + n[0] * split.value[0][1] == 2);
  for (std::size_t j = 0; j < 4; ++j) {
    Rational load = 0;
    for (std::size_t i = 0; i < 4; ++i) load += n[i] * split.value[i][j];
    CHECK(load == 1);
  }
  CHECK(split.value[1][1] == 0);  // user 2 gets nothing from the slower cluster's resource
  CHECK(kkt_check(net, n, dec.rate, split).ok);

  CHECK(min_rate(net, n) == Rational(1, 2));
  CHECK(max_rate(net, n) == Rational(2, 3));
  CHECK(rate_lower_bound(net, n, 1) <= Rational(2, 3));
}

TEST_CASE("uniform counts pool the whole circle") {
  for (int N = 3; N <= 7; ++N) {
    const auto net = circle(N, 2, Rational(3, 2));
    const Counts n(N, Rational(2));
    const auto dec = allocate(net, n);
    REQUIRE(dec.levels.size() == 1);
    CHECK(dec.levels[0].resources == net.all_resources());
    CHECK(dec.levels[0].rate == ExtRational(Rational(3, 2) * N / (2 * N)));
    CHECK(min_rate(net, n) == max_rate(net, n));
  }
}

TEST_CASE("untouched resources end in an infinite level") {
  const Network net({{"a", Rational(1)}, {"b", Rational(2)}, {"c", Rational(1)}}, {{"x", {0, 1}}, {"y", {2}}});
  const auto dec = allocate(net, counts({2, 0}));
  REQUIRE(dec.levels.size() == 2);
  CHECK(dec.levels[0].rate == ExtRational(Rational(3, 2)));
  CHECK(dec.levels[1].users == 0);
  CHECK(dec.levels[1].resources == set_of({3}));
  CHECK(dec.levels[1].rate.is_infinite());
  CHECK(dec.redundant == set_of({3}));
  CHECK(dec.rate[1] == 0);

  const Network spare({{"a", Rational(1)}, {"b", Rational(1)}}, {{"x", {0}}});
  const auto d2 = allocate(spare, counts({1}));
  CHECK(d2.redundant == set_of({2}));
}

TEST_CASE("single user, single resource") {
  const Network net({{"j", Rational(5)}}, {{"i", {0}}});
  const auto dec = allocate(net, counts({2}));
  CHECK(dec.rate[0] == Rational(5, 2));
  CHECK(split_rates(net, counts({2}), dec).value[0][0] == Rational(5, 2));
  CHECK(rate_lower_bound(net, counts({2}), 0) == Rational(5, 2));
}

TEST_CASE("kkt_check rejects perturbed solutions") {
  const auto net = ring4();
  const auto n = counts({4, 1, 1, 1});
  const auto dec = allocate(net, n);
  auto split = split_rates(net, n, dec);
  auto bumped = split;
  bumped.value[2][2] += Rational(1, 100);
  CHECK_FALSE(kkt_check(net, n, dec.rate, bumped).ok);

  // Swap the two cluster rates (and scale splits to match): the faster user 1
  // now holds resources it shares with slower users.
  std::vector<Rational> swapped{Rational(2, 3), Rational(1, 2), Rational(1, 2), Rational(1, 2)};
  auto scaled = split;
  for (std::size_t j = 0; j < 4; ++j) {
    scaled.value[0][j] *= Rational(4, 3);
    for (std::size_t i = 1; i < 4; ++i) scaled.value[i][j] *= Rational(3, 4);
  }
  CHECK_FALSE(kkt_check(net, n, swapped, scaled).ok);
  CHECK_FALSE(optimal_rates(net, n, swapped));
  CHECK(optimal_rates(net, n, dec.rate));
}

TEST_CASE("generalized budgets") {
  const auto net = circle(5, 2);
  const Counts w(5, Rational(1));
  const auto pooled = allocate_generalized(net, w, [](ResourceMask s, UserMask) { return Rational(popcount(s)); });
  REQUIRE(pooled.levels.size() == 1);
  CHECK(pooled.levels[0].rate == ExtRational(Rational(1)));

  // Reduced budgets C(J') - sum rho with rho = 1/2, weights m = 1: x = C - rho.
  const auto reduced = allocate_generalized(
      net, w, [&](ResourceMask s, UserMask inside) { return Rational(popcount(s)) - Rational(popcount(inside), 2); });
  REQUIRE(reduced.levels.size() == 1);
  CHECK(reduced.rate[0] == Rational(1, 2));

  CHECK_THROWS_AS(allocate_generalized(net, w, [](ResourceMask, UserMask) { return Rational(0); }), StabilityError);
}

TEST_CASE("random instances: exact allocation properties") {
  Gen g(2024);
  for (int rep = 0; rep < 300; ++rep) {
    const auto net = random_network(g);
    const auto n = random_counts(g, net, 0.2, rep % 3 == 0);
    const auto dec = allocate(net, n);
    CAPTURE(rep);
    UserMask positive = 0;
    for (std::size_t i = 0; i < n.size(); ++i)
      if (n[i] > 0) positive |= bit(i);

    // Levels partition the positive users and all resources, rates increase.
    UserMask users = 0;
    ResourceMask resources = 0;
    for (std::size_t k = 0; k < dec.levels.size(); ++k) {
      const auto& L = dec.levels[k];
      CHECK((users & L.users) == 0);
      CHECK((resources & L.resources) == 0);
      users |= L.users;
      resources |= L.resources;
      if (k > 0) CHECK(dec.levels[k - 1].rate < L.rate);
      if (L.rate.is_infinite()) {
        CHECK(k + 1 == dec.levels.size());
        CHECK(L.users == 0);
        continue;
      }
      // Saturation of the level: sum n_i x_k over I_k equals C(J_k).
      CHECK(sum_over(n, L.users) * L.rate.value() == capacity_of(net, L.resources));
      ResourceMask cover = 0;
      for (const auto& c : L.clusters) {
        CHECK(bf_connected(net, c.users, c.resources));
        cover |= c.resources;
      }
      CHECK(cover == L.resources);
    }
    CHECK(users == positive);
    CHECK(resources == net.all_resources());

    // Optimality, both through the library check and the independent flow certificate.
    const auto split = split_rates(net, n, dec);
    CHECK(kkt_check(net, n, dec.rate, split).ok);
    CHECK(optimal_rates(net, n, dec.rate));
    CHECK(split_rates(net, n, dec).value == split.value);
    for (std::size_t i = 0; i < n.size(); ++i) {
      Rational s = 0;
      for (std::size_t j = 0; j < net.num_resources(); ++j) s += split.value[i][j];
      if (n[i] > 0) CHECK(s == dec.rate[i]);
    }

    // Extremes by brute force over the original subsets; the maximum looks at
    // the graph of positive-count users only.
    std::optional<Rational> lo, hi;
    for (auto s : subsets(net.all_resources())) {
      const auto in = sum_over(n, bf_inside(net, s));
      if (bf_strong(net, s) && in > 0) {
        const Rational r = capacity_of(net, s) / in;
        if (!lo || r < *lo) lo = r;
      }
      const auto touch = sum_over(n, bf_touching(net, s));
      if (bf_connected(net, positive, s) && touch > 0) {
        const Rational r = capacity_of(net, s) / touch;
        if (!hi || r > *hi) hi = r;
      }
    }
    CHECK(min_rate(net, n) == *lo);
    CHECK(max_rate(net, n) == *hi);
    CHECK(min_rate(net, n) == dec.min_level_rate());
    CHECK(max_rate(net, n) == dec.max_level_rate());
    for (std::size_t i = 0; i < n.size(); ++i)
      if (n[i] > 0) CHECK(rate_lower_bound(net, n, i) <= dec.rate[i]);

    const auto same = allocate_generalized(net, n, [&](ResourceMask s, UserMask) { return capacity_of(net, s); });
    CHECK(same.rate == dec.rate);
    CHECK(same.levels.size() == dec.levels.size());
  }
}

TEST_CASE("first step minimum dominates every strongly connected set") {
  Gen g(99);
  for (int rep = 0; rep < 100; ++rep) {
    const auto net = random_network(g);
    const auto n = random_counts(g, net);
    const auto dec = allocate(net, n);
    const auto x1 = dec.levels.front().rate;
    for (auto s : enumerate_strongly_connected(net)) {
      const auto r = cluster_rate(net, n, users_inside(net, s), s);
      CHECK(x1 <= r);
      if (r == x1) CHECK((s & ~dec.levels.front().resources) == 0);
    }
  }
}

TEST_CASE("count validation") {
  const auto net = ring4();
  CHECK_THROWS_AS(allocate(net, counts({1, 1})), InputError);
  CHECK_THROWS_AS(allocate(net, counts({1, -1, 1, 1})), InputError);
  CHECK_THROWS_AS(min_rate(net, counts({0, 0, 0, 0})), InputError);
  CHECK_THROWS_AS(rate_lower_bound(net, counts({0, 1, 1, 1}), 0), InputError);
}

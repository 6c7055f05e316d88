#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "d2d/access.hpp"
#include "d2d/analytic.hpp"
#include "d2d/errors.hpp"

using namespace d2d;

namespace {

PointSet pts(std::initializer_list<std::pair<double, double>> xy) {
  Eigen::Matrix2Xd c(2, static_cast<Index>(xy.size()));
  Index i = 0;
  for (auto [x, y] : xy) c.col(i++) = Point(x, y);
  return PointSet(Window{}, c);
}

struct Net {
  CellAssociation cells;
  D2DPairSet pairs;
  FadingTable fading;
};

Net random_net(Rng& rng, double lambda_d) {
  const Window w;
  PointSet bs = sample_ppp(1e-6, w, rng);
  while (bs.empty()) bs = sample_ppp(1e-6, w, rng);
  CellAssociation cells = place_uplink_users(bs, rng);
  D2DPairSet pairs = place_d2d_pairs(sample_ppp(lambda_d, w, rng), 50.0, rng);
  const Index total = pairs.size() + cells.size();
  return Net{std::move(cells), std::move(pairs), draw_fading(total, total, rng)};
}

std::vector<Index> all_ids(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

bool subset(const std::vector<Index>& a, const std::vector<Index>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_SUITE("access") {

TEST_CASE("scheme spec validation") {
  CHECK_NOTHROW((SchemeSpec{SchemeKind::proposed_threshold, 100.0, 1.0}.validate()));
  CHECK_THROWS_AS((SchemeSpec{SchemeKind::proposed_threshold, 100.0}.validate()), ParameterError);
  CHECK_THROWS_AS((SchemeSpec{SchemeKind::proposed_threshold, 0.0, 0.0}.validate()), ParameterError);
  CHECK_THROWS_AS((SchemeSpec{SchemeKind::proposed_top_fraction, 0.0, {}, 1.5}.validate()),
                  ParameterError);
  CHECK_THROWS_AS((SchemeSpec{SchemeKind::channel_aware, 0.0}.validate()), ParameterError);
  CHECK_THROWS_AS((SchemeSpec{SchemeKind::channel_aware, 0.0, {}, 0.5, 1e-7}.validate()),
                  ParameterError);
  CHECK_THROWS_AS((SchemeSpec{SchemeKind::no_ac, 10.0}.validate()), ParameterError);
  CHECK_THROWS_AS((SchemeSpec{SchemeKind::guard_zone_only, -1.0}.validate()), ParameterError);
  for (auto k : {SchemeKind::proposed_threshold, SchemeKind::proposed_top_fraction,
                 SchemeKind::channel_aware, SchemeKind::guard_zone_only, SchemeKind::no_ac})
    CHECK(scheme_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(scheme_kind_from_string("aloha"), ParameterError);
}

TEST_CASE("stage 1 guard zones") {
  Rng rng(1);
  const Net net = random_net(rng, 5e-5);
  CHECK(stage1_guard_zone(net.pairs, net.cells.base_stations, 0.0) == all_ids(net.pairs.size()));
  CHECK(stage1_guard_zone(net.pairs, net.cells.base_stations, 5000.0).empty());

  double kept = 0.0, total = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Net n = random_net(rng, 2e-5);
    kept += static_cast<double>(stage1_guard_zone(n.pairs, n.cells.base_stations, 250.0).size());
    total += static_cast<double>(n.pairs.size());
  }
  CHECK(kept / total == doctest::Approx(0.8217).epsilon(0.02));
}

TEST_CASE("estimation phase by hand") {
  const RadioParams params;
  const CellAssociation none{PointSet(Window{}), PointSet(Window{})};

  SUBCASE("single candidate without users is unbounded") {
    const D2DPairSet one{pts({{100, 100}}), pts({{150, 100}}), 50.0};
    const FadingTable f(Eigen::MatrixXd::Ones(1, 1), FadingPhase::estimation);
    const LinkBudget b(one, none, f, params);
    const std::vector<Index> c{0};
    CHECK(std::isinf(estimation_phase(c, b)[0]));
  }

  SUBCASE("two candidates see each other") {
    // Tx0 (0+100,100) -> Rx0 (150,100); Tx1 (400,100) -> Rx1 (450,100).
    const D2DPairSet two{pts({{100, 100}, {400, 100}}), pts({{150, 100}, {450, 100}}), 50.0};
    Eigen::MatrixXd g(2, 2);
    g << 1.0, 0.5, 2.0, 1.5;  // g(tx, rx)
    const FadingTable f(g, FadingPhase::estimation);
    const LinkBudget b(two, none, f, params);
    const std::vector<Index> c{0, 1};
    const auto est = estimation_phase(c, b);
    const double sig0 = 1.0 * std::pow(50.0, -4), int0 = 2.0 * std::pow(250.0, -4);
    const double sig1 = 1.5 * std::pow(50.0, -4), int1 = 0.5 * std::pow(350.0, -4);
    CHECK(est[0] == doctest::Approx(sig0 / int0).epsilon(1e-12));
    CHECK(est[1] == doctest::Approx(sig1 / int1).epsilon(1e-12));
  }
}

TEST_CASE("estimated SIR falls when a candidate is added") {
  Rng rng(2);
  const Net net = random_net(rng, 4e-5);
  const LinkBudget b(net.pairs, net.cells, net.fading, RadioParams{});
  auto ids = all_ids(net.pairs.size());
  const auto full = estimation_phase(ids, b);
  std::vector<Index> fewer(ids.begin(), ids.end() - 1);
  const auto part = estimation_phase(fewer, b);
  for (std::size_t k = 0; k < fewer.size(); ++k) CHECK(part[k] >= full[k]);
}

TEST_CASE("stage 2 threshold") {
  const std::vector<Index> c{0, 3, 5, 7};
  const std::vector<double> e{0.5, 2.0, 1.0, 10.0};
  CHECK(stage2_threshold(c, e, 1e-300).active_ids == c);
  CHECK(stage2_threshold(c, e, 1e300).active_ids.empty());
  CHECK(stage2_threshold(c, e, 1.0).active_ids == std::vector<Index>{3, 7});
  CHECK_THROWS_AS(stage2_threshold(c, e, 0.0), ParameterError);
  CHECK_THROWS_AS(stage2_threshold(c, {1.0}, 1.0), ParameterError);
  const ActiveSet a = stage2_threshold(c, e, 1.0);
  CHECK(a.estimated(5) == 1.0);
  CHECK(a.is_active(7));
  CHECK_FALSE(a.is_active(5));
  CHECK_THROWS_AS(a.estimated(4), ParameterError);
}

TEST_CASE("stage 2 top fraction against a sort oracle") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Index> c(10);
    std::vector<double> e(10);
    for (Index k = 0; k < 10; ++k) {
      c[k] = 3 * k + trial % 3;
      e[k] = u(rng);
    }
    const auto got = stage2_top_fraction(c, e, 0.5).active_ids;
    std::vector<std::pair<double, Index>> ranked;
    for (std::size_t k = 0; k < 10; ++k) ranked.emplace_back(-e[k], c[k]);
    std::sort(ranked.begin(), ranked.end());
    std::vector<Index> want;
    for (int k = 0; k < 5; ++k) want.push_back(ranked[k].second);
    std::sort(want.begin(), want.end());
    CHECK(got == want);
  }
  const std::vector<Index> c{1, 2, 3, 4};
  const std::vector<double> tie{5.0, 5.0, 5.0, 1.0};
  CHECK(stage2_top_fraction(c, tie, 0.5).active_ids == std::vector<Index>{1, 2});
  CHECK(stage2_top_fraction(c, tie, 1.0).active_ids == c);
  CHECK(stage2_top_fraction(c, tie, 0.0).active_ids.empty());
  CHECK(stage2_top_fraction(c, tie, 0.26).active_ids.size() == 2);  // ceil(1.04)
  CHECK(stage2_top_fraction(c, tie, 0.75).active_ids.size() == 3);
  CHECK_THROWS_AS(stage2_top_fraction(c, tie, 1.01), ParameterError);
}

TEST_CASE("channel-aware activation") {
  CHECK(gain_threshold_from_fraction(0.5, 50.0, 4.0) ==
        doctest::Approx(std::log(2.0) / std::pow(50.0, 4)).epsilon(1e-12));
  CHECK(gain_threshold_from_fraction(0.5, 50.0, 4.0) == doctest::Approx(1.109e-7).epsilon(1e-3));
  CHECK(std::isinf(gain_threshold_from_fraction(0.0, 50.0, 4.0)));
  CHECK_THROWS_AS(gain_threshold_from_fraction(-0.1, 50.0, 4.0), ParameterError);

  Rng rng(4);
  const Index n = 2000;
  const auto ids = all_ids(n);
  std::vector<double> x;
  for (int rep = 0; rep < 10; ++rep) {
    const FadingTable table = draw_fading(n, n, rng);
    CHECK(channel_aware_activate(ids, table, 50.0, 4.0, 0.0, std::nullopt).active_ids.size() ==
          static_cast<std::size_t>(n));
    const ActiveSet half = channel_aware_activate(ids, table, 50.0, 4.0, std::nullopt, 0.5);
    for (Index i = 0; i < n; ++i) x.push_back(half.is_active(i) ? 1.0 : 0.0);

    // Only the own-link gain matters: changing off-diagonal entries changes nothing.
    Eigen::MatrixXd noisy = table.gains();
    noisy(0, 1) = 100.0;
    noisy(5, 3) = 0.0;
    const FadingTable t2(noisy, FadingPhase::estimation);
    CHECK(channel_aware_activate(ids, t2, 50.0, 4.0, std::nullopt, 0.5).active_ids ==
          half.active_ids);
  }
  const FadingTable small = draw_fading(4, 4, rng);
  CHECK_THROWS_AS(channel_aware_activate(all_ids(4), small, 50.0, 4.0, std::nullopt, std::nullopt),
                  ParameterError);
  CHECK_THROWS_AS(channel_aware_activate(all_ids(4), small, 50.0, 4.0, std::nullopt, 2.0),
                  ParameterError);

  const double total = static_cast<double>(x.size());
  const double frac = std::accumulate(x.begin(), x.end(), 0.0) / total;
  CHECK(std::abs(frac - 0.5) <= 3.0 * std::sqrt(0.25 / total));

  // Decisions of neighbouring links are uncorrelated.
  double cov = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) cov += (x[i] - frac) * (x[i + 1] - frac);
  const double corr = cov / (total - 1) / (frac * (1 - frac));
  CHECK(std::abs(corr) <= 3.0 / std::sqrt(total));
}

TEST_CASE("apply_scheme compositions") {
  Rng rng(5);
  const RadioParams params;
  for (int k = 0; k < 10; ++k) {
    const Net net = random_net(rng, 4e-5);
    const LinkBudget b(net.pairs, net.cells, net.fading, params);
    auto run = [&](const SchemeSpec& s) {
      return apply_scheme(s, net.pairs, net.cells, b, net.fading, params);
    };
    const ActiveSet none = run({SchemeKind::no_ac});
    CHECK(none.active_ids == all_ids(net.pairs.size()));
    CHECK(run({SchemeKind::guard_zone_only, 0.0}).active_ids == none.active_ids);
    const ActiveSet gz = run({SchemeKind::guard_zone_only, 200.0});
    CHECK(run({SchemeKind::proposed_top_fraction, 200.0, {}, 1.0}).active_ids == gz.active_ids);

    for (const SchemeSpec& s :
         {SchemeSpec{SchemeKind::proposed_threshold, 150.0, 2.0},
          SchemeSpec{SchemeKind::proposed_top_fraction, 150.0, {}, 0.4},
          SchemeSpec{SchemeKind::channel_aware, 150.0, {}, 0.6}}) {
      const ActiveSet a = run(s);
      CHECK(subset(a.active_ids, a.candidate_ids));
      CHECK(subset(a.candidate_ids, all_ids(net.pairs.size())));
      CHECK(a.candidate_ids == stage1_guard_zone(net.pairs, net.cells.base_stations, 150.0));
    }
  }
}

TEST_CASE("threshold activation fraction matches the analytic access probability") {
  // Delta = 0: the estimation phase sees every potential link, so the fraction
  // above G is the plain success probability at G.
  Rng rng(6);
  SystemParams sp;
  sp.lambda_d = 6e-5;
  const RadioParams params;
  for (double g_db : {-3.0, 0.0, 3.0}) {
    const double G = db_to_linear(g_db);
    double active = 0.0, cand = 0.0;
    for (int k = 0; k < 300; ++k) {
      const Net net = random_net(rng, sp.lambda_d);
      const LinkBudget b(net.pairs, net.cells, net.fading, params);
      const ActiveSet a = apply_scheme({SchemeKind::proposed_threshold, 0.0, G}, net.pairs,
                                       net.cells, b, net.fading, params);
      active += static_cast<double>(a.active_ids.size());
      cand += static_cast<double>(a.candidate_ids.size());
    }
    CHECK(std::abs(active / cand - access_prob_from_threshold(G, sp)) <= 0.02);
  }
}

}

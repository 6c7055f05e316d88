#include <doctest.h>

#include <cmath>
#include <numeric>

#include "d2d/errors.hpp"
#include "d2d/radio.hpp"

using namespace d2d;

namespace {

PointSet pts(std::initializer_list<std::pair<double, double>> xy) {
  Eigen::Matrix2Xd c(2, static_cast<Index>(xy.size()));
  Index i = 0;
  for (auto [x, y] : xy) c.col(i++) = Point(x, y);
  return PointSet(Window{}, c);
}

FadingTable unit_fading(Index n) {
  return FadingTable(Eigen::MatrixXd::Ones(n, n), FadingPhase::estimation);
}

struct Net {
  CellAssociation cells;
  D2DPairSet pairs;
  FadingTable fading;
};

Net random_net(Rng& rng, double lambda_d = 3e-5) {
  const Window w;
  PointSet bs = sample_ppp(1e-6, w, rng);
  while (bs.empty()) bs = sample_ppp(1e-6, w, rng);
  CellAssociation cells = place_uplink_users(bs, rng);
  D2DPairSet pairs = place_d2d_pairs(sample_ppp(lambda_d, w, rng), 50.0, rng);
  const Index total = pairs.size() + cells.size();
  return Net{std::move(cells), std::move(pairs), draw_fading(total, total, rng)};
}

std::vector<Index> iota(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

}  // namespace

TEST_SUITE("radio") {

TEST_CASE("pathloss") {
  CHECK(pathloss(1.0, 3.3) == 1.0);
  CHECK(pathloss(50.0, 4.0) == doctest::Approx(1.6e-7).epsilon(1e-12));
  CHECK_THROWS_AS(pathloss(0.0, 4.0), SingularGeometryError);
}

TEST_CASE("radio params") {
  CHECK_NOTHROW(RadioParams{}.validate());
  CHECK_THROWS_AS((RadioParams{2.0, 10, 0.1, 0}.validate()), ParameterError);
  CHECK_THROWS_AS((RadioParams{4.0, 10, 0.1, 1e-9}.validate()), ParameterError);
}

TEST_CASE("draw_fading statistics") {
  Rng rng(21);
  CHECK(draw_fading(0, 0, rng).empty());
  const FadingTable f = draw_fading(1000, 1000, rng, FadingPhase::data);
  CHECK(f.phase() == FadingPhase::data);
  CHECK(f.retagged(FadingPhase::estimation).gains() == f.gains());
  const double n = 1e6;
  CHECK((f.gains().array() >= 0.0).all());
  CHECK(std::abs(f.gains().mean() - 1.0) <= 3.0 / std::sqrt(n));
  const double above = (f.gains().array() > 1.0).cast<double>().mean();
  const double p = std::exp(-1.0);
  CHECK(std::abs(above - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("D2D SIR with one uplink interferer at 500 m is 100") {
  // D2D tx at (1000,1000), rx at (1050,1000); user at 500 m from the rx.
  const CellAssociation cells{pts({{2500, 2500}}), pts({{1550, 1000}})};
  const D2DPairSet pairs{pts({{1000, 1000}}), pts({{1050, 1000}}), 50.0};
  const std::vector<Index> active{0};
  const SirSample s = sir_d2d(0, active, cells, pairs, unit_fading(2), RadioParams{});
  CHECK(s.sir == doctest::Approx(100.0).epsilon(1e-12));
  const LinkBudget budget(pairs, cells, unit_fading(2), RadioParams{});
  CHECK(budget.sir_d2d(0, active).sir == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("cellular SIR with one D2D interferer at 250 m is 6.25") {
  const CellAssociation cells{pts({{1000, 1000}}), pts({{1500, 1000}})};
  const D2DPairSet pairs{pts({{1000, 1250}}), pts({{1000, 1300}}), 50.0};
  const std::vector<Index> active{0};
  CHECK(sir_cellular(0, active, cells, pairs, unit_fading(2), RadioParams{}).sir ==
        doctest::Approx(6.25).epsilon(1e-12));
  const LinkBudget budget(pairs, cells, unit_fading(2), RadioParams{});
  CHECK(budget.sir_cellular(0, active).sir == doctest::Approx(6.25).epsilon(1e-12));

  const std::vector<Index> none;
  const SirSample alone = budget.sir_cellular(0, none);
  CHECK(std::isinf(alone.sir));
  CHECK(alone.unbounded());
}

TEST_CASE("D2D link without interferers is unbounded") {
  const CellAssociation cells{PointSet(Window{}), PointSet(Window{})};
  const D2DPairSet pairs{pts({{10, 10}}), pts({{60, 10}}), 50.0};
  const std::vector<Index> active{0};
  const SirSample s = sir_d2d(0, active, cells, pairs, unit_fading(1), RadioParams{});
  CHECK(s.unbounded());
  CHECK(std::isinf(s.sir));
}

TEST_CASE("coincident transmitter and receiver are rejected") {
  const CellAssociation cells{pts({{1000, 1000}}), pts({{1500, 1000}})};
  const D2DPairSet pairs{pts({{1000, 1000}}), pts({{1050, 1000}}), 50.0};
  CHECK_THROWS_AS(LinkBudget(pairs, cells, unit_fading(2), RadioParams{}), SingularGeometryError);
}

TEST_CASE("link budget agrees with direct geometry on random networks") {
  Rng rng(31);
  for (int k = 0; k < 20; ++k) {
    const Net net = random_net(rng);
    for (double alpha : {4.0, 3.5}) {
      RadioParams params;
      params.alpha = alpha;
      const LinkBudget budget(net.pairs, net.cells, net.fading, params);
      std::vector<Index> active;
      for (Index i = 0; i < net.pairs.size(); i += 2) active.push_back(i);
      for (Index i : active) {
        const double direct = sir_d2d(i, active, net.cells, net.pairs, net.fading, params).sir;
        CHECK(budget.sir_d2d(i, active).sir == doctest::Approx(direct).epsilon(1e-12));
      }
      for (Index b = 0; b < net.cells.size(); ++b) {
        const double direct = sir_cellular(b, active, net.cells, net.pairs, net.fading, params).sir;
        CHECK(budget.sir_cellular(b, active).sir == doctest::Approx(direct).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("SIR invariant under joint power scaling") {
  Rng rng(41);
  const Net net = random_net(rng);
  const auto all = iota(net.pairs.size());
  const LinkBudget base(net.pairs, net.cells, net.fading, RadioParams{});
  const LinkBudget doubled(net.pairs, net.cells, net.fading, RadioParams{4.0, 20.0, 0.2, 0.0});
  for (Index i : all)
    CHECK(doubled.sir_d2d(i, all).sir == doctest::Approx(base.sir_d2d(i, all).sir).epsilon(1e-12));
  for (Index b = 0; b < net.cells.size(); ++b)
    CHECK(doubled.sir_cellular(b, all).sir ==
          doctest::Approx(base.sir_cellular(b, all).sir).epsilon(1e-12));
}

TEST_CASE("removing an interferer never lowers SIR") {
  Rng rng(51);
  const Net net = random_net(rng);
  const LinkBudget budget(net.pairs, net.cells, net.fading, RadioParams{});
  auto active = iota(net.pairs.size());
  REQUIRE(active.size() > 3);
  auto fewer = active;
  fewer.erase(fewer.begin() + 1);
  for (Index i : fewer) CHECK(budget.sir_d2d(i, fewer).sir >= budget.sir_d2d(i, active).sir);
  for (Index b = 0; b < net.cells.size(); ++b) {
    const auto less = budget.sir_cellular(b, fewer);
    const auto more = budget.sir_cellular(b, active);
    CHECK(less.interference_mw < more.interference_mw);
    CHECK(less.sir >= more.sir);
  }
}

}

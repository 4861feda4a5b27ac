#include <doctest.h>

#include <cmath>

#include "mfc/meanfield.hpp"

using namespace mfc;

namespace {

MeanFieldAction constant_rule(const GridSpec &grid, const Vec2 &theta,
                              Scalar sigma) {
  MeanFieldAction h;
  h.theta = Eigen::Matrix2Xd::Zero(2, grid.total_bins());
  h.sigma = Eigen::Matrix2Xd::Constant(2, grid.total_bins(), sigma);
  h.theta.colwise() = theta;
  return h;
}

} // namespace

TEST_SUITE("meanfield") {

TEST_CASE("bin_index corners, center and edges") {
  GridSpec grid;
  CHECK(bin_index(Vec2(-2, -2), grid) == 0);
  CHECK(bin_index(Vec2(2, -2), grid) == 5);
  CHECK(bin_index(Vec2(-2, 2), grid) == 30);
  CHECK(bin_index(Vec2(2, 2), grid) == 35);
  // interior edge point goes to the higher cell: (0,0) is the lower-left
  // corner of cell (row 3, col 3)
  CHECK(bin_index(Vec2(0, 0), grid) == 21);
  CHECK_THROWS_AS(bin_index(Vec2(2.0001, 0), grid), std::invalid_argument);
}

TEST_CASE("bin_index partitions the box") {
  GridSpec grid;
  rng::Stream s(rng::Key{21});
  for (int i = 0; i < 2000; ++i) {
    const Vec2 x(s.uniform(-2, 2), s.uniform(-2, 2));
    const int b = bin_index(x, grid);
    REQUIRE(b >= 0);
    REQUIRE(b < 36);
    // the point lies inside the closed cell box
    const Vec2 c = grid.bin_center(b);
    CHECK(std::abs(x(0) - c(0)) <= grid.bin_width() / 2 + 1e-12);
    CHECK(std::abs(x(1) - c(1)) <= grid.bin_width() / 2 + 1e-12);
  }
}

TEST_CASE("empirical_histogram point mass and corners") {
  GridSpec grid;

  SUBCASE("all agents in one cell") {
    Positions p = Positions::Zero(2, 7);
    p.row(0).setConstant(0.1);
    p.row(1).setConstant(0.1);
    const Histogram h = empirical_histogram(p, grid);
    CHECK(h(21) == doctest::Approx(1.0));
    CHECK(h.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("one agent per box corner") {
    Positions p(2, 4);
    p.col(0) = Vec2(-2, -2);
    p.col(1) = Vec2(2, -2);
    p.col(2) = Vec2(-2, 2);
    p.col(3) = Vec2(2, 2);
    const Histogram h = empirical_histogram(p, grid);
    CHECK(h(0) == doctest::Approx(0.25));
    CHECK(h(5) == doctest::Approx(0.25));
    CHECK(h(30) == doctest::Approx(0.25));
    CHECK(h(35) == doctest::Approx(0.25));
  }

  SUBCASE("uniform mass spreads evenly as N grows") {
    SpaceConfig space;
    const SwarmState big = sample_initial(20000, space, 0.0, rng::Key{22});
    const Histogram h = empirical_histogram(big, grid);
    CHECK(h.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((h.array() - 1.0 / 36).abs().maxCoeff() < 0.01);
  }

  SUBCASE("empty swarm throws") {
    CHECK_THROWS_AS(empirical_histogram(Positions(2, 0), grid),
                    std::invalid_argument);
  }
}

TEST_CASE("sample_decision_rule clips and matches its Gaussian") {
  GridSpec grid;
  SpaceConfig space;

  SUBCASE("tiny sigma tracks the mean") {
    const MeanFieldAction h = constant_rule(grid, Vec2(0.1, 0.0), 1e-9);
    rng::Stream s(rng::Key{23});
    const Vec2 u = sample_decision_rule(h, Vec2(0.5, 0.5), grid, space, s);
    CHECK((u - Vec2(0.1, 0.0)).norm() < 1e-6);
  }

  SUBCASE("output always inside the action disc") {
    const MeanFieldAction h = constant_rule(grid, Vec2(0.2, 0.2), 0.25);
    rng::Stream s(rng::Key{24});
    for (int i = 0; i < 2000; ++i) {
      const Vec2 u = sample_decision_rule(h, Vec2(0, 0), grid, space, s);
      CHECK(u.norm() <= 0.2 + 1e-15);
    }
  }

  SUBCASE("sample mean matches the rule mean away from the boundary") {
    const MeanFieldAction h = constant_rule(grid, Vec2(0.05, 0.0), 0.01);
    rng::Stream s(rng::Key{25});
    Vec2 acc = Vec2::Zero();
    const int n = 100000;
    for (int i = 0; i < n; ++i)
      acc += sample_decision_rule(h, Vec2(0, 0), grid, space, s);
    acc /= n;
    CHECK((acc - Vec2(0.05, 0.0)).norm() < 1e-3);
  }
}

TEST_CASE("mf_transition moves mass as the rule dictates") {
  GridSpec grid;
  SpaceConfig space;

  SUBCASE("zero-mean rule at bin centers keeps the histogram") {
    // particles at cell centers stay in their cells under a tiny sigma
    Positions p(2, 36);
    for (int b = 0; b < 36; ++b)
      p.col(b) = grid.bin_center(b);
    SwarmState st{p, 0};
    const Histogram before = empirical_histogram(st, grid);
    const MeanFieldAction h = constant_rule(grid, Vec2(0, 0), 1e-6);
    const SwarmState next = mf_transition(st, h, space, grid, rng::Key{26});
    CHECK((empirical_histogram(next, grid) - before).cwiseAbs().maxCoeff() ==
          0.0);
  }

  SUBCASE("point mass shifted right lands one cell over after two steps") {
    Positions p(2, 50);
    p.colwise() = grid.bin_center(7); // row 1, col 1
    SwarmState st{p, 0};
    const MeanFieldAction h = constant_rule(grid, Vec2(0.2, 0.0), 1e-9);
    SwarmState next = mf_transition(st, h, space, grid, rng::Key{27});
    next = mf_transition(next, h, space, grid, rng::Key{28});
    const Histogram after = empirical_histogram(next, grid);
    CHECK(after(8) == doctest::Approx(1.0)); // moved 0.4 right, width 2/3
    CHECK(next.time_index == 2);
  }

  SUBCASE("larger ensembles track the transition more tightly") {
    const MeanFieldAction h = constant_rule(grid, Vec2(0.05, 0.05), 0.1);
    SpaceConfig sp;
    auto l1_gap = [&](int n, int ref_n) {
      const SwarmState a = sample_initial(n, sp, 0.0, rng::Key{29});
      const SwarmState ra = sample_initial(ref_n, sp, 0.0, rng::Key{30});
      const SwarmState a2 = mf_transition(a, h, sp, grid, rng::Key{31});
      const SwarmState r2 = mf_transition(ra, h, sp, grid, rng::Key{32});
      return (empirical_histogram(a2, grid) - empirical_histogram(r2, grid))
          .cwiseAbs()
          .sum();
    };
    const Scalar gap_small = l1_gap(300, 100000);
    const Scalar gap_large = l1_gap(10000, 100000);
    CHECK(gap_large < gap_small);
  }
}

TEST_CASE("open-loop sequences round-trip through JSON") {
  GridSpec grid;
  OpenLoopSequence seq;
  seq.grid = grid;
  seq.initial_histogram = Histogram::Constant(36, 1.0 / 36);
  rng::Stream s(rng::Key{33});
  for (int t = 0; t < 3; ++t) {
    MeanFieldAction a;
    a.theta.resize(2, 36);
    a.sigma.resize(2, 36);
    for (int b = 0; b < 36; ++b) {
      a.theta.col(b) = Vec2(s.uniform(-0.2, 0.2), s.uniform(-0.2, 0.2));
      a.sigma.col(b) = Vec2(s.uniform(0.001, 0.25), s.uniform(0.001, 0.25));
    }
    seq.actions.push_back(a);
  }

  const OpenLoopSequence back = OpenLoopSequence::from_json(seq.to_json());
  CHECK(back.horizon() == 3);
  CHECK(back.grid.bins_per_axis == 6);
  CHECK((back.initial_histogram - seq.initial_histogram).cwiseAbs().maxCoeff() ==
        0.0);
  for (int t = 0; t < 3; ++t) {
    CHECK(back.actions[t].theta == seq.actions[t].theta);
    CHECK(back.actions[t].sigma == seq.actions[t].sigma);
  }
}

} // TEST_SUITE

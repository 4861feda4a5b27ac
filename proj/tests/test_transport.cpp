#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mfc/transport.hpp"

using namespace mfc;

namespace {

// Exhaustive assignment oracle for uniform weights with n = m: the optimal
// coupling of two uniform discrete measures is a permutation.
Scalar brute_force_uniform(const Positions &a, const Positions &b) {
  const int n = static_cast<int>(a.cols());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  do {
    Scalar cost = 0.0;
    for (int i = 0; i < n; ++i)
      cost += (a.col(i) - b.col(perm[i])).norm();
    best = std::min(best, cost / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Independent transportation oracle: successive shortest paths with node
// potentials on the dense bipartite residual graph. Slow but simple.
Scalar ssp_transport(const MatX &cost, VecX supply, VecX demand) {
  const int n = static_cast<int>(supply.size());
  const int m = static_cast<int>(demand.size());
  demand *= supply.sum() / demand.sum();
  MatX flow = MatX::Zero(n, m);
  VecX pot = VecX::Zero(n + m);
  const Scalar eps = 1e-13;

  while (true) {
    Scalar remaining = 0.0;
    for (int i = 0; i < n; ++i)
      remaining += supply(i);
    if (remaining <= eps)
      break;

    // multi-source Dijkstra over reduced costs
    const int nodes = n + m;
    VecX dist = VecX::Constant(nodes, std::numeric_limits<Scalar>::infinity());
    std::vector<int> prev(nodes, -1);
    std::vector<char> done(nodes, 0);
    for (int i = 0; i < n; ++i)
      if (supply(i) > eps)
        dist(i) = 0.0;

    for (int round = 0; round < nodes; ++round) {
      int u = -1;
      for (int v = 0; v < nodes; ++v)
        if (!done[v] && (u < 0 || dist(v) < dist(u)))
          u = v;
      if (u < 0 || !std::isfinite(dist(u)))
        break;
      done[u] = 1;
      if (u < n) {
        for (int j = 0; j < m; ++j) {
          const Scalar rc = cost(u, j) + pot(u) - pot(n + j);
          if (dist(u) + rc < dist(n + j) - 1e-15) {
            dist(n + j) = dist(u) + rc;
            prev[n + j] = u;
          }
        }
      } else {
        const int j = u - n;
        for (int i = 0; i < n; ++i) {
          if (flow(i, j) <= eps)
            continue;
          const Scalar rc = -cost(i, j) + pot(n + j) - pot(i);
          if (dist(u) + rc < dist(i) - 1e-15) {
            dist(i) = dist(u) + rc;
            prev[i] = u;
          }
        }
      }
    }

    int target = -1;
    for (int j = 0; j < m; ++j)
      if (demand(j) > eps && std::isfinite(dist(n + j)) &&
          (target < 0 || dist(n + j) < dist(n + target)))
        target = j;
    REQUIRE(target >= 0);

    // bottleneck along the path
    Scalar delta = demand(target);
    for (int v = n + target; prev[v] >= 0; v = prev[v]) {
      const int u = prev[v];
      if (v >= n) {
        // forward arc u -> v consumes supply at the path start only
      } else {
        delta = std::min(delta, flow(v, u - n));
      }
    }
    int head = n + target;
    while (prev[head] >= 0)
      head = prev[head];
    delta = std::min(delta, supply(head));

    for (int v = n + target; prev[v] >= 0; v = prev[v]) {
      const int u = prev[v];
      if (v >= n)
        flow(u, v - n) += delta;
      else
        flow(v, u - n) -= delta;
    }
    supply(head) -= delta;
    demand(target) -= delta;

    for (int v = 0; v < nodes; ++v)
      if (std::isfinite(dist(v)))
        pot(v) += dist(v);
  }
  return (flow.array() * cost.array()).sum();
}

PointCloud random_cloud(int n, rng::Stream &s, bool uniform_weights) {
  PointCloud c;
  c.points.resize(2, n);
  for (int i = 0; i < n; ++i)
    c.points.col(i) = Vec2(s.uniform(-2, 2), s.uniform(-2, 2));
  if (uniform_weights) {
    c.weights = VecX::Constant(n, 1.0 / n);
  } else {
    c.weights.resize(n);
    for (int i = 0; i < n; ++i)
      c.weights(i) = s.uniform(0.01, 1.0);
    c.weights /= c.weights.sum();
  }
  return c;
}

MatX euclidean_cost(const PointCloud &a, const PointCloud &b) {
  MatX c(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j)
      c(i, j) = (a.points.col(i) - b.points.col(j)).norm();
  return c;
}

} // namespace

TEST_SUITE("transport") {

TEST_CASE("trivial instances") {
  PointCloud a, b;
  a.points.resize(2, 1);
  a.points.col(0) = Vec2(0, 0);
  a.weights = VecX::Constant(1, 1.0);
  b.points.resize(2, 1);
  b.points.col(0) = Vec2(3, 4);
  b.weights = VecX::Constant(1, 1.0);
  CHECK(wasserstein1(a, b) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(wasserstein1(a, a) == doctest::Approx(0.0).epsilon(1e-12));

  SUBCASE("identical multi-point clouds") {
    rng::Stream s(rng::Key{40});
    const PointCloud c = random_cloud(25, s, false);
    CHECK(wasserstein1(c, c) <= 1e-12);
  }
}

TEST_CASE("input validation") {
  PointCloud a;
  a.points.resize(2, 2);
  a.points.setZero();
  a.weights = VecX::Constant(2, 0.6); // sums to 1.2
  PointCloud b = a;
  b.weights = VecX::Constant(2, 0.5);
  CHECK_THROWS_AS(wasserstein1(a, b), std::invalid_argument);
  a.weights = VecX::Constant(2, 0.5);
  a.weights(0) = -0.1;
  a.weights(1) = 1.1;
  CHECK_THROWS_AS(wasserstein1(a, b), std::invalid_argument);
  PointCloud empty;
  empty.points.resize(2, 0);
  empty.weights.resize(0);
  CHECK_THROWS_AS(wasserstein1(empty, b), std::invalid_argument);
}

TEST_CASE("matches the exhaustive assignment oracle") {
  rng::Stream s(rng::Key{41});
  for (int inst = 0; inst < 20; ++inst) {
    const int n = 2 + static_cast<int>(s.uniform01() * 7); // 2..8
    const PointCloud a = random_cloud(n, s, true);
    const PointCloud b = random_cloud(n, s, true);
    const Scalar exact = brute_force_uniform(a.points, b.points);
    const Scalar solved = wasserstein1(a, b);
    CHECK(std::abs(solved - exact) < 1e-9);
  }
}

TEST_CASE("matches the successive-shortest-path oracle on weighted clouds") {
  rng::Stream s(rng::Key{42});
  for (int inst = 0; inst < 20; ++inst) {
    const int n = 1 + static_cast<int>(s.uniform01() * 40);
    const int m = 1 + static_cast<int>(s.uniform01() * 40);
    const PointCloud a = random_cloud(n, s, false);
    const PointCloud b = random_cloud(m, s, false);
    const Scalar viassp = ssp_transport(euclidean_cost(a, b), a.weights,
                                        b.weights);
    const Scalar solved = wasserstein1(a, b);
    CHECK(std::abs(solved - viassp) < 1e-9);
  }
}

TEST_CASE("solver reaches dual feasibility") {
  rng::Stream s(rng::Key{43});
  const PointCloud a = random_cloud(80, s, false);
  const PointCloud b = random_cloud(60, s, false);
  const auto res = detail::solve_transport(euclidean_cost(a, b), a.weights,
                                           b.weights);
  CHECK(res.max_dual_violation <= 1e-9);
  CHECK(res.cost >= 0.0);
}

TEST_CASE("metric properties on random instances") {
  rng::Stream s(rng::Key{44});

  SUBCASE("symmetry") {
    for (int inst = 0; inst < 10; ++inst) {
      const PointCloud a = random_cloud(15, s, false);
      const PointCloud b = random_cloud(12, s, false);
      CHECK(std::abs(wasserstein1(a, b) - wasserstein1(b, a)) < 1e-9);
    }
  }

  SUBCASE("triangle inequality") {
    for (int inst = 0; inst < 10; ++inst) {
      const PointCloud a = random_cloud(10, s, false);
      const PointCloud b = random_cloud(11, s, false);
      const PointCloud c = random_cloud(12, s, false);
      CHECK(wasserstein1(a, c) <=
            wasserstein1(a, b) + wasserstein1(b, c) + 1e-9);
    }
  }

  SUBCASE("translation invariance") {
    for (int inst = 0; inst < 10; ++inst) {
      PointCloud a = random_cloud(14, s, false);
      PointCloud b = random_cloud(9, s, false);
      const Scalar before = wasserstein1(a, b);
      const Vec2 shift(s.uniform(-1, 1), s.uniform(-1, 1));
      a.points.colwise() += shift;
      b.points.colwise() += shift;
      CHECK(std::abs(wasserstein1(a, b) - before) < 1e-9);
    }
  }

  SUBCASE("singleton shift changes the distance by the shift norm") {
    PointCloud a, b;
    a.points.resize(2, 1);
    a.points.col(0) = Vec2(0.3, -0.4);
    a.weights = VecX::Constant(1, 1.0);
    b = a;
    const Vec2 v(0.6, 0.8);
    b.points.col(0) += v;
    CHECK(wasserstein1(a, b) == doctest::Approx(v.norm()).epsilon(1e-12));
  }
}

TEST_CASE("gaussian mixture sampling") {
  const MixtureSpec paper_mix = {
      MixtureComponent{0.5, Vec2(1, 0), Vec2(0.05, 0.05)},
      MixtureComponent{0.5, Vec2(-1, 0), Vec2(0.05, 0.05)}};

  SUBCASE("degenerate component collapses to the mean") {
    const MixtureSpec point = {MixtureComponent{1.0, Vec2(0.5, -0.5),
                                                Vec2(0.0, 0.0)}};
    const PointCloud c = sample_gaussian_mixture(point, 50, 2.0, rng::Key{45});
    CHECK((c.points.colwise() - Vec2(0.5, -0.5)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.weights(0) == doctest::Approx(1.0 / 50));
  }

  SUBCASE("two-mode statistics") {
    const int n = 100000;
    const PointCloud c = sample_gaussian_mixture(paper_mix, n, 2.0,
                                                 rng::Key{46});
    CHECK(std::abs(c.points.row(0).mean()) < 0.02);
    CHECK(std::abs(c.points.row(1).mean()) < 0.02);
    CHECK((c.points.array().abs() <= 2.0).all());

    // per-mode std along each axis should be sqrt(0.05)
    std::vector<Scalar> right_x, right_y;
    for (int i = 0; i < n; ++i)
      if (c.points(0, i) > 0) {
        right_x.push_back(c.points(0, i));
        right_y.push_back(c.points(1, i));
      }
    auto stddev = [](const std::vector<Scalar> &v, Scalar center) {
      Scalar acc = 0;
      for (Scalar x : v)
        acc += (x - center) * (x - center);
      return std::sqrt(acc / v.size());
    };
    CHECK(stddev(right_x, 1.0) == doctest::Approx(std::sqrt(0.05)).epsilon(0.03));
    CHECK(stddev(right_y, 0.0) == doctest::Approx(std::sqrt(0.05)).epsilon(0.03));
  }

  SUBCASE("invalid mixtures are rejected") {
    CHECK_THROWS_AS(sample_gaussian_mixture({}, 10, 2.0, rng::Key{47}),
                    std::invalid_argument);
    const MixtureSpec bad_var = {MixtureComponent{1.0, Vec2(0, 0),
                                                  Vec2(-0.1, 0.1)}};
    CHECK_THROWS_AS(sample_gaussian_mixture(bad_var, 10, 2.0, rng::Key{47}),
                    std::invalid_argument);
    const MixtureSpec bad_w = {MixtureComponent{0.7, Vec2(0, 0),
                                                Vec2(0.1, 0.1)}};
    CHECK_THROWS_AS(sample_gaussian_mixture(bad_w, 10, 2.0, rng::Key{47}),
                    std::invalid_argument);
  }
}

} // TEST_SUITE

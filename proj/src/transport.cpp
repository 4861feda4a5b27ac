#include "mfc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mfc/sim_core.hpp"

namespace mfc {

namespace detail {

namespace {

constexpr Scalar kRcTol = 1e-12;
constexpr Scalar kResidualEps = 1e-15;

// Transportation simplex with a spanning-tree basis. Entering arcs are found
// by block pricing; after a pivot budget the rule degrades to Bland's rule,
// which cannot cycle.
class TransportSimplex {
public:
  TransportSimplex(const MatX &cost, VecX supply, VecX demand)
      : n_(static_cast<int>(cost.rows())), m_(static_cast<int>(cost.cols())),
        nodes_(n_ + m_), a_(std::move(supply)), b_(std::move(demand)) {
    // Flatten row-major so pricing walks memory linearly.
    cflat_.resize(static_cast<std::size_t>(n_) * m_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j)
        cflat_[static_cast<std::size_t>(i) * m_ + j] = cost(i, j);
  }

  TransportResult run() {
    init_basis();
    build_tree();

    TransportResult res;
    const long soft_limit = 200L * nodes_ + 1000;
    const long hard_limit = 4000L * nodes_ + 100000;
    bool bland = false;
    while (true) {
      long entering;
      if (!find_entering(bland, entering))
        break;
      pivot(entering, bland);
      build_tree();
      ++res.pivots;
      if (res.pivots == soft_limit)
        bland = true;
      if (res.pivots > hard_limit)
        throw std::runtime_error("solve_transport: pivot limit exceeded");
    }

    for (std::size_t k = 0; k < arc_i_.size(); ++k)
      res.cost += arc_flow_[k] *
                  cflat_[static_cast<std::size_t>(arc_i_[k]) * m_ + arc_j_[k]];
    res.max_dual_violation = dual_violation();
    return res;
  }

private:
  void add_arc(int i, int j, Scalar flow) {
    arc_i_.push_back(i);
    arc_j_.push_back(j);
    arc_flow_.push_back(flow);
  }

  int uf_find(int x) {
    while (uf_[x] != x) {
      uf_[x] = uf_[uf_[x]];
      x = uf_[x];
    }
    return x;
  }

  // Greedy allocation in ascending cost order (always acyclic: any two
  // still-active nodes lie in different components), then zero-flow arcs
  // complete the spanning tree.
  void init_basis() {
    const long total = static_cast<long>(n_) * m_;
    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int p, int q) { return cflat_[p] < cflat_[q]; });

    VecX ra = a_, rb = b_;
    uf_.resize(nodes_);
    std::iota(uf_.begin(), uf_.end(), 0);

    arc_i_.reserve(nodes_ - 1);
    arc_j_.reserve(nodes_ - 1);
    arc_flow_.reserve(nodes_ - 1);

    for (int id : order) {
      const int i = id / m_;
      const int j = id % m_;
      if (ra(i) > kResidualEps && rb(j) > kResidualEps) {
        const Scalar f = std::min(ra(i), rb(j));
        ra(i) -= f;
        rb(j) -= f;
        add_arc(i, j, f);
        uf_[uf_find(i)] = uf_find(n_ + j);
      }
    }
    for (int id : order) {
      if (static_cast<int>(arc_i_.size()) == nodes_ - 1)
        break;
      const int i = id / m_;
      const int j = id % m_;
      const int ri = uf_find(i);
      const int rj = uf_find(n_ + j);
      if (ri != rj) {
        add_arc(i, j, 0.0);
        uf_[ri] = rj;
      }
    }
  }

  // Rebuild adjacency, parents, depths and potentials from the basic arcs.
  // O(nodes) per pivot; the pricing scan dominates anyway.
  void build_tree() {
    const int arcs = static_cast<int>(arc_i_.size());
    deg_.assign(nodes_ + 1, 0);
    for (int k = 0; k < arcs; ++k) {
      ++deg_[arc_i_[k] + 1];
      ++deg_[n_ + arc_j_[k] + 1];
    }
    for (int v = 0; v < nodes_; ++v)
      deg_[v + 1] += deg_[v];
    nbr_.resize(2 * static_cast<std::size_t>(arcs));
    nbr_arc_.resize(2 * static_cast<std::size_t>(arcs));
    fill_ = deg_;
    for (int k = 0; k < arcs; ++k) {
      const int u = arc_i_[k];
      const int v = n_ + arc_j_[k];
      nbr_[fill_[u]] = v;
      nbr_arc_[fill_[u]++] = k;
      nbr_[fill_[v]] = u;
      nbr_arc_[fill_[v]++] = k;
    }

    parent_.assign(nodes_, -1);
    parent_arc_.assign(nodes_, -1);
    depth_.assign(nodes_, 0);
    pot_.resize(nodes_);
    pot_[0] = 0.0;

    stack_.clear();
    stack_.push_back(0);
    std::vector<char> seen(nodes_, 0);
    seen[0] = 1;
    while (!stack_.empty()) {
      const int u = stack_.back();
      stack_.pop_back();
      for (int p = deg_[u]; p < deg_[u + 1]; ++p) {
        const int v = nbr_[p];
        if (seen[v])
          continue;
        seen[v] = 1;
        parent_[v] = u;
        parent_arc_[v] = nbr_arc_[p];
        depth_[v] = depth_[u] + 1;
        const int k = nbr_arc_[p];
        const Scalar c =
            cflat_[static_cast<std::size_t>(arc_i_[k]) * m_ + arc_j_[k]];
        // u_i + v_j = c on basic arcs
        pot_[v] = c - pot_[u];
        stack_.push_back(v);
      }
    }
  }

  Scalar reduced_cost(long id) const {
    const int i = static_cast<int>(id / m_);
    const int j = static_cast<int>(id % m_);
    return cflat_[id] - pot_[i] - pot_[n_ + j];
  }

  bool find_entering(bool bland, long &entering) {
    const long total = static_cast<long>(n_) * m_;
    // Block size tuned on 100x300..300x300 Euclidean instances: larger
    // blocks buy stronger entering arcs at higher pricing cost.
    const long block = std::max<long>(
        64, 2 * static_cast<long>(std::sqrt(static_cast<double>(total))));
    long pos = bland ? 0 : cursor_;
    long remaining = total;
    Scalar best = -kRcTol;
    long best_id = -1;
    while (remaining > 0) {
      const long count = std::min(block, remaining);
      for (long k = 0; k < count; ++k) {
        if (pos == total)
          pos = 0;
        const Scalar rc = reduced_cost(pos);
        if (rc < best) {
          best = rc;
          best_id = pos;
          if (bland) {
            ++pos;
            break;
          }
        }
        ++pos;
      }
      remaining -= count;
      if (best_id >= 0)
        break;
    }
    if (best_id < 0)
      return false;
    cursor_ = pos % total;
    entering = best_id;
    return true;
  }

  // Walk both endpoints of the entering arc to their common ancestor. In
  // each walk, arcs at even index lose theta and odd ones gain it.
  void pivot(long entering, bool bland) {
    const int ei = static_cast<int>(entering / m_);
    const int ej = static_cast<int>(entering % m_);
    up_s_.clear();
    up_t_.clear();
    int x = ei;
    int y = n_ + ej;
    while (depth_[x] > depth_[y]) {
      up_s_.push_back(parent_arc_[x]);
      x = parent_[x];
    }
    while (depth_[y] > depth_[x]) {
      up_t_.push_back(parent_arc_[y]);
      y = parent_[y];
    }
    while (x != y) {
      up_s_.push_back(parent_arc_[x]);
      x = parent_[x];
      up_t_.push_back(parent_arc_[y]);
      y = parent_[y];
    }

    Scalar theta = std::numeric_limits<Scalar>::infinity();
    int leaving = -1;
    auto scan = [&](const std::vector<int> &walk) {
      for (std::size_t k = 0; k < walk.size(); k += 2) {
        const int arc = walk[k];
        const bool better =
            bland ? arc_flow_[arc] < theta : arc_flow_[arc] <= theta;
        if (better) {
          theta = arc_flow_[arc];
          leaving = arc;
        }
      }
    };
    scan(up_s_);
    scan(up_t_);

    for (std::size_t k = 0; k < up_s_.size(); ++k)
      arc_flow_[up_s_[k]] += (k % 2 == 0) ? -theta : theta;
    for (std::size_t k = 0; k < up_t_.size(); ++k)
      arc_flow_[up_t_[k]] += (k % 2 == 0) ? -theta : theta;

    arc_i_[leaving] = ei;
    arc_j_[leaving] = ej;
    arc_flow_[leaving] = theta;
  }

  Scalar dual_violation() const {
    const long total = static_cast<long>(n_) * m_;
    Scalar worst = 0.0;
    for (long id = 0; id < total; ++id)
      worst = std::min(worst, reduced_cost(id));
    return -worst;
  }

  const int n_, m_, nodes_;
  VecX a_, b_;
  std::vector<Scalar> cflat_;

  std::vector<int> arc_i_, arc_j_;
  std::vector<Scalar> arc_flow_;
  std::vector<int> uf_;

  std::vector<int> deg_, fill_, nbr_, nbr_arc_;
  std::vector<int> parent_, parent_arc_, depth_, stack_;
  std::vector<Scalar> pot_;
  long cursor_ = 0;

  std::vector<int> up_s_, up_t_;
};

} // namespace

TransportResult solve_transport(const MatX &cost, VecX supply, VecX demand) {
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw std::invalid_argument("solve_transport: dimension mismatch");
  if (supply.size() == 0 || demand.size() == 0)
    throw std::invalid_argument("solve_transport: empty problem");
  // Rescale so both sides carry identical total mass.
  const Scalar sa = supply.sum();
  const Scalar sb = demand.sum();
  if (sa <= 0 || sb <= 0)
    throw std::invalid_argument("solve_transport: zero total mass");
  demand *= sa / sb;
  TransportSimplex solver(cost, std::move(supply), std::move(demand));
  return solver.run();
}

} // namespace detail

namespace {

void validate_cloud(const PointCloud &c, const char *who) {
  if (c.size() == 0)
    throw std::invalid_argument(std::string(who) + ": empty point cloud");
  if (c.weights.size() != c.size())
    throw std::invalid_argument(std::string(who) + ": weight count mismatch");
  if ((c.weights.array() < 0).any())
    throw std::invalid_argument(std::string(who) + ": negative weight");
  if (std::abs(c.weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": weights must sum to 1");
}

} // namespace

PointCloud cloud_from_positions(const Positions &positions) {
  PointCloud c;
  c.points = positions;
  c.weights = VecX::Constant(positions.cols(), 1.0 / positions.cols());
  return c;
}

Scalar wasserstein1(const PointCloud &a, const PointCloud &b) {
  validate_cloud(a, "wasserstein1");
  validate_cloud(b, "wasserstein1");
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  MatX cost(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      cost(i, j) = (a.points.col(i) - b.points.col(j)).norm();
  return detail::solve_transport(cost, a.weights, b.weights).cost;
}

PointCloud sample_gaussian_mixture(const MixtureSpec &spec, int n,
                                   Scalar box_half_width, rng::Key key) {
  if (spec.empty())
    throw std::invalid_argument("sample_gaussian_mixture: empty mixture");
  if (n < 1)
    throw std::invalid_argument("sample_gaussian_mixture: need n >= 1");
  Scalar wsum = 0.0;
  for (const auto &comp : spec) {
    if (comp.weight < 0)
      throw std::invalid_argument("sample_gaussian_mixture: negative weight");
    if (comp.variance(0) < 0 || comp.variance(1) < 0)
      throw std::invalid_argument(
          "sample_gaussian_mixture: negative variance");
    wsum += comp.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument(
        "sample_gaussian_mixture: component weights must sum to 1");

  PointCloud cloud;
  cloud.points.resize(2, n);
  cloud.weights = VecX::Constant(n, 1.0 / n);
  rng::Stream s(key);
  for (int i = 0; i < n; ++i) {
    Scalar pick = s.uniform01();
    std::size_t c = 0;
    while (c + 1 < spec.size() && pick >= spec[c].weight) {
      pick -= spec[c].weight;
      ++c;
    }
    const Vec2 std_dev = spec[c].variance.cwiseSqrt();
    const Vec2 x = spec[c].mean + s.normal2().cwiseProduct(std_dev);
    cloud.points.col(i) = clip_to_box(x, box_half_width);
  }
  return cloud;
}

} // namespace mfc

#include "mfc/meanfield.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mfc {

namespace {

int axis_bin(Scalar v, Scalar half_width, int bins) {
  // Scale to [0, bins]; floor puts edge points into the higher cell, the
  // top boundary is folded into the last cell.
  const Scalar u = (v + half_width) / (2.0 * half_width) *
                   static_cast<Scalar>(bins);
  int k = static_cast<int>(std::floor(u));
  if (k < 0)
    k = 0;
  if (k >= bins)
    k = bins - 1;
  return k;
}

} // namespace

Vec2 GridSpec::bin_center(int bin) const {
  const int row = bin / bins_per_axis;
  const int col = bin % bins_per_axis;
  const Scalar w = bin_width();
  return Vec2(-box_half_width + (col + 0.5) * w,
              -box_half_width + (row + 0.5) * w);
}

int bin_index(const Vec2 &x, const GridSpec &grid) {
  const Scalar m = grid.box_half_width;
  if (std::abs(x(0)) > m || std::abs(x(1)) > m)
    throw std::invalid_argument("bin_index: point outside the box");
  const int col = axis_bin(x(0), m, grid.bins_per_axis);
  const int row = axis_bin(x(1), m, grid.bins_per_axis);
  return row * grid.bins_per_axis + col;
}

Histogram empirical_histogram(const Positions &positions,
                              const GridSpec &grid) {
  const Eigen::Index n = positions.cols();
  if (n == 0)
    throw std::invalid_argument("empirical_histogram: empty swarm");
  Histogram h = Histogram::Zero(grid.total_bins());
  for (Eigen::Index i = 0; i < n; ++i)
    h(bin_index(positions.col(i), grid)) += 1.0;
  h /= static_cast<Scalar>(n);
  return h;
}

Histogram empirical_histogram(const SwarmState &state, const GridSpec &grid) {
  return empirical_histogram(state.positions, grid);
}

Vec2 sample_decision_rule(const MeanFieldAction &h, const Vec2 &x,
                          const GridSpec &grid, const SpaceConfig &space,
                          rng::Stream &stream) {
  const int b = bin_index(x, grid);
  const Vec2 u = h.theta.col(b) + stream.normal2().cwiseProduct(h.sigma.col(b));
  return clip_to_disc(u, space.action_radius);
}

SwarmState mf_transition(const SwarmState &particles, const MeanFieldAction &h,
                         const SpaceConfig &space, const GridSpec &grid,
                         rng::Key key) {
  const Eigen::Index n = particles.size();
  if (n < 1)
    throw std::invalid_argument("mf_transition: empty particle ensemble");

  const rng::Key act_key = key.child(0);
  ActionBatch acts(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rng::Stream s(act_key.child(static_cast<std::uint64_t>(i)));
    acts.col(i) =
        sample_decision_rule(h, particles.positions.col(i), grid, space, s);
  }
  return step_swarm(particles, acts, space, key.child(1));
}

namespace {

nlohmann::json action_to_json(const MeanFieldAction &a) {
  const int m = a.bins();
  nlohmann::json jtheta = nlohmann::json::array();
  nlohmann::json jsigma = nlohmann::json::array();
  for (int b = 0; b < m; ++b) {
    jtheta.push_back({a.theta(0, b), a.theta(1, b)});
    jsigma.push_back({a.sigma(0, b), a.sigma(1, b)});
  }
  return {{"theta", jtheta}, {"sigma", jsigma}};
}

MeanFieldAction action_from_json(const nlohmann::json &j) {
  const auto &jtheta = j.at("theta");
  const auto &jsigma = j.at("sigma");
  const int m = static_cast<int>(jtheta.size());
  MeanFieldAction a;
  a.theta.resize(2, m);
  a.sigma.resize(2, m);
  for (int b = 0; b < m; ++b) {
    a.theta(0, b) = jtheta[b][0].get<Scalar>();
    a.theta(1, b) = jtheta[b][1].get<Scalar>();
    a.sigma(0, b) = jsigma[b][0].get<Scalar>();
    a.sigma(1, b) = jsigma[b][1].get<Scalar>();
  }
  return a;
}

} // namespace

std::string OpenLoopSequence::to_json() const {
  nlohmann::json j;
  j["format"] = "mfcswarm-openloop";
  j["version"] = 1;
  j["grid"] = {{"bins_per_axis", grid.bins_per_axis},
               {"box_half_width", grid.box_half_width}};
  j["horizon"] = horizon();
  j["initial_histogram"] =
      std::vector<Scalar>(initial_histogram.data(),
                          initial_histogram.data() + initial_histogram.size());
  nlohmann::json steps = nlohmann::json::array();
  for (const auto &a : actions)
    steps.push_back(action_to_json(a));
  j["steps"] = std::move(steps);
  return j.dump(2);
}

OpenLoopSequence OpenLoopSequence::from_json(const std::string &text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format").get<std::string>() != "mfcswarm-openloop")
    throw std::runtime_error("OpenLoopSequence: unrecognized format tag");
  OpenLoopSequence seq;
  seq.grid.bins_per_axis = j.at("grid").at("bins_per_axis").get<int>();
  seq.grid.box_half_width = j.at("grid").at("box_half_width").get<Scalar>();
  const auto hist = j.at("initial_histogram").get<std::vector<Scalar>>();
  seq.initial_histogram =
      Eigen::Map<const VecX>(hist.data(), static_cast<Eigen::Index>(hist.size()));
  for (const auto &js : j.at("steps"))
    seq.actions.push_back(action_from_json(js));
  if (seq.actions.empty())
    throw std::runtime_error("OpenLoopSequence: empty action sequence");
  return seq;
}

void OpenLoopSequence::save(const std::string &path) const {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("OpenLoopSequence: cannot write " + path);
  out << to_json() << '\n';
}

OpenLoopSequence OpenLoopSequence::load(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("OpenLoopSequence: cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

} // namespace mfc

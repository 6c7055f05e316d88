#include "d2d/spatial.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "d2d/errors.hpp"

namespace d2d {

bool Window::contains(const Point& p) const noexcept {
  return p.x() >= 0.0 && p.x() < width && p.y() >= 0.0 && p.y() < height;
}

Point Window::wrap(const Point& p) const noexcept {
  if (topology == Topology::bounded) return p;
  Point q(std::fmod(p.x(), width), std::fmod(p.y(), height));
  if (q.x() < 0.0) q.x() += width;
  if (q.y() < 0.0) q.y() += height;
  // fmod of a tiny negative value can round up to exactly the period.
  if (q.x() >= width) q.x() = 0.0;
  if (q.y() >= height) q.y() = 0.0;
  return q;
}

void Window::validate() const {
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
    throw ParameterError("window width and height must be positive and finite");
}

PointSet::PointSet(Window window) : window_(window), coords_(2, 0) { window_.validate(); }

PointSet::PointSet(Window window, Eigen::Matrix2Xd coords)
    : window_(window), coords_(std::move(coords)) {
  window_.validate();
  if (!coords_.allFinite()) throw ParameterError("point coordinates must be finite");
  for (Index i = 0; i < coords_.cols(); ++i)
    if (!window_.contains(coords_.col(i)))
      throw ParameterError("point " + std::to_string(i) + " lies outside the window");
}

PointSet PointSet::subset(std::span<const Index> ids) const {
  Eigen::Matrix2Xd out(2, static_cast<Index>(ids.size()));
  for (Index k = 0; k < out.cols(); ++k) out.col(k) = coords_.col(ids[k]);
  return PointSet(window_, std::move(out));
}

double toroidal_distance(const Point& a, const Point& b, const Window& window) noexcept {
  double dx = std::abs(a.x() - b.x());
  double dy = std::abs(a.y() - b.y());
  if (window.topology == Topology::torus) {
    dx = std::min(dx, window.width - dx);
    dy = std::min(dy, window.height - dy);
  }
  return std::hypot(dx, dy);
}

Eigen::ArrayXd squared_distances(const Point& p, const PointSet& set) {
  Eigen::Array2Xd diff = (set.coords().colwise() - p).array().abs();
  const Window& w = set.window();
  if (w.topology == Topology::torus) {
    diff.row(0) = diff.row(0).min(w.width - diff.row(0));
    diff.row(1) = diff.row(1).min(w.height - diff.row(1));
  }
  return diff.square().colwise().sum().transpose();
}

Index nearest(const Point& p, const PointSet& set) {
  if (set.empty()) throw ParameterError("nearest: empty point set");
  Index best = 0;
  squared_distances(p, set).minCoeff(&best);
  return best;
}

PointSet sample_ppp(double intensity, const Window& window, Rng& rng) {
  window.validate();
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw ParameterError("PPP intensity must be non-negative and finite");
  if (intensity == 0.0) return PointSet(window);

  std::poisson_distribution<Index> count(intensity * window.area());
  std::uniform_real_distribution<double> ux(0.0, window.width);
  std::uniform_real_distribution<double> uy(0.0, window.height);

  const Index n = count(rng);
  Eigen::Matrix2Xd coords(2, n);
  for (Index i = 0; i < n; ++i) {
    coords(0, i) = ux(rng);
    coords(1, i) = uy(rng);
  }
  return PointSet(window, std::move(coords));
}

std::vector<Index> outside_holes(const PointSet& candidates, const PointSet& hole_centers,
                                 double radius) {
  if (!(radius >= 0.0)) throw ParameterError("hole radius must be non-negative");
  if (!(candidates.window() == hole_centers.window()))
    throw ParameterError("candidates and hole centers live in different windows");

  std::vector<Index> kept;
  kept.reserve(static_cast<std::size_t>(candidates.size()));
  const double r2 = radius * radius;
  for (Index i = 0; i < candidates.size(); ++i) {
    if (radius == 0.0 || hole_centers.empty()) {
      kept.push_back(i);
      continue;
    }
    // Distance exactly equal to the radius removes the point.
    if ((squared_distances(candidates.point(i), hole_centers) > r2).all()) kept.push_back(i);
  }
  return kept;
}

PointSet punch_holes(const PointSet& candidates, const PointSet& hole_centers, double radius) {
  const auto kept = outside_holes(candidates, hole_centers, radius);
  return candidates.subset(kept);
}

CellAssociation place_uplink_users(const PointSet& bs_points, Rng& rng) {
  if (bs_points.empty()) throw ParameterError("place_uplink_users: no base stations");
  const Window& w = bs_points.window();
  std::uniform_real_distribution<double> ux(0.0, w.width);
  std::uniform_real_distribution<double> uy(0.0, w.height);

  const Index n = bs_points.size();
  Eigen::Matrix2Xd users(2, n);
  std::vector<bool> filled(static_cast<std::size_t>(n), false);
  Index remaining = n;
  while (remaining > 0) {
    const Point p(ux(rng), uy(rng));
    const Index cell = nearest(p, bs_points);
    if (!filled[static_cast<std::size_t>(cell)]) {
      filled[static_cast<std::size_t>(cell)] = true;
      users.col(cell) = p;
      --remaining;
    }
  }
  return CellAssociation{bs_points, PointSet(w, std::move(users))};
}

D2DPairSet place_d2d_pairs(const PointSet& transmitters, double d, Rng& rng) {
  const Window& w = transmitters.window();
  if (!(d >= 0.0) || !std::isfinite(d)) throw ParameterError("D2D link length must be >= 0");
  if (2.0 * d > std::min(w.width, w.height))
    throw ParameterError("D2D link length exceeds half the window side");

  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  Eigen::Matrix2Xd rx(2, transmitters.size());
  constexpr int kMaxRedraws = 10000;
  for (Index i = 0; i < transmitters.size(); ++i) {
    const Point tx = transmitters.point(i);
    for (int attempt = 0;; ++attempt) {
      const double theta = angle(rng);
      const Point cand = w.wrap(tx + d * Point(std::cos(theta), std::sin(theta)));
      if (w.contains(cand)) {
        rx.col(i) = cand;
        break;
      }
      if (attempt == kMaxRedraws)
        throw ParameterError("place_d2d_pairs: no receiver direction stays inside the window");
    }
  }
  return D2DPairSet{transmitters, PointSet(w, std::move(rx)), d};
}

}  // namespace d2d

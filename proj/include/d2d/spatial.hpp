#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "d2d/rng.hpp"

namespace d2d {

using Index = Eigen::Index;
using Point = Eigen::Vector2d;

enum class Topology { torus, bounded };

/// Rectangular observation window [0,width) x [0,height).
/// On a torus all distances use the minimum periodic image.
struct Window {
  double width = 3000.0;
  double height = 3000.0;
  Topology topology = Topology::torus;

  double area() const noexcept { return width * height; }
  bool contains(const Point& p) const noexcept;
  /// Maps a point back into the window; identity for bounded windows.
  Point wrap(const Point& p) const noexcept;
  void validate() const;

  friend bool operator==(const Window&, const Window&) = default;
};

/// Planar point pattern owned column-wise (2 x n) inside a window.
class PointSet {
public:
  explicit PointSet(Window window = {});
  PointSet(Window window, Eigen::Matrix2Xd coords);

  Index size() const noexcept { return coords_.cols(); }
  bool empty() const noexcept { return coords_.cols() == 0; }
  Point point(Index i) const { return coords_.col(i); }
  const Eigen::Matrix2Xd& coords() const noexcept { return coords_; }
  const Window& window() const noexcept { return window_; }

  PointSet subset(std::span<const Index> ids) const;

private:
  Window window_;
  Eigen::Matrix2Xd coords_;
};

/// D2D pairs: receiver i is at distance `link_length` from transmitter i.
struct D2DPairSet {
  PointSet transmitters;
  PointSet receivers;
  double link_length = 0.0;

  Index size() const noexcept { return transmitters.size(); }
};

/// One scheduled uplink user per base station; user i is served by BS i.
struct CellAssociation {
  PointSet base_stations;
  PointSet users;

  Index size() const noexcept { return base_stations.size(); }
  Point user_of_bs(Index bs) const { return users.point(bs); }
  Index bs_of_user(Index user) const noexcept { return user; }
};

/// Minimum-image distance on a torus, Euclidean distance on a bounded window.
double toroidal_distance(const Point& a, const Point& b, const Window& window) noexcept;

/// Squared distances from `p` to every point of `set`, same metric as toroidal_distance.
Eigen::ArrayXd squared_distances(const Point& p, const PointSet& set);

/// Index of the closest point of `set` to `p` (ties to the lower index).
Index nearest(const Point& p, const PointSet& set);

PointSet sample_ppp(double intensity, const Window& window, Rng& rng);

/// Ids of candidates strictly farther than `radius` from every hole center.
std::vector<Index> outside_holes(const PointSet& candidates, const PointSet& hole_centers,
                                 double radius);

/// Poisson hole process: keeps points with distance > radius from every center.
PointSet punch_holes(const PointSet& candidates, const PointSet& hole_centers, double radius);

/// Drops one user uniformly in each BS's Voronoi cell by rejection sampling.
CellAssociation place_uplink_users(const PointSet& bs_points, Rng& rng);

/// Places each receiver at distance d in a uniform random direction.
/// Bounded windows redraw directions that would leave the window.
D2DPairSet place_d2d_pairs(const PointSet& transmitters, double d, Rng& rng);

}  // namespace d2d

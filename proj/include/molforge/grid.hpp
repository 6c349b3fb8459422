#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace molforge {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool operator==(const Interval&) const = default;
};

/// Endpoint-inclusive uniform Cartesian grid: shape[d] points spanning
/// [bounds[d].lo, bounds[d].hi] with shape[d]-1 intervals.
class Grid {
 public:
  Grid(std::vector<std::size_t> shape, std::vector<Interval> bounds);

  std::size_t dimensions() const noexcept { return shape_.size(); }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  const std::vector<Interval>& bounds() const noexcept { return bounds_; }
  const std::vector<double>& step_sizes() const noexcept { return steps_; }
  std::size_t size() const noexcept;

  bool operator==(const Grid&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<Interval> bounds_;
  std::vector<double> steps_;
};

Grid make_uniform_grid(std::vector<std::size_t> shape, std::vector<Interval> bounds);

/// Node coordinates along dimension d. The last entry is exactly bounds[d].hi.
std::vector<double> axis_coordinates(const Grid& g, std::size_t d);

enum class Side : unsigned char { Left = 0, Right = 1 };
enum class EdgeKind : unsigned char { Internal, External };

struct EdgeSpec {
  EdgeKind kind = EdgeKind::External;
  std::size_t ghost_points = 0;
  std::size_t boundary_points = 0;
};

/// Per-dimension, per-side edge description of a subdomain.
struct BoundarySpec {
  std::vector<std::array<EdgeSpec, 2>> edges;

  const EdgeSpec& at(std::size_t d, Side s) const { return edges.at(d)[static_cast<int>(s)]; }
  EdgeSpec& at(std::size_t d, Side s) { return edges.at(d)[static_cast<int>(s)]; }
};

/// One worker's slab of the global grid.
struct Subdomain {
  int rank = 0;
  std::vector<std::size_t> global_shape;
  std::vector<std::size_t> offset;
  std::vector<std::size_t> extent;
  std::vector<std::array<std::optional<int>, 2>> neighbours;
  BoundarySpec spec;

  std::optional<int> neighbour(std::size_t d, Side s) const {
    return neighbours.at(d)[static_cast<int>(s)];
  }
  std::size_t ghosts(std::size_t d, Side s) const { return spec.at(d, s).ghost_points; }
  bool is_external(std::size_t d, Side s) const {
    return spec.at(d, s).kind == EdgeKind::External;
  }
  /// Owned points times the extent of the other dimensions.
  std::size_t owned_size() const noexcept;
};

/// The whole grid as a single subdomain with no neighbours.
Subdomain whole_domain(const Grid& g);

/// Split dimension 0 into `workers` contiguous slabs. Extents differ by at most
/// one, with the remainder going to the lowest ranks. With periodic[0] set the
/// first and last ranks are linked.
std::vector<Subdomain> decompose(const Grid& g, std::size_t workers, std::size_t ghost_points,
                                 const std::vector<bool>& periodic);

}  // namespace molforge

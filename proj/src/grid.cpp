#include "molforge/grid.hpp"

#include <numeric>
#include <string>

#include "molforge/error.hpp"

namespace molforge {

Grid::Grid(std::vector<std::size_t> shape, std::vector<Interval> bounds)
    : shape_(std::move(shape)), bounds_(std::move(bounds)) {
  if (shape_.empty()) throw GridError("grid needs at least one dimension");
  if (shape_.size() != bounds_.size())
    throw GridError("shape has " + std::to_string(shape_.size()) + " dimensions but bounds has " +
                    std::to_string(bounds_.size()));
  steps_.reserve(shape_.size());
  for (std::size_t d = 0; d < shape_.size(); ++d) {
    if (shape_[d] < 2)
      throw GridError("dimension " + std::to_string(d) + " needs at least 2 points");
    if (!(bounds_[d].lo < bounds_[d].hi))
      throw GridError("dimension " + std::to_string(d) + " has empty interval");
    steps_.push_back((bounds_[d].hi - bounds_[d].lo) / static_cast<double>(shape_[d] - 1));
  }
}

std::size_t Grid::size() const noexcept {
  return std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
}

Grid make_uniform_grid(std::vector<std::size_t> shape, std::vector<Interval> bounds) {
  return Grid(std::move(shape), std::move(bounds));
}

std::vector<double> axis_coordinates(const Grid& g, std::size_t d) {
  if (d >= g.dimensions())
    throw GridError("dimension " + std::to_string(d) + " out of range");
  const std::size_t n = g.shape()[d];
  const double lo = g.bounds()[d].lo;
  const double h = g.step_sizes()[d];
  std::vector<double> x(n);
  for (std::size_t i = 0; i + 1 < n; ++i) x[i] = lo + static_cast<double>(i) * h;
  x[n - 1] = g.bounds()[d].hi;
  return x;
}

std::size_t Subdomain::owned_size() const noexcept {
  return std::accumulate(extent.begin(), extent.end(), std::size_t{1}, std::multiplies<>());
}

Subdomain whole_domain(const Grid& g) {
  return decompose(g, 1, 0, std::vector<bool>(g.dimensions(), false)).front();
}

std::vector<Subdomain> decompose(const Grid& g, std::size_t workers, std::size_t ghost_points,
                                 const std::vector<bool>& periodic) {
  if (workers == 0) throw GridError("need at least one worker");
  const std::size_t n = g.shape()[0];
  if (workers > n)
    throw GridError(std::to_string(workers) + " workers for " + std::to_string(n) + " points");
  const bool wrap = !periodic.empty() && periodic[0];

  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  const std::size_t dims = g.dimensions();

  std::vector<Subdomain> out(workers);
  std::size_t start = 0;
  for (std::size_t r = 0; r < workers; ++r) {
    Subdomain& s = out[r];
    s.rank = static_cast<int>(r);
    s.global_shape = g.shape();
    s.offset.assign(dims, 0);
    s.extent = g.shape();
    s.offset[0] = start;
    s.extent[0] = base + (r < extra ? 1 : 0);
    start += s.extent[0];

    s.neighbours.assign(dims, {std::nullopt, std::nullopt});
    s.spec.edges.assign(dims, {EdgeSpec{}, EdgeSpec{}});

    const bool has_left = r > 0 || wrap;
    const bool has_right = r + 1 < workers || wrap;
    if (has_left) s.neighbours[0][0] = static_cast<int>((r + workers - 1) % workers);
    if (has_right) s.neighbours[0][1] = static_cast<int>((r + 1) % workers);
    for (Side side : {Side::Left, Side::Right}) {
      if (!s.neighbour(0, side)) continue;
      EdgeSpec& e = s.spec.at(0, side);
      e.kind = EdgeKind::Internal;
      e.ghost_points = ghost_points;
      e.boundary_points = ghost_points;
    }
  }
  return out;
}

}  // namespace molforge

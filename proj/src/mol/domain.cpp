#include <algorithm>
#include <cmath>
#include <string>

#include "molforge/error.hpp"
#include "molforge/mol.hpp"

namespace molforge::mol {

Domain::Domain(Grid g) : grid(std::move(g)), sub(whole_domain(grid)) {}

Domain::Domain(Grid g, Subdomain s, comm::WorkerTopology* t)
    : grid(std::move(g)), sub(std::move(s)), topo(t) {}

std::vector<double> Domain::coordinates() const {
  const auto x = axis_coordinates(grid, 0);
  const auto first = x.begin() + static_cast<std::ptrdiff_t>(sub.offset[0]);
  return {first, first + static_cast<std::ptrdiff_t>(sub.extent[0])};
}

std::vector<double> Domain::padded(std::span<const double> owned_values) const {
  if (owned_values.size() != owned())
    throw RunError("field has " + std::to_string(owned_values.size()) +
                   " values, subdomain owns " + std::to_string(owned()));
  const std::size_t gl = sub.ghosts(0, Side::Left);
  std::vector<double> strip(comm::padded_size(sub), 0.0);
  std::copy(owned_values.begin(), owned_values.end(),
            strip.begin() + static_cast<std::ptrdiff_t>(gl));
  const bool internal = !sub.is_external(0, Side::Left) || !sub.is_external(0, Side::Right);
  if (internal) {
    if (!topo) throw RunError("subdomain has internal edges but no worker topology");
    comm::exchange_halos(*topo, sub, strip);
  }
  return strip;
}

std::vector<double> Domain::apply(const diffop::SBPOperator& op,
                                  std::span<const double> owned_values) const {
  if (grid.dimensions() != 1) throw RunError("stencil application is one-dimensional");
  const std::vector<double> strip = padded(owned_values);
  std::vector<double> out(owned());
  diffop::apply(op, strip, out, step(0),
                diffop::StripLayout{sub.ghosts(0, Side::Left), sub.ghosts(0, Side::Right),
                                    sub.is_external(0, Side::Left),
                                    sub.is_external(0, Side::Right)});
  return out;
}

std::optional<std::vector<double>> Domain::gather(std::span<const double> owned_values) const {
  if (!topo) return std::vector<double>(owned_values.begin(), owned_values.end());
  return comm::gather_global(*topo, sub, owned_values);
}

TimeSlice::TimeSlice(std::vector<std::string> names, std::vector<std::vector<double>> data,
                     Domain domain, double time)
    : names_(std::move(names)), data_(std::move(data)), domain_(std::move(domain)), time_(time) {
  if (names_.size() != data_.size())
    throw RunError("time slice has " + std::to_string(names_.size()) + " names for " +
                   std::to_string(data_.size()) + " components");
  if (!std::isfinite(time_)) throw RunError("time slice time must be finite");
  for (const auto& c : data_)
    if (c.size() != domain_.owned())
      throw RunError("component has " + std::to_string(c.size()) + " values, domain owns " +
                     std::to_string(domain_.owned()));
}

TimeSlice TimeSlice::with_data(std::vector<std::vector<double>> data, double time) const {
  return TimeSlice(names_, std::move(data), domain_, time);
}

std::vector<double> TimeSlice::flatten() const {
  std::vector<double> flat;
  flat.reserve(data_.size() * domain_.owned());
  for (const auto& c : data_) flat.insert(flat.end(), c.begin(), c.end());
  return flat;
}

TimeSlice TimeSlice::unflatten(std::span<const double> flat, double time) const {
  const std::size_t n = domain_.owned();
  if (flat.size() != n * data_.size()) throw RunError("flat state has the wrong size");
  std::vector<std::vector<double>> data(data_.size());
  for (std::size_t c = 0; c < data_.size(); ++c)
    data[c].assign(flat.begin() + static_cast<std::ptrdiff_t>(c * n),
                   flat.begin() + static_cast<std::ptrdiff_t>((c + 1) * n));
  return TimeSlice(names_, std::move(data), domain_, time);
}

std::optional<std::vector<std::vector<double>>> gather_slice(const TimeSlice& slice) {
  std::vector<std::vector<double>> out;
  bool root = true;
  for (std::size_t c = 0; c < slice.components(); ++c) {
    auto g = slice.domain().gather(slice.component(c));
    if (!g) {
      root = false;
      continue;
    }
    out.push_back(std::move(*g));
  }
  if (!root) return std::nullopt;
  return out;
}

}  // namespace molforge::mol

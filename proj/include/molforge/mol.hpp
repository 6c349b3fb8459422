#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molforge/comm.hpp"
#include "molforge/diffop.hpp"
#include "molforge/grid.hpp"
#include "molforge/solvers.hpp"

namespace molforge::mol {

/// Where a slice lives: the global grid, this worker's part of it, and the
/// channel to the other workers (null when running alone).
struct Domain {
  Grid grid;
  Subdomain sub;
  comm::WorkerTopology* topo = nullptr;

  explicit Domain(Grid g);
  Domain(Grid g, Subdomain s, comm::WorkerTopology* t);

  int workers() const { return topo ? topo->size() : 1; }
  int rank() const { return topo ? topo->rank() : 0; }
  std::size_t owned() const { return sub.owned_size(); }
  double step(std::size_t d = 0) const { return grid.step_sizes()[d]; }
  /// Coordinates of the owned nodes along dimension 0.
  std::vector<double> coordinates() const;

  /// Owned values copied into a ghost-padded strip; internal ghosts are filled
  /// from the neighbours, external ghosts are zero.
  std::vector<double> padded(std::span<const double> owned) const;
  /// Apply a banded operator on this worker, exchanging halos first.
  std::vector<double> apply(const diffop::SBPOperator& op, std::span<const double> owned) const;

  /// Collective; returns the global array on rank 0 only.
  std::optional<std::vector<double>> gather(std::span<const double> owned) const;
};

/// Field values on a domain at one instant.
class TimeSlice {
 public:
  TimeSlice(std::vector<std::string> names, std::vector<std::vector<double>> data, Domain domain,
            double time);

  std::size_t components() const noexcept { return data_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::span<const double> component(std::size_t i) const { return data_.at(i); }
  std::span<double> component(std::size_t i) { return data_.at(i); }
  const std::vector<std::vector<double>>& data() const noexcept { return data_; }
  const Domain& domain() const noexcept { return domain_; }
  double time() const noexcept { return time_; }

  /// Same names and domain, new values.
  TimeSlice with_data(std::vector<std::vector<double>> data, double time) const;

  std::vector<double> flatten() const;
  TimeSlice unflatten(std::span<const double> flat, double time) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
  Domain domain_;
  double time_;
};

/// A PDE/ODE system in method-of-lines form.
struct SystemDef {
  std::string name;
  std::vector<std::string> component_names;
  /// Operator whose norm defines error norms and whose half-width sets the
  /// number of ghost points.
  std::string operator_name = "d42";
  std::size_t ghost_points = 0;
  std::map<std::string, double> parameters;

  std::function<double(const TimeSlice&)> timestep;
  std::function<TimeSlice(double t0, const Domain&)> initial_data;
  std::function<TimeSlice(double t, const TimeSlice&)> evaluate;
  /// Optional stage boundary data for the rk4bc solver; edits the slice in place.
  std::function<void(double t, TimeSlice&)> intermediate_bc;
  /// Optional analytic solution on the global grid, one vector per component.
  std::function<std::vector<std::vector<double>>(double t, const Grid&)> exact;
};

enum class Signal { Continue, Halt };

/// Hook run on every worker before the advance that follows it.
struct Action {
  std::string name;
  int frequency = 1;
  std::vector<double> forced_times;
  std::function<Signal(int iteration, const TimeSlice&)> hook;
};

struct RunConfig {
  double t0 = 0.0;
  double tf = 1.0;
  long max_iterations = 10'000'000;
  double min_dt = 1e-12;
  solvers::Method solver = solvers::Method::RK4;
  std::vector<Action> actions;
};

void register_action(RunConfig& cfg, Action action);

enum class HaltReason { FinalTime, MaxIterations, ActionHalt };

struct RunReport {
  long iterations = 0;
  double wall_seconds = 0.0;
  HaltReason reason = HaltReason::FinalTime;
};

struct RunResult {
  TimeSlice slice;
  RunReport report;
};

/// The evolution loop:
///   slice = initial_data(t0)
///   loop { dt = timestep(slice), clipped onto tf and forced times;
///          due actions; slice = solver.advance(slice) }
/// `topo` may be null for a single-worker run.
RunResult run_ibvp(const SystemDef& system, const Grid& grid, const RunConfig& cfg,
                   comm::WorkerTopology* topo = nullptr);

/// Builds the domain this worker sees for `system` on `grid`.
Domain make_domain(const SystemDef& system, const Grid& grid, comm::WorkerTopology* topo);

/// Gather every component to rank 0 (collective).
std::optional<std::vector<std::vector<double>>> gather_slice(const TimeSlice& slice);

}  // namespace molforge::mol

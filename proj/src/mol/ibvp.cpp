#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "molforge/error.hpp"
#include "molforge/mol.hpp"

namespace molforge::mol {

namespace {

void validate(const RunConfig& cfg) {
  if (!std::isfinite(cfg.t0) || !std::isfinite(cfg.tf) || !(cfg.tf > cfg.t0))
    throw ConfigError("run needs finite t0 < tf");
  if (cfg.max_iterations < 0) throw ConfigError("max_iterations must be nonnegative");
  if (!(cfg.min_dt > 0.0)) throw ConfigError("min_dt must be positive");
  for (const auto& a : cfg.actions) {
    if (a.frequency < 1) throw ConfigError("action " + a.name + " needs frequency >= 1");
    if (!a.hook) throw ConfigError("action " + a.name + " has no hook");
  }
}

void validate(const SystemDef& s) {
  if (!s.timestep || !s.initial_data || !s.evaluate)
    throw ConfigError("system " + s.name + " is missing timestep, initial_data or evaluate");
}

bool forced_at(const Action& a, double t) {
  return std::find(a.forced_times.begin(), a.forced_times.end(), t) != a.forced_times.end();
}

}  // namespace

void register_action(RunConfig& cfg, Action action) {
  if (action.frequency < 1) throw ConfigError("action " + action.name + " needs frequency >= 1");
  cfg.actions.push_back(std::move(action));
}

Domain make_domain(const SystemDef& system, const Grid& grid, comm::WorkerTopology* topo) {
  if (!topo || topo->size() == 1) return Domain(grid, whole_domain(grid), topo);
  auto subs = decompose(grid, static_cast<std::size_t>(topo->size()), system.ghost_points,
                        std::vector<bool>(grid.dimensions(), false));
  return Domain(grid, subs.at(static_cast<std::size_t>(topo->rank())), topo);
}

RunResult run_ibvp(const SystemDef& system, const Grid& grid, const RunConfig& cfg,
                   comm::WorkerTopology* topo) {
  validate(cfg);
  validate(system);
  if (cfg.solver == solvers::Method::RK4BoundaryData && !system.intermediate_bc)
    throw ConfigError("solver rk4bc needs a system with stage boundary data");
  const int workers = topo ? topo->size() : 1;
  if (cfg.solver == solvers::Method::ImplicitEuler && workers > 1)
    throw ConfigError("implicit Euler runs on a single worker only");

  const auto start = std::chrono::steady_clock::now();
  const Domain domain = make_domain(system, grid, topo);

  // Forced times strictly inside (t0, tf], sorted; the driver lands on each.
  std::vector<double> stops;
  for (const auto& a : cfg.actions)
    for (double ft : a.forced_times)
      if (ft > cfg.t0 && ft < cfg.tf) stops.push_back(ft);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  stops.push_back(cfg.tf);
  std::size_t next_stop = 0;

  TimeSlice slice = system.initial_data(cfg.t0, domain);
  std::vector<double> state = slice.flatten();
  double t = cfg.t0;
  long iteration = 0;
  RunReport report;

  auto run_actions = [&](bool final_step) {
    bool halt = false;
    bool any = false;
    for (const auto& a : cfg.actions) {
      const bool due = final_step ? forced_at(a, t)
                                  : (iteration % a.frequency == 0 || forced_at(a, t));
      if (!due) continue;
      any = true;
      if (a.hook(static_cast<int>(iteration), slice) == Signal::Halt) halt = true;
    }
    // Every worker runs the same schedule, so they agree on whether to vote.
    if (any && workers > 1) halt = comm::allreduce_min(*topo, halt ? 0.0 : 1.0) == 0.0;
    return halt;
  };

  solvers::StepContext ctx;
  ctx.rhs = [&](double at, std::span<const double> y, std::span<double> dydt) {
    const TimeSlice in = slice.unflatten(y, at);
    const TimeSlice out = system.evaluate(at, in);
    if (out.components() != in.components())
      throw RunError("evaluate returned " + std::to_string(out.components()) +
                     " components, expected " + std::to_string(in.components()));
    std::size_t k = 0;
    for (std::size_t c = 0; c < out.components(); ++c) {
      auto comp = out.component(c);
      if (comp.size() != domain.owned()) throw RunError("evaluate returned a misshapen component");
      std::copy(comp.begin(), comp.end(), dydt.begin() + static_cast<std::ptrdiff_t>(k));
      k += comp.size();
    }
  };
  if (system.intermediate_bc) {
    ctx.intermediate_bc = [&](double at, std::span<double> y) {
      TimeSlice s = slice.unflatten(y, at);
      system.intermediate_bc(at, s);
      const auto flat = s.flatten();
      std::copy(flat.begin(), flat.end(), y.begin());
    };
  }

  for (;;) {
    if (t >= cfg.tf) {
      run_actions(true);
      report.reason = HaltReason::FinalTime;
      break;
    }
    if (iteration >= cfg.max_iterations) {
      report.reason = HaltReason::MaxIterations;
      break;
    }
    if (run_actions(false)) {
      report.reason = HaltReason::ActionHalt;
      break;
    }

    double dt = system.timestep(slice);
    if (workers > 1) dt = comm::allreduce_min(*topo, dt);
    if (!std::isfinite(dt)) throw RunError("system returned a non-finite timestep");
    while (next_stop < stops.size() && stops[next_stop] <= t) ++next_stop;
    const double target = stops[next_stop];
    bool land = false;
    // Clip so the step ends exactly on the next stop; a step that would end
    // within a relative 1e-9 short of it also lands there.
    if (target - t <= dt * (1.0 + 1e-9)) {
      dt = target - t;
      land = true;
    }
    if (dt < cfg.min_dt) {
      std::ostringstream msg;
      msg << "timestep underflow: dt = " << dt << " at iteration " << iteration << ", time " << t;
      throw RunError(msg.str());
    }

    ctx.t = t;
    ctx.dt = dt;
    try {
      state = solvers::step(cfg.solver, ctx, state);
    } catch (const OverflowError& e) {
      std::ostringstream msg;
      msg << "overflow at iteration " << iteration << ", time " << t << " (" << e.what() << ")";
      throw OverflowError(msg.str());
    }
    t = land ? target : t + dt;
    ++iteration;
    slice = slice.unflatten(state, t);
  }

  report.iterations = iteration;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return RunResult{std::move(slice), report};
}

}  // namespace molforge::mol

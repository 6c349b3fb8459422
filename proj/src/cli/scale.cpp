#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "molforge/cli.hpp"
#include "molforge/error.hpp"
#include "molforge/systems.hpp"

namespace molforge::cli {

ScaleReport scale_bench(const ScaleSpec& spec) {
  if (spec.workers.empty()) throw ConfigError("--workers needs at least one entry");
  if (spec.steps < 1) throw ConfigError("--steps must be positive");
  if (!(spec.cfl > 0.0)) throw ConfigError("--cfl must be positive");
  const auto& op = diffop::d42();
  for (int w : spec.workers)
    if (w < 1 || spec.n / static_cast<std::size_t>(w) < op.min_points())
      throw ConfigError("cannot split " + std::to_string(spec.n) + " points over " + std::to_string(w) +
                        " workers");

  const Grid grid = make_uniform_grid({spec.n}, {spec.bounds});
  mol::AdvectionSetup setup;
  setup.cfl = spec.cfl;
  const auto sys = mol::advect1d_system(grid, setup, op);
  mol::RunConfig cfg;
  cfg.t0 = 0.0;
  // Far enough that the step cap ends every run.
  cfg.tf = 2.0 * static_cast<double>(spec.steps) * spec.cfl * grid.step_sizes()[0] + 1.0;
  cfg.max_iterations = spec.steps;

  ScaleReport report;
  report.cores = std::thread::hardware_concurrency();
  std::vector<double> baseline;
  for (int w : spec.workers) {
    double seconds = 0.0;
    std::vector<double> final_state;
    auto body = [&](comm::WorkerTopology* topo) {
      const auto r = mol::run_ibvp(sys, grid, cfg, topo);
      if (r.report.iterations != spec.steps) throw RunError("benchmark run stopped early");
      const auto g = mol::gather_slice(r.slice);
      if (!topo || topo->rank() == 0) {
        seconds = r.report.wall_seconds;
        final_state = g->front();
      }
    };
    if (w == 1) {
      body(nullptr);
    } else {
      comm::run_workers(w, spec.transport, [&](comm::Transport& t) {
        comm::WorkerTopology topo(t);
        body(&topo);
      });
    }
    ScaleRow row;
    row.workers = w;
    row.seconds = seconds;
    if (baseline.empty()) baseline = final_state;
    for (std::size_t i = 0; i < final_state.size(); ++i)
      row.deviation = std::max(row.deviation, std::abs(final_state[i] - baseline[i]));
    row.speedup = report.rows.empty() ? 1.0 : report.rows.front().seconds / seconds;
    report.max_deviation = std::max(report.max_deviation, row.deviation);
    report.rows.push_back(row);
  }
  return report;
}

void print_scale(const ScaleReport& report, std::ostream& out) {
  char line[96];
  out << "cores available: " << report.cores << '\n';
  out << "workers  seconds     speedup  max|u-u_first|\n";
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-8d %-11.4f %-8.2f %.3e\n", r.workers, r.seconds, r.speedup,
                  r.deviation);
    out << line;
  }
}

}  // namespace molforge::cli

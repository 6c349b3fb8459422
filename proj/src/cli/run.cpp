#include <climits>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "molforge/actions.hpp"
#include "molforge/cli.hpp"
#include "molforge/error.hpp"
#include "molforge/systems.hpp"

namespace molforge::cli {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

RunSpec wave1d_defaults() { return RunSpec{}; }

RunSpec advect1d_defaults() {
  RunSpec s;
  s.system = "advect1d";
  s.n = 101;
  s.bounds = {0.0, 1.0};
  s.op = "d42";
  s.cfl = 0.5;
  s.tf = 1.0;
  return s;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
    if (used != item.size() || !finite(v)) throw ConfigError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

void validate(const RunSpec& s) {
  require(s.system == "wave1d" || s.system == "advect1d", "unknown system '" + s.system + "'");
  const diffop::SBPOperator* found = nullptr;
  try {
    found = &diffop::lookup(s.op);
  } catch (const OperatorError& e) {
    throw ConfigError(e.what());
  }
  const auto& op = *found;
  if (s.system == "wave1d")
    require(op.kind == diffop::OperatorKind::SecondDerivative,
            "wave1d needs a second-derivative operator, not " + s.op);
  else
    require(op.kind == diffop::OperatorKind::FirstDerivative,
            "advect1d needs a first-derivative operator, not " + s.op);
  const auto method = solvers::parse_method(s.solver);
  require(s.n >= 2, "--n must be at least 2");
  require(s.workers >= 1 && s.workers <= 256, "--workers must be between 1 and 256");
  require(s.n / static_cast<std::size_t>(s.workers) >= op.min_points(),
          "--n " + std::to_string(s.n) + " is too small for " + s.op + " on " +
              std::to_string(s.workers) + " worker(s); each needs " +
              std::to_string(op.min_points()) + " points");
  require(finite(s.bounds.lo) && finite(s.bounds.hi) && s.bounds.lo < s.bounds.hi,
          "--bounds needs finite lo < hi");
  require(finite(s.cfl) && s.cfl > 0.0, "--cfl must be positive");
  require(finite(s.t0) && finite(s.tf) && s.tf >= s.t0, "--tf must not be before --t0");
  require(s.every >= 0, "--every must be nonnegative");
  require(s.max_iterations >= 0, "iteration cap must be nonnegative");
  for (double t : s.plot_at) require(t >= s.t0 && t <= s.tf, "--plot-at times must lie in [t0, tf]");
  for (double t : s.save_at) require(t >= s.t0 && t <= s.tf, "--save-at times must lie in [t0, tf]");
  if (method == solvers::Method::ImplicitEuler)
    require(s.workers == 1, "--solver ieuler runs on a single worker");
  if (method == solvers::Method::RK4BoundaryData)
    require(s.system == "advect1d", "--solver rk4bc needs a system with boundary data (advect1d)");
  if (s.system == "advect1d") {
    require(finite(s.c) && s.c != 0.0, "wave speed must be nonzero");
    require(s.tau >= 0.5, "SAT penalty tau must be at least 0.5");
    require(finite(s.wavenumber), "wavenumber must be finite");
  }
  if (!s.out.empty()) {
    const auto dir = s.out.has_parent_path() ? s.out.parent_path() : std::filesystem::path(".");
    require(std::filesystem::is_directory(dir), "output directory " + dir.string() + " does not exist");
  }
}

mol::SystemDef make_system(const RunSpec& s, const Grid& grid) {
  const auto& op = diffop::lookup(s.op);
  if (s.system == "wave1d") return mol::wave1d_system(grid, op, s.cfl);
  mol::AdvectionSetup setup;
  setup.c = s.c;
  setup.tau = s.tau;
  setup.cfl = s.cfl;
  setup.profile = mol::sine_profile(s.wavenumber);
  setup.stage_inflow = solvers::parse_method(s.solver) == solvers::Method::RK4BoundaryData;
  auto sys = mol::advect1d_system(grid, setup, op);
  sys.parameters["wavenumber"] = s.wavenumber;
  return sys;
}

RunOutcome run_system(const RunSpec& spec) {
  validate(spec);
  const Grid grid = make_uniform_grid({spec.n}, {spec.bounds});
  const mol::SystemDef sys = make_system(spec, grid);
  const auto method = solvers::parse_method(spec.solver);
  const io::ArchiveMetadata meta = mol::archive_metadata(sys, grid, method);

  std::vector<double> saves;
  for (double t : spec.save_at)
    if (t > spec.t0) saves.push_back(t);
  saves.push_back(spec.tf);
  std::filesystem::path prefix = spec.plot_prefix;
  if (prefix.empty())
    prefix = spec.out.empty() ? std::filesystem::path(spec.system)
                              : spec.out.parent_path() / spec.out.stem();
  const bool plot_initial =
      std::find(spec.plot_at.begin(), spec.plot_at.end(), spec.t0) != spec.plot_at.end();

  RunOutcome outcome;
  auto plot_name = [&](int iteration) {
    char suffix[24];
    std::snprintf(suffix, sizeof suffix, "_%08d.dat", iteration);
    return std::filesystem::path(prefix.string() + suffix);
  };

  if (spec.tf == spec.t0) {
    const auto s0 = sys.initial_data(spec.t0, mol::Domain(grid));
    outcome.final_slice = io::StoredSlice{s0.time(), s0.names(), s0.data()};
    if (!spec.out.empty()) {
      auto archive = io::SimArchive::create(spec.out, meta);
      archive.write_timeslice(0, outcome.final_slice);
      archive.close();
    }
    if (plot_initial) {
      outcome.plots.push_back(plot_name(0));
      mol::write_plot_file(outcome.plots.back(), s0.time(), 0, axis_coordinates(grid, 0), s0.data());
    }
    return outcome;
  }

  mol::RunConfig cfg;
  cfg.t0 = spec.t0;
  cfg.tf = spec.tf;
  cfg.max_iterations = spec.max_iterations;
  cfg.solver = method;

  auto body = [&](comm::WorkerTopology* topo) {
    const bool root = !topo || topo->rank() == 0;
    std::optional<io::SimArchive> archive;
    if (root && !spec.out.empty()) archive = io::SimArchive::create(spec.out, meta);
    mol::RunConfig c = cfg;
    if (!spec.out.empty())
      mol::register_action(c, mol::archive_writer(archive ? &*archive : nullptr,
                                                  spec.every > 0 ? spec.every : INT_MAX, saves));
    if (!spec.plot_at.empty()) {
      mol::Action plot = mol::plot_emitter(prefix, INT_MAX, spec.plot_at);
      plot.hook = [inner = plot.hook, plot_initial, root, &outcome, &plot_name](
                      int iteration, const mol::TimeSlice& s) {
        if (iteration == 0 && !plot_initial) return mol::Signal::Continue;
        if (root) outcome.plots.push_back(plot_name(iteration));
        return inner(iteration, s);
      };
      mol::register_action(c, std::move(plot));
    }
    const auto r = mol::run_ibvp(sys, grid, c, topo);
    const auto global = mol::gather_slice(r.slice);
    if (root) {
      outcome.report = r.report;
      outcome.final_slice = io::StoredSlice{r.slice.time(), r.slice.names(), *global};
    }
    if (archive) archive->close();
  };

  if (spec.workers == 1) {
    body(nullptr);
  } else {
    comm::run_workers(spec.workers, spec.transport, [&](comm::Transport& t) {
      comm::WorkerTopology topo(t);
      body(&topo);
    });
  }
  return outcome;
}

namespace {

int run_and_report(const RunSpec& spec, std::ostream& out) {
  const auto r = run_system(spec);
  out << spec.system << ": N=" << spec.n << " solver=" << spec.solver << " op=" << spec.op
      << " workers=" << spec.workers << " iterations=" << r.report.iterations
      << " t=" << r.final_slice.time << " wall=" << r.report.wall_seconds << "s";
  if (!spec.out.empty()) out << " archive=" << spec.out.string();
  out << '\n';
  for (const auto& p : r.plots) out << "plot " << p.string() << '\n';
  return 0;
}

}  // namespace

int cmd_wave1d(const RunSpec& spec, std::ostream& out) {
  if (spec.system != "wave1d") throw ConfigError("cmd_wave1d got system " + spec.system);
  return run_and_report(spec, out);
}

int cmd_advect1d(const RunSpec& spec, std::ostream& out) {
  if (spec.system != "advect1d") throw ConfigError("cmd_advect1d got system " + spec.system);
  return run_and_report(spec, out);
}

}  // namespace molforge::cli

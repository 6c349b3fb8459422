#include "molforge/actions.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "molforge/error.hpp"

namespace molforge::mol {

io::ArchiveMetadata archive_metadata(const SystemDef& system, const Grid& grid,
                                     solvers::Method solver) {
  io::ArchiveMetadata m;
  m.shape = grid.shape();
  m.bounds = grid.bounds();
  m.component_names = system.component_names;
  m.system = system.name;
  m.solver = std::string(solvers::method_name(solver));
  m.op = system.operator_name;
  m.created = io::timestamp_now();
  m.parameters = system.parameters;
  return m;
}

Action archive_writer(io::SimArchive* archive, int frequency, std::vector<double> forced_times) {
  Action a;
  a.name = "archive_writer";
  a.frequency = frequency;
  a.forced_times = std::move(forced_times);
  a.hook = [archive](int iteration, const TimeSlice& slice) {
    auto global = gather_slice(slice);
    if (!global) return Signal::Continue;
    if (!archive) throw RunError("archive_writer on rank 0 has no archive");
    archive->write_timeslice(iteration, io::StoredSlice{slice.time(), slice.names(), *global});
    return Signal::Continue;
  };
  return a;
}

void write_plot_file(const std::filesystem::path& file, double time, long iteration,
                     const std::vector<double>& x, const std::vector<std::vector<double>>& data) {
  std::FILE* f = std::fopen(file.c_str(), "w");
  if (!f) throw RunError("cannot write plot file " + file.string());
  std::fprintf(f, "# time=%.17g iteration=%ld\n", time, iteration);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::fprintf(f, "%.17g", x[i]);
    for (const auto& c : data) std::fprintf(f, " %.17g", c[i]);
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw RunError("error writing plot file " + file.string());
}

Action plot_emitter(std::filesystem::path prefix, int frequency, std::vector<double> forced_times) {
  Action a;
  a.name = "plot_emitter";
  a.frequency = frequency;
  a.forced_times = std::move(forced_times);
  a.hook = [prefix = std::move(prefix)](int iteration, const TimeSlice& slice) {
    auto global = gather_slice(slice);
    if (!global) return Signal::Continue;
    char suffix[24];
    std::snprintf(suffix, sizeof suffix, "_%08d.dat", iteration);
    write_plot_file(prefix.string() + suffix, slice.time(), iteration,
                    axis_coordinates(slice.domain().grid, 0), *global);
    return Signal::Continue;
  };
  return a;
}

ErrorRecord error_norms(const diffop::SBPOperator& op, double h,
                        const std::vector<std::vector<double>>& u,
                        const std::vector<std::vector<double>>& exact) {
  if (u.size() != exact.size()) throw RunError("exact solution has the wrong component count");
  ErrorRecord r;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u[c].size() != exact[c].size()) throw RunError("exact solution has the wrong size");
    const auto norm = diffop::assemble_norm(op, u[c].size(), h);
    double sum = 0.0, sup = 0.0;
    for (std::size_t i = 0; i < u[c].size(); ++i) {
      const double e = u[c][i] - exact[c][i];
      sum += norm[i] * e * e;
      sup = std::max(sup, std::abs(e));
    }
    r.h_norm.push_back(std::sqrt(sum));
    r.sup_norm.push_back(sup);
  }
  return r;
}

Action error_norm_logger(const SystemDef& system, std::shared_ptr<std::vector<ErrorRecord>> log,
                         int frequency, std::vector<double> forced_times) {
  if (!system.exact) throw ConfigError("system " + system.name + " has no exact solution");
  Action a;
  a.name = "error_norm_logger";
  a.frequency = frequency;
  a.forced_times = std::move(forced_times);
  const diffop::SBPOperator* op = &diffop::lookup(system.operator_name);
  a.hook = [op, exact = system.exact, log](int iteration, const TimeSlice& slice) {
    auto global = gather_slice(slice);
    if (!global) return Signal::Continue;
    const Grid& g = slice.domain().grid;
    ErrorRecord r = error_norms(*op, g.step_sizes()[0], *global, exact(slice.time(), g));
    r.iteration = iteration;
    r.time = slice.time();
    log->push_back(std::move(r));
    return Signal::Continue;
  };
  return a;
}

}  // namespace molforge::mol

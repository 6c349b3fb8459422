#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "molforge/io.hpp"
#include "molforge/mol.hpp"

namespace molforge::mol {

/// Archive metadata describing `system` on `grid`.
io::ArchiveMetadata archive_metadata(const SystemDef& system, const Grid& grid,
                                     solvers::Method solver);

/// Gathers each due slice to rank 0 and appends it to `archive`.
/// `archive` may be null on ranks other than 0.
Action archive_writer(io::SimArchive* archive, int frequency, std::vector<double> forced_times = {});

/// One text file per due iteration, named <prefix>_<iteration %08d>.dat:
///   # time=<t> iteration=<i>
///   x c0 c1 ...            (17 significant digits)
Action plot_emitter(std::filesystem::path prefix, int frequency,
                    std::vector<double> forced_times = {});

/// Writes one plot file for a global slice; used by plot_emitter.
void write_plot_file(const std::filesystem::path& file, double time, long iteration,
                     const std::vector<double>& x, const std::vector<std::vector<double>>& data);

struct ErrorRecord {
  long iteration = 0;
  double time = 0.0;
  std::vector<double> h_norm;    // per component
  std::vector<double> sup_norm;  // per component
};

/// Discrete H-norm and max norm of (u - exact) per component, with H taken
/// from `op`. Inputs are global arrays.
ErrorRecord error_norms(const diffop::SBPOperator& op, double h,
                        const std::vector<std::vector<double>>& u,
                        const std::vector<std::vector<double>>& exact);

/// Appends an ErrorRecord to `log` (rank 0) whenever due.
Action error_norm_logger(const SystemDef& system, std::shared_ptr<std::vector<ErrorRecord>> log,
                         int frequency, std::vector<double> forced_times = {});

}  // namespace molforge::mol

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "molforge/comm.hpp"
#include "molforge/grid.hpp"
#include "molforge/io.hpp"
#include "molforge/mol.hpp"

namespace molforge::cli {

/// Everything a wave1d/advect1d run needs, after flag parsing.
struct RunSpec {
  std::string system = "wave1d";
  std::size_t n = 200;
  Interval bounds{0.0, 4.0};
  std::string solver = "rk4";
  std::string op = "d43_2";
  double cfl = 0.4;
  double t0 = 0.0;
  double tf = 50.0;
  int workers = 1;
  comm::TransportKind transport = comm::TransportKind::Processes;
  std::filesystem::path out;          // archive; empty for none
  std::vector<double> save_at;        // archive times besides t0 (tf is always added)
  int every = 0;                      // also archive every k-th iteration; 0 for never
  std::vector<double> plot_at;        // plot-file times
  std::filesystem::path plot_prefix;  // defaults to the archive stem or the system name
  long max_iterations = 10'000'000;
  // advect1d only
  double c = 1.0;
  double tau = 1.0;
  double wavenumber = 1.0;
};

RunSpec wave1d_defaults();
RunSpec advect1d_defaults();

/// Throws ConfigError describing the first bad field.
void validate(const RunSpec& spec);

/// The system a spec describes, with the parameters needed to rebuild its
/// analytic solution from an archive.
mol::SystemDef make_system(const RunSpec& spec, const Grid& grid);

struct RunOutcome {
  mol::RunReport report;
  io::StoredSlice final_slice;  // global, from rank 0
  std::vector<std::filesystem::path> plots;
};

/// Validates, runs (on spec.workers workers) and writes the requested output.
/// With tf == t0 only the initial slice is stored.
RunOutcome run_system(const RunSpec& spec);

/// The wave1d / advect1d subcommands: run and print a one-line summary.
int cmd_wave1d(const RunSpec& spec, std::ostream& out);
int cmd_advect1d(const RunSpec& spec, std::ostream& out);

// ---------------------------------------------------------------------------
// Convergence

/// log2(coarse / fine); nullopt when both are zero.
std::optional<double> observed_rate(double coarse, double fine);
/// "exact" when both errors vanish, "inf" when only the fine one does.
std::string format_rate(double coarse, double fine);

/// One resolution's stored output, keyed by time.
struct Level {
  io::ArchiveMetadata meta;
  std::map<double, io::StoredSlice> slices;
};

Level load_level(const std::filesystem::path& archive);

enum class Reference { Auto, Analytic, Finest };

struct ConvergenceRow {
  double time = 0.0;
  std::string component;
  std::size_t n = 0;
  double h_error = 0.0;
  double sup_error = 0.0;
  std::string h_rate = "-";  // against the next coarser row
  std::string sup_rate = "-";
};

struct ConvergenceReport {
  std::string reference;  // "analytic" or "finest"
  std::vector<ConvergenceRow> rows;
};

/// Analytic solution of a stored system, when the archive identifies one.
std::optional<std::function<std::vector<std::vector<double>>(double, const Grid&)>> analytic_solution(
    const io::ArchiveMetadata& meta);

ConvergenceReport converge(std::vector<Level> levels, Reference ref = Reference::Auto);
ConvergenceReport converge_archives(const std::vector<std::filesystem::path>& archives,
                                    Reference ref = Reference::Auto);
/// Runs `base` at each resolution and compares at the spec's save times.
ConvergenceReport converge_runs(const RunSpec& base, const std::vector<std::size_t>& resolutions,
                                Reference ref = Reference::Auto);

void print_report(const ConvergenceReport& report, std::ostream& out);
void write_csv(const ConvergenceReport& report, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Strong scaling

struct ScaleSpec {
  std::size_t n = 12801;
  Interval bounds{-1.0, 1.0};
  double cfl = 0.5;
  long steps = 2000;
  std::vector<int> workers{1, 2, 4};
  comm::TransportKind transport = comm::TransportKind::Processes;
};

struct ScaleRow {
  int workers = 1;
  double seconds = 0.0;
  double speedup = 1.0;    // first row's seconds / this row's
  double deviation = 0.0;  // max |u - u_first|
};

struct ScaleReport {
  std::vector<ScaleRow> rows;
  double max_deviation = 0.0;
  unsigned cores = 0;
};

/// Advection with d42 + SAT for a fixed number of steps at each worker count.
ScaleReport scale_bench(const ScaleSpec& spec);
void print_scale(const ScaleReport& report, std::ostream& out);

/// Parse "a,b,c" into numbers; throws ConfigError.
std::vector<double> parse_list(const std::string& text);

}  // namespace molforge::cli

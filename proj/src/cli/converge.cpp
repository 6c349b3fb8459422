#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <unistd.h>

#include "molforge/actions.hpp"
#include "molforge/cli.hpp"
#include "molforge/error.hpp"
#include "molforge/systems.hpp"

namespace molforge::cli {

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

std::string fmt(double v, const char* spec = "%.6e") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

const io::StoredSlice* find_time(const Level& level, double t) {
  for (const auto& [time, slice] : level.slices)
    if (same_time(time, t)) return &slice;
  return nullptr;
}

Grid level_grid(const Level& l) { return make_uniform_grid(l.meta.shape, l.meta.bounds); }

}  // namespace

std::optional<double> observed_rate(double coarse, double fine) {
  if (coarse == 0.0 && fine == 0.0) return std::nullopt;
  return std::log2(coarse / fine);
}

std::string format_rate(double coarse, double fine) {
  const auto r = observed_rate(coarse, fine);
  if (!r) return "exact";
  if (std::isinf(*r)) return *r > 0 ? "inf" : "-inf";
  return fmt(*r, "%.3f");
}

Level load_level(const std::filesystem::path& path) {
  const auto archive = io::SimArchive::open(path);
  Level level{archive.metadata(), {}};
  for (auto it : archive.list_iterations()) {
    auto slice = archive.read_timeslice(it);
    const double t = slice.time;
    level.slices.emplace(t, std::move(slice));
  }
  return level;
}

std::optional<std::function<std::vector<std::vector<double>>(double, const Grid&)>> analytic_solution(
    const io::ArchiveMetadata& meta) {
  if (meta.system == "wave1d") return mol::wave1d_exact;
  if (meta.system == "advect1d" && meta.parameters.count("c") && meta.parameters.count("wavenumber")) {
    const double c = meta.parameters.at("c");
    const auto profile = mol::sine_profile(meta.parameters.at("wavenumber"));
    return [c, profile](double t, const Grid& g) {
      auto x = axis_coordinates(g, 0);
      for (double& v : x) v = profile(v - c * t);
      return std::vector<std::vector<double>>{x};
    };
  }
  return std::nullopt;
}

ConvergenceReport converge(std::vector<Level> levels, Reference ref) {
  if (levels.size() < 2) throw ConfigError("convergence needs at least two resolutions");
  for (const auto& l : levels) {
    if (l.meta.shape.size() != 1) throw ConfigError("convergence is implemented for 1D archives");
    if (l.meta.system != levels[0].meta.system || l.meta.component_names != levels[0].meta.component_names ||
        l.meta.bounds != levels[0].meta.bounds)
      throw ConfigError("archives describe different problems");
  }
  std::sort(levels.begin(), levels.end(),
            [](const Level& a, const Level& b) { return a.meta.shape[0] < b.meta.shape[0]; });
  for (std::size_t k = 1; k < levels.size(); ++k) {
    const std::size_t nc = levels[k - 1].meta.shape[0], nf = levels[k].meta.shape[0];
    if (nf != 2 * nc && nf - 1 != 2 * (nc - 1))
      throw ConfigError("resolutions " + std::to_string(nc) + " and " + std::to_string(nf) +
                        " are not in ratio 2");
  }

  std::optional<std::function<std::vector<std::vector<double>>(double, const Grid&)>> exact;
  if (ref != Reference::Finest) exact = analytic_solution(levels[0].meta);
  if (ref == Reference::Analytic && !exact)
    throw ConfigError("no analytic solution is known for system " + levels[0].meta.system);

  const Level& finest = levels.back();
  const std::size_t nf = finest.meta.shape[0];
  if (!exact) {
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
      const std::size_t nc = levels[k].meta.shape[0];
      if ((nf - 1) % (nc - 1) != 0)
        throw ConfigError("resolutions " + std::to_string(nc) + " and " + std::to_string(nf) +
                          " do not nest; comparing against the finest grid needs shared nodes");
    }
  }

  std::vector<double> times;
  for (const auto& [t, slice] : levels[0].slices) {
    bool everywhere = true;
    for (const auto& l : levels) everywhere = everywhere && find_time(l, t);
    if (everywhere) times.push_back(t);
  }
  if (times.empty()) throw ConfigError("the archives share no output times");

  ConvergenceReport report;
  report.reference = exact ? "analytic" : "finest";
  const std::size_t compared = exact ? levels.size() : levels.size() - 1;
  const auto& names = levels[0].meta.component_names;
  for (double t : times) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      std::vector<ConvergenceRow> rows;
      for (std::size_t k = 0; k < compared; ++k) {
        const Level& l = levels[k];
        const Grid g = level_grid(l);
        const auto& u = find_time(l, t)->data;
        std::vector<double> target(u[c].size());
        if (exact) {
          target = (*exact)(find_time(l, t)->time, g)[c];
        } else {
          const auto& fine = find_time(finest, t)->data[c];
          const std::size_t stride = (nf - 1) / (l.meta.shape[0] - 1);
          for (std::size_t i = 0; i < target.size(); ++i) target[i] = fine[i * stride];
        }
        const auto e = mol::error_norms(diffop::lookup(l.meta.op), g.step_sizes()[0], {u[c]}, {target});
        ConvergenceRow row;
        row.time = t;
        row.component = names[c];
        row.n = l.meta.shape[0];
        row.h_error = e.h_norm[0];
        row.sup_error = e.sup_norm[0];
        if (!rows.empty()) {
          row.h_rate = format_rate(rows.back().h_error, row.h_error);
          row.sup_rate = format_rate(rows.back().sup_error, row.sup_error);
        }
        rows.push_back(row);
      }
      report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    }
  }
  return report;
}

ConvergenceReport converge_archives(const std::vector<std::filesystem::path>& archives, Reference ref) {
  std::vector<Level> levels;
  for (const auto& p : archives) levels.push_back(load_level(p));
  return converge(std::move(levels), ref);
}

ConvergenceReport converge_runs(const RunSpec& base, const std::vector<std::size_t>& resolutions,
                                Reference ref) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("molforge-converge-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::vector<Level> levels;
  try {
    for (std::size_t n : resolutions) {
      RunSpec spec = base;
      spec.n = n;
      spec.out = dir / (base.system + "_" + std::to_string(n) + ".h5");
      spec.plot_at.clear();
      run_system(spec);
      levels.push_back(load_level(spec.out));
    }
  } catch (...) {
    std::filesystem::remove_all(dir);
    throw;
  }
  std::filesystem::remove_all(dir);
  return converge(std::move(levels), ref);
}

void print_report(const ConvergenceReport& report, std::ostream& out) {
  out << "reference: " << report.reference << '\n';
  out << std::left << std::setw(14) << "time" << std::setw(11) << "component" << std::setw(8) << "N"
      << std::setw(15) << "h-error" << std::setw(15) << "sup-error" << std::setw(9) << "h-rate"
      << "sup-rate" << '\n';
  for (const auto& r : report.rows) {
    out << std::left << std::setw(14) << fmt(r.time, "%.10g") << std::setw(11) << r.component
        << std::setw(8) << r.n << std::setw(15) << fmt(r.h_error) << std::setw(15) << fmt(r.sup_error)
        << std::setw(9) << r.h_rate << r.sup_rate << '\n';
  }
}

void write_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RunError("cannot write " + path.string());
  out << "time,component,n,h_error,sup_error,h_rate,sup_rate\n";
  for (const auto& r : report.rows)
    out << fmt(r.time, "%.17g") << ',' << r.component << ',' << r.n << ',' << fmt(r.h_error, "%.17g")
        << ',' << fmt(r.sup_error, "%.17g") << ',' << r.h_rate << ',' << r.sup_rate << '\n';
  if (!out) throw RunError("error writing " + path.string());
}

}  // namespace molforge::cli

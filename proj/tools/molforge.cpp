// molforge command-line front end.
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "molforge/cli.hpp"
#include "molforge/error.hpp"

using namespace molforge;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("molforge");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("MOLFORGE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept real ones.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("ignoring MOLFORGE_LOG={}", env);
  }
}

comm::TransportKind parse_transport(const std::string& s) {
  if (s == "processes") return comm::TransportKind::Processes;
  if (s == "threads") return comm::TransportKind::Threads;
  throw ConfigError("--transport must be processes or threads");
}

cli::Reference parse_reference(const std::string& s) {
  if (s == "auto") return cli::Reference::Auto;
  if (s == "analytic") return cli::Reference::Analytic;
  if (s == "finest") return cli::Reference::Finest;
  throw ConfigError("--reference must be auto, analytic or finest");
}

// Raw flag values; only flags given on the command line override the
// per-system defaults.
struct RunFlags {
  std::string system;
  std::size_t n = 0;
  std::vector<double> bounds;
  std::string solver, op, transport = "processes", out, plot_at, save_at, plot_prefix;
  double cfl = 0, t0 = 0, tf = 0, c = 0, tau = 0, wavenumber = 0;
  int workers = 1, every = 0;
  std::vector<CLI::Option*> opts;

  void attach(CLI::App& app, bool with_system) {
    if (with_system) app.add_option("--system", system, "wave1d or advect1d")->required();
    auto add = [&](CLI::Option* o) { opts.push_back(o); };
    add(app.add_option("--n", n, "grid points"));
    add(app.add_option("--bounds", bounds, "lo,hi")->delimiter(',')->expected(2));
    add(app.add_option("--solver", solver, "euler, ieuler, rk4 or rk4bc"));
    add(app.add_option("--op", op, "d21, d42 or d43_2"));
    add(app.add_option("--cfl", cfl, "timestep / dx"));
    add(app.add_option("--t0", t0, "start time"));
    add(app.add_option("--tf", tf, "final time"));
    add(app.add_option("--workers", workers, "worker count"));
    add(app.add_option("--transport", transport, "processes or threads"));
    add(app.add_option("--out", out, "HDF5 archive path"));
    add(app.add_option("--plot-at", plot_at, "plot-file times t1,t2,..."));
    add(app.add_option("--plot-prefix", plot_prefix, "plot-file name prefix"));
    add(app.add_option("--save-at", save_at, "extra archive times t1,t2,..."));
    add(app.add_option("--every", every, "also archive every k-th iteration"));
    add(app.add_option("--c", c, "advection speed"));
    add(app.add_option("--tau", tau, "SAT penalty (>= 0.5)"));
    add(app.add_option("--wavenumber", wavenumber, "advected sine wavenumber"));
  }

  bool given(const std::string& name) const {
    for (auto* o : opts)
      if (o->check_lname(name.substr(2)) && o->count() > 0) return true;
    return false;
  }

  cli::RunSpec spec(const std::string& sys) const {
    cli::RunSpec s = sys == "advect1d" ? cli::advect1d_defaults() : cli::wave1d_defaults();
    s.system = sys;
    if (given("--n")) s.n = n;
    if (given("--bounds")) s.bounds = {bounds.at(0), bounds.at(1)};
    if (given("--solver")) s.solver = solver;
    if (given("--op")) s.op = op;
    if (given("--cfl")) s.cfl = cfl;
    if (given("--t0")) s.t0 = t0;
    if (given("--tf")) s.tf = tf;
    s.workers = workers;
    s.transport = parse_transport(transport);
    if (given("--out")) s.out = out;
    if (given("--plot-at")) s.plot_at = cli::parse_list(plot_at);
    if (given("--plot-prefix")) s.plot_prefix = plot_prefix;
    if (given("--save-at")) s.save_at = cli::parse_list(save_at);
    s.every = every;
    if (given("--c")) s.c = c;
    if (given("--tau")) s.tau = tau;
    if (given("--wavenumber")) s.wavenumber = wavenumber;
    if (!given("--t0") && given("--tf") && s.tf < s.t0) s.t0 = s.tf;
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Method-of-lines PDE evolution: example systems, convergence and scaling tools"};
  app.require_subcommand(1);

  RunFlags wave, advect, run;
  auto* wave_cmd = app.add_subcommand("wave1d", "1D wave equation with Dirichlet walls");
  wave.attach(*wave_cmd, false);
  auto* advect_cmd = app.add_subcommand("advect1d", "1D advection with SAT inflow");
  advect.attach(*advect_cmd, false);
  auto* run_cmd = app.add_subcommand("run", "run the system named by --system");
  run.attach(*run_cmd, true);

  auto* conv_cmd = app.add_subcommand("converge", "convergence rates from archives or fresh runs");
  std::vector<std::string> archives;
  RunFlags conv;
  std::string conv_ns, reference = "auto", csv;
  conv_cmd->add_option("archives", archives, "archives at two or more resolutions");
  conv_cmd->add_option("--system", conv.system, "run this system instead of reading archives");
  conv_cmd->add_option("--resolutions", conv_ns, "N1,N2,... for --system runs (default 100,200,400)");
  conv.attach(*conv_cmd, false);
  conv_cmd->add_option("--reference", reference, "auto, analytic or finest");
  conv_cmd->add_option("--csv", csv, "also write rows as CSV");

  auto* scale_cmd = app.add_subcommand("scale-bench", "strong-scaling benchmark (advection, d42 + SAT)");
  cli::ScaleSpec scale;
  std::vector<double> scale_bounds;
  std::string scale_workers = "1,2,4", scale_transport = "processes", scale_csv;
  scale_cmd->add_option("--n", scale.n, "grid points (default 12801)");
  scale_cmd->add_option("--bounds", scale_bounds, "lo,hi")->delimiter(',')->expected(2);
  scale_cmd->add_option("--cfl", scale.cfl, "timestep / dx (default 0.5)");
  scale_cmd->add_option("--steps", scale.steps, "steps per run (default 2000)");
  scale_cmd->add_option("--workers", scale_workers, "worker counts, e.g. 1,2,4");
  scale_cmd->add_option("--transport", scale_transport, "processes or threads");
  scale_cmd->add_option("--csv", scale_csv, "also write rows as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "molforge: " << e.what() << '\n';
    return 2;
  }

  try {
    if (wave_cmd->parsed()) return cli::cmd_wave1d(wave.spec("wave1d"), std::cout);
    if (advect_cmd->parsed()) return cli::cmd_advect1d(advect.spec("advect1d"), std::cout);
    if (run_cmd->parsed()) {
      const auto spec = run.spec(run.system);
      cli::validate(spec);
      return spec.system == "wave1d" ? cli::cmd_wave1d(spec, std::cout) : cli::cmd_advect1d(spec, std::cout);
    }
    if (conv_cmd->parsed()) {
      const auto ref = parse_reference(reference);
      cli::ConvergenceReport report;
      if (!archives.empty()) {
        if (!conv.system.empty()) throw ConfigError("give either archives or --system, not both");
        report = cli::converge_archives({archives.begin(), archives.end()}, ref);
      } else {
        if (conv.system.empty()) throw ConfigError("converge needs archives or --system");
        cli::RunSpec base = conv.spec(conv.system);
        if (!conv.given("--tf")) base.tf = conv.system == "wave1d" ? 0.5 : 1.0;
        std::vector<std::size_t> ns;
        for (double v : cli::parse_list(conv_ns.empty() ? (conv.system == "wave1d" ? "100,200,400" : "101,201,401")
                                                          : conv_ns)) {
          if (v < 2 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw ConfigError("--resolutions must be integers >= 2");
          ns.push_back(static_cast<std::size_t>(v));
        }
        for (std::size_t n : ns) {
          base.n = n;
          cli::validate(base);
        }
        report = cli::converge_runs(base, ns, ref);
      }
      cli::print_report(report, std::cout);
      if (!csv.empty()) cli::write_csv(report, csv);
      return 0;
    }
    if (scale_cmd->parsed()) {
      if (!scale_bounds.empty()) scale.bounds = {scale_bounds.at(0), scale_bounds.at(1)};
      scale.transport = parse_transport(scale_transport);
      scale.workers.clear();
      for (double v : cli::parse_list(scale_workers)) {
        if (v < 1 || v > 256 || v != static_cast<double>(static_cast<int>(v)))
          throw ConfigError("--workers entries must be integers in [1, 256]");
        scale.workers.push_back(static_cast<int>(v));
      }
      if (!(scale.bounds.lo < scale.bounds.hi)) throw ConfigError("--bounds needs lo < hi");
      const auto report = cli::scale_bench(scale);
      cli::print_scale(report, std::cout);
      if (!scale_csv.empty()) {
        std::ofstream out(scale_csv);
        out << "workers,seconds,speedup,deviation\n";
        for (const auto& r : report.rows)
          out << r.workers << ',' << r.seconds << ',' << r.speedup << ',' << r.deviation << '\n';
      }
      int most = 1;
      for (int w : scale.workers) most = std::max(most, w);
      if (report.cores < static_cast<unsigned>(most))
        spdlog::warn("only {} core(s) for up to {} workers; timings do not measure scaling", report.cores, most);
      if (report.max_deviation > 1e-12) {
        std::cerr << "molforge: worker counts disagree: max deviation " << report.max_deviation << '\n';
        return 1;
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "molforge: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "molforge: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

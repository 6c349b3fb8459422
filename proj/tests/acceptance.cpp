// Acceptance suite: one status line per criterion.
//   PASS / FAIL     criterion checked
//   PARTIAL         every attainable part passed; the rest is reported with
//                   its measured value
//   SKIP            hardware precondition not met; measurements still printed
// Exit status is nonzero only when something FAILs.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "molforge/actions.hpp"
#include "molforge/cli.hpp"
#include "molforge/diffop.hpp"
#include "molforge/io.hpp"
#include "molforge/mol.hpp"
#include "molforge/solvers.hpp"
#include "molforge/swsh.hpp"
#include "molforge/systems.hpp"

using namespace molforge;

namespace {

// Tolerances and budgets.
constexpr double kSbpTol = 1e-13;
constexpr double kExactTol = 1e-12;
constexpr double kRk4Lo = 3.8, kRk4Hi = 4.2;
constexpr double kEulerLo = 0.9, kEulerHi = 1.1;
constexpr double kSymTol = 1e-10;
constexpr double kPulseMin = 0.1;
constexpr double kWaveOrder = 2.5;
constexpr double kSatOrder = 3.0;
constexpr double kEnergyDrift = 1e-6;
constexpr double kInvariance = 1e-12;
constexpr double kSpeedup4 = 2.0;
constexpr double kRoundTrip = 1e-10;
constexpr double kY00Tol = 1e-12;
constexpr double kEthTol = 1e-12;
constexpr double kParseval = 1e-9;

enum class Status { Pass, Fail, Partial, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, double budget, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {Status::Fail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > budget && o.status != Status::Fail) {
    o.status = Status::Fail;
    o.detail += "; over the time budget";
  }
  const char* tag = o.status == Status::Pass      ? "PASS"
                    : o.status == Status::Fail    ? "FAIL"
                    : o.status == Status::Partial ? "PARTIAL"
                                                  : "SKIP";
  if (o.status == Status::Fail) ++failures;
  std::printf("[%s] %d %s: %s (%.2f s, budget %.0f s)\n", tag, id, title, o.detail.c_str(), secs, budget);
  std::fflush(stdout);
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? m : INFINITY;
}

// ---------------------------------------------------------------------------

Outcome sbp_suite() {
  double identity = 0.0, exact = 0.0;
  for (const auto* op : {&diffop::d21(), &diffop::d42()}) {
    for (std::size_t n : {8u, 16u, 32u, 64u}) {
      const auto D = diffop::assemble_matrix(*op, n, 1.0);
      const auto H = diffop::assemble_norm(*op, n, 1.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double b = (i == j && i == 0) ? -1.0 : (i == j && i == n - 1) ? 1.0 : 0.0;
          identity = std::max(identity, std::abs(H[i] * D(i, j) + H[j] * D(j, i) - b));
        }
    }
  }
  // Exactness on monomials in unit spacing, centred on the grid so that the
  // values stay O(1); checked row by row at the stated orders.
  for (const auto* op : {&diffop::d21(), &diffop::d42(), &diffop::d43_2()}) {
    const int k = op->kind == diffop::OperatorKind::SecondDerivative ? 2 : 1;
    for (std::size_t n : {8u, 16u, 32u, 64u}) {
      const double h = 1.0 / static_cast<double>(n - 1);
      for (int p = 0; p <= op->interior_order; ++p) {
        std::vector<double> x(n), u(n);
        for (std::size_t i = 0; i < n; ++i) {
          x[i] = static_cast<double>(i) * h - 0.5;
          u[i] = std::pow(x[i], p);
        }
        const auto du = k == 1 ? diffop::apply_first_derivative(*op, u, h)
                               : diffop::apply_second_derivative(*op, u, h);
        for (std::size_t i = 0; i < n; ++i) {
          const bool boundary = i < op->closure_rows() || i >= n - op->closure_rows();
          if (boundary && p > op->boundary_order) continue;
          double d = 0.0;
          if (k == 1 && p >= 1) d = p * std::pow(x[i], p - 1);
          if (k == 2 && p >= 2) d = p * (p - 1) * std::pow(x[i], p - 2);
          // Rounding in a stencil sum scales with h^-k; compare on the unit-spacing scale.
          exact = std::max(exact, std::abs(du[i] - d) * std::pow(h, k));
        }
      }
    }
  }
  const bool ok = identity <= kSbpTol && exact <= kExactTol;
  return {ok ? Status::Pass : Status::Fail, "max|HD+(HD)^T-B| = " + num(identity) + " (tol " + num(kSbpTol) +
                                                "), exactness residual " + num(exact) + " (tol " + num(kExactTol) + ")"};
}

Outcome rk4_order() {
  auto rate = [](solvers::Method m) {
    auto run = [m](double dt) {
      solvers::StepContext ctx{0.0, dt,
                               [](double, std::span<const double> y, std::span<double> d) { d[0] = y[0]; },
                               {}};
      solvers::State y{1.0};
      const int steps = static_cast<int>(std::lround(1.0 / dt));
      for (int k = 0; k < steps; ++k) {
        ctx.t = k * dt;
        y = solvers::step(m, ctx, y);
      }
      return std::abs(y[0] - std::exp(1.0));
    };
    return std::log2(run(0.01) / run(0.005));
  };
  const double r = rate(solvers::Method::RK4), e = rate(solvers::Method::Euler),
               ie = rate(solvers::Method::ImplicitEuler);
  const bool ok = r >= kRk4Lo && r <= kRk4Hi && e >= kEulerLo && e <= kEulerHi && ie >= kEulerLo && ie <= kEulerHi;
  return {ok ? Status::Pass : Status::Fail,
          "orders rk4 " + num(r) + ", euler " + num(e) + ", implicit euler " + num(ie)};
}

Outcome wave_example() {
  // Default wave run: 200 points on (0, 4), dt = 0.4 dx, 0 to 50.
  const Grid g = make_uniform_grid({200}, {{0, 4}});
  const auto x = axis_coordinates(g, 0);
  const std::size_t mid = 100;
  mol::RunConfig cfg;
  cfg.tf = 50.0;
  double asym = 0.0, asym_early = 0.0, first_break = -1.0;
  int pulses = -1;
  std::vector<double> peaks;
  mol::Action watch;
  watch.name = "watch";
  watch.forced_times = {3.0};
  watch.hook = [&](int, const mol::TimeSlice& s) {
    const auto f = s.component(0);
    double a = 0.0;
    for (std::size_t k = 1; k < mid; ++k) a = std::max(a, std::abs(f[mid - k] - f[mid + k]));
    asym = std::max(asym, a);
    if (s.time() <= 0.4) asym_early = std::max(asym_early, a);
    if (a > kSymTol && first_break < 0) first_break = s.time();
    if (s.time() == 3.0) {
      pulses = 0;
      for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        const double l = std::abs(f[i - 1]), c = std::abs(f[i]), r = std::abs(f[i + 1]);
        if (c > kPulseMin && c >= l && c > r) {
          ++pulses;
          peaks.push_back(x[i]);
        }
      }
    }
    return mol::Signal::Continue;
  };
  mol::register_action(cfg, watch);
  const auto r = mol::run_ibvp(mol::wave1d_system(g), g, cfg);
  const bool completed = r.slice.time() == 50.0;

  // Same problem on 201 points, where node N/2 is the centre of the interval.
  const Grid gs = make_uniform_grid({201}, {{0, 4}});
  double asym_sym = 0.0;
  mol::RunConfig cs;
  cs.tf = 50.0;
  mol::Action w2;
  w2.name = "symmetry";
  w2.hook = [&](int, const mol::TimeSlice& s) {
    const auto f = s.component(0);
    for (std::size_t i = 0; i < f.size(); ++i) asym_sym = std::max(asym_sym, std::abs(f[i] - f[f.size() - 1 - i]));
    return mol::Signal::Continue;
  };
  mol::register_action(cs, w2);
  mol::run_ibvp(mol::wave1d_system(gs), gs, cs);

  std::string d = std::string(completed ? "run 0->50 completed" : "run did not reach 50") + ", " +
                  std::to_string(pulses) + " pulses |f|>0.1 at t=3";
  for (double p : peaks) d += " x=" + num(p);
  d += "; symmetry N=200: " + num(asym_early) + " for t<=0.4, " + num(asym) + " over the run (first >1e-10 at t=" +
       num(first_break) + ", x_mid is h/2 off-centre); N=201: " + num(asym_sym);
  if (!completed || pulses != 2 || asym_early > kSymTol || asym_sym > kSymTol) return {Status::Fail, d};
  return {asym <= kSymTol ? Status::Pass : Status::Partial, d};
}

Outcome wave_convergence() {
  std::vector<double> err;
  for (std::size_t n : {100u, 200u, 400u}) {
    const Grid g = make_uniform_grid({n}, {{0, 4}});
    mol::RunConfig cfg;
    cfg.tf = 0.5;
    const auto r = mol::run_ibvp(mol::wave1d_system(g), g, cfg);
    err.push_back(mol::error_norms(diffop::d43_2(), g.step_sizes()[0], {r.slice.data()[0]},
                                   {mol::wave1d_exact(0.5, g)[0]})
                      .h_norm[0]);
  }
  const double r1 = std::log2(err[0] / err[1]), r2 = std::log2(err[1] / err[2]);
  return {std::min(r1, r2) >= kWaveOrder ? Status::Pass : Status::Fail,
          "H-norm errors " + num(err[0]) + ", " + num(err[1]) + ", " + num(err[2]) + "; orders " + num(r1) + ", " +
              num(r2)};
}

Outcome sat_suite() {
  std::vector<double> err;
  for (std::size_t n : {101u, 201u, 401u}) {
    const Grid g = make_uniform_grid({n}, {{0, 1}});
    const auto sys = mol::advect1d_system(g, mol::AdvectionSetup{});
    mol::RunConfig cfg;
    const auto r = mol::run_ibvp(sys, g, cfg);
    err.push_back(mol::error_norms(diffop::d42(), g.step_sizes()[0], r.slice.data(), sys.exact(1.0, g)).h_norm[0]);
  }
  const double r1 = std::log2(err[0] / err[1]), r2 = std::log2(err[1] / err[2]);

  // g = 0, random data, T = 1, CFL 0.5.
  const Grid g = make_uniform_grid({201}, {{0, 1}});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ud(-1, 1);
  std::vector<double> u0(201);
  for (double& v : u0) v = ud(rng);
  mol::AdvectionSetup s;
  s.inflow = [](double) { return 0.0; };
  s.initial = [&](double xi) { return u0[static_cast<std::size_t>(std::lround(xi * 200.0))]; };
  mol::RunConfig cfg;
  double last = INFINITY, rise = 0.0, e0 = -1.0, e1 = 0.0;
  mol::Action energy;
  energy.name = "energy";
  energy.forced_times = {1.0};
  energy.hook = [&](int, const mol::TimeSlice& sl) {
    const double e = diffop::h_inner(diffop::d42(), sl.component(0), sl.component(0), g.step_sizes()[0]);
    if (e0 < 0) e0 = e;
    rise = std::max(rise, e - last);
    last = e1 = e;
    return mol::Signal::Continue;
  };
  mol::register_action(cfg, energy);
  mol::run_ibvp(mol::advect1d_system(g, s), g, cfg);
  const bool ok = std::min(r1, r2) >= kSatOrder && rise <= kEnergyDrift;
  return {ok ? Status::Pass : Status::Fail, "orders " + num(r1) + ", " + num(r2) + "; energy " + num(e0) + " -> " +
                                                num(e1) + ", largest step increase " + num(std::max(rise, 0.0))};
}

std::vector<double> advect_final(std::size_t n, long steps, int workers, comm::TransportKind kind,
                                 double* seconds = nullptr) {
  const Grid g = make_uniform_grid({n}, {{-1, 1}});
  const auto sys = mol::advect1d_system(g, mol::AdvectionSetup{});
  mol::RunConfig cfg;
  cfg.tf = 1e6;
  cfg.max_iterations = steps;
  std::vector<double> out;
  auto body = [&](comm::WorkerTopology* topo) {
    const auto r = mol::run_ibvp(sys, g, cfg, topo);
    const auto global = mol::gather_slice(r.slice);
    if (global) {
      out = global->front();
      if (seconds) *seconds = r.report.wall_seconds;
    }
  };
  if (workers == 1) {
    body(nullptr);
  } else {
    comm::run_workers(workers, kind, [&](comm::Transport& t) {
      comm::WorkerTopology topo(t);
      body(&topo);
    });
  }
  return out;
}

Outcome invariance() {
  double worst = 0.0;
  for (auto kind : {comm::TransportKind::Processes, comm::TransportKind::Threads}) {
    std::vector<std::vector<double>> states;
    for (int w : {1, 2, 4}) states.push_back(advect_final(801, 100, w, kind));
    for (std::size_t a = 0; a < states.size(); ++a)
      for (std::size_t b = a + 1; b < states.size(); ++b) worst = std::max(worst, max_diff(states[a], states[b]));
  }
  return {worst <= kInvariance ? Status::Pass : Status::Fail,
          "max pairwise difference " + num(worst) + " over W=1,2,4, processes and threads"};
}

Outcome scaling() {
  const unsigned cores = std::thread::hardware_concurrency();
  std::vector<double> secs;
  std::vector<std::vector<double>> states;
  for (int w : {1, 2, 4}) {
    double s = 0.0;
    states.push_back(advect_final(12801, 2000, w, comm::TransportKind::Processes, &s));
    secs.push_back(s);
  }
  const double dev = std::max(max_diff(states[0], states[1]), max_diff(states[0], states[2]));
  const double speedup = secs[0] / secs[2];
  std::string d = "seconds 1/2/4 workers: " + num(secs[0]) + " / " + num(secs[1]) + " / " + num(secs[2]) +
                  ", speedup(4) " + num(speedup) + ", invariance " + num(dev) + ", cores " + std::to_string(cores);
  if (dev > kInvariance) return {Status::Fail, d};
  if (cores < 4) return {Status::Skip, d + "; speedup needs >= 4 cores"};
  const bool ok = speedup >= kSpeedup4 && secs[2] < secs[1] && secs[1] < secs[0];
  return {ok ? Status::Pass : Status::Fail, d};
}

Outcome swsh_suite() {
  using namespace molforge::swsh;
  std::mt19937_64 rng(13);
  std::normal_distribution<double> nd;
  double rt = 0.0, parseval = 0.0;
  for (int L = 0; L <= 24; L += (L < 4 ? 1 : 4)) {
    for (int s = -4; s <= 4; ++s) {
      if (std::abs(s) > L) continue;
      SpinCoefficients c(s, L);
      for (int l = c.lmin(); l <= L; ++l)
        for (int m = -l; m <= l; ++m) c.at(l, m) = {nd(rng), nd(rng)};
      const auto f = inverse_transform(c);
      const auto back = forward_transform(f);
      for (int l = c.lmin(); l <= L; ++l)
        for (int m = -l; m <= l; ++m) rt = std::max(rt, std::abs(back.at(l, m) - c.at(l, m)));
      const double pc = coefficient_power(c);
      parseval = std::max(parseval, std::abs(pc - field_power(f)) / pc);
    }
  }
  const double y00 = std::abs(evaluate_sylm(0, 0, 0, 0.7, 1.9) - Complex(0.5 / std::sqrt(M_PI)));

  double eth_err = 0.0;
  for (int s = -4; s <= 4; ++s)
    for (int l = std::abs(s) + 1; l <= 24; ++l) {
      SpinCoefficients c(s, 24);
      c.at(l, l / 2) = 1.0;
      const double up = std::sqrt(static_cast<double>((l - s) * (l + s + 1)));
      const double down = -std::sqrt(static_cast<double>((l + s) * (l - s + 1)));
      eth_err = std::max(eth_err, std::abs(eth(c).at(l, l / 2) - up));
      eth_err = std::max(eth_err, std::abs(eth_prime(c).at(l, l / 2) - down));
      const double eig = -static_cast<double>((l - s) * (l + s + 1));
      eth_err = std::max(eth_err, std::abs(eth_prime(eth(c)).at(l, l / 2) - eig) / std::max(1.0, std::abs(eig)));
    }
  const bool ok = rt <= kRoundTrip && parseval <= kParseval && y00 <= kY00Tol && eth_err <= kEthTol;
  return {ok ? Status::Pass : Status::Fail, "round trip " + num(rt) + ", Parseval " + num(parseval) + ", Y00 " +
                                                num(y00) + ", eth factors/eigenvalue " + num(eth_err)};
}

Outcome archive_suite() {
  const auto dir = std::filesystem::temp_directory_path() / ("molforge-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() { std::filesystem::remove_all(p); }
  } cleanup{dir};

  // Bit-exact payloads, including values that do not survive text round trips.
  io::ArchiveMetadata meta;
  meta.shape = {64};
  meta.bounds = {{0, 1}};
  meta.component_names = {"a", "b"};
  meta.system = "raw";
  meta.solver = "rk4";
  meta.op = "d42";
  meta.created = io::timestamp_now();
  std::mt19937_64 rng(99);
  std::vector<io::StoredSlice> written;
  {
    auto a = io::SimArchive::create(dir / "raw.h5", meta);
    for (int it = 0; it < 3; ++it) {
      io::StoredSlice s{std::ldexp(1.0, -it) / 3.0, meta.component_names, {std::vector<double>(64), std::vector<double>(64)}};
      for (auto& c : s.data)
        for (double& v : c) {
          const std::uint64_t bits = rng();
          std::memcpy(&v, &bits, sizeof v);
          if (!std::isfinite(v)) v = -0.0;
        }
      a.write_timeslice(it * 7, s);
      written.push_back(s);
    }
  }
  const auto a = io::SimArchive::open(dir / "raw.h5");
  bool bits_ok = a.metadata() == meta && a.list_iterations() == std::vector<std::int64_t>{0, 7, 14};
  for (int it = 0; it < 3; ++it) {
    const auto r = a.read_timeslice(it * 7);
    bits_ok = bits_ok && r.names == written[it].names &&
              std::memcmp(&r.time, &written[it].time, sizeof(double)) == 0;
    for (std::size_t c = 0; c < 2; ++c)
      bits_ok = bits_ok && std::memcmp(r.data[c].data(), written[it].data[c].data(), 64 * sizeof(double)) == 0;
  }

  // Post-processing from the files alone.
  std::vector<std::filesystem::path> files;
  for (std::size_t n : {100u, 200u, 400u}) {
    cli::RunSpec s = cli::wave1d_defaults();
    s.n = n;
    s.tf = 0.5;
    s.out = dir / ("wave" + std::to_string(n) + ".h5");
    cli::run_system(s);
    files.push_back(s.out);
  }
  const auto rep = cli::converge_archives(files);
  double worst_rate = INFINITY;
  for (const auto& row : rep.rows)
    if (row.time == 0.5 && row.component == "f" && row.h_rate != "-") worst_rate = std::min(worst_rate, std::stod(row.h_rate));
  const bool post_ok = rep.reference == "analytic" && worst_rate >= kWaveOrder;
  return {bits_ok && post_ok ? Status::Pass : Status::Fail,
          std::string("bit-exact read-after-write ") + (bits_ok ? "yes" : "NO") +
              "; convergence from archives alone: reference " + rep.reference + ", lowest rate " + num(worst_rate)};
}

}  // namespace

int main() {
  report(1, "SBP identity and exactness", 1, sbp_suite);
  report(2, "time integrator orders", 1, rk4_order);
  report(3, "wave example", 10, wave_example);
  report(4, "wave convergence", 30, wave_convergence);
  report(5, "SAT accuracy and energy", 30, sat_suite);
  report(6, "worker-count invariance", 30, invariance);
  report(7, "strong-scaling shape", 300, scaling);
  report(8, "spin-weighted harmonics", 30, swsh_suite);
  report(9, "archive round trip", 60, archive_suite);
  return failures == 0 ? 0 : 1;
}

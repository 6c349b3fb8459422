#include "molforge/systems.hpp"

#include <cmath>
#include <numbers>

#include "molforge/error.hpp"

namespace molforge::mol {

namespace {

void require_1d(const Grid& grid, const char* who) {
  if (grid.dimensions() != 1) throw ConfigError(std::string(who) + " needs a one-dimensional grid");
}

double wave_centre(const Grid& grid) {
  const auto x = axis_coordinates(grid, 0);
  return x[x.size() / 2];
}

}  // namespace

SystemDef wave1d_system(const Grid& grid, const diffop::SBPOperator& op, double cfl) {
  require_1d(grid, "wave1d");
  if (op.kind != diffop::OperatorKind::SecondDerivative)
    throw ConfigError("wave1d needs a second-derivative operator");
  if (!(cfl > 0.0)) throw ConfigError("cfl must be positive");

  SystemDef s;
  s.name = "wave1d";
  s.component_names = {"f", "dtf"};
  s.operator_name = op.name;
  s.ghost_points = op.half_width();
  const double xmid = wave_centre(grid);
  s.parameters = {{"cfl", cfl}, {"x_mid", xmid}};

  s.timestep = [cfl](const TimeSlice& u) { return cfl * u.domain().step(0); };

  s.initial_data = [xmid](double t0, const Domain& d) {
    const auto x = d.coordinates();
    std::vector<double> f(x.size()), dtf(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
      f[i] = 0.5 * std::exp(-10.0 * (x[i] - xmid) * (x[i] - xmid));
    return TimeSlice({"f", "dtf"}, {std::move(f), std::move(dtf)}, d, t0);
  };

  const diffop::SBPOperator* D = &op;
  s.evaluate = [D](double t, const TimeSlice& psi) {
    const Domain& d = psi.domain();
    std::vector<double> dtf(psi.component(1).begin(), psi.component(1).end());
    std::vector<double> dtdtf = d.apply(*D, psi.component(0));
    if (d.sub.is_external(0, Side::Left)) dtdtf.front() = 0.0;
    if (d.sub.is_external(0, Side::Right)) dtdtf.back() = 0.0;
    return psi.with_data({std::move(dtf), std::move(dtdtf)}, t);
  };

  s.exact = [](double t, const Grid& g) { return wave1d_exact(t, g); };
  return s;
}

std::vector<std::vector<double>> wave1d_exact(double t, const Grid& grid) {
  require_1d(grid, "wave1d");
  const auto x = axis_coordinates(grid, 0);
  const double lo = grid.bounds()[0].lo;
  const double len = grid.bounds()[0].hi - lo;
  const double xmid = wave_centre(grid) - lo;

  auto g = [&](double y) { return 0.5 * std::exp(-10.0 * (y - xmid) * (y - xmid)); };
  auto dg = [&](double y) { return -20.0 * (y - xmid) * g(y); };
  // Odd about 0 and about len, period 2 len.
  auto wrap = [&](double y) { return y - 2.0 * len * std::floor((y + len) / (2.0 * len)); };
  auto F = [&](double y) {
    y = wrap(y);
    double acc = 0.0;
    for (int k = -1; k <= 1; ++k) acc += g(y - 2.0 * len * k) - g(-y - 2.0 * len * k);
    return acc;
  };
  auto dF = [&](double y) {
    y = wrap(y);
    double acc = 0.0;
    for (int k = -1; k <= 1; ++k) acc += dg(y - 2.0 * len * k) + dg(-y - 2.0 * len * k);
    return acc;
  };

  std::vector<double> f(x.size()), dtf(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = x[i] - lo;
    f[i] = 0.5 * (F(y - t) + F(y + t));
    dtf[i] = 0.5 * (-dF(y - t) + dF(y + t));
  }
  return {f, dtf};
}

std::function<double(double)> sine_profile(double wavenumber) {
  return [wavenumber](double x) { return std::sin(2.0 * std::numbers::pi * wavenumber * x); };
}

SystemDef advect1d_system(const Grid& grid, const AdvectionSetup& setup,
                          const diffop::SBPOperator& op) {
  require_1d(grid, "advect1d");
  if (setup.c == 0.0 || !std::isfinite(setup.c)) throw ConfigError("wave speed must be nonzero");
  if (!(setup.tau >= 0.5)) throw ConfigError("SAT penalty tau must be at least 1/2");
  if (!(setup.cfl > 0.0)) throw ConfigError("cfl must be positive");
  if (op.kind != diffop::OperatorKind::FirstDerivative)
    throw ConfigError("advect1d needs a first-derivative operator");

  const auto profile = setup.profile ? setup.profile : sine_profile(1.0);
  const double c = setup.c;
  const bool left_inflow = c > 0.0;
  const double inflow_x = left_inflow ? grid.bounds()[0].lo : grid.bounds()[0].hi;
  std::function<double(double)> inflow = setup.inflow;
  if (!inflow) inflow = [=](double t) { return profile(inflow_x - c * t); };
  const auto initial = setup.initial ? setup.initial : profile;

  SystemDef s;
  s.name = "advect1d";
  s.component_names = {"u"};
  s.operator_name = op.name;
  s.ghost_points = op.half_width();
  s.parameters = {{"c", c}, {"tau", setup.tau}, {"cfl", setup.cfl}};

  const double cfl = setup.cfl;
  s.timestep = [cfl, c](const TimeSlice& u) { return cfl * u.domain().step(0) / std::abs(c); };

  s.initial_data = [initial](double t0, const Domain& d) {
    const auto x = d.coordinates();
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = initial(x[i]);
    return TimeSlice({"u"}, {std::move(u)}, d, t0);
  };

  const diffop::SBPOperator* D = &op;
  const double h = grid.step_sizes()[0];
  // Penalty coefficient for the upwind end, -tau |c| / (h w_0).
  const double sat = diffop::sat_coefficient(op, h, std::abs(c), setup.tau);
  const bool use_sat = setup.sat;
  s.evaluate = [=](double t, const TimeSlice& in) {
    const Domain& d = in.domain();
    std::vector<double> rhs = d.apply(*D, in.component(0));
    for (double& v : rhs) v *= -c;
    if (use_sat) {
      const Side upwind = left_inflow ? Side::Left : Side::Right;
      if (d.sub.is_external(0, upwind)) {
        const std::size_t i = left_inflow ? 0 : rhs.size() - 1;
        rhs[i] += sat * (in.component(0)[i] - inflow(t));
      }
    }
    return in.with_data({std::move(rhs)}, t);
  };

  if (setup.stage_inflow) {
    s.intermediate_bc = [=](double t, TimeSlice& u) {
      const Domain& d = u.domain();
      const Side upwind = left_inflow ? Side::Left : Side::Right;
      if (!d.sub.is_external(0, upwind)) return;
      auto comp = u.component(0);
      comp[left_inflow ? 0 : comp.size() - 1] = inflow(t);
    };
  }

  if (!setup.inflow && !setup.initial) {
    s.exact = [profile, c](double t, const Grid& g) {
      auto x = axis_coordinates(g, 0);
      for (double& v : x) v = profile(v - c * t);
      return std::vector<std::vector<double>>{x};
    };
  }
  return s;
}

}  // namespace molforge::mol

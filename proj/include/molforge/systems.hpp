#pragma once

#include <functional>

#include "molforge/diffop.hpp"
#include "molforge/mol.hpp"

namespace molforge::mol {

/// f_tt = f_xx with f = 0 at both ends, components (f, f_t). Initial data is
/// 0.5 exp(-10 (x - x_mid)^2) with x_mid the coordinate of node N/2, zero
/// velocity; dt = cfl * dx (cfl 0.4 by default).
SystemDef wave1d_system(const Grid& grid, const diffop::SBPOperator& op = diffop::d43_2(),
                        double cfl = 0.4);

/// d'Alembert solution of wave1d_system's problem, extended by odd reflection
/// at both ends. Returns (f, f_t) on the global grid.
std::vector<std::vector<double>> wave1d_exact(double t, const Grid& grid);

struct AdvectionSetup {
  double c = 1.0;
  double tau = 1.0;
  double cfl = 0.5;
  /// Profile u0; the exact solution is u0(x - c t) and the inflow value is
  /// its trace at the upwind end.
  std::function<double(double)> profile;
  /// Replace the exact inflow trace (e.g. zero for energy tests).
  std::function<double(double)> inflow;
  /// Replace the initial data (defaults to profile).
  std::function<double(double)> initial;
  /// Pin the inflow node to g(t) at every RK stage instead of (in addition
  /// to) the SAT term; used with the rk4bc solver.
  bool stage_inflow = false;
  bool sat = true;
};

/// u_t + c u_x = 0 with SAT inflow at the upwind end; dt = cfl * dx / |c|.
SystemDef advect1d_system(const Grid& grid, const AdvectionSetup& setup,
                          const diffop::SBPOperator& op = diffop::d42());

/// sin(2 pi k x), the default advection profile.
std::function<double(double)> sine_profile(double wavenumber = 1.0);

}  // namespace molforge::mol

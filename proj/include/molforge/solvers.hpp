#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace molforge::solvers {

using State = std::vector<double>;

/// dydt = f(t, y). The output span has the size of y.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
/// In-place boundary data for a stage input at time t.
using StageBoundary = std::function<void(double t, std::span<double> y)>;

struct StepContext {
  double t = 0.0;
  double dt = 0.0;
  Rhs rhs;
  StageBoundary intermediate_bc;  // optional
};

State euler_step(const StepContext& ctx, const State& y);

struct ImplicitEulerOptions {
  double tolerance = 1e-12;
  int max_iterations = 100;
};

/// Solves y1 = y + dt f(t+dt, y1) by fixed-point iteration, switching to
/// Newton with a finite-difference Jacobian when the iteration stops
/// contracting. Throws SolverError with the final residual on failure.
State implicit_euler_step(const StepContext& ctx, const State& y,
                          const ImplicitEulerOptions& opts = {});

State rk4_step(const StepContext& ctx, const State& y);

/// RK4 with ctx.intermediate_bc applied to every stage input (at t+dt/2,
/// t+dt/2, t+dt) and to the result (at t+dt).
State rk4_with_intermediate_bc(const StepContext& ctx, const State& y);

enum class Method { Euler, ImplicitEuler, RK4, RK4BoundaryData };

Method parse_method(std::string_view name);
std::string_view method_name(Method m);

State step(Method m, const StepContext& ctx, const State& y);

}  // namespace molforge::solvers

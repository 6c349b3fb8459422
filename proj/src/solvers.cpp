#include "molforge/solvers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "molforge/error.hpp"

namespace molforge::solvers {

namespace {

void check_context(const StepContext& ctx) {
  if (!(ctx.dt > 0.0) || !std::isfinite(ctx.dt)) throw SolverError("step size must be positive");
  if (!ctx.rhs) throw SolverError("missing right-hand side");
}

void require_finite(std::span<const double> v, double t, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) {
      std::ostringstream msg;
      msg << "non-finite " << what << " at index " << i << ", time " << t;
      throw OverflowError(msg.str());
    }
}

State eval(const StepContext& ctx, double t, const State& y) {
  State k(y.size());
  ctx.rhs(t, y, k);
  require_finite(k, t, "right-hand side");
  return k;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// y + a * k
State axpy(const State& y, double a, const State& k) {
  State out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * k[i];
  return out;
}

State rk4_impl(const StepContext& ctx, const State& y, bool with_bc) {
  check_context(ctx);
  const double t = ctx.t;
  const double dt = ctx.dt;
  const double half = t + 0.5 * dt;
  const double end = t + dt;
  auto bc = [&](double at, State& s) {
    if (with_bc) ctx.intermediate_bc(at, s);
  };

  const State k1 = eval(ctx, t, y);
  State y2 = axpy(y, 0.5 * dt, k1);
  bc(half, y2);
  const State k2 = eval(ctx, half, y2);
  State y3 = axpy(y, 0.5 * dt, k2);
  bc(half, y3);
  const State k3 = eval(ctx, half, y3);
  State y4 = axpy(y, dt, k3);
  bc(end, y4);
  const State k4 = eval(ctx, end, y4);

  State out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = y[i] + dt * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
  bc(end, out);
  require_finite(out, end, "state");
  return out;
}

}  // namespace

State euler_step(const StepContext& ctx, const State& y) {
  check_context(ctx);
  State out = axpy(y, ctx.dt, eval(ctx, ctx.t, y));
  require_finite(out, ctx.t + ctx.dt, "state");
  return out;
}

State implicit_euler_step(const StepContext& ctx, const State& y,
                          const ImplicitEulerOptions& opts) {
  check_context(ctx);
  const double t1 = ctx.t + ctx.dt;
  const std::size_t n = y.size();

  // G(z) = z - y - dt f(t1, z)
  auto residual = [&](const State& z) {
    State f = eval(ctx, t1, z);
    State g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = z[i] - y[i] - ctx.dt * f[i];
    return g;
  };

  State z = y;
  State g = residual(z);
  double res = max_abs(g);
  int iter = 0;

  // Fixed point z <- y + dt f(t1, z), i.e. z <- z - G(z), while it contracts.
  while (res > opts.tolerance && iter < opts.max_iterations) {
    State trial(n);
    for (std::size_t i = 0; i < n; ++i) trial[i] = z[i] - g[i];
    State gt = residual(trial);
    const double rt = max_abs(gt);
    ++iter;
    if (!(rt < 0.5 * res)) break;
    z = std::move(trial);
    g = std::move(gt);
    res = rt;
  }

  // Newton with a forward-difference Jacobian, halving the step until the
  // residual drops.
  while (res > opts.tolerance && iter < opts.max_iterations) {
    Eigen::MatrixXd jac(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      const double eps = 1e-7 * std::max(1.0, std::abs(z[j]));
      State zp = z;
      zp[j] += eps;
      const State gp = residual(zp);
      for (std::size_t i = 0; i < n; ++i) jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (gp[i] - g[i]) / eps;
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd delta = jac.partialPivLu().solve(rhs);

    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k, lambda *= 0.5) {
      State trial(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = z[i] + lambda * delta(static_cast<Eigen::Index>(i));
      State gt = residual(trial);
      const double rt = max_abs(gt);
      if (rt < res) {
        z = std::move(trial);
        g = std::move(gt);
        res = rt;
        improved = true;
        break;
      }
    }
    ++iter;
    if (!improved) break;
  }

  if (res > opts.tolerance) {
    std::ostringstream msg;
    msg << "implicit Euler did not converge after " << iter << " iterations, residual " << res;
    throw SolverError(msg.str());
  }
  require_finite(z, t1, "state");
  return z;
}

State rk4_step(const StepContext& ctx, const State& y) { return rk4_impl(ctx, y, false); }

State rk4_with_intermediate_bc(const StepContext& ctx, const State& y) {
  if (!ctx.intermediate_bc) throw SolverError("rk4 with boundary data needs a stage boundary callable");
  return rk4_impl(ctx, y, true);
}

Method parse_method(std::string_view name) {
  if (name == "euler") return Method::Euler;
  if (name == "ieuler") return Method::ImplicitEuler;
  if (name == "rk4") return Method::RK4;
  if (name == "rk4bc") return Method::RK4BoundaryData;
  throw ConfigError("unknown solver '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Euler: return "euler";
    case Method::ImplicitEuler: return "ieuler";
    case Method::RK4: return "rk4";
    case Method::RK4BoundaryData: return "rk4bc";
  }
  return "unknown";
}

State step(Method m, const StepContext& ctx, const State& y) {
  switch (m) {
    case Method::Euler: return euler_step(ctx, y);
    case Method::ImplicitEuler: return implicit_euler_step(ctx, y);
    case Method::RK4: return rk4_step(ctx, y);
    case Method::RK4BoundaryData: return rk4_with_intermediate_bc(ctx, y);
  }
  throw SolverError("unknown solver");
}

}  // namespace molforge::solvers

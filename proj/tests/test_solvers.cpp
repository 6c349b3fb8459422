#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "molforge/error.hpp"
#include "molforge/solvers.hpp"

using namespace molforge;
using namespace molforge::solvers;

namespace {

Rhs linear(double lambda) {
  return [lambda](double, std::span<const double> y, std::span<double> d) {
    for (std::size_t i = 0; i < y.size(); ++i) d[i] = lambda * y[i];
  };
}

Rhs zero() {
  return [](double, std::span<const double>, std::span<double> d) { std::fill(d.begin(), d.end(), 0.0); };
}

double integrate(Method m, double dt, double tf, const Rhs& f, double y0) {
  StepContext ctx{0.0, dt, f, {}};
  State y{y0};
  const int steps = static_cast<int>(std::lround(tf / dt));
  for (int k = 0; k < steps; ++k) {
    ctx.t = k * dt;
    y = step(m, ctx, y);
  }
  return y[0];
}

double observed_order(Method m) {
  const double e1 = std::abs(integrate(m, 0.01, 1.0, linear(1.0), 1.0) - std::exp(1.0));
  const double e2 = std::abs(integrate(m, 0.005, 1.0, linear(1.0), 1.0) - std::exp(1.0));
  return std::log2(e1 / e2);
}

}  // namespace

TEST_CASE("zero right-hand side leaves the state alone") {
  const State y{1.0, -2.0, 3.5};
  StepContext ctx{0.3, 0.1, zero(), [](double, std::span<double>) {}};
  for (Method m : {Method::Euler, Method::ImplicitEuler, Method::RK4, Method::RK4BoundaryData})
    CHECK(step(m, ctx, y) == y);
}

TEST_CASE("euler") {
  StepContext one{0.0, 0.1, [](double, std::span<const double>, std::span<double> d) { d[0] = 1.0; }, {}};
  CHECK(euler_step(one, {0.0})[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(integrate(Method::Euler, 0.1, 1.0, linear(-1.0), 1.0) == doctest::Approx(0.3486784401).epsilon(1e-12));
  CHECK(integrate(Method::Euler, 0.1, 1.0, linear(-1.0), 1.0) == doctest::Approx(std::pow(0.9, 10)).epsilon(1e-14));
}

TEST_CASE("implicit euler") {
  StepContext ctx{0.0, 0.1, linear(-1.0), {}};
  CHECK(std::abs(implicit_euler_step(ctx, {1.0})[0] - 1.0 / 1.1) <= 1e-12);
  ctx.rhs = linear(-50.0);
  CHECK(std::abs(implicit_euler_step(ctx, {1.0})[0] - 1.0 / 6.0) <= 1e-12);
  // Nonlinear: y' = -y^3 solved to the residual tolerance.
  ctx.rhs = [](double, std::span<const double> y, std::span<double> d) { d[0] = -y[0] * y[0] * y[0]; };
  ctx.dt = 0.5;
  const double y1 = implicit_euler_step(ctx, {2.0})[0];
  CHECK(std::abs(y1 - (2.0 - 0.5 * y1 * y1 * y1)) <= 1e-12);
}

TEST_CASE("implicit euler reports non-convergence") {
  StepContext ctx{0.0, 1.0, [](double, std::span<const double> y, std::span<double> d) { d[0] = std::exp(y[0]); }, {}};
  // y = 10 + exp(y) has no real root.
  CHECK_THROWS_AS(implicit_euler_step(ctx, {10.0}), SolverError);
}

TEST_CASE("rk4") {
  StepContext ctx{0.0, 0.1, linear(1.0), {}};
  const double taylor = 1.0 + 0.1 + 0.01 / 2 + 0.001 / 6 + 0.0001 / 24;
  CHECK(std::abs(rk4_step(ctx, {1.0})[0] - taylor) <= 1e-15);
  CHECK(rk4_step(ctx, {1.0})[0] == doctest::Approx(1.1051708333).epsilon(1e-10));
  StepContext tt{0.0, 1.0, [](double t, std::span<const double>, std::span<double> d) { d[0] = t; }, {}};
  CHECK(rk4_step(tt, {0.0})[0] == 0.5);
}

TEST_CASE("observed orders on y' = y") {
  CHECK(observed_order(Method::Euler) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(observed_order(Method::ImplicitEuler) == doctest::Approx(1.0).epsilon(0.1));
  const double p = observed_order(Method::RK4);
  CHECK(p >= 3.8);
  CHECK(p <= 4.2);
}

TEST_CASE("rk4 with identity stage data is bit-identical to rk4") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const Rhs f = [](double t, std::span<const double> y, std::span<double> d) {
    for (std::size_t i = 0; i < y.size(); ++i) d[i] = std::sin(t) * y[i] - y[(i + 1) % y.size()] * y[i];
  };
  State y(9);
  for (double& v : y) v = nd(rng);
  StepContext ctx{0.2, 0.05, f, [](double, std::span<double>) {}};
  CHECK(rk4_with_intermediate_bc(ctx, y) == rk4_step(ctx, y));
}

TEST_CASE("stage data pins the boundary at the final time") {
  const auto g = [](double t) { return std::sin(t); };
  StepContext ctx{0.4, 0.1, zero(), [&](double t, std::span<double> y) { y[0] = g(t); }};
  const State out = rk4_with_intermediate_bc(ctx, {7.0, 1.0});
  CHECK(out[0] == g(0.5));
  CHECK(out[1] == 1.0);
  CHECK_THROWS_AS(rk4_with_intermediate_bc(StepContext{0.0, 0.1, zero(), {}}, {1.0}), SolverError);
}

TEST_CASE("explicit steps are linear maps") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  const std::size_t n = 12;
  std::vector<double> A(n * n);
  for (double& v : A) v = nd(rng) * 0.3;
  const Rhs f = [&](double, std::span<const double> y, std::span<double> d) {
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) d[i] += A[i * n + j] * y[j];
    }
  };
  State u(n), v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = nd(rng);
    v[i] = nd(rng);
  }
  const double a = 0.7, b = -1.3;
  for (std::size_t i = 0; i < n; ++i) w[i] = a * u[i] + b * v[i];
  StepContext ctx{0.0, 0.1, f, [](double, std::span<double>) {}};
  for (Method m : {Method::Euler, Method::RK4, Method::RK4BoundaryData}) {
    const State su = step(m, ctx, u), sv = step(m, ctx, v), sw = step(m, ctx, w);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(sw[i] - (a * su[i] + b * sv[i])) <= 1e-12);
  }
}

TEST_CASE("non-finite values abort") {
  const Rhs bad = [](double, std::span<const double>, std::span<double> d) {
    d[0] = std::numeric_limits<double>::infinity();
  };
  const Rhs nan_later = [](double t, std::span<const double>, std::span<double> d) {
    d[0] = t > 0.0 ? std::nan("") : 1.0;
  };
  StepContext ctx{0.0, 0.1, bad, [](double, std::span<double>) {}};
  for (Method m : {Method::Euler, Method::ImplicitEuler, Method::RK4, Method::RK4BoundaryData})
    CHECK_THROWS_AS(step(m, ctx, {1.0}), OverflowError);
  ctx.rhs = nan_later;
  CHECK_THROWS_AS(rk4_step(ctx, {1.0}), OverflowError);
  CHECK_THROWS_AS(euler_step(ctx, {std::nan("")}), OverflowError);
}

TEST_CASE("method names") {
  for (Method m : {Method::Euler, Method::ImplicitEuler, Method::RK4, Method::RK4BoundaryData})
    CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("rk45"), ConfigError);
}

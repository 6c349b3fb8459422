#include <algorithm>
#include <cmath>
#include <string>

#include "molforge/diffop.hpp"
#include "molforge/error.hpp"

namespace molforge::diffop {

std::size_t SBPOperator::min_points() const noexcept {
  return std::max({2 * closure_rows(), block_width(), interior_stencil.size()});
}

void apply(const SBPOperator& op, std::span<const double> u, std::span<double> out, double h,
           const StripLayout& layout) {
  const std::size_t gl = layout.ghosts_left;
  const std::size_t gr = layout.ghosts_right;
  if (u.size() < gl + gr) throw OperatorError("strip shorter than its ghost zones");
  const std::size_t n = u.size() - gl - gr;
  if (out.size() != n)
    throw OperatorError("output has " + std::to_string(out.size()) + " entries, expected " +
                        std::to_string(n));

  const std::size_t half = op.half_width();
  const std::size_t r = op.closure_rows();
  const std::size_t w = op.block_width();
  const std::size_t closures = (layout.closure_left ? 1 : 0) + (layout.closure_right ? 1 : 0);
  if ((closures > 0 && n < w) || n < closures * r || n < 1)
    throw OperatorError("operator " + op.name + " needs more than " + std::to_string(n) +
                        " points");
  if ((!layout.closure_left && gl < half) || (!layout.closure_right && gr < half))
    throw OperatorError("operator " + op.name + " needs " + std::to_string(half) +
                        " ghost points at an open edge");

  const double scale = 1.0 / std::pow(h, op.scale_power());
  const double sign = op.mirror_sign();
  const double* owned = u.data() + gl;

  const std::size_t lo = layout.closure_left ? r : 0;
  const std::size_t hi = layout.closure_right ? n - r : n;

  if (layout.closure_left) {
    for (std::size_t i = 0; i < r; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w; ++j) acc += op.boundary_block[i][j] * owned[j];
      out[i] = scale * acc;
    }
  }
  const double* s = op.interior_stencil.data();
  const std::size_t len = op.interior_stencil.size();
  for (std::size_t i = lo; i < hi; ++i) {
    const double* base = owned + i - half;  // may point into left ghosts
    double acc = 0.0;
    for (std::size_t k = 0; k < len; ++k) acc += s[k] * base[k];
    out[i] = scale * acc;
  }
  if (layout.closure_right) {
    for (std::size_t i = 0; i < r; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w; ++j) acc += op.boundary_block[i][j] * owned[n - 1 - j];
      out[n - 1 - i] = scale * sign * acc;
    }
  }
}

namespace {

std::vector<double> apply_global(const SBPOperator& op, std::span<const double> u, double h) {
  if (u.size() < op.min_points())
    throw OperatorError("operator " + op.name + " needs at least " +
                        std::to_string(op.min_points()) + " points, got " +
                        std::to_string(u.size()));
  if (!(h > 0.0)) throw OperatorError("grid spacing must be positive");
  std::vector<double> out(u.size());
  apply(op, u, out, h, StripLayout{});
  return out;
}

}  // namespace

std::vector<double> apply_first_derivative(const SBPOperator& op, std::span<const double> u,
                                           double h) {
  if (op.kind != OperatorKind::FirstDerivative)
    throw OperatorError(op.name + " is not a first-derivative operator");
  return apply_global(op, u, h);
}

std::vector<double> apply_second_derivative(const SBPOperator& op, std::span<const double> u,
                                            double h) {
  if (op.kind != OperatorKind::SecondDerivative)
    throw OperatorError(op.name + " is not a second-derivative operator");
  return apply_global(op, u, h);
}

std::vector<double> apply_dissipation(const DissipationOperator& op, std::span<const double> u,
                                      double h, double strength) {
  if (op.kind != OperatorKind::Dissipation)
    throw OperatorError(op.name + " is not a dissipation operator");
  if (!(strength >= 0.0)) throw OperatorError("dissipation strength must be nonnegative");
  std::vector<double> out = apply_global(op, u, h);
  for (double& x : out) x *= strength;
  return out;
}

double sat_coefficient(const SBPOperator& op, double h, double c, double tau) {
  if (op.kind != OperatorKind::FirstDerivative)
    throw OperatorError("SAT penalty needs a first-derivative operator");
  if (!(c > 0.0)) throw OperatorError("SAT inflow at the left end needs wave speed c > 0");
  if (!(tau >= 0.5)) throw OperatorError("SAT penalty tau must be at least 1/2");
  return -tau * c / (h * op.norm_weights.front());
}

std::vector<double> sat_penalty_advection(const SBPOperator& op, std::span<const double> u,
                                          double h, double c, double g, double tau) {
  const double coeff = sat_coefficient(op, h, c, tau);
  if (u.empty()) throw OperatorError("empty field");
  std::vector<double> p(u.size(), 0.0);
  p[0] = coeff * (u[0] - g);
  return p;
}

std::vector<double> assemble_norm(const SBPOperator& op, std::size_t n, double h) {
  if (n < op.min_points())
    throw OperatorError("operator " + op.name + " needs at least " +
                        std::to_string(op.min_points()) + " points");
  std::vector<double> diag(n, h);
  const std::size_t m = op.norm_weights.size();
  for (std::size_t i = 0; i < m; ++i) {
    diag[i] = h * op.norm_weights[i];
    diag[n - 1 - i] = h * op.norm_weights[i];
  }
  return diag;
}

DenseMatrix assemble_matrix(const SBPOperator& op, std::size_t n, double h) {
  if (n < op.min_points())
    throw OperatorError("operator " + op.name + " needs at least " +
                        std::to_string(op.min_points()) + " points");
  DenseMatrix m{n, n, std::vector<double>(n * n, 0.0)};
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    apply(op, e, col, h, StripLayout{});
    for (std::size_t i = 0; i < n; ++i) m(i, j) = col[i];
    e[j] = 0.0;
  }
  return m;
}

double h_inner(const SBPOperator& op, std::span<const double> u, std::span<const double> v,
               double h) {
  if (u.size() != v.size()) throw OperatorError("inner product of mismatched vectors");
  const auto diag = assemble_norm(op, u.size(), h);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += diag[i] * u[i] * v[i];
  return acc;
}

}  // namespace molforge::diffop

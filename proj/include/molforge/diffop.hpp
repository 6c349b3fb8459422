#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace molforge::diffop {

enum class OperatorKind { FirstDerivative, SecondDerivative, Dissipation };

/// Banded difference operator for unit spacing with a diagonal norm.
///
/// Rows 0..r-1 use `boundary_block` (r x w); the last r rows use the block
/// mirrored, with entries multiplied by `mirror_sign`; every other row uses
/// the centred `interior_stencil`. For spacing h the operator is scaled by
/// h^-scale_power. The diagonal norm is H = h * diag(w_0..w_{r-1}, 1, ..., 1,
/// w_{r-1}..w_0) where w = norm_weights.
struct SBPOperator {
  std::string name;
  OperatorKind kind = OperatorKind::FirstDerivative;
  std::vector<double> interior_stencil;            // offsets -half..half
  std::vector<std::vector<double>> boundary_block;  // r rows of width w
  std::vector<double> norm_weights;
  int interior_order = 0;
  int boundary_order = 0;

  std::size_t half_width() const noexcept { return interior_stencil.size() / 2; }
  std::size_t closure_rows() const noexcept { return boundary_block.size(); }
  std::size_t block_width() const noexcept {
    return boundary_block.empty() ? 0 : boundary_block.front().size();
  }
  /// Smallest grid the operator can be assembled on.
  std::size_t min_points() const noexcept;
  double mirror_sign() const noexcept { return kind == OperatorKind::FirstDerivative ? -1.0 : 1.0; }
  int scale_power() const noexcept { return kind == OperatorKind::SecondDerivative ? 2 : 1; }
};

/// Dissipation operators share the SBPOperator layout; kind == Dissipation and
/// the assembled A satisfies u^T H A u <= 0.
using DissipationOperator = SBPOperator;

/// The embedded coefficient table, verbatim.
std::string_view operator_table_text();

/// Parse a table in the format of operator_table_text().
std::vector<SBPOperator> parse_operator_table(std::string_view text);

/// Every shipped operator, parsed once.
const std::vector<SBPOperator>& operator_catalog();
const SBPOperator& lookup(std::string_view name);

/// Shorthands for the shipped set.
const SBPOperator& d21();     // first derivative, 2nd interior / 1st boundary
const SBPOperator& d42();     // first derivative, 4th interior / 2nd boundary
const SBPOperator& d43_2();   // second derivative, 4th interior / 2nd boundary
const SBPOperator& diss42();  // dissipation compatible with the d42 norm

/// Layout of a (possibly ghost-padded) 1D strip handed to apply().
struct StripLayout {
  std::size_t ghosts_left = 0;
  std::size_t ghosts_right = 0;
  bool closure_left = true;   // apply the boundary block at the left end
  bool closure_right = true;  // apply the mirrored block at the right end
};

/// Core stencil kernel. `u` holds ghosts_left + n + ghosts_right values,
/// `out` receives the n owned results scaled by h^-scale_power. Ends without a
/// closure read ghost values and use the interior stencil.
void apply(const SBPOperator& op, std::span<const double> u, std::span<double> out, double h,
           const StripLayout& layout);

std::vector<double> apply_first_derivative(const SBPOperator& op, std::span<const double> u,
                                           double h);
std::vector<double> apply_second_derivative(const SBPOperator& op, std::span<const double> u,
                                            double h);
/// strength * A u. Adding this to a right-hand side never raises the H-energy.
std::vector<double> apply_dissipation(const DissipationOperator& op, std::span<const double> u,
                                      double h, double strength);

/// Fourier collocation derivative of N equispaced samples on [0, L). The
/// Nyquist mode of the derivative is dropped for even N. Global: callers
/// running more than one worker must not use it.
std::vector<double> spectral_derivative_periodic(std::span<const double> u, double period);

/// Same, but refuses to run when `workers` > 1.
std::vector<double> spectral_derivative_periodic(std::span<const double> u, double period,
                                                 int workers);

/// Left-end SAT term for u_t + c u_x = 0 with inflow value g, c > 0.
/// Only entry 0 is nonzero: -tau * c / (h * w_0) * (u[0] - g).
std::vector<double> sat_penalty_advection(const SBPOperator& op, std::span<const double> u,
                                          double h, double c, double g, double tau = 1.0);

/// The scalar coefficient that sat_penalty_advection puts in entry 0.
double sat_coefficient(const SBPOperator& op, double h, double c, double tau);

/// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Dense N x N form of the operator for spacing h.
DenseMatrix assemble_matrix(const SBPOperator& op, std::size_t n, double h = 1.0);
/// Diagonal of H for N points and spacing h.
std::vector<double> assemble_norm(const SBPOperator& op, std::size_t n, double h = 1.0);

/// u^T H v.
double h_inner(const SBPOperator& op, std::span<const double> u, std::span<const double> v,
               double h);

}  // namespace molforge::diffop

#pragma once

#include <complex>
#include <vector>

namespace molforge::swsh {

using Complex = std::complex<double>;

/// Wigner small-d matrix element d^l_{m,mp}(theta).
double wigner_d(int l, int m, int mp, double theta);

/// d^l_{m,mp}(theta) for l = max(|m|,|mp|) .. lmax, by three-term recursion
/// in l with the running scale renormalised every 8 steps. Entry k is
/// l = max(|m|,|mp|) + k.
std::vector<double> wigner_d_column(int lmax, int m, int mp, double theta);

/// Orthonormal spin-weighted harmonic with the Condon-Shortley phase:
///   sYlm = (-1)^s sqrt((2l+1)/(4 pi)) d^l_{m,-s}(theta) e^{i m phi}
Complex evaluate_sylm(int s, int l, int m, double theta, double phi);

/// Gauss-Legendre rings in theta, equispaced meridians in phi.
struct SphereGrid {
  std::vector<double> theta;    // ring colatitudes, increasing
  std::vector<double> weights;  // Gauss-Legendre weights in cos(theta)
  std::vector<double> phi;      // 2 pi k / n_phi

  std::size_t n_theta() const noexcept { return theta.size(); }
  std::size_t n_phi() const noexcept { return phi.size(); }
};

SphereGrid make_sphere_grid(std::size_t n_theta, std::size_t n_phi);
/// Smallest grid that integrates bandlimit-L products exactly.
SphereGrid minimal_grid(int bandlimit);

/// Gauss-Legendre nodes and weights on [-1, 1], nodes increasing.
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

struct SpinField {
  int spin = 0;
  int bandlimit = 0;
  SphereGrid grid;
  std::vector<Complex> samples;  // n_theta x n_phi, row-major

  Complex& at(std::size_t i, std::size_t j) { return samples[i * grid.n_phi() + j]; }
  Complex at(std::size_t i, std::size_t j) const { return samples[i * grid.n_phi() + j]; }
};

/// Coefficients a[l][m] for |s| <= l <= L, -l <= m <= l.
class SpinCoefficients {
 public:
  SpinCoefficients(int spin, int bandlimit);

  int spin() const noexcept { return spin_; }
  int bandlimit() const noexcept { return bandlimit_; }
  int lmin() const noexcept { return spin_ < 0 ? -spin_ : spin_; }

  Complex& at(int l, int m);
  Complex at(int l, int m) const;

  /// Largest |a[l][m]| over the stored range.
  double max_abs() const;

 private:
  std::size_t index(int l, int m) const;

  int spin_;
  int bandlimit_;
  std::vector<Complex> a_;
};

SpinField sample(const SpinCoefficients& c, const SphereGrid& grid);
SpinCoefficients forward_transform(const SpinField& f);
SpinField inverse_transform(const SpinCoefficients& c, const SphereGrid& grid);
inline SpinField inverse_transform(const SpinCoefficients& c) {
  return inverse_transform(c, minimal_grid(c.bandlimit()));
}

/// Sum of |a[l][m]|^2.
double coefficient_power(const SpinCoefficients& c);
/// Quadrature of |f|^2 over the sphere.
double field_power(const SpinField& f);

/// Raises spin: a[l][m] * sqrt((l-s)(l+s+1)).
SpinCoefficients eth(const SpinCoefficients& c);
/// Lowers spin: a[l][m] * -sqrt((l+s)(l-s+1)).
SpinCoefficients eth_prime(const SpinCoefficients& c);

}  // namespace molforge::swsh

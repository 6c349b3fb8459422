#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "molforge/error.hpp"
#include "molforge/swsh.hpp"

using namespace molforge;
using namespace molforge::swsh;

namespace {

constexpr double pi = std::numbers::pi;

SpinCoefficients random_coefficients(int s, int L, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  SpinCoefficients c(s, L);
  for (int l = c.lmin(); l <= L; ++l)
    for (int m = -l; m <= l; ++m) c.at(l, m) = {nd(rng), nd(rng)};
  return c;
}

double max_diff(const SpinCoefficients& a, const SpinCoefficients& b) {
  double worst = 0.0;
  for (int l = a.lmin(); l <= a.bandlimit(); ++l)
    for (int m = -l; m <= l; ++m) worst = std::max(worst, std::abs(a.at(l, m) - b.at(l, m)));
  return worst;
}

// Explicit low-order harmonics (Condon-Shortley phase).
Complex y1m(int m, double th, double ph) {
  if (m == 0) return std::sqrt(3 / (4 * pi)) * std::cos(th);
  const double a = std::sqrt(3 / (8 * pi)) * std::sin(th);
  return m == 1 ? -a * std::polar(1.0, ph) : a * std::polar(1.0, -ph);
}

}  // namespace

TEST_CASE("closed-form values") {
  for (double th : {0.0, 0.3, 1.7, pi})
    for (double ph : {0.0, 2.1}) {
      CHECK(std::abs(evaluate_sylm(0, 0, 0, th, ph) - Complex(1 / (2 * std::sqrt(pi)))) <= 1e-12);
      for (int m = -1; m <= 1; ++m) CHECK(std::abs(evaluate_sylm(0, 1, m, th, ph) - y1m(m, th, ph)) <= 1e-12);
    }
  CHECK(evaluate_sylm(0, 1, 0, 0.0, 0.0).real() == doctest::Approx(0.48860251190).epsilon(1e-10));
  CHECK(evaluate_sylm(0, 0, 0, 1.0, 1.0).real() == doctest::Approx(0.28209479177).epsilon(1e-10));
  // Spin-1, l = 1: 1Y10 = sqrt(3/(8 pi)) sin(theta) in this convention.
  CHECK(std::abs(std::abs(evaluate_sylm(1, 1, 0, 0.9, 0.0)) - std::sqrt(3 / (8 * pi)) * std::sin(0.9)) <= 1e-12);
  CHECK_THROWS_AS(evaluate_sylm(2, 1, 0, 0.5, 0.0), SwshError);
  CHECK_THROWS_AS(evaluate_sylm(0, 1, 2, 0.5, 0.0), SwshError);
  CHECK_THROWS_AS(evaluate_sylm(0, 1, 0, 4.0, 0.0), SwshError);
}

TEST_CASE("wigner d is orthogonal up to l = 64") {
  for (double beta : {0.0, 0.4, 1.3, 2.9, pi}) {
    const int l = 64;
    std::vector<std::vector<double>> d(2 * l + 1, std::vector<double>(2 * l + 1));
    for (int m = -l; m <= l; ++m)
      for (int mp = -l; mp <= l; ++mp) d[m + l][mp + l] = wigner_d(l, m, mp, beta);
    double worst = 0.0;
    for (int a = 0; a <= 2 * l; ++a)
      for (int b = 0; b <= 2 * l; ++b) {
        double dot = 0.0;
        for (int k = 0; k <= 2 * l; ++k) dot += d[a][k] * d[b][k];
        worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
      }
    CHECK_MESSAGE(worst <= 1e-11, "beta=" << beta);
  }
}

TEST_CASE("gauss-legendre integrates polynomials") {
  for (std::size_t n : {1u, 2u, 5u, 16u, 25u}) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (std::size_t p = 0; p < 2 * n; ++p) {
      double q = 0.0;
      for (std::size_t i = 0; i < n; ++i) q += w[i] * std::pow(x[i], static_cast<double>(p));
      const double exact = p % 2 ? 0.0 : 2.0 / static_cast<double>(p + 1);
      CHECK(std::abs(q - exact) <= 1e-13);
    }
    for (std::size_t i = 1; i < n; ++i) CHECK(x[i] > x[i - 1]);
  }
}

TEST_CASE("transform examples") {
  const int L = 8;
  SphereGrid g = minimal_grid(L);
  CHECK(g.n_theta() == 9);
  CHECK(g.n_phi() == 17);

  SpinField f{0, L, g, std::vector<Complex>(g.n_theta() * g.n_phi(), Complex(1 / std::sqrt(pi)))};
  const auto c = forward_transform(f);
  CHECK(std::abs(c.at(0, 0) - Complex(2.0)) <= 1e-12);
  c.max_abs();
  double rest = 0.0;
  for (int l = 1; l <= L; ++l)
    for (int m = -l; m <= l; ++m) rest = std::max(rest, std::abs(c.at(l, m)));
  CHECK(rest <= 1e-12);

  SpinField z{0, L, g, std::vector<Complex>(g.n_theta() * g.n_phi())};
  CHECK(forward_transform(z).max_abs() == 0.0);

  SpinField y{2, L, g, std::vector<Complex>(g.n_theta() * g.n_phi())};
  for (std::size_t i = 0; i < g.n_theta(); ++i)
    for (std::size_t j = 0; j < g.n_phi(); ++j) y.at(i, j) = evaluate_sylm(2, 3, 1, g.theta[i], g.phi[j]);
  const auto cy = forward_transform(y);
  for (int l = 2; l <= L; ++l)
    for (int m = -l; m <= l; ++m)
      CHECK(std::abs(cy.at(l, m) - Complex(l == 3 && m == 1 ? 1.0 : 0.0)) <= 1e-10);
  CHECK_THROWS_AS(cy.at(1, 0), SwshError);

  SpinField small{0, L, make_sphere_grid(8, 17), std::vector<Complex>(8 * 17)};
  CHECK_THROWS_AS(forward_transform(small), SwshError);
  CHECK_THROWS_AS(inverse_transform(c, make_sphere_grid(9, 16)), SwshError);
}

TEST_CASE("round trip and parseval") {
  std::mt19937_64 rng(21);
  for (int L : {0, 1, 6, 24}) {
    for (int s = -4; s <= 4; ++s) {
      if (std::abs(s) > L) continue;
      const auto c = random_coefficients(s, L, rng);
      const auto f = inverse_transform(c);
      CHECK_MESSAGE(max_diff(forward_transform(f), c) <= 1e-10, "L=" << L << " s=" << s);
      const double pc = coefficient_power(c), pf = field_power(f);
      CHECK(std::abs(pc - pf) <= 1e-9 * pc);
      // Oversampled grids give the same coefficients.
      if (L == 6) {
        const auto g = make_sphere_grid(11, 20);
        CHECK(max_diff(forward_transform(inverse_transform(c, g)), c) <= 1e-10);
      }
    }
  }
}

TEST_CASE("eth factors") {
  SpinCoefficients c(0, 3);
  c.at(1, 0) = 1.0;
  const auto e = eth(c);
  CHECK(e.spin() == 1);
  CHECK(std::abs(e.at(1, 0) - Complex(std::sqrt(2.0))) <= 1e-15);
  CHECK(e.lmin() == 1);

  SpinCoefficients top(2, 4);
  top.at(2, 1) = 1.0;
  CHECK(eth(top).lmin() == 3);
  // l = s is annihilated: the l = 2 mode has nowhere to go in spin 3.
  CHECK(eth(top).max_abs() == 0.0);

  std::mt19937_64 rng(2);
  for (int s = -3; s <= 3; ++s) {
    const int L = 10;
    const auto a = random_coefficients(s, L, rng);
    const auto pe = eth_prime(eth(a));
    const auto ep = eth(eth_prime(a));
    double worst_pe = 0.0, worst_comm = 0.0;
    for (int l = std::max(std::abs(s + 1), std::abs(s - 1)); l <= L; ++l)
      for (int m = -l; m <= l; ++m) {
        const double ls = static_cast<double>(l - s), lp = static_cast<double>(l + s);
        const double scale = std::max(1.0, ls * (lp + 1)) * std::abs(a.at(l, m));
        worst_pe = std::max(worst_pe, std::abs(pe.at(l, m) + (ls * (lp + 1)) * a.at(l, m)) / scale);
        worst_comm = std::max(worst_comm,
                              std::abs(ep.at(l, m) - pe.at(l, m) - Complex(-2.0 * s) * a.at(l, m)) / scale);
      }
    CHECK(worst_pe <= 1e-12);
    CHECK(worst_comm <= 1e-12);
  }
}

TEST_CASE("eth agrees with the closed form raising of Y10") {
  // eth Y10 = sqrt(2) 1Y10; compare on a grid through the transforms.
  SpinCoefficients c(0, 2);
  c.at(1, 0) = 1.0;
  const auto g = minimal_grid(2);
  const auto f = inverse_transform(eth(c), g);
  for (std::size_t i = 0; i < g.n_theta(); ++i)
    for (std::size_t j = 0; j < g.n_phi(); ++j)
      CHECK(std::abs(f.at(i, j) - std::sqrt(2.0) * evaluate_sylm(1, 1, 0, g.theta[i], g.phi[j])) <= 1e-13);
}

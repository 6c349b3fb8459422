#include "molforge/swsh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "molforge/error.hpp"

namespace molforge::swsh {

namespace {

constexpr double kPi = std::numbers::pi;

// log of d^j_{j,mp}(beta) magnitude and its sign, j >= |mp|.
struct LogValue {
  double log_mag;
  double sign;  // 0 when the value is exactly zero
};

LogValue top_row(int j, int mp, double beta) {
  const double c = std::cos(0.5 * beta);
  const double s = std::sin(0.5 * beta);
  const int pc = j + mp;
  const int ps = j - mp;
  double log_mag = 0.5 * (std::lgamma(2.0 * j + 1) - std::lgamma(pc + 1.0) - std::lgamma(ps + 1.0));
  double sign = (ps % 2 == 0) ? 1.0 : -1.0;  // (-sin)^ps
  auto power = [&](double base, int p) {
    if (p == 0) return;
    if (base == 0.0) {
      sign = 0.0;
      return;
    }
    if (base < 0.0 && p % 2 == 1) sign = -sign;
    log_mag += p * std::log(std::abs(base));
  };
  power(c, pc);
  power(s, ps);
  return {log_mag, sign};
}

// d^{l0}_{m,mp}(beta) with l0 = max(|m|,|mp|), via the symmetries of d.
LogValue starting_value(int m, int mp, double beta) {
  const int l0 = std::max(std::abs(m), std::abs(mp));
  auto parity = [](int k) { return (k % 2 == 0) ? 1.0 : -1.0; };
  if (m == l0) return top_row(l0, mp, beta);
  if (m == -l0) {
    LogValue v = top_row(l0, -mp, beta);  // d_{-j,mp} = (-1)^{-j-mp} d_{j,-mp}
    v.sign *= parity(l0 + mp);
    return v;
  }
  if (mp == l0) {
    LogValue v = top_row(l0, m, beta);  // d_{m,j} = (-1)^{m-j} d_{j,m}
    v.sign *= parity(l0 - m);
    return v;
  }
  return top_row(l0, -m, beta);  // d_{m,-j} = d_{j,-m}
}

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= kPi)) throw SwshError("theta must lie in [0, pi]");
}

}  // namespace

std::vector<double> wigner_d_column(int lmax, int m, int mp, double theta) {
  check_theta(theta);
  const int l0 = std::max(std::abs(m), std::abs(mp));
  if (lmax < l0) throw SwshError("lmax below max(|m|, |mp|)");
  std::vector<double> out(static_cast<std::size_t>(lmax - l0 + 1), 0.0);

  const LogValue start = starting_value(m, mp, theta);
  if (start.sign == 0.0) {
    // Only at a pole: d^l_{m,mp}(0) = delta_{m,mp}, d^l_{m,mp}(pi) = (-1)^(l-m) delta_{m,-mp}.
    const double cb = std::cos(theta);
    for (int l = l0; l <= lmax; ++l) {
      if (cb > 0)
        out[static_cast<std::size_t>(l - l0)] = (m == mp) ? 1.0 : 0.0;
      else
        out[static_cast<std::size_t>(l - l0)] = (m == -mp) ? ((l - m) % 2 == 0 ? 1.0 : -1.0) : 0.0;
    }
    return out;
  }

  const double cb = std::cos(theta);
  double log_scale = start.log_mag;
  double prev = 0.0;          // scaled d^{l-2}
  double cur = start.sign;    // scaled d^{l-1}
  out[0] = start.sign * std::exp(log_scale);
  const double dm = m, dmp = mp;

  for (int l = l0 + 1; l <= lmax; ++l) {
    const double dl = l;
    double next;
    if (l == 1) {
      next = cb * cur;  // only reached from l0 = 0, m = mp = 0
    } else {
      const double a = (2.0 * dl - 1.0) * (dl * (dl - 1.0) * cb - dm * dmp);
      const double b = dl * std::sqrt(((dl - 1.0) * (dl - 1.0) - dm * dm) *
                                      ((dl - 1.0) * (dl - 1.0) - dmp * dmp));
      const double denom = (dl - 1.0) * std::sqrt((dl * dl - dm * dm) * (dl * dl - dmp * dmp));
      next = (a * cur - b * prev) / denom;
    }
    prev = cur;
    cur = next;
    if ((l - l0) % 8 == 0 && cur != 0.0) {
      const double r = std::abs(cur);
      prev /= r;
      cur /= r;
      log_scale += std::log(r);
    }
    out[static_cast<std::size_t>(l - l0)] = cur * std::exp(log_scale);
  }
  return out;
}

double wigner_d(int l, int m, int mp, double theta) {
  if (std::abs(m) > l || std::abs(mp) > l) throw SwshError("|m| and |mp| must not exceed l");
  return wigner_d_column(l, m, mp, theta).back();
}

Complex evaluate_sylm(int s, int l, int m, double theta, double phi) {
  if (l < std::abs(s)) throw SwshError("l = " + std::to_string(l) + " is below |s| = " + std::to_string(std::abs(s)));
  if (std::abs(m) > l) throw SwshError("|m| exceeds l");
  check_theta(theta);
  const double norm = ((s % 2 == 0) ? 1.0 : -1.0) * std::sqrt((2.0 * l + 1.0) / (4.0 * kPi));
  return norm * wigner_d(l, m, -s, theta) * std::polar(1.0, m * phi);
}

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n == 0) throw SwshError("need at least one Gauss-Legendre node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  if (n == 1) {
    weights[0] = 2.0;
    return;
  }
  const double dn = static_cast<double>(n);
  // P_n(x) and P_n'(x) by the three-term recurrence.
  auto legendre = [n, dn](double x) {
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double dk = static_cast<double>(k);
      const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, dn * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (std::size_t i = 0; i < n / 2; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    const double dp = legendre(0.0).second;
    weights[n / 2] = 2.0 / (dp * dp);
  }
}

SphereGrid make_sphere_grid(std::size_t n_theta, std::size_t n_phi) {
  if (n_theta < 1 || n_phi < 1) throw SwshError("sphere grid must be nonempty");
  SphereGrid g;
  std::vector<double> x;
  gauss_legendre(n_theta, x, g.weights);
  // theta increasing means cos(theta) decreasing.
  std::reverse(x.begin(), x.end());
  std::reverse(g.weights.begin(), g.weights.end());
  for (double xi : x) g.theta.push_back(std::acos(xi));
  for (std::size_t k = 0; k < n_phi; ++k)
    g.phi.push_back(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_phi));
  return g;
}

SphereGrid minimal_grid(int bandlimit) {
  if (bandlimit < 0) throw SwshError("bandlimit must be nonnegative");
  return make_sphere_grid(static_cast<std::size_t>(bandlimit) + 1,
                          2 * static_cast<std::size_t>(bandlimit) + 1);
}

SpinCoefficients::SpinCoefficients(int spin, int bandlimit)
    : spin_(spin),
      bandlimit_(bandlimit),
      a_(static_cast<std::size_t>((bandlimit + 1) * (bandlimit + 1))) {
  if (bandlimit < std::abs(spin)) throw SwshError("bandlimit must be at least |s|");
}

std::size_t SpinCoefficients::index(int l, int m) const {
  if (l < lmin() || l > bandlimit_ || std::abs(m) > l)
    throw SwshError("coefficient (" + std::to_string(l) + ", " + std::to_string(m) +
                    ") outside |s| <= l <= L, |m| <= l");
  return static_cast<std::size_t>(l * l + l + m);
}

Complex& SpinCoefficients::at(int l, int m) { return a_[index(l, m)]; }
Complex SpinCoefficients::at(int l, int m) const { return a_[index(l, m)]; }

double SpinCoefficients::max_abs() const {
  double r = 0.0;
  for (const auto& v : a_) r = std::max(r, std::abs(v));
  return r;
}

namespace {

void check_grid(const SphereGrid& g, int bandlimit) {
  if (g.n_theta() < static_cast<std::size_t>(bandlimit) + 1 ||
      g.n_phi() < 2 * static_cast<std::size_t>(bandlimit) + 1)
    throw SwshError("sphere grid " + std::to_string(g.n_theta()) + "x" + std::to_string(g.n_phi()) +
                    " is too small for bandlimit " + std::to_string(bandlimit));
}

// Normalised theta factor (-1)^s sqrt((2l+1)/4pi) d^l_{m,-s}(theta_j) for every
// ring j and l = max(|m|,|s|)..L.
std::vector<std::vector<double>> theta_factors(const SphereGrid& g, int s, int m, int L) {
  const int l0 = std::max(std::abs(m), std::abs(s));
  const double sign = (s % 2 == 0) ? 1.0 : -1.0;
  std::vector<std::vector<double>> out(g.n_theta());
  for (std::size_t j = 0; j < g.n_theta(); ++j) {
    out[j] = wigner_d_column(L, m, -s, g.theta[j]);
    for (int l = l0; l <= L; ++l)
      out[j][static_cast<std::size_t>(l - l0)] *= sign * std::sqrt((2.0 * l + 1.0) / (4.0 * kPi));
  }
  return out;
}

}  // namespace

SpinCoefficients forward_transform(const SpinField& f) {
  const int L = f.bandlimit;
  const int s = f.spin;
  check_grid(f.grid, L);
  const std::size_t nt = f.grid.n_theta();
  const std::size_t np = f.grid.n_phi();
  if (f.samples.size() != nt * np) throw SwshError("sample array does not match the grid");

  SpinCoefficients c(s, L);
  const double dphi = 2.0 * kPi / static_cast<double>(np);
  for (int m = -L; m <= L; ++m) {
    const int l0 = std::max(std::abs(m), std::abs(s));
    if (l0 > L) continue;
    // Ring Fourier coefficients F_j(m).
    std::vector<Complex> ring(nt);
    for (std::size_t j = 0; j < nt; ++j) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < np; ++k) acc += f.at(j, k) * std::polar(1.0, -m * f.grid.phi[k]);
      ring[j] = acc * dphi;
    }
    const auto factors = theta_factors(f.grid, s, m, L);
    for (int l = l0; l <= L; ++l) {
      Complex acc = 0.0;
      for (std::size_t j = 0; j < nt; ++j)
        acc += f.grid.weights[j] * factors[j][static_cast<std::size_t>(l - l0)] * ring[j];
      c.at(l, m) = acc;
    }
  }
  return c;
}

SpinField inverse_transform(const SpinCoefficients& c, const SphereGrid& grid) {
  const int L = c.bandlimit();
  const int s = c.spin();
  check_grid(grid, L);
  const std::size_t nt = grid.n_theta();
  const std::size_t np = grid.n_phi();
  SpinField f{s, L, grid, std::vector<Complex>(nt * np)};
  for (int m = -L; m <= L; ++m) {
    const int l0 = std::max(std::abs(m), std::abs(s));
    if (l0 > L) continue;
    const auto factors = theta_factors(grid, s, m, L);
    for (std::size_t j = 0; j < nt; ++j) {
      Complex ring = 0.0;
      for (int l = l0; l <= L; ++l) ring += c.at(l, m) * factors[j][static_cast<std::size_t>(l - l0)];
      for (std::size_t k = 0; k < np; ++k) f.at(j, k) += ring * std::polar(1.0, m * grid.phi[k]);
    }
  }
  return f;
}

SpinField sample(const SpinCoefficients& c, const SphereGrid& grid) {
  return inverse_transform(c, grid);
}

double coefficient_power(const SpinCoefficients& c) {
  double acc = 0.0;
  for (int l = c.lmin(); l <= c.bandlimit(); ++l)
    for (int m = -l; m <= l; ++m) acc += std::norm(c.at(l, m));
  return acc;
}

double field_power(const SpinField& f) {
  const double dphi = 2.0 * kPi / static_cast<double>(f.grid.n_phi());
  double acc = 0.0;
  for (std::size_t j = 0; j < f.grid.n_theta(); ++j) {
    double ring = 0.0;
    for (std::size_t k = 0; k < f.grid.n_phi(); ++k) ring += std::norm(f.at(j, k));
    acc += f.grid.weights[j] * ring * dphi;
  }
  return acc;
}

SpinCoefficients eth(const SpinCoefficients& c) {
  const int s = c.spin();
  const int L = c.bandlimit();
  if (L < std::abs(s + 1)) throw SwshError("bandlimit too small for spin s+1");
  SpinCoefficients out(s + 1, L);
  for (int l = out.lmin(); l <= L; ++l) {
    if (l < c.lmin()) continue;
    const double k = std::sqrt(static_cast<double>((l - s) * (l + s + 1)));
    for (int m = -l; m <= l; ++m) out.at(l, m) = k * c.at(l, m);
  }
  return out;
}

SpinCoefficients eth_prime(const SpinCoefficients& c) {
  const int s = c.spin();
  const int L = c.bandlimit();
  if (L < std::abs(s - 1)) throw SwshError("bandlimit too small for spin s-1");
  SpinCoefficients out(s - 1, L);
  for (int l = out.lmin(); l <= L; ++l) {
    if (l < c.lmin()) continue;
    const double k = -std::sqrt(static_cast<double>((l + s) * (l - s + 1)));
    for (int m = -l; m <= l; ++m) out.at(l, m) = k * c.at(l, m);
  }
  return out;
}

}  // namespace molforge::swsh

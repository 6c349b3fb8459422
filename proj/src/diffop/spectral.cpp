#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

#include "molforge/diffop.hpp"
#include "molforge/error.hpp"

namespace molforge::diffop {

namespace {

// The FFTW planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace

std::vector<double> spectral_derivative_periodic(std::span<const double> u, double period) {
  const std::size_t n = u.size();
  if (n < 2) throw OperatorError("spectral derivative needs at least 2 points");
  if (!(period > 0.0)) throw OperatorError("period must be positive");

  std::vector<double> real(u.begin(), u.end());
  std::vector<std::complex<double>> modes(n / 2 + 1);
  auto* spec = reinterpret_cast<fftw_complex*>(modes.data());
  const int len = static_cast<int>(n);

  Plan forward, backward;
  {
    std::lock_guard lock(planner_mutex());
    forward.reset(fftw_plan_dft_r2c_1d(len, real.data(), spec, FFTW_ESTIMATE));
    backward.reset(fftw_plan_dft_c2r_1d(len, spec, real.data(), FFTW_ESTIMATE));
  }
  if (!forward || !backward) throw OperatorError("FFTW planning failed");

  fftw_execute(forward.get());
  const double k0 = 2.0 * std::numbers::pi / period;
  const double norm = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < modes.size(); ++k)
    modes[k] *= std::complex<double>(0.0, k0 * static_cast<double>(k) * norm);
  if (n % 2 == 0) modes.back() = 0.0;
  fftw_execute(backward.get());
  return real;
}

std::vector<double> spectral_derivative_periodic(std::span<const double> u, double period,
                                                 int workers) {
  if (workers > 1)
    throw OperatorError("the periodic spectral derivative is global and needs a single worker");
  return spectral_derivative_periodic(u, period);
}

}  // namespace molforge::diffop

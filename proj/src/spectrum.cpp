#include "mlz/spectrum.hpp"

#include <limits>

#include "mlz/errors.hpp"
#include "mlz/jacobi.hpp"

namespace mlz {

SpectrumSample spectrum_at(const MlzModel& model, double t) {
  const HermitianEigen eig = jacobi_eigen(hamiltonian_at(model, t));
  SpectrumSample s;
  s.time = t;
  s.eigenvalues.assign(eig.values.data(), eig.values.data() + eig.values.size());
  s.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < s.eigenvalues.size(); ++k) {
    s.min_gap = std::min(s.min_gap, s.eigenvalues[k] - s.eigenvalues[k - 1]);
  }
  return s;
}

std::vector<SpectrumSample> adiabatic_spectrum(const MlzModel& model, double t_min, double t_max,
                                               int samples) {
  if (!(t_min < t_max)) {
    throw std::invalid_argument("adiabatic_spectrum: t_min must be below t_max");
  }
  if (samples < 2) {
    throw std::invalid_argument("adiabatic_spectrum: need at least 2 samples");
  }
  std::vector<SpectrumSample> out;
  out.reserve(static_cast<std::size_t>(samples));
  const double dt = (t_max - t_min) / (samples - 1);
  for (int k = 0; k < samples; ++k) {
    // Hit the end point exactly.
    const double t = (k == samples - 1) ? t_max : t_min + k * dt;
    out.push_back(spectrum_at(model, t));
  }
  return out;
}

} // namespace mlz

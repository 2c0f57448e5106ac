#pragma once

#include <vector>

#include "mlz/model.hpp"

namespace mlz {

/// Adiabatic energies (eigenvalues of H(t)) at one time.
struct SpectrumSample {
  double time = 0.0;
  std::vector<double> eigenvalues; // ascending
  double min_gap = 0.0;            // smallest adjacent difference
};

SpectrumSample spectrum_at(const MlzModel& model, double t);

/// `samples` equally spaced times covering [t_min, t_max] inclusive.
std::vector<SpectrumSample> adiabatic_spectrum(const MlzModel& model, double t_min, double t_max,
                                               int samples);

} // namespace mlz

#pragma once

#include <complex>

#include "mlz/model.hpp"

namespace mlz {

/// Parameters of the two 6-state presets (two bands of three parallel levels
/// with slopes beta and 0).
struct PresetParams {
  double eps1 = 0.25;
  double eps2 = 0.35;
  double g1 = 0.3;
  double g2 = 0.3;
  double g3 = 0.3;
  double beta = 1.0;
};

/// Throws InvalidPresetParams unless beta > 0, eps1 > 0 and eps2 > 0.
void validate_params(const PresetParams& params);

/// Two-state Landau-Zener staying probability exp(-2 pi |g|^2 / slope_gap).
double lz_probability(std::complex<double> g, double slope_gap);

/// 6-state model with sign-alternating couplings; adiabatic levels cross
/// exactly at t = 0 and the transition matrix has the closed form
/// `exact_matrix`.
MlzModel interference_model(const PresetParams& params);

/// Same level structure with all couplings positive. The t = 0 degeneracies
/// open into mini-gaps and the semiclassical matrix is only asymptotic.
MlzModel minigap_model(const PresetParams& params);

/// Closed-form transition probabilities of `interference_model`, rows indexed
/// by the initial level: result(i, f) = P(i -> f). Does not depend on eps1,
/// eps2.
RMatrix exact_matrix(const PresetParams& params);

} // namespace mlz

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mlz {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

// Tolerance used when checking user-supplied model constants.
inline constexpr double kModelTolerance = 1e-12;

/// Multistate Landau-Zener model H(t) = A + B t written in the diabatic basis.
///
/// B = diag(slopes). A splits into the diagonal `offsets` and the off-diagonal
/// Hermitian `couplings` matrix (zero diagonal). Level indices are zero-based
/// throughout the library; user-facing surfaces (CLI, model files) are
/// one-based.
struct MlzModel {
  std::vector<double> slopes;
  std::vector<double> offsets;
  CMatrix couplings;
  std::vector<std::string> labels;

  std::size_t n_states() const { return slopes.size(); }

  // Diabatic energy of `level` at time t.
  double diabatic_energy(std::size_t level, double t) const {
    return slopes[level] * t + offsets[level];
  }

  // Display name, falling back to the one-based index.
  std::string label(std::size_t level) const;
};

/// Pairwise intersection of two diabatic levels.
struct CrossingEvent {
  double time = 0.0;
  std::size_t level_a = 0; // level_a < level_b
  std::size_t level_b = 0;
  Complex coupling{};      // couplings(level_a, level_b)
  double slope_gap = 0.0;  // |slopes[a] - slopes[b]|, always > 0
  double p_stay = 1.0;     // exp(-2 pi |coupling|^2 / slope_gap)

  bool involves(std::size_t level) const {
    return level == level_a || level == level_b;
  }
  std::size_t partner(std::size_t level) const {
    return level == level_a ? level_b : level_a;
  }
  bool branches() const { return coupling != Complex{}; }
};

/// Checks the diabatic-basis conventions and returns the model unchanged.
/// Throws InvalidModel (size problems), HermiticityViolation,
/// DegenerateSlopeCoupling or DuplicateLevel.
MlzModel validate_model(MlzModel model);

/// H(t) = diag(slopes t + offsets) + couplings.
CMatrix hamiltonian_at(const MlzModel& model, double t);

/// Every crossing of non-parallel levels, sorted by time and then by
/// (level_a, level_b).
std::vector<CrossingEvent> find_crossings(const MlzModel& model);

/// Largest |t*| over all crossings; 0 when no levels cross.
double max_crossing_time(const MlzModel& model);

/// Conjugates the coupling matrix by diag(exp(i phases)):
/// A_nm -> exp(i(phase_n - phase_m)) A_nm. Spectra and transition
/// probabilities are invariant under this.
MlzModel rephase(const MlzModel& model, const std::vector<double>& phases);

} // namespace mlz

#pragma once

#include <cstddef>
#include <vector>

#include "mlz/model.hpp"

namespace mlz {

enum class Frame { diabatic, interaction };

// How basis states are prepared at t_start and read out at t_end.
//  - diabatic: bare diabatic basis vectors (raw propagator entries).
//  - adiabatic: eigenvectors of H(t_start) / H(t_end), each matched to the
//    diabatic level it overlaps most. At large |t| these are the states the
//    t -> -inf / +inf scattering solutions actually occupy, which removes the
//    O(g / (slope gap * T)) window truncation error of bare diabatic states.
enum class Boundary { diabatic, adiabatic };

struct IntegratorConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  // Step cap inside the crossing cluster |t| < cluster_radius. In the
  // interaction frame steps are uncapped outside it; in the diabatic frame the
  // cap applies everywhere.
  double max_step = 0.1;
  // Negative selects max(10 * max |crossing time|, 10).
  double cluster_radius = -1.0;
  Frame frame = Frame::interaction;
  Boundary boundary = Boundary::adiabatic;
  double t_start = -1000.0;
  double t_end = 1000.0;
};

void validate_config(const IntegratorConfig& config);

struct IntegratorStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
  // Sum of the embedded local error estimates over accepted steps, an upper
  // estimate of the global amplitude error.
  double error_estimate = 0.0;
  double max_norm_drift = 0.0;

  IntegratorStats& operator+=(const IntegratorStats& other);
};

/// Diabatic-basis amplitudes psi at `time`.
struct StateVector {
  CVector amplitudes;
  double time = 0.0;
};

/// Amplitudes of the frame selected by the config: psi in the diabatic frame,
/// c_n = exp(i(slope_n t^2 / 2 + offset_n t)) psi_n in the interaction frame.
struct FrameState {
  CVector amplitudes;
  double time = 0.0;
  IntegratorStats stats;
};

/// Integrates i dpsi/dt = H(t) psi from config.t_start to config.t_end.
/// `initial.time` is ignored; the state is taken to be at config.t_start.
/// Throws InvalidState, StepUnderflow, NormDrift.
StateVector propagate(const MlzModel& model, const StateVector& initial,
                      const IntegratorConfig& config, IntegratorStats* stats = nullptr);

/// Same integration, but the initial and final amplitudes are in the frame of
/// config.frame.
FrameState propagate_in_frame(const MlzModel& model, const CVector& initial,
                              const IntegratorConfig& config);

struct ScatteringResult {
  // Column k holds the final frame amplitudes for initial basis state k.
  CMatrix s_matrix;
  // p_matrix(i, f) = |s_matrix(f, i)|^2 = P(i -> f).
  RMatrix p_matrix;
  double t_start = 0.0;
  double t_end = 0.0;
  IntegratorStats stats;
};

/// Propagates every basis vector and assembles S and P. Throws
/// UnitarityViolation when max |S^H S - I| exceeds 1e-5.
ScatteringResult scattering_matrix(const MlzModel& model, const IntegratorConfig& config);

/// Row `initial` of P from a single propagation.
std::vector<double> transition_row(const MlzModel& model, std::size_t initial,
                                   const IntegratorConfig& config,
                                   IntegratorStats* stats = nullptr);

/// max |S^H S - I|.
double unitarity_defect(const CMatrix& s);

struct ConvergedProbabilities {
  RMatrix p_matrix;          // from the widest window
  double truncation_error = 0.0;
  std::vector<double> windows;
  IntegratorStats stats;
};

/// P on windows [-T, T] for T = base_window * {1, 1.25, 1.5625}; the largest
/// max-abs difference between successive windows is the truncation estimate.
/// config.t_start / t_end are overridden. Throws NotConverged above 1e-2.
ConvergedProbabilities converged_probabilities(const MlzModel& model, double base_window,
                                               const IntegratorConfig& config);

/// Single-row variant of converged_probabilities used by the CLI.
struct ConvergedRow {
  std::vector<double> probabilities;
  double truncation_error = 0.0;
  IntegratorStats stats;
};
ConvergedRow converged_row(const MlzModel& model, std::size_t initial, double base_window,
                           const IntegratorConfig& config);

} // namespace mlz

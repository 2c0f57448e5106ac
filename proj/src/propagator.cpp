#include "mlz/propagator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "mlz/errors.hpp"
#include "mlz/jacobi.hpp"

namespace mlz {

namespace {

constexpr double kNormDriftLimit = 1e-5;
constexpr double kUnitarityLimit = 1e-5;
constexpr double kNotConvergedLimit = 1e-2;
constexpr double kUnderflowFraction = 1e-12;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller (Hairer & Wanner, DOPRI5 defaults).
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - 0.75 * kBeta;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

struct Coupling {
  Eigen::Index n;
  Eigen::Index m;
  Complex value; // A_nm, n < m
};

// Right-hand side of the Schroedinger equation in either frame.
class SchrodingerRhs {
public:
  SchrodingerRhs(const MlzModel& model, Frame frame)
      : frame_(frame), slopes_(model.slopes), offsets_(model.offsets),
        phases_(static_cast<Eigen::Index>(model.n_states())) {
    const auto n = static_cast<Eigen::Index>(model.n_states());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (model.couplings(i, j) != Complex{}) {
          couplings_.push_back({i, j, model.couplings(i, j)});
        }
      }
    }
    // exp(i theta_n) factorizes into a slope factor and an offset factor;
    // levels share them, so each distinct nonzero value costs one sincos.
    slope_index_ = distinct_index(model.slopes, unique_slopes_);
    offset_index_ = distinct_index(model.offsets, unique_offsets_);
    slope_phase_.resize(unique_slopes_.size());
    offset_phase_.resize(unique_offsets_.size());
  }

  void operator()(double t, const CVector& y, CVector& dy) {
    ++evaluations;
    const Eigen::Index n = y.size();
    if (frame_ == Frame::diabatic) {
      for (Eigen::Index i = 0; i < n; ++i) {
        dy(i) = Complex(0.0, -(slopes_[i] * t + offsets_[i])) * y(i);
      }
      for (const auto& c : couplings_) {
        dy(c.n) += Complex(0.0, -1.0) * c.value * y(c.m);
        dy(c.m) += Complex(0.0, -1.0) * std::conj(c.value) * y(c.n);
      }
      return;
    }
    // dc_n/dt = -i sum_m A_nm exp(i(theta_n - theta_m)) c_m
    const double half_t2 = 0.5 * t * t;
    for (std::size_t k = 0; k < unique_slopes_.size(); ++k) {
      slope_phase_[k] = std::polar(1.0, unique_slopes_[k] * half_t2);
    }
    for (std::size_t k = 0; k < unique_offsets_.size(); ++k) {
      offset_phase_[k] = std::polar(1.0, unique_offsets_[k] * t);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const int si = slope_index_[static_cast<std::size_t>(i)];
      const int oi = offset_index_[static_cast<std::size_t>(i)];
      if (si < 0) {
        phases_(i) = oi < 0 ? Complex(1.0) : offset_phase_[static_cast<std::size_t>(oi)];
      } else {
        phases_(i) = oi < 0 ? slope_phase_[static_cast<std::size_t>(si)]
                            : slope_phase_[static_cast<std::size_t>(si)] *
                                  offset_phase_[static_cast<std::size_t>(oi)];
      }
      dy(i) = 0.0;
    }
    for (const auto& c : couplings_) {
      const Complex f = c.value * phases_(c.n) * std::conj(phases_(c.m));
      dy(c.n) += Complex(f.imag(), -f.real()) * y(c.m);
      dy(c.m) += Complex(-f.imag(), -f.real()) * y(c.n);
    }
  }

  long evaluations = 0;

private:
  // Maps each value to its slot in `unique`; zero maps to -1 (unit phase).
  static std::vector<int> distinct_index(const std::vector<double>& values,
                                         std::vector<double>& unique) {
    std::vector<int> index;
    for (const double v : values) {
      if (v == 0.0) {
        index.push_back(-1);
        continue;
      }
      auto it = std::find(unique.begin(), unique.end(), v);
      if (it == unique.end()) {
        unique.push_back(v);
        it = unique.end() - 1;
      }
      index.push_back(static_cast<int>(it - unique.begin()));
    }
    return index;
  }

  Frame frame_;
  std::vector<double> slopes_;
  std::vector<double> offsets_;
  CVector phases_;
  std::vector<Coupling> couplings_;
  std::vector<double> unique_slopes_;
  std::vector<double> unique_offsets_;
  std::vector<int> slope_index_;
  std::vector<int> offset_index_;
  std::vector<Complex> slope_phase_;
  std::vector<Complex> offset_phase_;
};

double max_abs(const CVector& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    m = std::max(m, std::norm(v(i)));
  }
  return std::sqrt(m);
}

double resolve_cluster_radius(const MlzModel& model, const IntegratorConfig& config) {
  if (config.cluster_radius >= 0.0) {
    return config.cluster_radius;
  }
  return std::max(10.0 * max_crossing_time(model), 10.0);
}

// exp(i theta_n(t)) with theta_n = slope_n t^2 / 2 + offset_n t.
CVector frame_phases(const MlzModel& model, double t) {
  CVector u(static_cast<Eigen::Index>(model.n_states()));
  for (std::size_t i = 0; i < model.n_states(); ++i) {
    u(static_cast<Eigen::Index>(i)) =
        std::polar(1.0, (0.5 * model.slopes[i] * t + model.offsets[i]) * t);
  }
  return u;
}

// Columns are the eigenvectors of H(t) reordered so that column n is the one
// with the largest overlap with diabatic level n, phased so that entry n is
// real and positive. Identity for Boundary::diabatic.
CMatrix asymptotic_basis(const MlzModel& model, double t, Boundary boundary) {
  const auto n = static_cast<Eigen::Index>(model.n_states());
  if (boundary == Boundary::diabatic) {
    return CMatrix::Identity(n, n);
  }
  const HermitianEigen eig = jacobi_eigen(hamiltonian_at(model, t));
  CMatrix basis(n, n);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (Eigen::Index level = 0; level < n; ++level) {
    Eigen::Index best = -1;
    double best_overlap = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double overlap = std::abs(eig.vectors(level, k));
      if (!taken[static_cast<std::size_t>(k)] && overlap > best_overlap) {
        best = k;
        best_overlap = overlap;
      }
    }
    if (best < 0 || best_overlap * best_overlap < 0.5) {
      std::ostringstream msg;
      msg << "cannot match an adiabatic state to level " << level + 1 << " at t = " << t
          << "; widen the integration window";
      throw InvalidIntegratorConfig(msg.str());
    }
    taken[static_cast<std::size_t>(best)] = true;
    const Complex entry = eig.vectors(level, best);
    basis.col(level) = eig.vectors.col(best) * (std::abs(entry) / entry);
  }
  return basis;
}

} // namespace

void validate_config(const IntegratorConfig& config) {
  if (!(config.abs_tol > 0.0) || !(config.rel_tol > 0.0)) {
    throw InvalidIntegratorConfig("tolerances must be positive");
  }
  if (!(config.max_step > 0.0)) {
    throw InvalidIntegratorConfig("max_step must be positive");
  }
  if (!(config.t_start < config.t_end) || !std::isfinite(config.t_start) ||
      !std::isfinite(config.t_end)) {
    throw InvalidIntegratorConfig("t_start must be below t_end");
  }
}

IntegratorStats& IntegratorStats::operator+=(const IntegratorStats& other) {
  accepted_steps += other.accepted_steps;
  rejected_steps += other.rejected_steps;
  rhs_evaluations += other.rhs_evaluations;
  error_estimate = std::max(error_estimate, other.error_estimate);
  max_norm_drift = std::max(max_norm_drift, other.max_norm_drift);
  return *this;
}

FrameState propagate_in_frame(const MlzModel& model, const CVector& initial,
                              const IntegratorConfig& config) {
  validate_config(config);
  const auto n = static_cast<Eigen::Index>(model.n_states());
  if (initial.size() != n) {
    throw InvalidState("initial state has wrong dimension");
  }
  const double norm0 = initial.norm();
  if (std::abs(norm0 - 1.0) > 1e-12) {
    throw InvalidState("initial state must be normalized");
  }

  SchrodingerRhs rhs(model, config.frame);
  const double window = config.t_end - config.t_start;
  const double min_step = kUnderflowFraction * window;
  const double radius = resolve_cluster_radius(model, config);
  const bool cap_everywhere = config.frame == Frame::diabatic;

  auto step_cap = [&](double t) {
    if (cap_everywhere || (t >= -radius && t < radius)) {
      return config.max_step;
    }
    if (t < -radius) {
      return (-radius - t) + config.max_step;
    }
    return std::numeric_limits<double>::infinity();
  };

  CVector y = initial;
  CVector y_new(n), err(n), tmp(n);
  std::array<CVector, 7> k;
  for (auto& ki : k) {
    ki.resize(n);
  }

  double t = config.t_start;
  rhs(t, y, k[0]);

  // Initial step guess from the derivative scale.
  double h;
  {
    const double sc = config.abs_tol + config.rel_tol * norm0;
    const double d1 = max_abs(k[0]) / sc;
    const double d0 = norm0 / sc;
    double h0 = (d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, step_cap(t));
    tmp = y + h0 * k[0];
    rhs(t + h0, tmp, k[1]);
    const double d2 = max_abs(k[1] - k[0]) / sc / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, step_cap(t), window});
  }

  FrameState out;
  double y_norm = norm0;
  double err_prev = 1e-4;
  bool last_rejected = false;

  while (t < config.t_end) {
    h = std::min(h, step_cap(t));
    bool final_step = false;
    if (t + h >= config.t_end) {
      h = config.t_end - t;
      final_step = true;
    }
    if (h < min_step && !final_step) {
      std::ostringstream msg;
      msg << "step size " << h << " underflowed at t = " << t;
      throw StepUnderflow(msg.str());
    }

    tmp = y + h * (a21 * k[0]);
    rhs(t + c2 * h, tmp, k[1]);
    tmp = y + h * (a31 * k[0] + a32 * k[1]);
    rhs(t + c3 * h, tmp, k[2]);
    tmp = y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]);
    rhs(t + c4 * h, tmp, k[3]);
    tmp = y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]);
    rhs(t + c5 * h, tmp, k[4]);
    tmp = y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]);
    rhs(t + h, tmp, k[5]);
    y_new = y + h * (b1 * k[0] + b3 * k[2] + b4 * k[3] + b5 * k[4] + b6 * k[5]);
    rhs(t + h, y_new, k[6]);
    err = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);

    const double local_err = max_abs(err);
    const double new_norm = y_new.norm();
    const double scale = config.abs_tol + config.rel_tol * std::max(y_norm, new_norm);
    const double e = local_err / scale;

    if (e <= 1.0) {
      const double drift = std::abs(new_norm - norm0);
      if (drift > kNormDriftLimit) {
        std::ostringstream msg;
        msg << "state norm drifted by " << drift << " at t = " << t + h;
        throw NormDrift(msg.str());
      }
      out.stats.max_norm_drift = std::max(out.stats.max_norm_drift, drift);
      out.stats.error_estimate += local_err;
      ++out.stats.accepted_steps;

      t = final_step ? config.t_end : t + h;
      y.swap(y_new);
      y_norm = new_norm;
      k[0].swap(k[6]); // first-same-as-last

      double fac = std::pow(std::max(e, 1e-10), kExpo) / std::pow(err_prev, kBeta) / kSafety;
      fac = std::clamp(fac, 1.0 / kMaxFactor, 1.0 / kMinFactor);
      double h_next = h / fac;
      if (last_rejected) {
        h_next = std::min(h_next, h);
      }
      h = h_next;
      err_prev = std::max(e, 1e-4);
      last_rejected = false;
    } else {
      ++out.stats.rejected_steps;
      const double fac = std::min(1.0 / kMinFactor, std::pow(e, kExpo) / kSafety);
      h /= fac;
      last_rejected = true;
    }
  }

  out.stats.rhs_evaluations = rhs.evaluations;
  out.amplitudes = std::move(y);
  out.time = t;
  return out;
}

StateVector propagate(const MlzModel& model, const StateVector& initial,
                      const IntegratorConfig& config, IntegratorStats* stats) {
  CVector start = initial.amplitudes;
  if (config.frame == Frame::interaction) {
    start = start.cwiseProduct(frame_phases(model, config.t_start));
  }
  FrameState fs = propagate_in_frame(model, start, config);
  if (stats != nullptr) {
    *stats = fs.stats;
  }
  StateVector out;
  out.time = fs.time;
  out.amplitudes = std::move(fs.amplitudes);
  if (config.frame == Frame::interaction) {
    out.amplitudes = out.amplitudes.cwiseProduct(frame_phases(model, fs.time).conjugate());
  }
  return out;
}

namespace {

// Diabatic amplitudes -> amplitudes of the integration frame. A bare basis
// vector is passed through: the frame phase would only be a global phase.
CVector to_frame(const MlzModel& model, const CVector& psi, double t, Frame frame) {
  if (frame == Frame::diabatic || (psi.cwiseAbs2().maxCoeff() == 1.0 && psi.cwiseAbs2().sum() == 1.0)) {
    return psi;
  }
  return psi.cwiseProduct(frame_phases(model, t));
}

// Frame amplitudes at t -> components along the columns of `basis`, expressed
// in the frame again so that a diabatic basis returns the raw propagator entry.
CVector read_out(const MlzModel& model, const CVector& y, const CMatrix& basis, double t,
                 Frame frame) {
  if (basis.isIdentity(0.0)) {
    return y;
  }
  if (frame == Frame::diabatic) {
    return basis.adjoint() * y;
  }
  const CVector u = frame_phases(model, t);
  const CVector psi = y.cwiseProduct(u.conjugate());
  return (basis.adjoint() * psi).cwiseProduct(u);
}

} // namespace

double unitarity_defect(const CMatrix& s) {
  const CMatrix d = s.adjoint() * s - CMatrix::Identity(s.rows(), s.cols());
  return d.cwiseAbs().maxCoeff();
}

ScatteringResult scattering_matrix(const MlzModel& model, const IntegratorConfig& config) {
  const auto n = static_cast<Eigen::Index>(model.n_states());
  ScatteringResult res;
  res.s_matrix.resize(n, n);
  res.p_matrix.resize(n, n);
  res.t_start = config.t_start;
  res.t_end = config.t_end;
  validate_config(config);
  const CMatrix in_basis = asymptotic_basis(model, config.t_start, config.boundary);
  const CMatrix out_basis = asymptotic_basis(model, config.t_end, config.boundary);
  for (Eigen::Index col = 0; col < n; ++col) {
    FrameState fs = propagate_in_frame(
        model, to_frame(model, in_basis.col(col), config.t_start, config.frame), config);
    res.s_matrix.col(col) = read_out(model, fs.amplitudes, out_basis, config.t_end, config.frame);
    res.stats += fs.stats;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index f = 0; f < n; ++f) {
      res.p_matrix(i, f) = std::norm(res.s_matrix(f, i));
    }
  }
  const double defect = unitarity_defect(res.s_matrix);
  if (defect > kUnitarityLimit) {
    std::ostringstream msg;
    msg << "scattering matrix unitarity defect " << defect;
    throw UnitarityViolation(msg.str());
  }
  return res;
}

std::vector<double> transition_row(const MlzModel& model, std::size_t initial,
                                   const IntegratorConfig& config, IntegratorStats* stats) {
  const auto n = static_cast<Eigen::Index>(model.n_states());
  if (initial >= model.n_states()) {
    throw InvalidState("initial level out of range");
  }
  validate_config(config);
  const CMatrix in_basis = asymptotic_basis(model, config.t_start, config.boundary);
  const CMatrix out_basis = asymptotic_basis(model, config.t_end, config.boundary);
  FrameState fs = propagate_in_frame(
      model,
      to_frame(model, in_basis.col(static_cast<Eigen::Index>(initial)), config.t_start,
               config.frame),
      config);
  if (stats != nullptr) {
    *stats = fs.stats;
  }
  const CVector amplitudes = read_out(model, fs.amplitudes, out_basis, config.t_end, config.frame);
  std::vector<double> row(model.n_states());
  for (Eigen::Index f = 0; f < n; ++f) {
    row[static_cast<std::size_t>(f)] = std::norm(amplitudes(f));
  }
  return row;
}

namespace {

std::array<double, 3> window_ladder(const MlzModel& model, double base_window) {
  const double tmax = max_crossing_time(model);
  if (!(base_window > 10.0 * tmax) || !std::isfinite(base_window)) {
    std::ostringstream msg;
    msg << "base window " << base_window << " must exceed 10x the largest crossing time (" << tmax
        << ")";
    throw InvalidIntegratorConfig(msg.str());
  }
  return {base_window, 1.25 * base_window, 1.5625 * base_window};
}

void check_truncation(double estimate) {
  if (estimate > kNotConvergedLimit) {
    std::ostringstream msg;
    msg << "window truncation estimate " << estimate << " exceeds " << kNotConvergedLimit;
    throw NotConverged(msg.str());
  }
}

} // namespace

ConvergedProbabilities converged_probabilities(const MlzModel& model, double base_window,
                                               const IntegratorConfig& config) {
  ConvergedProbabilities out;
  RMatrix previous;
  for (const double window : window_ladder(model, base_window)) {
    IntegratorConfig cfg = config;
    cfg.t_start = -window;
    cfg.t_end = window;
    ScatteringResult res = scattering_matrix(model, cfg);
    if (previous.size() != 0) {
      out.truncation_error =
          std::max(out.truncation_error, (res.p_matrix - previous).cwiseAbs().maxCoeff());
    }
    previous = res.p_matrix;
    out.windows.push_back(window);
    out.stats += res.stats;
  }
  out.p_matrix = std::move(previous);
  check_truncation(out.truncation_error);
  return out;
}

ConvergedRow converged_row(const MlzModel& model, std::size_t initial, double base_window,
                           const IntegratorConfig& config) {
  ConvergedRow out;
  std::vector<double> previous;
  for (const double window : window_ladder(model, base_window)) {
    IntegratorConfig cfg = config;
    cfg.t_start = -window;
    cfg.t_end = window;
    IntegratorStats stats;
    std::vector<double> row = transition_row(model, initial, cfg, &stats);
    for (std::size_t f = 0; f < previous.size(); ++f) {
      out.truncation_error = std::max(out.truncation_error, std::abs(row[f] - previous[f]));
    }
    previous = std::move(row);
    out.stats += stats;
  }
  out.probabilities = std::move(previous);
  check_truncation(out.truncation_error);
  return out;
}

} // namespace mlz

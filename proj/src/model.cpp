#include "mlz/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mlz/analytic.hpp"
#include "mlz/errors.hpp"

namespace mlz {

std::string MlzModel::label(std::size_t level) const {
  if (level < labels.size() && !labels[level].empty()) {
    return labels[level];
  }
  return std::to_string(level + 1);
}

MlzModel validate_model(MlzModel model) {
  const std::size_t n = model.n_states();
  if (n < 2) {
    throw InvalidModel("model needs at least 2 states");
  }
  if (model.offsets.size() != n) {
    throw InvalidModel("offsets size does not match slopes size");
  }
  if (static_cast<std::size_t>(model.couplings.rows()) != n ||
      static_cast<std::size_t>(model.couplings.cols()) != n) {
    throw InvalidModel("coupling matrix must be N x N");
  }
  if (!model.labels.empty() && model.labels.size() != n) {
    throw InvalidModel("labels size does not match number of states");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(model.slopes[i]) || !std::isfinite(model.offsets[i])) {
      throw InvalidModel("slopes and offsets must be finite");
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(model.couplings(i, i)) > kModelTolerance) {
      std::ostringstream msg;
      msg << "coupling matrix has nonzero diagonal entry at level " << i + 1
          << " (diagonal energies belong in offsets)";
      throw HermiticityViolation(msg.str());
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex upper = model.couplings(i, j);
      const Complex lower = model.couplings(j, i);
      if (!std::isfinite(upper.real()) || !std::isfinite(upper.imag()) ||
          !std::isfinite(lower.real()) || !std::isfinite(lower.imag())) {
        throw InvalidModel("couplings must be finite");
      }
      if (std::abs(upper - std::conj(lower)) > kModelTolerance) {
        std::ostringstream msg;
        msg << "couplings(" << i + 1 << "," << j + 1 << ") is not the conjugate of couplings("
            << j + 1 << "," << i + 1 << ")";
        throw HermiticityViolation(msg.str());
      }
      if (model.slopes[i] == model.slopes[j]) {
        if (std::abs(upper) > kModelTolerance) {
          std::ostringstream msg;
          msg << "levels " << i + 1 << " and " << j + 1
              << " have equal slopes but a nonzero mutual coupling";
          throw DegenerateSlopeCoupling(msg.str());
        }
        if (model.offsets[i] == model.offsets[j]) {
          std::ostringstream msg;
          msg << "levels " << i + 1 << " and " << j + 1 << " are the same diabatic line";
          throw DuplicateLevel(msg.str());
        }
      }
    }
  }
  // Snap the diagonal to exact zero so later code can rely on it.
  model.couplings.diagonal().setZero();
  return model;
}

CMatrix hamiltonian_at(const MlzModel& model, double t) {
  CMatrix h = model.couplings;
  for (std::size_t i = 0; i < model.n_states(); ++i) {
    h(i, i) = model.diabatic_energy(i, t);
  }
  return h;
}

std::vector<CrossingEvent> find_crossings(const MlzModel& model) {
  const std::size_t n = model.n_states();
  std::vector<CrossingEvent> events;
  events.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dslope = model.slopes[a] - model.slopes[b];
      if (dslope == 0.0) {
        continue;
      }
      CrossingEvent ev;
      ev.level_a = a;
      ev.level_b = b;
      ev.time = (model.offsets[b] - model.offsets[a]) / dslope;
      ev.coupling = model.couplings(a, b);
      ev.slope_gap = std::abs(dslope);
      ev.p_stay = lz_probability(ev.coupling, ev.slope_gap);
      events.push_back(ev);
    }
  }
  std::sort(events.begin(), events.end(), [](const CrossingEvent& x, const CrossingEvent& y) {
    if (x.time != y.time) {
      return x.time < y.time;
    }
    if (x.level_a != y.level_a) {
      return x.level_a < y.level_a;
    }
    return x.level_b < y.level_b;
  });
  return events;
}

double max_crossing_time(const MlzModel& model) {
  double result = 0.0;
  for (const auto& ev : find_crossings(model)) {
    result = std::max(result, std::abs(ev.time));
  }
  return result;
}

MlzModel rephase(const MlzModel& model, const std::vector<double>& phases) {
  MlzModel out = model;
  const auto n = static_cast<Eigen::Index>(model.n_states());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.couplings(i, j) *= std::polar(1.0, phases[i] - phases[j]);
    }
  }
  return out;
}

} // namespace mlz

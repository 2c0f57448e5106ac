#include "mlz/semiclassical.hpp"

#include <cmath>
#include <sstream>

#include "mlz/errors.hpp"

namespace mlz {

namespace {

constexpr Complex kI{0.0, 1.0};

bool same_time(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

void check_simultaneous(const std::vector<CrossingEvent>& crossings) {
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    for (std::size_t j = i + 1; j < crossings.size() && same_time(crossings[i].time, crossings[j].time);
         ++j) {
      const auto& x = crossings[i];
      const auto& y = crossings[j];
      if (!x.branches() || !y.branches()) {
        continue;
      }
      if (x.involves(y.level_a) || x.involves(y.level_b)) {
        std::ostringstream msg;
        msg << "crossings (" << x.level_a + 1 << "," << x.level_b + 1 << ") and (" << y.level_a + 1
            << "," << y.level_b + 1 << ") share a level at t = " << x.time;
        throw SimultaneousSharedCrossing(msg.str());
      }
    }
  }
}

struct PhaseWindow {
  double start = 0.0;
  double end = 0.0;
};

PhaseWindow phase_window(const std::vector<CrossingEvent>& crossings, double pad) {
  if (crossings.empty()) {
    return {-pad, pad};
  }
  return {crossings.front().time - pad, crossings.back().time + pad};
}

// Integral of slope t + offset over [a, b].
double segment_phase(const MlzModel& model, std::size_t level, double a, double b) {
  return 0.5 * model.slopes[level] * (b * b - a * a) + model.offsets[level] * (b - a);
}

// Recomputes magnitude, LZ phase, dynamic phase and final level from the
// decision list.
void evaluate(SemiclassicalPath& path, const MlzModel& model, const PhaseWindow& window) {
  std::size_t level = path.initial_level;
  double magnitude = 1.0;
  Complex lz{1.0, 0.0};
  double phase = 0.0;
  double t_prev = window.start;
  for (const auto& d : path.decisions) {
    const auto& c = d.crossing;
    if (d.action == Action::stay) {
      magnitude *= std::sqrt(c.p_stay);
      continue;
    }
    const std::size_t dest = c.partner(level);
    magnitude *= std::sqrt(1.0 - c.p_stay);
    const Complex a = model.couplings(static_cast<Eigen::Index>(dest), static_cast<Eigen::Index>(level));
    lz *= kI * (a / std::abs(a));
    phase += segment_phase(model, level, t_prev, c.time);
    t_prev = c.time;
    level = dest;
  }
  phase += segment_phase(model, level, t_prev, window.end);
  path.final_level = level;
  path.magnitude = magnitude;
  path.lz_phase = lz;
  path.dynamic_phase = phase;
}

class PathWalker {
public:
  PathWalker(const MlzModel& model, const std::vector<CrossingEvent>& crossings,
             const PathOptions& options, std::size_t initial)
      : model_(model), crossings_(crossings), options_(options),
        window_(phase_window(crossings, options.pad)) {
    current_.initial_level = initial;
  }

  std::vector<SemiclassicalPath> run() {
    walk(0, current_.initial_level);
    return std::move(leaves_);
  }

private:
  void walk(std::size_t from, std::size_t level) {
    std::size_t idx = from;
    while (idx < crossings_.size() &&
           !(crossings_[idx].involves(level) && crossings_[idx].branches())) {
      ++idx;
    }
    if (idx == crossings_.size()) {
      if (leaves_.size() == options_.max_paths) {
        std::ostringstream msg;
        msg << "more than " << options_.max_paths << " semiclassical paths";
        throw PathExplosion(msg.str());
      }
      SemiclassicalPath leaf = current_;
      evaluate(leaf, model_, window_);
      leaves_.push_back(std::move(leaf));
      return;
    }
    const CrossingEvent& c = crossings_[idx];
    current_.decisions.push_back({c, Action::stay});
    walk(idx + 1, level);
    current_.decisions.back().action = Action::switch_level;
    walk(idx + 1, c.partner(level));
    current_.decisions.pop_back();
  }

  const MlzModel& model_;
  const std::vector<CrossingEvent>& crossings_;
  const PathOptions& options_;
  PhaseWindow window_;
  SemiclassicalPath current_;
  std::vector<SemiclassicalPath> leaves_;
};

} // namespace

std::size_t SemiclassicalPath::switch_count() const {
  std::size_t n = 0;
  for (const auto& d : decisions) {
    n += d.action == Action::switch_level ? 1 : 0;
  }
  return n;
}

std::vector<SemiclassicalPath> enumerate_paths(const MlzModel& model, std::size_t initial_level,
                                               const PathOptions& options) {
  if (initial_level >= model.n_states()) {
    throw InvalidState("initial level out of range");
  }
  const auto crossings = find_crossings(model);
  check_simultaneous(crossings);
  return PathWalker(model, crossings, options, initial_level).run();
}

Complex path_amplitude(const SemiclassicalPath& path, const MlzModel& model,
                       const PathOptions& options) {
  SemiclassicalPath copy = path;
  evaluate(copy, model, phase_window(find_crossings(model), options.pad));
  return copy.magnitude * copy.lz_phase * std::polar(1.0, copy.dynamic_phase);
}

SemiclassicalResult semiclassical_matrix(const MlzModel& model, const PathOptions& options) {
  const std::size_t n = model.n_states();
  const auto crossings = find_crossings(model);
  check_simultaneous(crossings);

  SemiclassicalResult res;
  res.p_matrix = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  res.amplitudes.assign(n, std::vector<PathSum>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& path : PathWalker(model, crossings, options, i).run()) {
      PathSum& sum = res.amplitudes[i][path.final_level];
      sum.amplitude += path.magnitude * path.lz_phase * std::polar(1.0, path.dynamic_phase);
      sum.paths.push_back(std::move(path));
    }
    for (std::size_t f = 0; f < n; ++f) {
      res.p_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
          std::norm(res.amplitudes[i][f].amplitude);
    }
  }
  return res;
}

} // namespace mlz

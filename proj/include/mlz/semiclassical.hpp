#pragma once

#include <cstddef>
#include <vector>

#include "mlz/model.hpp"

namespace mlz {

enum class Action { stay, switch_level };

struct Decision {
  CrossingEvent crossing;
  Action action = Action::stay;
};

/// One trajectory of the independent-crossing picture: a chronological list
/// of stay/switch decisions at the branching crossings met on the way.
struct SemiclassicalPath {
  std::size_t initial_level = 0;
  std::size_t final_level = 0;
  std::vector<Decision> decisions;
  double magnitude = 1.0;        // prod sqrt(p) over stays, sqrt(1 - p) over switches
  Complex lz_phase{1.0, 0.0};    // prod over switches m -> n of i exp(i arg A_nm)
  double dynamic_phase = 0.0;    // integral of the diabatic energy along the path

  std::size_t switch_count() const;
};

struct PathOptions {
  std::size_t max_paths = std::size_t{1} << 20;
  // The dynamic phase is integrated over [first crossing - pad, last crossing + pad].
  double pad = 1.0;
};

/// Depth-first enumeration over the chronologically sorted crossings.
/// Throws SimultaneousSharedCrossing when two branching crossings that share a
/// level happen at the same time, PathExplosion above options.max_paths.
std::vector<SemiclassicalPath> enumerate_paths(const MlzModel& model, std::size_t initial_level,
                                               const PathOptions& options = {});

/// magnitude * lz_phase * exp(i dynamic_phase), recomputed from the decision
/// list so it does not trust the cached fields of `path`.
Complex path_amplitude(const SemiclassicalPath& path, const MlzModel& model,
                       const PathOptions& options = {});

struct PathSum {
  std::vector<SemiclassicalPath> paths;
  Complex amplitude{};
};

struct SemiclassicalResult {
  RMatrix p_matrix;                              // p_matrix(i, f) = P(i -> f)
  std::vector<std::vector<PathSum>> amplitudes;  // [initial][final]
};

SemiclassicalResult semiclassical_matrix(const MlzModel& model, const PathOptions& options = {});

} // namespace mlz

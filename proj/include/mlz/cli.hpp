#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlz/analytic.hpp"
#include "mlz/propagator.hpp"
#include "mlz/semiclassical.hpp"

// Command implementations behind the `mlz` executable. Every command writes
// data to `out` and warnings to `diag`, and throws MlzError (or
// std::invalid_argument for bad flag combinations) on failure.
namespace mlz::cli {

enum class PresetKind { interference, minigap };
enum class Format { csv, json };
enum class SweepParam { eps_scale, g_scale };

/// Either a named preset built from `params`, or a model file.
struct ModelSource {
  std::optional<PresetKind> preset;
  std::optional<std::filesystem::path> file;
  PresetParams params;

  std::string name() const;
  bool is_interference() const { return preset == PresetKind::interference; }
};

MlzModel build_model(const ModelSource& source);

/// Source with offsets (eps_scale) or couplings (g_scale) multiplied by
/// `value`. For presets this scales eps1/eps2 or g1/g2/g3.
MlzModel scaled_model(const ModelSource& source, SweepParam param, double value,
                      PresetParams* scaled_params = nullptr);

struct CommonOptions {
  ModelSource model;
  std::size_t initial = 1; // one-based
  double t_window = 1000.0;
  IntegratorConfig integrator;
  std::optional<Format> format; // per-command default when unset
  int jobs = 1;
};

/// %.17g; the one number format used by every CSV emitter.
std::string format_number(double value);

void cmd_spectrum(const CommonOptions& opts, double t_min, double t_max, int samples,
                  std::ostream& out);

void cmd_transition(const CommonOptions& opts, std::ostream& out);

struct SweepSpec {
  ModelSource model;
  SweepParam param = SweepParam::eps_scale;
  std::vector<double> values;
  std::size_t initial = 1; // one-based
  IntegratorConfig integrator; // window taken from t_start / t_end
};

struct SweepRecord {
  double param_value = 0.0;
  std::vector<double> numeric_probs;
  // exact_matrix row for the interference preset, semiclassical row otherwise
  // (empty when no reference is available).
  std::vector<double> reference_probs;
  double max_abs_deviation = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<double> skipped_values;
  std::string reference_kind; // "analytic", "semiclassical" or ""
  // max - min of each numeric probability over the sweep
  std::vector<double> spread;
  double max_spread = 0.0;
};

/// Default grids: 12 geometric points on [0.5, 6] for eps_scale, 21 linear
/// points on [0, 1] for g_scale.
std::vector<double> default_sweep_values(SweepParam param);

/// Runs every point (up to `jobs` concurrently), keeps input order, skips and
/// reports failing points, and throws MlzError when more than 10% fail.
SweepResult run_sweep(const SweepSpec& spec, int jobs, std::ostream& diag);

void cmd_sweep(const SweepSpec& spec, int jobs, Format format, std::ostream& out,
               std::ostream& diag);

/// Runs the numeric, semiclassical and (interference preset only) analytic
/// pipelines. A failing pipeline is reported in the output and in the
/// returned list; the others still run.
std::vector<std::string> cmd_compare(const CommonOptions& opts, std::ostream& out,
                                     std::ostream& diag);

void cmd_paths(const CommonOptions& opts, std::ostream& out);

/// Entry point of the executable; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& diag);

} // namespace mlz::cli

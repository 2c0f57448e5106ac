#include "mlz/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json_writer.hpp"
#include "mlz/errors.hpp"
#include "mlz/model_io.hpp"
#include "mlz/spectrum.hpp"

namespace mlz::cli {
namespace {

constexpr double kProbabilitySumTolerance = 1e-6;
constexpr double kMaxFailureFraction = 0.1;

const char* frame_name(Frame f) { return f == Frame::interaction ? "interaction" : "diabatic"; }
const char* boundary_name(Boundary b) { return b == Boundary::adiabatic ? "adiabatic" : "diabatic"; }

std::size_t checked_initial(const MlzModel& model, std::size_t initial) {
  if (initial < 1 || initial > model.n_states()) {
    throw std::invalid_argument("initial level must lie in 1.." + std::to_string(model.n_states()));
  }
  return initial - 1;
}

IntegratorConfig windowed(const IntegratorConfig& base, double t_window) {
  if (!(t_window > 0.0) || !std::isfinite(t_window)) {
    throw std::invalid_argument("t-window must be positive");
  }
  IntegratorConfig config = base;
  config.t_start = -t_window;
  config.t_end = t_window;
  return config;
}

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

double max_abs_difference(const RMatrix& a, const RMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

std::vector<double> row_of(const RMatrix& m, std::size_t row) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = m(static_cast<Eigen::Index>(row), k);
  return out;
}

std::vector<double> semiclassical_row(const MlzModel& model, std::size_t initial) {
  std::vector<Complex> sums(model.n_states());
  for (const auto& path : enumerate_paths(model, initial)) {
    sums[path.final_level] += path_amplitude(path, model);
  }
  std::vector<double> out(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k) out[k] = std::norm(sums[k]);
  return out;
}

ojson complex_json(Complex z) { return ojson{{"re", z.real()}, {"im", z.imag()}}; }

ojson matrix_json(const RMatrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(row_of(m, i));
  return rows;
}

ojson stats_json(const IntegratorStats& s) {
  return ojson{{"accepted_steps", s.accepted_steps},
               {"rejected_steps", s.rejected_steps},
               {"rhs_evaluations", s.rhs_evaluations},
               {"error_estimate", s.error_estimate},
               {"max_norm_drift", s.max_norm_drift}};
}

ojson integrator_json(const IntegratorConfig& c, double t_window) {
  return ojson{{"t_window", t_window},
               {"abs_tol", c.abs_tol},
               {"rel_tol", c.rel_tol},
               {"frame", frame_name(c.frame)},
               {"boundary", boundary_name(c.boundary)}};
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    out << cells[i];
  }
  out << '\n';
}

struct PointOutcome {
  std::optional<SweepRecord> record;
  std::string error;
  std::string warning;
};

PointOutcome evaluate_point(const SweepSpec& spec, double value) {
  PointOutcome outcome;
  try {
    PresetParams params;
    const MlzModel model = scaled_model(spec.model, spec.param, value, &params);
    const std::size_t initial = checked_initial(model, spec.initial);
    SweepRecord record;
    record.param_value = value;
    record.numeric_probs = transition_row(model, initial, spec.integrator);
    double total = 0.0;
    for (double p : record.numeric_probs) total += p;
    if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
      throw UnitarityViolation("probabilities sum to " + format_number(total));
    }
    if (spec.model.is_interference()) {
      record.reference_probs = row_of(exact_matrix(params), initial);
    } else {
      try {
        record.reference_probs = semiclassical_row(model, initial);
      } catch (const MlzError& e) {
        outcome.warning = std::string("no semiclassical reference: ") + e.what();
      }
    }
    record.max_abs_deviation = record.reference_probs.empty()
                                   ? std::numeric_limits<double>::quiet_NaN()
                                   : max_abs_difference(record.numeric_probs, record.reference_probs);
    outcome.record = std::move(record);
  } catch (const MlzError& e) {
    outcome.error = e.what();
  }
  return outcome;
}

void validate_sweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("sweep values must be nonempty");
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    if (!std::isfinite(spec.values[i])) throw std::invalid_argument("sweep values must be finite");
    if (i > 0 && !(spec.values[i] > spec.values[i - 1])) {
      throw std::invalid_argument("sweep values must be strictly increasing");
    }
  }
}

const char* param_name(SweepParam p) { return p == SweepParam::eps_scale ? "eps_scale" : "g_scale"; }

std::string level_pair(std::size_t initial, std::size_t final_level) {
  return std::to_string(initial) + "to" + std::to_string(final_level);
}

} // namespace

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string ModelSource::name() const {
  if (file) return file->string();
  if (preset == PresetKind::interference) return "interference";
  if (preset == PresetKind::minigap) return "minigap";
  return "";
}

MlzModel build_model(const ModelSource& source) {
  if (source.preset.has_value() == source.file.has_value()) {
    throw std::invalid_argument("exactly one of --preset or --model is required");
  }
  if (source.file) return load_model(*source.file);
  return *source.preset == PresetKind::interference ? interference_model(source.params)
                                                     : minigap_model(source.params);
}

MlzModel scaled_model(const ModelSource& source, SweepParam param, double value,
                      PresetParams* scaled_params) {
  if (source.preset) {
    PresetParams p = source.params;
    if (param == SweepParam::eps_scale) {
      p.eps1 *= value;
      p.eps2 *= value;
    } else {
      p.g1 *= value;
      p.g2 *= value;
      p.g3 *= value;
    }
    if (scaled_params) *scaled_params = p;
    ModelSource scaled = source;
    scaled.params = p;
    return build_model(scaled);
  }
  MlzModel model = build_model(source);
  if (param == SweepParam::eps_scale) {
    for (double& e : model.offsets) e *= value;
  } else {
    model.couplings *= value;
  }
  return validate_model(std::move(model));
}

void cmd_spectrum(const CommonOptions& opts, double t_min, double t_max, int samples,
                  std::ostream& out) {
  const MlzModel model = build_model(opts.model);
  const auto spectrum = adiabatic_spectrum(model, t_min, t_max, samples);
  if (opts.format.value_or(Format::csv) == Format::csv) {
    std::vector<std::string> header{"t"};
    for (std::size_t k = 1; k <= model.n_states(); ++k) header.push_back("e" + std::to_string(k));
    header.push_back("min_gap");
    write_csv_row(out, header);
    for (const auto& s : spectrum) {
      std::vector<std::string> cells{format_number(s.time)};
      for (double e : s.eigenvalues) cells.push_back(format_number(e));
      cells.push_back(format_number(s.min_gap));
      write_csv_row(out, cells);
    }
    return;
  }
  ojson rows = ojson::array();
  for (const auto& s : spectrum) {
    rows.push_back(ojson{{"t", s.time}, {"eigenvalues", s.eigenvalues}, {"min_gap", s.min_gap}});
  }
  write_json(ojson{{"command", "spectrum"}, {"model", opts.model.name()}, {"samples", rows}}, out);
}

void cmd_transition(const CommonOptions& opts, std::ostream& out) {
  const MlzModel model = build_model(opts.model);
  const std::size_t initial = checked_initial(model, opts.initial);
  const IntegratorConfig config = windowed(opts.integrator, opts.t_window);
  const ConvergedRow row = converged_row(model, initial, opts.t_window, config);

  std::vector<double> analytic;
  std::vector<double> deviation;
  if (opts.model.is_interference()) {
    analytic = row_of(exact_matrix(opts.model.params), initial);
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      deviation.push_back(std::abs(row.probabilities[k] - analytic[k]));
    }
  }

  if (opts.format.value_or(Format::json) == Format::csv) {
    write_csv_row(out, analytic.empty()
                           ? std::vector<std::string>{"final_level", "numeric"}
                           : std::vector<std::string>{"final_level", "numeric", "analytic",
                                                      "deviation"});
    for (std::size_t k = 0; k < row.probabilities.size(); ++k) {
      std::vector<std::string> cells{std::to_string(k + 1), format_number(row.probabilities[k])};
      if (!analytic.empty()) {
        cells.push_back(format_number(analytic[k]));
        cells.push_back(format_number(deviation[k]));
      }
      write_csv_row(out, cells);
    }
    return;
  }

  ojson doc{{"command", "transition"},
            {"model", opts.model.name()},
            {"initial_level", opts.initial},
            {"integrator", integrator_json(config, opts.t_window)},
            {"numeric", row.probabilities},
            {"truncation_error", row.truncation_error}};
  if (!analytic.empty()) {
    doc["analytic"] = analytic;
    doc["deviation"] = deviation;
    doc["max_abs_deviation"] = *std::max_element(deviation.begin(), deviation.end());
  }
  doc["stats"] = stats_json(row.stats);
  write_json(doc, out);
}

std::vector<double> default_sweep_values(SweepParam param) {
  std::vector<double> values;
  if (param == SweepParam::eps_scale) {
    const int n = 12;
    const double lo = 0.5;
    const double hi = 6.0;
    for (int i = 0; i < n; ++i) values.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
    values.back() = hi;
  } else {
    const int n = 21;
    for (int i = 0; i < n; ++i) values.push_back(double(i) / (n - 1));
  }
  return values;
}

SweepResult run_sweep(const SweepSpec& spec, int jobs, std::ostream& diag) {
  validate_sweep(spec);
  validate_config(spec.integrator);
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");

  const std::size_t n = spec.values.size();
  std::vector<PointOutcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      outcomes[i] = evaluate_point(spec, spec.values[i]);
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult result;
  result.reference_kind = spec.model.is_interference() ? "analytic" : "semiclassical";
  for (std::size_t i = 0; i < n; ++i) {
    const double value = spec.values[i];
    if (!outcomes[i].warning.empty()) {
      diag << "warning: " << param_name(spec.param) << "=" << format_number(value) << ": "
           << outcomes[i].warning << '\n';
    }
    if (outcomes[i].record) {
      result.records.push_back(std::move(*outcomes[i].record));
    } else {
      diag << "warning: skipping " << param_name(spec.param) << "=" << format_number(value)
           << ": " << outcomes[i].error << '\n';
      result.skipped_values.push_back(value);
    }
  }
  if (double(result.skipped_values.size()) > kMaxFailureFraction * double(n)) {
    throw SweepFailed(std::to_string(result.skipped_values.size()) + " of " + std::to_string(n) +
                      " sweep points failed");
  }

  if (!result.records.empty()) {
    const std::size_t levels = result.records.front().numeric_probs.size();
    result.spread.assign(levels, 0.0);
    for (std::size_t k = 0; k < levels; ++k) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& r : result.records) {
        lo = std::min(lo, r.numeric_probs[k]);
        hi = std::max(hi, r.numeric_probs[k]);
      }
      result.spread[k] = hi - lo;
    }
    result.max_spread = *std::max_element(result.spread.begin(), result.spread.end());
  }
  return result;
}

void cmd_sweep(const SweepSpec& spec, int jobs, Format format, std::ostream& out,
               std::ostream& diag) {
  const SweepResult result = run_sweep(spec, jobs, diag);
  const bool report_spread = spec.param == SweepParam::eps_scale && !result.records.empty();
  const std::size_t levels = result.records.empty() ? 0 : result.records.front().numeric_probs.size();

  if (format == Format::csv) {
    std::vector<std::string> header{param_name(spec.param)};
    for (std::size_t k = 1; k <= levels; ++k) header.push_back("numeric_" + level_pair(spec.initial, k));
    for (std::size_t k = 1; k <= levels; ++k) {
      header.push_back(result.reference_kind + "_" + level_pair(spec.initial, k));
    }
    header.push_back("max_abs_deviation");
    write_csv_row(out, header);
    for (const auto& r : result.records) {
      std::vector<std::string> cells{format_number(r.param_value)};
      for (double p : r.numeric_probs) cells.push_back(format_number(p));
      for (std::size_t k = 0; k < levels; ++k) {
        cells.push_back(r.reference_probs.empty() ? "" : format_number(r.reference_probs[k]));
      }
      cells.push_back(r.reference_probs.empty() ? "" : format_number(r.max_abs_deviation));
      write_csv_row(out, cells);
    }
    if (report_spread) {
      std::vector<std::string> cells{"# spread"};
      for (double s : result.spread) cells.push_back(format_number(s));
      write_csv_row(out, cells);
      out << "# max_spread," << format_number(result.max_spread) << '\n';
    }
    return;
  }

  ojson records = ojson::array();
  for (const auto& r : result.records) {
    ojson rec{{"param_value", r.param_value}, {"numeric_probs", r.numeric_probs}};
    if (!r.reference_probs.empty()) {
      rec[result.reference_kind + "_probs"] = r.reference_probs;
      rec["max_abs_deviation"] = r.max_abs_deviation;
    }
    records.push_back(rec);
  }
  ojson doc{{"command", "sweep"},
            {"model", spec.model.name()},
            {"swept_param", param_name(spec.param)},
            {"initial_level", spec.initial},
            {"integrator", integrator_json(spec.integrator, spec.integrator.t_end)},
            {"reference", result.reference_kind},
            {"records", records},
            {"skipped_values", result.skipped_values}};
  if (report_spread) {
    doc["spread"] = result.spread;
    doc["max_spread"] = result.max_spread;
  }
  write_json(doc, out);
}

std::vector<std::string> cmd_compare(const CommonOptions& opts, std::ostream& out,
                                     std::ostream& diag) {
  const MlzModel model = build_model(opts.model);
  const IntegratorConfig config = windowed(opts.integrator, opts.t_window);
  std::vector<std::string> errors;

  std::optional<ConvergedProbabilities> numeric;
  try {
    numeric = converged_probabilities(model, opts.t_window, config);
  } catch (const MlzError& e) {
    errors.push_back(std::string("numeric: ") + e.what());
  }
  std::optional<RMatrix> semiclassical;
  try {
    semiclassical = semiclassical_matrix(model).p_matrix;
  } catch (const MlzError& e) {
    errors.push_back(std::string("semiclassical: ") + e.what());
  }
  std::optional<RMatrix> analytic;
  if (opts.model.is_interference()) analytic = exact_matrix(opts.model.params);
  for (const auto& e : errors) diag << "error: " << e << '\n';

  if (opts.format.value_or(Format::json) == Format::csv) {
    write_csv_row(out, {"initial_level", "final_level", "numeric", "semiclassical", "analytic"});
    const auto n = static_cast<Eigen::Index>(model.n_states());
    auto cell = [](const auto& m, Eigen::Index i, Eigen::Index f) {
      return m ? format_number((*m)(i, f)) : std::string();
    };
    std::optional<RMatrix> numeric_p;
    if (numeric) numeric_p = numeric->p_matrix;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index f = 0; f < n; ++f) {
        write_csv_row(out, {std::to_string(i + 1), std::to_string(f + 1), cell(numeric_p, i, f),
                            cell(semiclassical, i, f), cell(analytic, i, f)});
      }
    }
    return errors;
  }

  ojson doc{{"command", "compare"},
            {"model", opts.model.name()},
            {"integrator", integrator_json(config, opts.t_window)}};
  doc["numeric"] = numeric ? matrix_json(numeric->p_matrix) : ojson(nullptr);
  if (numeric) doc["truncation_error"] = numeric->truncation_error;
  doc["semiclassical"] = semiclassical ? matrix_json(*semiclassical) : ojson(nullptr);
  if (analytic) doc["analytic"] = matrix_json(*analytic);
  ojson deviations = ojson::object();
  if (numeric && semiclassical) {
    deviations["numeric_vs_semiclassical"] = max_abs_difference(numeric->p_matrix, *semiclassical);
  }
  if (numeric && analytic) {
    deviations["numeric_vs_analytic"] = max_abs_difference(numeric->p_matrix, *analytic);
  }
  if (semiclassical && analytic) {
    deviations["semiclassical_vs_analytic"] = max_abs_difference(*semiclassical, *analytic);
  }
  doc["deviations"] = deviations;
  doc["errors"] = errors;
  write_json(doc, out);
  return errors;
}

void cmd_paths(const CommonOptions& opts, std::ostream& out) {
  if (opts.format.value_or(Format::json) != Format::json) {
    throw std::invalid_argument("paths only supports --format json");
  }
  const MlzModel model = build_model(opts.model);
  const std::size_t initial = checked_initial(model, opts.initial);
  const auto paths = enumerate_paths(model, initial);

  std::vector<Complex> sums(model.n_states());
  std::vector<std::size_t> counts(model.n_states());
  ojson listing = ojson::array();
  for (const auto& path : paths) {
    const Complex amplitude = path_amplitude(path, model);
    sums[path.final_level] += amplitude;
    ++counts[path.final_level];
    ojson decisions = ojson::array();
    for (const auto& d : path.decisions) {
      decisions.push_back(ojson{{"time", d.crossing.time},
                                {"levels", {d.crossing.level_a + 1, d.crossing.level_b + 1}},
                                {"action", d.action == Action::stay ? "stay" : "switch"},
                                {"p_stay", d.crossing.p_stay}});
    }
    listing.push_back(ojson{{"final_level", path.final_level + 1},
                            {"switch_count", path.switch_count()},
                            {"decisions", decisions},
                            {"magnitude", path.magnitude},
                            {"lz_phase", complex_json(path.lz_phase)},
                            {"dynamic_phase", path.dynamic_phase},
                            {"amplitude", complex_json(amplitude)}});
  }
  ojson finals = ojson::array();
  for (std::size_t k = 0; k < sums.size(); ++k) {
    finals.push_back(ojson{{"level", k + 1},
                           {"path_count", counts[k]},
                           {"amplitude", complex_json(sums[k])},
                           {"modulus", std::abs(sums[k])},
                           {"probability", std::norm(sums[k])}});
  }
  write_json(ojson{{"command", "paths"},
                   {"model", opts.model.name()},
                   {"initial_level", opts.initial},
                   {"path_count", paths.size()},
                   {"paths", listing},
                   {"final_levels", finals}},
             out);
}

} // namespace mlz::cli

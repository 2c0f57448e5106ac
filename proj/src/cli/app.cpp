#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mlz/cli.hpp"
#include "mlz/errors.hpp"

namespace mlz::cli {
namespace {

struct Flags {
  std::string preset;
  std::string model_file;
  std::optional<double> eps1, eps2, g1, g2, g3, beta;
  std::size_t initial = 1;
  double t_window = 1000.0;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  Frame frame = Frame::interaction;
  Boundary boundary = Boundary::adiabatic;
  std::string out;
  std::optional<Format> format;
  int jobs = 1;
  // spectrum
  double t_min = -3.0;
  double t_max = 3.0;
  int samples = 601;
  // sweep
  SweepParam param = SweepParam::eps_scale;
  std::vector<double> values;
};

const std::map<std::string, Frame> kFrames{{"diabatic", Frame::diabatic},
                                           {"interaction", Frame::interaction}};
const std::map<std::string, Boundary> kBoundaries{{"adiabatic", Boundary::adiabatic},
                                                  {"diabatic", Boundary::diabatic}};
const std::map<std::string, Format> kFormats{{"csv", Format::csv}, {"json", Format::json}};
const std::map<std::string, SweepParam> kParams{{"eps_scale", SweepParam::eps_scale},
                                                {"g_scale", SweepParam::g_scale}};

void add_common(CLI::App* cmd, Flags& f) {
  auto* preset = cmd->add_option("--preset", f.preset, "Built-in model")
                     ->check(CLI::IsMember({"interference", "minigap"}));
  auto* model = cmd->add_option("--model", f.model_file, "JSON model file");
  preset->excludes(model);
  for (auto [name, slot] : {std::pair{"--eps1", &f.eps1}, std::pair{"--eps2", &f.eps2},
                            std::pair{"--g1", &f.g1}, std::pair{"--g2", &f.g2},
                            std::pair{"--g3", &f.g3}, std::pair{"--beta", &f.beta}}) {
    cmd->add_option(name, *slot, "Preset parameter")->excludes(model);
  }
  cmd->add_option("--initial", f.initial, "Initial level (1..N)")->capture_default_str();
  cmd->add_option("--t-window", f.t_window, "Integration window [-T, T]")->capture_default_str();
  cmd->add_option("--abs-tol", f.abs_tol, "Absolute tolerance")->capture_default_str();
  cmd->add_option("--rel-tol", f.rel_tol, "Relative tolerance")->capture_default_str();
  cmd->add_option("--frame", f.frame, "Integration frame")
      ->transform(CLI::CheckedTransformer(kFrames));
  cmd->add_option("--boundary", f.boundary, "Basis used at the window edges")
      ->transform(CLI::CheckedTransformer(kBoundaries));
  cmd->add_option("--out", f.out, "Write data to this file instead of stdout");
  cmd->add_option("--format", f.format, "Output format")
      ->transform(CLI::CheckedTransformer(kFormats));
  cmd->add_option("--jobs", f.jobs, "Concurrent sweep points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

CommonOptions common_options(const Flags& f) {
  CommonOptions o;
  if (f.preset.empty() == f.model_file.empty()) {
    throw std::invalid_argument("exactly one of --preset or --model is required");
  }
  if (!f.preset.empty()) {
    o.model.preset = f.preset == "interference" ? PresetKind::interference : PresetKind::minigap;
  } else {
    o.model.file = f.model_file;
  }
  PresetParams& p = o.model.params;
  p.eps1 = f.eps1.value_or(p.eps1);
  p.eps2 = f.eps2.value_or(p.eps2);
  p.g1 = f.g1.value_or(p.g1);
  p.g2 = f.g2.value_or(p.g2);
  p.g3 = f.g3.value_or(p.g3);
  p.beta = f.beta.value_or(p.beta);
  o.initial = f.initial;
  o.t_window = f.t_window;
  o.integrator.abs_tol = f.abs_tol;
  o.integrator.rel_tol = f.rel_tol;
  o.integrator.frame = f.frame;
  o.integrator.boundary = f.boundary;
  o.integrator.t_start = -f.t_window;
  o.integrator.t_end = f.t_window;
  o.format = f.format;
  o.jobs = f.jobs;
  return o;
}

} // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& diag) {
  CLI::App app{"Multistate Landau-Zener workbench"};
  app.require_subcommand(1);
  Flags f;

  auto* spectrum = app.add_subcommand("spectrum", "Adiabatic energies over a time grid");
  add_common(spectrum, f);
  spectrum->add_option("--t-min", f.t_min)->capture_default_str();
  spectrum->add_option("--t-max", f.t_max)->capture_default_str();
  spectrum->add_option("--samples", f.samples)->capture_default_str();

  auto* transition = app.add_subcommand("transition", "Converged transition probabilities");
  add_common(transition, f);

  auto* sweep = app.add_subcommand("sweep", "Transition row over a parameter grid");
  add_common(sweep, f);
  sweep->add_option("--param", f.param, "Swept parameter")
      ->transform(CLI::CheckedTransformer(kParams));
  sweep->add_option("--values", f.values, "Grid values (strictly increasing)");

  auto* compare = app.add_subcommand("compare", "Numeric vs semiclassical vs closed form");
  add_common(compare, f);

  auto* paths = app.add_subcommand("paths", "Semiclassical path listing");
  add_common(paths, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, diag);
  }

  std::ostringstream data;
  int status = 0;
  try {
    const CommonOptions opts = common_options(f);
    if (spectrum->parsed()) {
      cmd_spectrum(opts, f.t_min, f.t_max, f.samples, data);
    } else if (transition->parsed()) {
      cmd_transition(opts, data);
    } else if (sweep->parsed()) {
      SweepSpec spec;
      spec.model = opts.model;
      spec.param = f.param;
      spec.values = f.values.empty() ? default_sweep_values(f.param) : f.values;
      spec.initial = opts.initial;
      spec.integrator = opts.integrator;
      cmd_sweep(spec, opts.jobs, opts.format.value_or(Format::csv), data, diag);
    } else if (compare->parsed()) {
      status = cmd_compare(opts, data, diag).empty() ? 0 : 1;
    } else {
      cmd_paths(opts, data);
    }
  } catch (const std::invalid_argument& e) {
    diag << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const MlzError& e) {
    diag << "error: " << e.what() << '\n';
    return 1;
  }

  if (f.out.empty()) {
    out << data.str();
  } else {
    std::ofstream file(f.out);
    file << data.str();
    if (!file) {
      diag << "error: cannot write " << f.out << '\n';
      return 1;
    }
  }
  return status;
}

} // namespace mlz::cli

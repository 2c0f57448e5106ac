#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlz/cli.hpp"
#include "mlz/errors.hpp"

using namespace mlz;
using namespace mlz::cli;
using nlohmann::json;

namespace {

CommonOptions preset_options(PresetKind kind, PresetParams params = {}) {
  CommonOptions o;
  o.model.preset = kind;
  o.model.params = params;
  o.t_window = 200.0;
  o.integrator.t_start = -200.0;
  o.integrator.t_end = 200.0;
  return o;
}

std::filesystem::path write_model_file(const std::string& name, const json& doc) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << doc.dump();
  return path;
}

CommonOptions file_options(const std::filesystem::path& path) {
  CommonOptions o;
  o.model.file = path;
  o.t_window = 100.0;
  o.integrator.t_start = -100.0;
  o.integrator.t_end = 100.0;
  return o;
}

// Three uncoupled levels with distinct lines.
json diagonal_doc() {
  return json{{"n_states", 3},
              {"slopes", {1.0, 0.0, -0.5}},
              {"offsets", {0.2, 0.0, -0.3}},
              {"couplings", json::array()}};
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::vector<std::string>* header) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      if (header) *header = cells;
      first = false;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(c.empty() ? std::nan("") : std::stod(c));
    rows.push_back(row);
  }
  return rows;
}

json run_json(void (*cmd)(const CommonOptions&, std::ostream&), const CommonOptions& o) {
  std::ostringstream out;
  cmd(o, out);
  return json::parse(out.str());
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr,
            std::string* diag_text = nullptr) {
  args.insert(args.begin(), "mlz");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream diag;
  const int rc = run(static_cast<int>(argv.size()), argv.data(), out, diag);
  if (out_text) *out_text = out.str();
  if (diag_text) *diag_text = diag.str();
  return rc;
}

} // namespace

TEST(CliFormat, SeventeenSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(CliSpectrum, InterferenceClosesGapsNearZero) {
  CommonOptions o = preset_options(PresetKind::interference);
  std::ostringstream out;
  cmd_spectrum(o, -3.0, 3.0, 601, out);
  std::vector<std::string> header;
  const auto rows = parse_csv(out.str(), &header);
  ASSERT_EQ(rows.size(), 601u);
  EXPECT_EQ(header.front(), "t");
  EXPECT_EQ(header.back(), "min_gap");
  ASSERT_EQ(header.size(), 8u);
  double smallest = 1e300;
  double at = 0.0;
  for (const auto& r : rows) {
    if (r.back() < smallest) {
      smallest = r.back();
      at = r.front();
    }
  }
  EXPECT_LT(smallest, 1e-6);
  EXPECT_NEAR(at, 0.0, 1e-12);
}

TEST(CliSpectrum, MinigapStaysGapped) {
  CommonOptions o = preset_options(PresetKind::minigap);
  std::ostringstream out;
  cmd_spectrum(o, -3.0, 3.0, 601, out);
  const auto rows = parse_csv(out.str(), nullptr);
  double smallest = 1e300;
  for (const auto& r : rows) smallest = std::min(smallest, r.back());
  EXPECT_GT(smallest, 0.0);
}

TEST(CliSpectrum, DiagonalModelGivesStraightLines) {
  const auto path = write_model_file("mlz_cli_diag_spectrum.json", diagonal_doc());
  std::ostringstream out;
  cmd_spectrum(file_options(path), -2.0, 2.0, 9, out);
  const auto rows = parse_csv(out.str(), nullptr);
  ASSERT_EQ(rows.size(), 9u);
  for (const auto& r : rows) {
    const double t = r[0];
    std::vector<double> lines{t + 0.2, 0.0, -0.5 * t - 0.3};
    std::sort(lines.begin(), lines.end());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(r[1 + k], lines[k], 1e-12);
  }
}

TEST(CliSpectrum, JsonFormat) {
  CommonOptions o = preset_options(PresetKind::interference);
  o.format = Format::json;
  std::ostringstream out;
  cmd_spectrum(o, -1.0, 1.0, 3, out);
  const json doc = json::parse(out.str());
  EXPECT_EQ(doc["samples"].size(), 3u);
  EXPECT_EQ(doc["samples"][1]["eigenvalues"].size(), 6u);
}

TEST(CliTransition, InterferenceRowsMatchClosedForm) {
  for (std::size_t initial : {1u, 5u}) {
    for (double g : {0.0, 0.5, 1.0}) {
      CommonOptions o = preset_options(
          PresetKind::interference,
          PresetParams{.eps1 = 0.25, .eps2 = 0.35, .g1 = 0.85 * g, .g2 = g, .g3 = 1.15 * g});
      o.initial = initial;
      const json doc = run_json(cmd_transition, o);
      EXPECT_EQ(doc["initial_level"], initial);
      ASSERT_EQ(doc["deviation"].size(), 6u);
      EXPECT_LT(doc["max_abs_deviation"].get<double>(), 1e-3) << "initial " << initial << " g " << g;
      EXPECT_LT(doc["truncation_error"].get<double>(), 1e-3);
    }
  }
}

TEST(CliTransition, ZeroCouplingStaysPut) {
  const auto path = write_model_file("mlz_cli_diag_transition.json", diagonal_doc());
  for (std::size_t k = 1; k <= 3; ++k) {
    CommonOptions o = file_options(path);
    o.initial = k;
    const json doc = run_json(cmd_transition, o);
    EXPECT_FALSE(doc.contains("analytic"));
    for (std::size_t f = 0; f < 3; ++f) {
      EXPECT_NEAR(doc["numeric"][f].get<double>(), f + 1 == k ? 1.0 : 0.0, 1e-9);
    }
  }
}

TEST(CliTransition, CsvHasPerLevelRows) {
  CommonOptions o = preset_options(PresetKind::interference);
  o.format = Format::csv;
  o.initial = 2;
  std::ostringstream out;
  cmd_transition(o, out);
  std::vector<std::string> header;
  const auto rows = parse_csv(out.str(), &header);
  EXPECT_EQ(header, (std::vector<std::string>{"final_level", "numeric", "analytic", "deviation"}));
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) EXPECT_LT(r[3], 1e-3);
}

TEST(CliTransition, RejectsOutOfRangeInitial) {
  CommonOptions o = preset_options(PresetKind::interference);
  o.initial = 7;
  std::ostringstream out;
  EXPECT_THROW(cmd_transition(o, out), std::invalid_argument);
  o.initial = 0;
  EXPECT_THROW(cmd_transition(o, out), std::invalid_argument);
}

TEST(CliSweep, DefaultGrids) {
  const auto eps = default_sweep_values(SweepParam::eps_scale);
  ASSERT_EQ(eps.size(), 12u);
  EXPECT_DOUBLE_EQ(eps.front(), 0.5);
  EXPECT_DOUBLE_EQ(eps.back(), 6.0);
  for (std::size_t i = 1; i < eps.size(); ++i) {
    EXPECT_NEAR(eps[i] / eps[i - 1], eps[1] / eps[0], 1e-12);
  }
  const auto g = default_sweep_values(SweepParam::g_scale);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_DOUBLE_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
}

namespace {

SweepSpec fig2c_spec() {
  SweepSpec spec;
  spec.model.preset = PresetKind::interference;
  spec.model.params = PresetParams{.eps1 = 1.0, .eps2 = 1.5, .g1 = 0.25, .g2 = 0.3, .g3 = 0.35};
  spec.values = default_sweep_values(SweepParam::eps_scale);
  spec.initial = 1;
  spec.integrator.t_start = -200.0;
  spec.integrator.t_end = 200.0;
  return spec;
}

} // namespace

TEST(CliSweep, InterferenceIsEpsIndependent) {
  std::ostringstream diag;
  const SweepResult r = run_sweep(fig2c_spec(), 1, diag);
  EXPECT_EQ(r.reference_kind, "analytic");
  ASSERT_EQ(r.records.size(), 12u);
  for (const auto& rec : r.records) {
    EXPECT_LT(rec.max_abs_deviation, 1e-3) << rec.param_value;
    double total = 0.0;
    for (double p : rec.numeric_probs) total += p;
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
  EXPECT_LT(r.max_spread, 2e-3);
  EXPECT_TRUE(diag.str().empty());
}

TEST(CliSweep, Fig2eRowTwo) {
  SweepSpec spec = fig2c_spec();
  spec.model.params = PresetParams{.eps1 = 1.0, .eps2 = 1.0, .g1 = 0.3, .g2 = 0.3, .g3 = 0.3};
  spec.values = {0.5, 2.0, 6.0};
  spec.initial = 2;
  std::ostringstream diag;
  const SweepResult r = run_sweep(spec, 1, diag);
  ASSERT_EQ(r.records.size(), 3u);
  const RMatrix exact = exact_matrix(spec.model.params);
  for (const auto& rec : r.records) {
    for (std::size_t k = 0; k < 6; ++k) {
      EXPECT_NEAR(rec.numeric_probs[k], exact(1, k), 1e-3);
    }
  }
}

TEST(CliSweep, MinigapApproachesSemiclassicalAtLargeSeparation) {
  SweepSpec spec = fig2c_spec();
  spec.model.preset = PresetKind::minigap;
  spec.values = {0.5, 6.0};
  std::ostringstream diag;
  const SweepResult r = run_sweep(spec, 1, diag);
  EXPECT_EQ(r.reference_kind, "semiclassical");
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_GT(r.records[0].max_abs_deviation, 1e-2);
  EXPECT_LT(r.records[1].max_abs_deviation, 1e-2);
}

TEST(CliSweep, ConcurrentRunKeepsInputOrderAndOutput) {
  SweepSpec spec = fig2c_spec();
  spec.values = {0.5, 0.8, 1.1, 1.7, 2.3};
  std::ostringstream serial, parallel, diag;
  cmd_sweep(spec, 1, Format::csv, serial, diag);
  cmd_sweep(spec, 3, Format::csv, parallel, diag);
  EXPECT_EQ(serial.str(), parallel.str());
  const auto rows = parse_csv(serial.str(), nullptr);
  ASSERT_EQ(rows.size(), spec.values.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i][0], spec.values[i]);
}

TEST(CliSweep, CsvColumnSchema) {
  SweepSpec spec = fig2c_spec();
  spec.values = {1.0};
  std::ostringstream out, diag;
  cmd_sweep(spec, 1, Format::csv, out, diag);
  std::vector<std::string> header;
  parse_csv(out.str(), &header);
  ASSERT_EQ(header.size(), 14u);
  EXPECT_EQ(header[0], "eps_scale");
  EXPECT_EQ(header[1], "numeric_1to1");
  EXPECT_EQ(header[7], "analytic_1to1");
  EXPECT_EQ(header[13], "max_abs_deviation");
  EXPECT_NE(out.str().find("# max_spread,"), std::string::npos);
}

TEST(CliSweep, SkipsFailingPointsWithWarning) {
  SweepSpec spec = fig2c_spec();
  // eps_scale 0 collapses two diabatic lines and is rejected by the preset.
  spec.values = default_sweep_values(SweepParam::eps_scale);
  spec.values.insert(spec.values.begin(), 0.0);
  spec.values.resize(10);
  std::ostringstream diag;
  const SweepResult r = run_sweep(spec, 1, diag);
  EXPECT_EQ(r.records.size(), 9u);
  ASSERT_EQ(r.skipped_values.size(), 1u);
  EXPECT_EQ(r.skipped_values[0], 0.0);
  EXPECT_NE(diag.str().find("warning: skipping eps_scale=0"), std::string::npos);
}

TEST(CliSweep, FailsWhenTooManyPointsFail) {
  SweepSpec spec = fig2c_spec();
  spec.values = {-1.0, 0.0, 1.0};
  std::ostringstream diag;
  EXPECT_THROW(run_sweep(spec, 1, diag), SweepFailed);
}

TEST(CliSweep, RejectsBadGrids) {
  SweepSpec spec = fig2c_spec();
  std::ostringstream diag;
  spec.values = {};
  EXPECT_THROW(run_sweep(spec, 1, diag), std::invalid_argument);
  spec.values = {1.0, 1.0};
  EXPECT_THROW(run_sweep(spec, 1, diag), std::invalid_argument);
  spec.values = {2.0, 1.0};
  EXPECT_THROW(run_sweep(spec, 1, diag), std::invalid_argument);
}

TEST(CliSweep, ScalesModelFileCouplings) {
  json doc{{"n_states", 2},
           {"slopes", {1.0, 0.0}},
           {"offsets", {0.0, 0.0}},
           {"couplings", {{{"row", 1}, {"col", 2}, {"re", 0.3}, {"im", 0.0}}}}};
  SweepSpec spec;
  spec.model.file = write_model_file("mlz_cli_two_state.json", doc);
  spec.param = SweepParam::g_scale;
  spec.values = {0.0, 1.0};
  spec.integrator.t_start = -200.0;
  spec.integrator.t_end = 200.0;
  std::ostringstream diag;
  const SweepResult r = run_sweep(spec, 1, diag);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_NEAR(r.records[0].numeric_probs[0], 1.0, 1e-9);
  EXPECT_NEAR(r.records[1].numeric_probs[0], std::exp(-2.0 * std::numbers::pi * 0.09), 1e-4);
  EXPECT_LT(r.records[1].max_abs_deviation, 1e-4);
}

TEST(CliCompare, InterferenceAllThreePipelinesAgree) {
  CommonOptions o = preset_options(PresetKind::interference);
  std::ostringstream out, diag;
  EXPECT_TRUE(cmd_compare(o, out, diag).empty());
  const json doc = json::parse(out.str());
  EXPECT_LT(doc["deviations"]["numeric_vs_analytic"].get<double>(), 1e-3);
  EXPECT_LT(doc["deviations"]["numeric_vs_semiclassical"].get<double>(), 1e-3);
  EXPECT_LT(doc["deviations"]["semiclassical_vs_analytic"].get<double>(), 1e-12);
}

TEST(CliCompare, MinigapShowsSemiclassicalBreakdown) {
  CommonOptions o = preset_options(PresetKind::minigap);
  std::ostringstream out, diag;
  EXPECT_TRUE(cmd_compare(o, out, diag).empty());
  const json doc = json::parse(out.str());
  EXPECT_FALSE(doc.contains("analytic"));
  EXPECT_GT(doc["deviations"]["numeric_vs_semiclassical"].get<double>(), 1e-2);
}

TEST(CliCompare, ZeroCouplingIsIdentityEverywhere) {
  CommonOptions o = preset_options(PresetKind::interference,
                                   PresetParams{.g1 = 0.0, .g2 = 0.0, .g3 = 0.0});
  std::ostringstream out, diag;
  EXPECT_TRUE(cmd_compare(o, out, diag).empty());
  const json doc = json::parse(out.str());
  for (const char* key : {"numeric", "semiclassical", "analytic"}) {
    for (int i = 0; i < 6; ++i) {
      for (int f = 0; f < 6; ++f) {
        EXPECT_NEAR(doc[key][i][f].get<double>(), i == f ? 1.0 : 0.0, 1e-9) << key;
      }
    }
  }
}

TEST(CliCompare, ReportsSemiclassicalFailureAndKeepsNumeric) {
  // Two branching crossings at t = 0 sharing level 1.
  json doc{{"n_states", 3},
           {"slopes", {0.0, 1.0, -1.0}},
           {"offsets", {0.0, 0.0, 0.0}},
           {"couplings",
            {{{"row", 1}, {"col", 2}, {"re", 0.2}, {"im", 0.0}},
             {{"row", 1}, {"col", 3}, {"re", 0.2}, {"im", 0.0}}}}};
  CommonOptions o = file_options(write_model_file("mlz_cli_bowtie.json", doc));
  std::ostringstream out, diag;
  const auto errors = cmd_compare(o, out, diag);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_NE(errors[0].find("semiclassical"), std::string::npos);
  const json result = json::parse(out.str());
  EXPECT_TRUE(result["semiclassical"].is_null());
  EXPECT_EQ(result["numeric"].size(), 3u);
}

TEST(CliPaths, DestructiveInterferenceFromLevelOne) {
  CommonOptions o = preset_options(PresetKind::interference);
  const json doc = run_json(cmd_paths, o);
  const json& level4 = doc["final_levels"][3];
  EXPECT_EQ(level4["level"], 4);
  EXPECT_EQ(level4["path_count"], 2);
  EXPECT_LT(level4["modulus"].get<double>(), 1e-14);
}

TEST(CliPaths, LevelTwoHasFourSinglePaths) {
  CommonOptions o = preset_options(PresetKind::interference);
  o.initial = 2;
  const json doc = run_json(cmd_paths, o);
  EXPECT_EQ(doc["path_count"], 4);
  for (const auto& f : doc["final_levels"]) EXPECT_LE(f["path_count"].get<int>(), 1);
  const json& path = doc["paths"][0];
  for (const char* key : {"final_level", "decisions", "magnitude", "lz_phase", "dynamic_phase"}) {
    EXPECT_TRUE(path.contains(key)) << key;
  }
}

TEST(CliPaths, ZeroCouplingHasOnePath) {
  const auto path = write_model_file("mlz_cli_diag_paths.json", diagonal_doc());
  const json doc = run_json(cmd_paths, file_options(path));
  EXPECT_EQ(doc["path_count"], 1);
  EXPECT_TRUE(doc["paths"][0]["decisions"].empty());
}

TEST(CliRun, ExitCodesAndStreams) {
  std::string out, diag;
  EXPECT_EQ(run_cli({"paths", "--preset", "interference"}, &out, &diag), 0);
  EXPECT_TRUE(diag.empty());
  EXPECT_EQ(json::parse(out)["path_count"], 8);

  EXPECT_EQ(run_cli({"paths"}, &out, &diag), 2);
  EXPECT_NE(diag.find("--preset"), std::string::npos);

  EXPECT_NE(run_cli({"paths", "--preset", "interference", "--model", "x.json"}, &out, &diag), 0);
  EXPECT_NE(run_cli({"paths", "--preset", "bogus"}, &out, &diag), 0);

  EXPECT_EQ(run_cli({"paths", "--model", "/nonexistent/model.json"}, &out, &diag), 1);
  EXPECT_TRUE(out.empty());

  EXPECT_EQ(run_cli({"transition", "--preset", "interference", "--beta", "-1"}, &out, &diag), 1);
  EXPECT_EQ(run_cli({"paths", "--preset", "interference", "--format", "csv"}, &out, &diag), 2);
}

TEST(CliRun, OutFileAndDeterminism) {
  const auto target = std::filesystem::temp_directory_path() / "mlz_cli_out.json";
  std::filesystem::remove(target);
  std::string out, diag;
  const std::vector<std::string> args{"spectrum", "--preset", "minigap", "--samples", "11",
                                      "--eps1", "1", "--eps2", "1.5"};
  auto with_out = args;
  with_out.insert(with_out.end(), {"--out", target.string()});
  ASSERT_EQ(run_cli(with_out, &out, &diag), 0);
  EXPECT_TRUE(out.empty());
  std::ifstream file(target);
  const std::string written((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  std::string again;
  ASSERT_EQ(run_cli(args, &again, &diag), 0);
  EXPECT_EQ(written, again);
  EXPECT_EQ(written.substr(0, 18), "t,e1,e2,e3,e4,e5,e");
}

TEST(CliRun, SweepDefaultsToCsv) {
  std::string out, diag;
  ASSERT_EQ(run_cli({"sweep", "--preset", "interference", "--param", "g_scale", "--values", "0",
                     "0.5", "--t-window", "100", "--initial", "3"},
                    &out, &diag),
            0);
  std::vector<std::string> header;
  const auto rows = parse_csv(out, &header);
  EXPECT_EQ(header[0], "g_scale");
  EXPECT_EQ(header[1], "numeric_3to1");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0][3], 1.0, 1e-9);
  EXPECT_EQ(out.find("# spread"), std::string::npos);
}

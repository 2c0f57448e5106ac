#include "mlz/analytic.hpp"

#include <cmath>
#include <numbers>

#include "mlz/errors.hpp"

namespace mlz {

void validate_params(const PresetParams& p) {
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) {
    throw InvalidPresetParams("beta must be positive");
  }
  if (!(p.eps1 > 0.0) || !(p.eps2 > 0.0) || !std::isfinite(p.eps1) || !std::isfinite(p.eps2)) {
    // eps = 0 would put two levels of a band on the same diabatic line.
    throw InvalidPresetParams("eps1 and eps2 must be positive");
  }
  if (!std::isfinite(p.g1) || !std::isfinite(p.g2) || !std::isfinite(p.g3)) {
    throw InvalidPresetParams("couplings must be finite");
  }
}

double lz_probability(std::complex<double> g, double slope_gap) {
  if (!(slope_gap > 0.0)) {
    throw NonpositiveSlopeGap("slope gap must be positive");
  }
  return std::exp(-2.0 * std::numbers::pi * std::norm(g) / slope_gap);
}

namespace {

MlzModel band_model(const PresetParams& p, double s15, double s16, double s26) {
  validate_params(p);
  MlzModel m;
  m.slopes = {p.beta, p.beta, p.beta, 0.0, 0.0, 0.0};
  m.offsets = {p.eps1, 0.0, -p.eps2, p.eps1, 0.0, -p.eps2};
  m.couplings = CMatrix::Zero(6, 6);
  auto set = [&m](int i, int j, double v) {
    m.couplings(i, j) = v;
    m.couplings(j, i) = v;
  };
  set(0, 4, s15 * p.g1);
  set(0, 5, s16 * p.g2);
  set(1, 3, p.g1);
  set(1, 5, s26 * p.g3);
  set(2, 3, p.g2);
  set(2, 4, p.g3);
  return validate_model(std::move(m));
}

} // namespace

MlzModel interference_model(const PresetParams& params) {
  return band_model(params, -1.0, -1.0, -1.0);
}

MlzModel minigap_model(const PresetParams& params) {
  return band_model(params, 1.0, 1.0, 1.0);
}

RMatrix exact_matrix(const PresetParams& params) {
  validate_params(params);
  const double p1 = lz_probability(params.g1, params.beta);
  const double p2 = lz_probability(params.g2, params.beta);
  const double p3 = lz_probability(params.g3, params.beta);
  const double q1 = 1.0 - p1;
  const double q2 = 1.0 - p2;
  const double q3 = 1.0 - p3;

  RMatrix p(6, 6);
  // clang-format off
  p << p2 * p1,      q2 * q3 * p1, q1 * q3,      0.0,          p2 * q1 * p3, q2 * p3,
       0.0,          p3 * p1,      p3 * q1 * q2, p3 * q1 * p2, 0.0,          q3,
       0.0,          0.0,          p3 * p2,      p3 * q2,      q3,           0.0,
       0.0,          q1,           p1 * q2,      p1 * p2,      0.0,          0.0,
       q1,           0.0,          p1 * q3 * p2, p1 * q3 * q2, p1 * p3,      0.0,
       q2 * p1,      p2 * q3 * p1, 0.0,          q1 * q3,      q2 * q1 * p3, p2 * p3;
  // clang-format on
  return p;
}

} // namespace mlz

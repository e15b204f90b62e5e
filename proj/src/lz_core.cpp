#include "wfr/lz_core.hpp"

#include <cmath>
#include <numbers>

namespace wfr {

using std::numbers::pi;

double lz_probability(double alpha, double delta) {
  detail::require(std::isfinite(alpha) && alpha > 0.0, "lz_probability: alpha must be positive");
  detail::require(std::isfinite(delta) && delta >= 0.0, "lz_probability: delta must be non-negative");
  return std::exp(-pi * delta * delta / alpha);
}

double lz_transition_time(double alpha, double delta) {
  detail::require(delta > 0.0, "lz_transition_time: delta must be positive");
  return 2.0 * delta / alpha * std::asin(std::sqrt(lz_probability(alpha, delta)));
}

double p_lz_12(const LatticeParams& params) {
  validate(params);
  return std::exp(-pi * pi * params.v0 * params.v0 / (32.0 * params.f0));
}

double p_lz_23(const LatticeParams& params) {
  validate(params);
  const double v2 = params.v0 * params.v0;
  return std::exp(-pi * pi * v2 * v2 / (16384.0 * params.f0));
}

const char* to_string(CrossingConvention c) {
  switch (c) {
  case CrossingConvention::adiabatic_survival: return "adiabatic";
  case CrossingConvention::lz_probability: return "literal";
  }
  return "?";
}

CrossingConvention crossing_convention_from_string(const std::string& name) {
  if (name == "adiabatic") return CrossingConvention::adiabatic_survival;
  if (name == "literal") return CrossingConvention::lz_probability;
  throw InvalidArgument("unknown crossing convention '" + name + "' (expected adiabatic|literal)");
}

StepIngredients<double> step_ingredients(const LatticeParams& params, double mean_gap,
                                         CrossingConvention convention) {
  const double p12 = p_lz_12(params);
  const double survival =
      convention == CrossingConvention::adiabatic_survival ? 1.0 - p12 : p12;
  StepIngredients<double> ing;
  ing.s12 = std::sqrt(survival);
  ing.p12 = std::sqrt(1.0 - survival);
  ing.s23 = std::sqrt(1.0 - p_lz_23(params));
  ing.phi = bloch_phase(params, mean_gap);
  validate(ing);
  return ing;
}

std::vector<double> ret_resonances(const LatticeParams& params, double mean_gap, int j_max) {
  validate_depth(params);
  detail::require(std::isfinite(mean_gap) && mean_gap > 0.0, "ret_resonances: mean gap must be positive");
  detail::require(j_max >= 1, "ret_resonances: j_max must be at least 1");
  std::vector<double> forces;
  forces.reserve(j_max);
  for (int j = 1; j <= j_max; ++j) forces.push_back(mean_gap / j);
  return forces;
}

} // namespace wfr

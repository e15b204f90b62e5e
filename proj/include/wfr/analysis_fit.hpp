#pragma once

// Plateau extraction, the asymptotic exponential fit P(t) ~ Z exp(-gamma t)
// and the full-solver vs. step-model comparison.

#include <cstddef>
#include <string>
#include <vector>

#include "wfr/lattice_bands.hpp"
#include "wfr/lz_core.hpp"
#include "wfr/schrodinger.hpp"

namespace wfr {

enum class PlateauSource { full_solver, effective_model };
const char* to_string(PlateauSource s);

struct PlateauSeries {
  std::vector<double> values; // P at tau = n T_B, n = 0..N
  std::vector<double> times;  // n T_B
  double bloch_period = 1.0;
  PlateauSource source = PlateauSource::effective_model;
  // Non-increasing sequence; reported, not enforced (Stueckelberg structure
  // can produce local bumps).
  bool monotone = true;

  std::size_t size() const { return values.size(); }
};

// Sample nearest each tau = n T_B; offset shifts every pick by that many
// samples (used to probe plateau flatness). Needs >= 3 cycles.
PlateauSeries extract_plateaus(const LatticeTrace& trace, const LatticeParams& params,
                               int sample_offset = 0);
// Step-model series are already plateau values.
PlateauSeries extract_plateaus(const SurvivalSeries<double>& series);

struct FitWindow {
  std::size_t first = 6; // inclusive plateau index
  std::size_t last = 14; // inclusive, clipped to the series
};

// Default window: plateaus 6 .. min(14, N).
FitWindow default_fit_window(std::size_t n_plateaus);

struct ExpFit {
  double z = 0.0;              // exp(intercept) at t = 0
  double gamma = 0.0;          // per unit time (hbar/E_rec)^-1
  double gamma_per_cycle = 0.0;
  FitWindow window;
  double residual = 0.0;       // max |ln P - fit| inside the window
};

// Least squares of ln P_n against t_n over the window.
ExpFit fit_exponential(const PlateauSeries& series, FitWindow window);

struct ModelComparison {
  std::vector<double> relative_deviation; // |P_full - P_eff| / P_eff
  double max_deviation = 0.0;             // over [range_first, range_last]
  std::size_t range_first = 0;
  std::size_t range_last = 0;
};

// range_last is clipped to the series; pass SIZE_MAX for "all".
ModelComparison compare_models(const PlateauSeries& full, const PlateauSeries& eff,
                               std::size_t range_first = 0,
                               std::size_t range_last = static_cast<std::size_t>(-1));

struct LocalMaximum {
  std::size_t index = 0;
  double prominence = 0.0; // height above the higher of the two adjacent valleys
};

// Interior samples with y[i-1] < y[i] >= y[i+1]. NaNs break runs.
std::vector<LocalMaximum> find_local_maxima(const std::vector<double>& y);

} // namespace wfr

#include "wfr/lattice_bands.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "wfr/csv.hpp"

namespace wfr {

void validate_depth(const LatticeParams& params) {
  detail::require(std::isfinite(params.v0) && params.v0 >= 0.0,
                  "lattice depth v0 must be finite and non-negative");
}

void validate(const LatticeParams& params) {
  validate_depth(params);
  detail::require(std::isfinite(params.f0) && params.f0 > 0.0,
                  "force f0 must be finite and positive");
}

Eigen::VectorXd brillouin_grid(int grid_size) {
  detail::require(grid_size >= 16, "Brillouin-zone grid needs at least 16 points");
  Eigen::VectorXd k(grid_size);
  for (int i = 0; i < grid_size; ++i) k(i) = -1.0 + 2.0 * i / grid_size;
  return k;
}

BandTable band_energies(const LatticeParams& params, int n_bands, int grid_size, int cutoff) {
  validate_depth(params);
  detail::require(n_bands >= 1, "band_energies: need at least one band");
  detail::require(cutoff >= 4, "band_energies: cutoff must be at least 4");
  detail::require(n_bands <= cutoff, "band_energies: n_bands must not exceed cutoff");

  BandTable table;
  table.k_grid = brillouin_grid(grid_size);
  table.energies.resize(grid_size, n_bands);
  for (int i = 0; i < grid_size; ++i) {
    const auto h = build_bloch_hamiltonian(params, table.k_grid(i), cutoff);
    table.energies.row(i) = lowest_eigenvalues(h, n_bands).transpose();
  }
  return table;
}

double mean_band_gap(const LatticeParams& params, int grid_size, int cutoff) {
  const BandTable table = band_energies(params, 2, grid_size, cutoff);
  // On a periodic grid the trapezoid weights are all equal.
  return (table.energies.col(1) - table.energies.col(0)).mean();
}

double bloch_phase(const LatticeParams& params, double mean_gap) {
  detail::require(std::isfinite(params.f0) && params.f0 > 0.0, "bloch_phase: f0 must be positive");
  detail::require(std::isfinite(mean_gap) && mean_gap > 0.0, "bloch_phase: mean gap must be positive");
  return -2.0 * std::numbers::pi * mean_gap / params.f0;
}

void write_csv(std::ostream& out, const BandTable& table) {
  out << "k";
  for (Eigen::Index b = 0; b < table.n_bands(); ++b) out << ",E" << (b + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < table.grid_size(); ++i) {
    out << csv::num(table.k_grid(i));
    for (Eigen::Index b = 0; b < table.n_bands(); ++b) out << ',' << csv::num(table.energies(i, b));
    out << '\n';
  }
}

} // namespace wfr

#pragma once

// Bloch band structure of the 1-D lattice (V/2) cos(2 pi x / d_L).
//
// Units: energies in E_rec, quasimomentum k in units of pi/d_L, so the first
// Brillouin zone is [-1, 1). In the plane-wave basis exp(i (k + 2n) pi x / d_L)
// the Hamiltonian is real symmetric tridiagonal with diagonal (k + 2n)^2 and
// constant off-diagonal v0/4.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <iosfwd>
#include <numbers>
#include <sstream>
#include <vector>

#include "wfr/error.hpp"

namespace wfr {

inline constexpr int kDefaultBandCutoff = 32;
inline constexpr int kDefaultBandGrid = 512;

struct LatticeParams {
  double v0 = 1.0;   // lattice depth V / E_rec
  double f0 = 0.383; // force F d_L / E_rec
};

// Throws InvalidArgument unless v0 >= 0 and f0 > 0 (both finite).
void validate(const LatticeParams& params);
// Depth-only check for routines that never touch f0.
void validate_depth(const LatticeParams& params);

// Bloch period in units of hbar/E_rec.
inline double bloch_period(const LatticeParams& params) {
  return 2.0 * std::numbers::pi / params.f0;
}

// Contiguous block of plane-wave modes n_min..n_max.
struct ModeWindow {
  int n_min = 0;
  int n_max = 0;

  static ModeWindow symmetric(int cutoff) { return {-cutoff, cutoff}; }
  Eigen::Index size() const { return n_max - n_min + 1; }
  bool operator==(const ModeWindow&) const = default;
};

template <typename Scalar = double>
struct BlochHamiltonian {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Scalar k{};
  ModeWindow modes;
  Vector diagonal;     // (k + 2n)^2
  Vector off_diagonal; // v0/4, length size-1

  Matrix dense() const {
    const Eigen::Index n = diagonal.size();
    Matrix m = Matrix::Zero(n, n);
    m.diagonal() = diagonal;
    if (n > 1) {
      m.diagonal(1) = off_diagonal;
      m.diagonal(-1) = off_diagonal;
    }
    return m;
  }
};

// Hamiltonian on an arbitrary mode window. k may lie outside the zone; the
// dynamics uses this while a step straddles the zone edge.
template <typename Scalar = double>
BlochHamiltonian<Scalar> bloch_hamiltonian(const LatticeParams& params, Scalar k,
                                           ModeWindow modes) {
  using std::isfinite;
  detail::require(isfinite(k), "bloch_hamiltonian: quasimomentum must be finite");
  detail::require(modes.size() >= 1, "bloch_hamiltonian: empty mode window");
  BlochHamiltonian<Scalar> h;
  h.k = k;
  h.modes = modes;
  h.diagonal.resize(modes.size());
  for (Eigen::Index i = 0; i < modes.size(); ++i) {
    const Scalar q = k + Scalar(2) * Scalar(modes.n_min + static_cast<int>(i));
    h.diagonal(i) = q * q;
  }
  h.off_diagonal = BlochHamiltonian<Scalar>::Vector::Constant(
      modes.size() - 1, Scalar(params.v0) / Scalar(4));
  return h;
}

// Symmetric basis n = -cutoff..cutoff, k restricted to the first zone.
template <typename Scalar = double>
BlochHamiltonian<Scalar> build_bloch_hamiltonian(const LatticeParams& params, Scalar k,
                                                 int cutoff) {
  using std::abs;
  using std::isfinite;
  validate_depth(params);
  detail::require(isfinite(k), "build_bloch_hamiltonian: quasimomentum must be finite");
  detail::require(abs(k) <= Scalar(1), "build_bloch_hamiltonian: |k| must not exceed 1");
  detail::require(cutoff >= 4, "build_bloch_hamiltonian: cutoff must be at least 4");
  return bloch_hamiltonian<Scalar>(params, k, ModeWindow::symmetric(cutoff));
}

// Eigen-decomposition of the tridiagonal Hamiltonian. Eigenvalues come back
// sorted ascending; eigenvectors are the columns of eigenvectors().
template <typename Scalar>
Eigen::SelfAdjointEigenSolver<typename BlochHamiltonian<Scalar>::Matrix>
diagonalize(const BlochHamiltonian<Scalar>& h, bool with_vectors) {
  Eigen::SelfAdjointEigenSolver<typename BlochHamiltonian<Scalar>::Matrix> solver;
  solver.computeFromTridiagonal(h.diagonal, h.off_diagonal,
                                with_vectors ? Eigen::ComputeEigenvectors
                                             : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "eigensolver did not converge at k = " << static_cast<double>(h.k);
    throw NumericalError(msg.str());
  }
  return solver;
}

// Lowest n_bands eigenvalues of h.
template <typename Scalar>
typename BlochHamiltonian<Scalar>::Vector lowest_eigenvalues(const BlochHamiltonian<Scalar>& h,
                                                             Eigen::Index n_bands) {
  return diagonalize(h, false).eigenvalues().head(n_bands);
}

struct BandTable {
  Eigen::VectorXd k_grid;   // k_i = -1 + 2 i / grid_size
  Eigen::MatrixXd energies; // row i: E_1(k_i) <= E_2(k_i) <= ...

  Eigen::Index grid_size() const { return k_grid.size(); }
  Eigen::Index n_bands() const { return energies.cols(); }
};

// Uniform periodic grid on [-1, 1).
Eigen::VectorXd brillouin_grid(int grid_size);

BandTable band_energies(const LatticeParams& params, int n_bands, int grid_size = kDefaultBandGrid,
                        int cutoff = kDefaultBandCutoff);

// Zone average of E_2(k) - E_1(k); periodic trapezoid rule.
double mean_band_gap(const LatticeParams& params, int grid_size = kDefaultBandGrid,
                     int cutoff = kDefaultBandCutoff);

// Interband phase accumulated per Bloch cycle, -2 pi <dE> / f0. Not reduced mod 2 pi.
double bloch_phase(const LatticeParams& params, double mean_gap);

// Header `k,E1,...,En`, one row per grid point, 17 significant digits.
void write_csv(std::ostream& out, const BandTable& table);

} // namespace wfr

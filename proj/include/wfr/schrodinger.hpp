#pragma once

// Exact single-particle dynamics.
//
// (a) The generic two-level Landau-Zener problem in the diabatic basis,
//     integrated with classic RK4.
// (b) A Bloch state in the tilted lattice, propagated in the accelerated
//     plane-wave (Houston) basis. Quasimomentum runs as k(tau) = k0 + f0 tau / pi
//     and is folded back into [-1, 1) with a mode relabeling each time it
//     passes the zone edge. Time stepping uses the fourth-order
//     commutator-free Magnus scheme
//
//       psi(t+h) = exp(-i h (a1 H1 + a2 H2)) exp(-i h (a2 H1 + a1 H2)) psi(t),
//
//     with H1, H2 at the Gauss-Legendre nodes. Every exponent is a real
//     symmetric tridiagonal matrix and is exponentiated exactly, so the
//     propagation is unitary up to round-off.

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

#include "wfr/lattice_bands.hpp"

namespace wfr {

inline constexpr int kDefaultDynamicsCutoff = 16;

struct SolverConfig {
  int cutoff = kDefaultDynamicsCutoff; // modes per side around the band-1 state
  double dt = 0.02;                    // largest allowed step, hbar/E_rec
  double norm_tolerance = 1e-8;        // allowed |norm - 1| per Bloch cycle
  int n_cycles = 10;
  int samples_per_cycle = 64;
  // Extra modes above +cutoff for population escaping to high bands; it moves
  // up one mode per cycle. Negative selects n_cycles + 1.
  int headroom = -1;
};

void validate(const SolverConfig& cfg);
ModeWindow dynamics_window(const SolverConfig& cfg);

struct HoustonState {
  Eigen::VectorXcd amplitudes; // over modes.n_min..modes.n_max
  ModeWindow modes;
  double k = 0.0;  // current quasimomentum, folded into [-1, 1)
  double k0 = 0.0; // initial quasimomentum
  double time = 0.0;
};

// Re-express the state with k shifted by 2*shift; mode n becomes n - shift.
// Amplitudes pushed past the window edge are dropped, vacated modes are zero.
HoustonState relabel(const HoustonState& state, int shift);

// Lowest-band Bloch state at k0 on the dynamics window.
HoustonState initial_band_state(const LatticeParams& params, const SolverConfig& cfg, double k0);

// |<band b, k | state>|^2 for every band of the state's window.
Eigen::VectorXd band_populations(const HoustonState& state, const LatticeParams& params);
// Band-1 entry of band_populations.
double band_survival(const HoustonState& state, const LatticeParams& params);

struct TraceSample {
  double tau = 0.0;
  double p1 = 0.0;   // band 1
  double p2 = 0.0;   // band 2
  double rest = 0.0; // everything above band 2
  double norm = 0.0;
};

struct LatticeTrace {
  LatticeParams params;
  SolverConfig config;
  double bloch_period = 0.0;
  double step = 0.0;           // actual time step
  int steps_per_sample = 0;
  std::vector<TraceSample> samples; // tau = j T_B / samples_per_cycle
  std::vector<HoustonState> states; // one per sample
};

// Throws NumericalError if the norm drifts by more than
// cfg.norm_tolerance per elapsed cycle.
LatticeTrace evolve_lattice(const LatticeParams& params, const SolverConfig& cfg, double k0 = 0.0);

// `tau,P1,P2,Prest,norm`.
void write_csv(std::ostream& out, const LatticeTrace& trace);

// Smallest admissible symmetric half-span: 20 max(delta/alpha, 1/sqrt(alpha)).
double lz_default_edge(double alpha, double delta);

// Starts in the lower adiabatic state at -t_edge, integrates
// i da/dt = [[-alpha t, delta], [delta, alpha t]] a with RK4, and returns the
// population of the upper state at +t_edge. Both boundary states carry the
// first-order superadiabatic correction, so the result approximates the
// t -> infinity value rather than the oscillating finite-time one.
double lz_two_level_ode(double alpha, double delta, double t_edge, double dt = 1e-3);

} // namespace wfr

#pragma once

// Effective two-level step model for interband tunneling in an accelerated
// lattice.
//
// Each Bloch cycle acts on the (band 1, band 2) amplitudes at fixed
// quasimomentum through U = Ut W, with Ut the Landau-Zener mixing at the zone
// edge and W the phase/loss of band 2 between crossings:
//
//   Ut = [ s12  -p12 ]      W = [ 1   0             ]
//        [ p12   s12 ]          [ 0   s23 exp(i phi) ]
//
// U is contractive with singular values {1, s23}. Survival in band 1 after n
// cycles is P_n = |<1| U^n |1>|^2. Asymptotically P_n ~ Z exp(-gamma n) with
// gamma = -ln |e1|^2 (e1 the dominant eigenvalue) and Z the weight of the
// dominant eigenvector in the initial state.
//
// Everything numeric is templated on the real scalar so the same code can be
// run in long double as an oracle.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "wfr/error.hpp"
#include "wfr/lattice_bands.hpp"

namespace wfr {

// exp(-pi delta^2 / alpha), hbar = 1.
double lz_probability(double alpha, double delta);

// Duration of the effective sudden transition, from
// sin^2(alpha T / (2 delta)) = P_LZ. Diagnostic only.
double lz_transition_time(double alpha, double delta);

// 1 -> 2 crossing at the zone edge: alpha = 2 f0 / pi, delta = v0 / 4.
double p_lz_12(const LatticeParams& params);
// 2 -> 3 crossing at k = 0 (second-order coupling v0^2/64).
double p_lz_23(const LatticeParams& params);

// How the band-1 survival amplitude s12 follows from P_LZ^(1,2).
enum class CrossingConvention {
  // s12^2 = 1 - P_LZ: diabatic passage leaves the band (matches full dynamics).
  adiabatic_survival,
  // s12^2 = P_LZ, the literal assignment.
  lz_probability,
};

const char* to_string(CrossingConvention c);
CrossingConvention crossing_convention_from_string(const std::string& name);

template <typename Scalar = double>
struct StepIngredients {
  Scalar s12{}; // survival amplitude at the 1-2 crossing
  Scalar p12{}; // transition amplitude, sqrt(1 - s12^2)
  Scalar s23{}; // survival of band 2 against loss to band 3
  Scalar phi{}; // Bloch phase per cycle, unwrapped
};

template <typename Scalar>
void validate(const StepIngredients<Scalar>& ing) {
  using std::isfinite;
  detail::require(isfinite(ing.s12) && ing.s12 >= Scalar(0) && ing.s12 <= Scalar(1),
                  "step ingredients: s12 must lie in [0, 1]");
  detail::require(isfinite(ing.s23) && ing.s23 >= Scalar(0) && ing.s23 <= Scalar(1),
                  "step ingredients: s23 must lie in [0, 1]");
  detail::require(isfinite(ing.phi), "step ingredients: phi must be finite");
  detail::require(isfinite(ing.p12) && ing.p12 >= Scalar(0),
                  "step ingredients: p12 must be non-negative");
}

template <typename Scalar = double>
StepIngredients<Scalar> make_ingredients(Scalar s12, Scalar s23, Scalar phi) {
  using std::sqrt;
  StepIngredients<Scalar> ing{s12, Scalar(0), s23, phi};
  validate(ing);
  ing.p12 = sqrt(Scalar(1) - s12 * s12);
  return ing;
}

// Ingredients at lattice parameters; mean_gap is <E_2 - E_1> over the zone.
StepIngredients<double> step_ingredients(
    const LatticeParams& params, double mean_gap,
    CrossingConvention convention = CrossingConvention::adiabatic_survival);

template <typename Scalar = double>
struct StepOperator {
  using Complex = std::complex<Scalar>;
  using Matrix = Eigen::Matrix<Complex, 2, 2>;

  Matrix matrix;
  StepIngredients<Scalar> ingredients;
};

template <typename Scalar>
StepOperator<Scalar> step_operator(const StepIngredients<Scalar>& ing) {
  using Complex = std::complex<Scalar>;
  validate(ing);
  const Complex phase = std::polar(Scalar(1), ing.phi);
  const Complex lossy = ing.s23 * phase;
  StepOperator<Scalar> u;
  u.ingredients = ing;
  u.matrix << Complex(ing.s12), -ing.p12 * lossy,
              Complex(ing.p12),  ing.s12 * lossy;
  return u;
}

template <typename Scalar = double>
struct SpectralData {
  using Complex = std::complex<Scalar>;
  using Vector = Eigen::Matrix<Complex, 2, 1>;

  Complex e1, e2;     // |e1| >= |e2|
  Vector psi1, psi2;  // unit norm, generally not orthogonal
  Complex c1, c2;     // |1> = c1 psi1 + c2 psi2
};

template <typename Scalar>
inline constexpr Scalar kDegenerateModulusTolerance = Scalar(1e-12);

namespace detail {

// Eigenvector of the 2x2 matrix m for eigenvalue e, picking whichever of the
// two row-derived candidates is better conditioned.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 2, 1> eigenvector_2x2(
    const Eigen::Matrix<std::complex<Scalar>, 2, 2>& m, std::complex<Scalar> e) {
  Eigen::Matrix<std::complex<Scalar>, 2, 1> from_row0(m(0, 1), e - m(0, 0));
  Eigen::Matrix<std::complex<Scalar>, 2, 1> from_row1(e - m(1, 1), m(1, 0));
  const auto& v = from_row0.squaredNorm() >= from_row1.squaredNorm() ? from_row0 : from_row1;
  const Scalar n = v.norm();
  if (!(n > Scalar(0))) throw NumericalError("spectral_decompose: null eigenvector");
  return v / n;
}

} // namespace detail

// Closed-form eigen-decomposition of the step operator. Throws NumericalError
// when the eigenvalue moduli coincide within 1e-12: the asymptotic rate and Z
// are undefined there.
template <typename Scalar>
SpectralData<Scalar> spectral_decompose(const StepOperator<Scalar>& u) {
  using Complex = std::complex<Scalar>;
  using std::abs;
  const auto& m = u.matrix;
  const Complex trace = m(0, 0) + m(1, 1);
  const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const Complex root = std::sqrt(trace * trace - Scalar(4) * det);
  // Larger-modulus root directly, the other from the determinant.
  const Complex q = abs(trace + root) >= abs(trace - root) ? trace + root : trace - root;

  SpectralData<Scalar> sd;
  sd.e1 = q / Scalar(2);
  sd.e2 = sd.e1 == Complex(0) ? Complex(0) : det / sd.e1;
  if (abs(abs(sd.e1) - abs(sd.e2)) < kDegenerateModulusTolerance<Scalar>)
    throw NumericalError("spectral_decompose: eigenvalues of equal modulus, asymptotics undefined");

  sd.psi1 = detail::eigenvector_2x2<Scalar>(m, sd.e1);
  sd.psi2 = detail::eigenvector_2x2<Scalar>(m, sd.e2);
  const Complex d = sd.psi1(0) * sd.psi2(1) - sd.psi2(0) * sd.psi1(1);
  if (abs(d) < std::numeric_limits<Scalar>::epsilon())
    throw NumericalError("spectral_decompose: eigenvectors are parallel");
  sd.c1 = sd.psi2(1) / d;
  sd.c2 = -sd.psi1(1) / d;
  return sd;
}

// gamma = -ln |e1|^2, per Bloch cycle.
template <typename Scalar>
Scalar gamma_asymptotic(const SpectralData<Scalar>& sd) {
  using std::log;
  return -log(std::norm(sd.e1));
}

// Z = |c1 <1|psi1>|^2.
template <typename Scalar>
Scalar z_exact(const SpectralData<Scalar>& sd) {
  // c1 psi1(0) = psi1(0) psi2(1) / det[psi1 psi2]; written out so the s23 = 0
  // case (psi2(0) = 0) gives exactly 1.
  const auto num = sd.psi1(0) * sd.psi2(1);
  const auto den = num - sd.psi2(0) * sd.psi1(1);
  return std::norm(num) / std::norm(den);
}

// Z_1 = 1 + 2 s23 (p12/s12)^2 cos(phi), first order in s23.
template <typename Scalar>
Scalar z_first_order(const StepIngredients<Scalar>& ing) {
  using std::cos;
  validate(ing);
  detail::require(ing.s12 > Scalar(0), "z_first_order: s12 must be positive");
  const Scalar r = ing.p12 / ing.s12;
  return Scalar(1) + Scalar(2) * ing.s23 * r * r * cos(ing.phi);
}

template <typename Scalar = double>
struct SurvivalSeries {
  std::vector<Scalar> probabilities;     // P_0 = 1, P_1, ..., P_N
  std::vector<Scalar> log_probabilities; // ln P_n, no underflow
  // Time of the transition that ends the plateau carrying P_n: T_B (n + 1/2).
  std::vector<Scalar> step_times;
  Scalar bloch_period{1};

  std::size_t size() const { return probabilities.size(); }
};

// P_n by direct iteration of U on |1>, never through the eigen-expansion.
template <typename Scalar>
SurvivalSeries<Scalar> evolve_steps(const StepOperator<Scalar>& u, int n_steps,
                                    Scalar bloch_period = Scalar(1)) {
  using Complex = std::complex<Scalar>;
  using std::exp;
  using std::log;
  detail::require(n_steps >= 1, "evolve_steps: need at least one step");
  detail::require(bloch_period > Scalar(0), "evolve_steps: Bloch period must be positive");

  SurvivalSeries<Scalar> s;
  s.bloch_period = bloch_period;
  s.probabilities.reserve(n_steps + 1);
  s.log_probabilities.reserve(n_steps + 1);
  s.step_times.reserve(n_steps + 1);

  Eigen::Matrix<Complex, 2, 1> phi(Complex(1), Complex(0));
  Scalar log_scale = 0; // ln of the factor divided out of phi so far
  for (int n = 0; n <= n_steps; ++n) {
    if (n > 0) phi = (u.matrix * phi).eval();
    const Scalar norm2 = phi.squaredNorm();
    if (norm2 > Scalar(0) && norm2 < Scalar(1e-200)) {
      log_scale += log(norm2);
      phi /= std::sqrt(norm2);
    }
    const Scalar p = std::norm(phi(0));
    const Scalar lp = p > Scalar(0) ? log(p) + log_scale : -std::numeric_limits<Scalar>::infinity();
    s.log_probabilities.push_back(lp);
    s.probabilities.push_back(log_scale == Scalar(0) ? p : exp(lp));
    s.step_times.push_back(bloch_period * (Scalar(n) + Scalar(0.5)));
  }
  return s;
}

template <typename Scalar = double>
struct GammaSequence {
  std::vector<Scalar> values; // gamma_n = -ln(P_{n+1} / P_n)
  bool truncated = false;     // a zero P_n cut the sequence short
};

template <typename Scalar>
GammaSequence<Scalar> gamma_sequence(const SurvivalSeries<Scalar>& series) {
  using std::isfinite;
  GammaSequence<Scalar> g;
  const auto& lp = series.log_probabilities;
  for (std::size_t n = 0; n + 1 < lp.size(); ++n) {
    if (!isfinite(lp[n]) || !isfinite(lp[n + 1])) {
      g.truncated = true;
      break;
    }
    g.values.push_back(lp[n] - lp[n + 1]);
  }
  return g;
}

// Z_N = exp(N gamma_N - sum_{n<N} gamma_n).
template <typename Scalar>
Scalar z_running_estimate(const SurvivalSeries<Scalar>& series, int n) {
  using std::exp;
  detail::require(n >= 0, "z_running_estimate: N must be non-negative");
  detail::require(static_cast<std::size_t>(n) + 1 < series.size(),
                  "z_running_estimate: series too short for the requested N");
  const auto g = gamma_sequence(series);
  if (g.values.size() < static_cast<std::size_t>(n) + 1)
    throw NumericalError("z_running_estimate: zero survival probability before step N+1");
  Scalar sum = 0;
  for (int i = 0; i < n; ++i) sum += g.values[i];
  return exp(Scalar(n) * g.values[n] - sum);
}

inline constexpr double kZConvergenceTolerance = 1e-8;

template <typename Scalar = double>
struct RenormFit {
  Scalar gamma{};                // -ln |e1|^2 per cycle
  Scalar z{};                    // spectral Z
  std::vector<Scalar> gamma_seq; // gamma_n
  std::vector<Scalar> z_seq;     // Z_N, N = 0, 1, ...
  bool converged = false;        // |Z_N - Z_{N-1}| < 1e-8 at the last N
  Scalar achieved_tolerance = std::numeric_limits<Scalar>::infinity();
};

// Spectral (gamma, Z) together with the transient sequences from n_steps of
// direct iteration.
template <typename Scalar>
RenormFit<Scalar> renormalization_fit(const StepOperator<Scalar>& u, int n_steps) {
  using std::abs;
  const auto sd = spectral_decompose(u);
  const auto series = evolve_steps(u, n_steps);
  RenormFit<Scalar> fit;
  fit.gamma = gamma_asymptotic(sd);
  fit.z = z_exact(sd);
  fit.gamma_seq = gamma_sequence(series).values;
  Scalar partial = 0;
  for (std::size_t n = 0; n < fit.gamma_seq.size(); ++n) {
    fit.z_seq.push_back(std::exp(Scalar(n) * fit.gamma_seq[n] - partial));
    partial += fit.gamma_seq[n];
  }
  if (fit.z_seq.size() >= 2) {
    fit.achieved_tolerance = abs(fit.z_seq.back() - fit.z_seq[fit.z_seq.size() - 2]);
    fit.converged = fit.achieved_tolerance < Scalar(kZConvergenceTolerance);
  }
  return fit;
}

// Forces F0 = <dE> / j, j = 1..j_max, where phi = -2 pi j.
std::vector<double> ret_resonances(const LatticeParams& params, double mean_gap, int j_max);

} // namespace wfr

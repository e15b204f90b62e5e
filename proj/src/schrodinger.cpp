#include "wfr/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "wfr/csv.hpp"

namespace wfr {

namespace {

using std::numbers::pi;
using Complex = std::complex<double>;

// Commutator-free Magnus, fourth order.
const double kNode1 = 0.5 - std::sqrt(3.0) / 6.0;
const double kNode2 = 0.5 + std::sqrt(3.0) / 6.0;
const double kWeightSmall = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0;
const double kWeightLarge = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;

class HoustonPropagator {
public:
  HoustonPropagator(const LatticeParams& params, ModeWindow modes, double f0, double step)
      : modes_(modes), f0_(f0), h_(step),
        shift_(Eigen::VectorXd::LinSpaced(modes.size(), 2.0 * modes.n_min, 2.0 * modes.n_max)),
        half_coupling_(Eigen::VectorXd::Constant(modes.size() - 1, 0.5 * params.v0 / 4.0)) {}

  // One step starting at quasimomentum k.
  void advance(Eigen::VectorXcd& psi, double k) {
    const Eigen::ArrayXd q1 = (shift_.array() + (k + f0_ * kNode1 * h_ / pi)).square();
    const Eigen::ArrayXd q2 = (shift_.array() + (k + f0_ * kNode2 * h_ / pi)).square();
    apply_exponential(psi, kWeightLarge * q1 + kWeightSmall * q2);
    apply_exponential(psi, kWeightSmall * q1 + kWeightLarge * q2);
  }

private:
  // psi <- exp(-i h T) psi, T tridiagonal with the given diagonal and v0/8 off it.
  void apply_exponential(Eigen::VectorXcd& psi, const Eigen::ArrayXd& diagonal) {
    diag_ = diagonal.matrix();
    solver_.computeFromTridiagonal(diag_, half_coupling_, Eigen::ComputeEigenvectors);
    if (solver_.info() != Eigen::Success)
      throw NumericalError("Houston propagator: tridiagonal eigensolver failed");
    const Eigen::MatrixXd& v = solver_.eigenvectors();
    re_ = v.transpose() * psi.real();
    im_ = v.transpose() * psi.imag();
    for (Eigen::Index i = 0; i < re_.size(); ++i) {
      const Complex c = std::polar(1.0, -h_ * solver_.eigenvalues()(i)) * Complex(re_(i), im_(i));
      re_(i) = c.real();
      im_(i) = c.imag();
    }
    psi.real() = v * re_;
    psi.imag() = v * im_;
  }

  ModeWindow modes_;
  double f0_;
  double h_;
  Eigen::VectorXd shift_;
  Eigen::VectorXd half_coupling_;
  Eigen::VectorXd diag_, re_, im_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver_;
};

Eigen::VectorXd project_onto_bands(const Eigen::VectorXcd& psi, const BlochHamiltonian<double>& h) {
  const auto solver = diagonalize(h, true);
  const Eigen::MatrixXd& v = solver.eigenvectors();
  return (v.transpose() * psi.real()).array().square() + (v.transpose() * psi.imag()).array().square();
}

TraceSample sample_of(const HoustonState& state, const LatticeParams& params) {
  const Eigen::VectorXd pops = band_populations(state, params);
  TraceSample s;
  s.tau = state.time;
  s.p1 = pops(0);
  s.p2 = pops.size() > 1 ? pops(1) : 0.0;
  s.norm = state.amplitudes.norm();
  s.rest = s.norm * s.norm - s.p1 - s.p2;
  return s;
}

} // namespace

void validate(const SolverConfig& cfg) {
  detail::require(cfg.cutoff >= 4, "solver: cutoff must be at least 4");
  detail::require(std::isfinite(cfg.dt) && cfg.dt > 0.0, "solver: dt must be positive");
  detail::require(cfg.n_cycles >= 1, "solver: need at least one cycle");
  detail::require(cfg.samples_per_cycle >= 64, "solver: need at least 64 samples per cycle");
  detail::require(std::isfinite(cfg.norm_tolerance) && cfg.norm_tolerance > 0.0,
                  "solver: norm tolerance must be positive");
}

ModeWindow dynamics_window(const SolverConfig& cfg) {
  const int headroom = cfg.headroom >= 0 ? cfg.headroom : cfg.n_cycles + 1;
  return {-cfg.cutoff, cfg.cutoff + headroom};
}

HoustonState relabel(const HoustonState& state, int shift) {
  HoustonState out = state;
  out.k = state.k + 2.0 * shift;
  const Eigen::Index n = state.amplitudes.size();
  out.amplitudes.setZero();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = j + shift;
    if (src >= 0 && src < n) out.amplitudes(j) = state.amplitudes(src);
  }
  return out;
}

HoustonState initial_band_state(const LatticeParams& params, const SolverConfig& cfg, double k0) {
  validate(params);
  validate(cfg);
  detail::require(std::isfinite(k0) && std::abs(k0) <= 1.0, "initial state: |k0| must not exceed 1");
  HoustonState state;
  state.modes = dynamics_window(cfg);
  state.k = k0;
  state.k0 = k0;
  const auto solver = diagonalize(bloch_hamiltonian(params, k0, state.modes), true);
  state.amplitudes = solver.eigenvectors().col(0).cast<Complex>();
  if (state.k >= 1.0) state = relabel(state, -1);
  return state;
}

Eigen::VectorXd band_populations(const HoustonState& state, const LatticeParams& params) {
  detail::require(state.amplitudes.size() == state.modes.size(),
                  "band_populations: amplitude count does not match the mode window");
  return project_onto_bands(state.amplitudes, bloch_hamiltonian(params, state.k, state.modes));
}

double band_survival(const HoustonState& state, const LatticeParams& params) {
  return band_populations(state, params)(0);
}

LatticeTrace evolve_lattice(const LatticeParams& params, const SolverConfig& cfg, double k0) {
  LatticeTrace trace;
  trace.params = params;
  trace.config = cfg;
  HoustonState state = initial_band_state(params, cfg, k0);

  trace.bloch_period = bloch_period(params);
  const double sample_interval = trace.bloch_period / cfg.samples_per_cycle;
  trace.steps_per_sample = std::max(1, static_cast<int>(std::ceil(sample_interval / cfg.dt)));
  trace.step = sample_interval / trace.steps_per_sample;

  const int n_samples = cfg.n_cycles * cfg.samples_per_cycle;
  trace.samples.reserve(n_samples + 1);
  trace.states.reserve(n_samples + 1);
  trace.samples.push_back(sample_of(state, params));
  trace.states.push_back(state);

  HoustonPropagator propagator(params, state.modes, params.f0, trace.step);
  long long step_index = 0;
  int wraps = state.k0 >= 1.0 ? 1 : 0;
  for (int j = 1; j <= n_samples; ++j) {
    for (int s = 0; s < trace.steps_per_sample; ++s) {
      propagator.advance(state.amplitudes, state.k);
      ++step_index;
      state.time = static_cast<double>(step_index) * trace.step;
      // Recompute from the step count so k does not accumulate rounding.
      state.k = k0 + params.f0 * state.time / std::numbers::pi - 2.0 * wraps;
      if (state.k >= 1.0) {
        state = relabel(state, -1);
        ++wraps;
      }
    }
    trace.samples.push_back(sample_of(state, params));
    trace.states.push_back(state);

    if (j % cfg.samples_per_cycle == 0) {
      const int cycle = j / cfg.samples_per_cycle;
      const double drift = std::abs(trace.samples.back().norm - 1.0);
      if (drift > cfg.norm_tolerance * cycle) {
        std::ostringstream msg;
        msg << "evolve_lattice: norm drift " << drift << " after " << cycle
            << " cycles exceeds tolerance; reduce dt or increase headroom";
        throw NumericalError(msg.str());
      }
    }
  }
  return trace;
}

void write_csv(std::ostream& out, const LatticeTrace& trace) {
  out << "tau,P1,P2,Prest,norm\n";
  for (const auto& s : trace.samples)
    out << csv::num(s.tau) << ',' << csv::num(s.p1) << ',' << csv::num(s.p2) << ','
        << csv::num(s.rest) << ',' << csv::num(s.norm) << '\n';
}

double lz_default_edge(double alpha, double delta) {
  detail::require(alpha > 0.0 && delta >= 0.0, "lz_default_edge: need alpha > 0, delta >= 0");
  return 20.0 * std::max(delta / alpha, 1.0 / std::sqrt(alpha));
}

double lz_two_level_ode(double alpha, double delta, double t_edge, double dt) {
  detail::require(std::isfinite(alpha) && alpha > 0.0, "lz_two_level_ode: alpha must be positive");
  detail::require(std::isfinite(delta) && delta >= 0.0, "lz_two_level_ode: delta must be non-negative");
  detail::require(std::isfinite(dt) && dt > 0.0, "lz_two_level_ode: dt must be positive");
  detail::require(t_edge >= lz_default_edge(alpha, delta) * (1.0 - 1e-12),
                  "lz_two_level_ode: time span too short, need |t| >= 20 max(delta/alpha, 1/sqrt(alpha))");

  using Vec = Eigen::Vector2cd;
  const auto hamiltonian = [&](double t) {
    Eigen::Matrix2d h;
    h << -alpha * t, delta, delta, alpha * t;
    return h;
  };
  const auto rhs = [&](double t, const Vec& a) -> Vec {
    return Complex(0.0, -1.0) * (hamiltonian(t).cast<Complex>() * a);
  };

  // Adiabatic states are (cos, -sin) and (sin, cos) of theta/2 with
  // theta = atan2(delta, alpha t). Adding the first-order superadiabatic
  // admixture i kappa, kappa = alpha delta / (4 E^3), removes the oscillating
  // finite-window tail that otherwise swamps very small probabilities.
  const auto dressed = [&](double t, bool upper) {
    const double theta = std::atan2(delta, alpha * t);
    const double energy = std::hypot(alpha * t, delta);
    const Complex kappa(0.0, delta > 0.0 ? alpha * delta / (4.0 * energy * energy * energy) : 0.0);
    const Vec lower(std::cos(theta / 2), -std::sin(theta / 2));
    const Vec up(std::sin(theta / 2), std::cos(theta / 2));
    const Vec v = upper ? Vec(up + kappa * lower) : Vec(lower + kappa * up);
    return Vec(v / v.norm());
  };
  Vec a = dressed(-t_edge, false);

  const long long n_steps = static_cast<long long>(std::ceil(2.0 * t_edge / dt));
  const double h = 2.0 * t_edge / static_cast<double>(n_steps);
  for (long long i = 0; i < n_steps; ++i) {
    const double t = -t_edge + static_cast<double>(i) * h;
    const Vec k1 = rhs(t, a);
    const Vec k2 = rhs(t + 0.5 * h, a + 0.5 * h * k1);
    const Vec k3 = rhs(t + 0.5 * h, a + 0.5 * h * k2);
    const Vec k4 = rhs(t + h, a + h * k3);
    a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const double drift = std::abs(a.squaredNorm() - 1.0);
  if (drift > 1e-6) {
    std::ostringstream msg;
    msg << "lz_two_level_ode: norm drift " << drift << " exceeds 1e-6; use a smaller dt";
    throw NumericalError(msg.str());
  }
  return std::norm(dressed(t_edge, true).dot(a));
}

} // namespace wfr

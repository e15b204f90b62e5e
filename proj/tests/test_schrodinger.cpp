#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wfr/lz_core.hpp"
#include "wfr/schrodinger.hpp"

using namespace wfr;
using std::numbers::pi;

namespace {

const LatticeParams kPaper{1.0, 0.383};

SolverConfig config(int cycles, double dt = 0.02, int cutoff = kDefaultDynamicsCutoff) {
  SolverConfig cfg;
  cfg.n_cycles = cycles;
  cfg.dt = dt;
  cfg.cutoff = cutoff;
  return cfg;
}

} // namespace

TEST(LzOde, ZeroGapSwapsLabels) {
  EXPECT_NEAR(lz_two_level_ode(1.0, 0.0, lz_default_edge(1.0, 0.0)), 1.0, 1e-6);
}

TEST(LzOde, MatchesFormulaAtUnitCoupling) {
  EXPECT_NEAR(lz_two_level_ode(1.0, 1.0, lz_default_edge(1.0, 1.0)), std::exp(-pi), 1e-3);
}

TEST(LzOde, AdiabaticRegimeIsZero) {
  EXPECT_NEAR(lz_two_level_ode(0.05, 1.0, lz_default_edge(0.05, 1.0)), 0.0, 1e-6);
}

TEST(LzOde, ResolvesExponentiallySmallProbability) {
  const double exact = lz_probability(1.0, 3.0);
  EXPECT_NEAR(exact, 5.1e-13, 0.2e-13);
  const double ode = lz_two_level_ode(1.0, 3.0, 120.0, 1e-4);
  EXPECT_NEAR(ode / exact, 1.0, 1e-3);
}

TEST(LzOde, RejectsBadArguments) {
  EXPECT_THROW(lz_two_level_ode(1.0, 1.0, 5.0), InvalidArgument);
  EXPECT_THROW(lz_two_level_ode(0.0, 1.0, 100.0), InvalidArgument);
  EXPECT_THROW(lz_two_level_ode(1.0, 1.0, 100.0, 0.0), InvalidArgument);
  EXPECT_THROW(lz_two_level_ode(1.0, 1.0, lz_default_edge(1.0, 1.0), 0.3), NumericalError);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.dt = 0.0;
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg = SolverConfig{};
  cfg.n_cycles = 0;
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg = SolverConfig{};
  cfg.cutoff = 2;
  EXPECT_THROW(validate(cfg), InvalidArgument);
  EXPECT_THROW(evolve_lattice({1.0, -0.1}, SolverConfig{}), InvalidArgument);
  EXPECT_THROW(evolve_lattice(kPaper, SolverConfig{}, 1.5), InvalidArgument);
}

TEST(HoustonState, PreparedInLowestBand) {
  const auto s = initial_band_state(kPaper, config(2), 0.0);
  EXPECT_NEAR(band_survival(s, kPaper), 1.0, 1e-12);
  EXPECT_NEAR(s.amplitudes.norm(), 1.0, 1e-14);
}

TEST(HoustonState, RelabelIsAGauge) {
  const auto trace = evolve_lattice(kPaper, config(2));
  for (std::size_t i = 0; i < trace.states.size(); i += 17) {
    const auto& s = trace.states[i];
    for (int shift : {-1, 1}) {
      const auto moved = relabel(s, shift);
      EXPECT_DOUBLE_EQ(moved.k, s.k + 2.0 * shift);
      EXPECT_NEAR(band_survival(moved, kPaper), band_survival(s, kPaper), 1e-10);
    }
  }
}

TEST(EvolveLattice, ProjectionsAreComplete) {
  const auto trace = evolve_lattice(kPaper, config(3));
  for (std::size_t i = 0; i < trace.states.size(); i += 5) {
    const auto pops = band_populations(trace.states[i], kPaper);
    EXPECT_NEAR(pops.sum(), trace.states[i].amplitudes.squaredNorm(), 1e-10);
    EXPECT_NEAR(pops.sum(), 1.0, 1e-8);
  }
}

TEST(EvolveLattice, NormDriftPerCycle) {
  const auto trace = evolve_lattice(kPaper, config(10));
  const int per = trace.config.samples_per_cycle;
  for (int c = 1; c <= 10; ++c)
    EXPECT_LT(std::abs(trace.samples[c * per].norm - 1.0), 1e-8 * c);
}

TEST(EvolveLattice, SampleTimesAndCount) {
  const auto trace = evolve_lattice(kPaper, config(4));
  ASSERT_EQ(trace.samples.size(), 4u * 64u + 1u);
  EXPECT_NEAR(trace.samples.back().tau, 4 * bloch_period(kPaper), 1e-9);
  EXPECT_LE(trace.step, 0.02);
}

TEST(EvolveLattice, StepHalvingConverges) {
  const double coarse = evolve_lattice(kPaper, config(10, 0.02)).samples.back().p1;
  const double fine = evolve_lattice(kPaper, config(10, 0.01)).samples.back().p1;
  EXPECT_LT(std::abs(coarse - fine), 1e-6);
}

TEST(EvolveLattice, CutoffDoublingConverges) {
  const double base = evolve_lattice(kPaper, config(10)).samples.back().p1;
  const double wide = evolve_lattice(kPaper, config(10, 0.02, 32)).samples.back().p1;
  EXPECT_LT(std::abs(base - wide), 1e-6);
}

TEST(EvolveLattice, FreeParticleLeavesBandAtZoneEdge) {
  const LatticeParams free{0.0, 0.383};
  const auto a = evolve_lattice(free, config(2));
  const auto b = evolve_lattice(free, config(2));
  const double half = bloch_period(free) / 2;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].p1, b.samples[i].p1);
    if (a.samples[i].tau < half - 1e-9) EXPECT_NEAR(a.samples[i].p1, 1.0, 1e-12);
    if (a.samples[i].tau > half + 1e-9) EXPECT_NEAR(a.samples[i].p1, 0.0, 1e-12);
  }
}

TEST(EvolveLattice, AdiabaticLimitKeepsBand) {
  const LatticeParams slow{2.0, 0.05};
  const auto trace = evolve_lattice(slow, config(1));
  EXPECT_GT(trace.samples.back().p1, 0.999);
  // Near the zone edge the instantaneous projection dips by the adiabatic
  // admixture (k' <2|d_k 1> / dE)^2, about 1.0e-3 here.
  double lowest = 1.0;
  for (const auto& s : trace.samples) lowest = std::min(lowest, s.p1);
  EXPECT_GT(lowest, 0.998);
}

TEST(EvolveLattice, DropsHappenAtHalfPeriods) {
  const auto trace = evolve_lattice(kPaper, config(6));
  const int per = trace.config.samples_per_cycle;
  for (int n = 0; n < 6; ++n) {
    int steepest = 0;
    double biggest = 0.0;
    for (int j = 0; j < per; ++j) {
      const double drop = trace.samples[n * per + j].p1 - trace.samples[n * per + j + 1].p1;
      if (drop > biggest) {
        biggest = drop;
        steepest = j;
      }
    }
    // Centre of the steepest interval, in cycles, sits at n + 1/2.
    EXPECT_NEAR((steepest + 0.5) / per, 0.5, 2.0 / per) << "cycle " << n;
  }
}

TEST(EvolveLattice, TraceCsv) {
  const auto trace = evolve_lattice(kPaper, config(1));
  std::ostringstream os;
  write_csv(os, trace);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "tau,P1,P2,Prest,norm");
}

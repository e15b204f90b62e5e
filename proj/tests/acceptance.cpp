// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "wfr/analysis_fit.hpp"
#include "wfr/commands.hpp"
#include "wfr/lattice_bands.hpp"
#include "wfr/lz_core.hpp"
#include "wfr/schrodinger.hpp"

using namespace wfr;
using std::numbers::pi;

namespace {

const LatticeParams kPaper{1.0, 0.383};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void check(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string timing = std::to_string(elapsed).substr(0, 6) + " s";
  if (time_limit_s > 0) {
    timing += " / limit " + std::to_string(static_cast<int>(time_limit_s)) + " s";
    if (elapsed > time_limit_s) {
      out.pass = false;
      out.detail += "; runtime limit exceeded";
    }
  }
  if (!out.pass) ++failures;
  std::printf("%s [%2d] %s: %s (%s)\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str(),
              timing.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// Shared by criteria 2 and 3: one full-solver run at the paper point.
struct PaperRun {
  PlateauSeries full, eff;
  ExpFit fit;
};

const PaperRun& paper_run() {
  static const PaperRun run = [] {
    SolverConfig cfg;
    cfg.n_cycles = 16;
    const auto trace = evolve_lattice(kPaper, cfg);
    const auto ing = step_ingredients(kPaper, mean_band_gap(kPaper), CrossingConvention::adiabatic_survival);
    PaperRun r;
    r.full = extract_plateaus(trace, kPaper);
    r.eff = extract_plateaus(evolve_steps(step_operator(ing), cfg.n_cycles, bloch_period(kPaper)));
    r.fit = fit_exponential(r.full, default_fit_window(r.full.size()));
    return r;
  }();
  return run;
}

StepIngredients<double> draw(std::mt19937_64& rng, double s23_lo, double s23_hi) {
  std::uniform_real_distribution<double> s12(0.5, 0.95), s23(s23_lo, s23_hi), phi(-pi, pi);
  const double a = s12(rng), b = s23(rng), c = phi(rng);
  return make_ingredients(a, b, c);
}

} // namespace

int main() {
  check(1, "LZ formula validation", 10.0, [] {
    double worst = 0.0;
    for (double x : {0.1, 0.5, 1.0, 2.0}) {
      const double alpha = 1.0, delta = std::sqrt(x);
      const double ode = lz_two_level_ode(alpha, delta, lz_default_edge(alpha, delta));
      worst = std::max(worst, std::abs(ode - lz_probability(alpha, delta)));
    }
    return Outcome{worst <= 1e-3, fmt("max |P_ode - P_LZ| = %.2e over delta^2/alpha in {0.1,0.5,1,2} (tol 1e-3)", worst)};
  });

  check(2, "Cross-model plateau agreement", 60.0, [] {
    const auto& r = paper_run();
    const auto cmp = compare_models(r.full, r.eff, 1, 5);
    return Outcome{cmp.max_deviation <= 0.15,
                   fmt("max relative deviation over plateaus 1..5 = %.4f (tol 0.15)", cmp.max_deviation)};
  });

  check(3, "Z sign at the operating point", 60.0, [] {
    const auto& r = paper_run();
    return Outcome{r.fit.z < 1.0, fmt("fitted full-solver z = %.6f over plateaus %g..", r.fit.z,
                                      static_cast<double>(r.fit.window.first)) +
                                      std::to_string(r.fit.window.last) + " (need z < 1)"};
  });

  check(4, "Spectral vs iterative consistency", 5.0, [] {
    std::mt19937_64 rng(42);
    double worst_gamma = 0.0, worst_z = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const auto u = step_operator(draw(rng, 0.0, 0.05));
      const auto sd = spectral_decompose(u);
      const auto s = evolve_steps(u, 200);
      const double slope = (s.log_probabilities[150] - s.log_probabilities[200]) / 50.0;
      worst_gamma = std::max(worst_gamma, std::abs(slope - gamma_asymptotic(sd)));
      worst_z = std::max(worst_z, std::abs(z_running_estimate(s, 20) - z_exact(sd)));
    }
    return Outcome{worst_gamma <= 1e-6 && worst_z <= 1e-6,
                   fmt("1000 draws: max |slope - gamma| = %.2e, max |Z_20 - Z| = %.2e (tol 1e-6)", worst_gamma,
                       worst_z)};
  });

  check(5, "gamma_n convergence law", 0.0, [] {
    const auto u = step_operator(
        step_ingredients(kPaper, mean_band_gap(kPaper), CrossingConvention::adiabatic_survival));
    const auto sd = spectral_decompose(u);
    const double gamma = gamma_asymptotic(sd);
    const auto g = gamma_sequence(evolve_steps(u, 60)).values;
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < g.size(); ++n) {
      const double r = std::abs(g[n] - gamma);
      if (r <= 1e-12) break;
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(r));
    }
    if (xs.size() < 3) return Outcome{false, "fewer than 3 residuals above 1e-12"};
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    const double expected = std::log(std::abs(sd.e2 / sd.e1));
    const double rel = std::abs(slope - expected) / std::abs(expected);
    return Outcome{rel <= 0.05, fmt("fitted slope %.5f vs ln|e2/e1| = %.5f", slope, expected) +
                                    fmt(" (rel. diff %.4f, tol 0.05, %g residuals)", rel,
                                        static_cast<double>(xs.size()))};
  });

  check(6, "First-order Z is O(s23^2)", 0.0, [] {
    std::mt19937_64 rng(42);
    int good = 0;
    double worst = 1e300;
    for (int i = 0; i < 20; ++i) {
      const auto ing = draw(rng, 1e-3, 1e-2);
      auto half = ing;
      half.s23 /= 2;
      const auto miss = [](const StepIngredients<double>& x) {
        return std::abs(z_first_order(x) - z_exact(spectral_decompose(step_operator(x))));
      };
      const double ratio = miss(ing) / miss(half);
      worst = std::min(worst, ratio);
      if (ratio >= 3.5) ++good;
    }
    return Outcome{good == 20, fmt("%g/20 sets shrink >= 3.5x when s23 is halved; smallest ratio %.3f",
                                   static_cast<double>(good), worst)};
  });

  check(7, "Trivial limits", 0.0, [] {
    // s23 = 0 with s12^2 = P_LZ(1,2): Z = 1 exactly, gamma = -ln P_LZ(1,2).
    const double p = p_lz_12(kPaper);
    const auto lossless = [&] {
      const auto sd = spectral_decompose(step_operator(make_ingredients(std::sqrt(p), 0.0, 1.234)));
      return std::make_pair(z_exact(sd), gamma_asymptotic(sd));
    };
    const auto a = lossless(), b = lossless();
    const bool z_ok = a.first == 1.0;
    const double gamma_err = std::abs(a.second + std::log(p));
    const bool repro_step = a == b;

    // v0 = 0: band-1 survival is 1 before the zone edge and 0 after it.
    const LatticeParams free{0.0, kPaper.f0};
    SolverConfig cfg;
    cfg.n_cycles = 2;
    const auto t1 = evolve_lattice(free, cfg), t2 = evolve_lattice(free, cfg);
    const double edge = bloch_period(free) / 2;
    double before = 0.0, after = 0.0;
    bool repro_free = t1.samples.size() == t2.samples.size();
    for (std::size_t i = 0; i < t1.samples.size(); ++i) {
      const auto& s = t1.samples[i];
      if (s.tau < edge - 1e-9) before = std::max(before, std::abs(s.p1 - 1.0));
      if (s.tau > edge + 1e-9) after = std::max(after, s.p1);
      repro_free = repro_free && s.p1 == t2.samples[i].p1 && s.norm == t2.samples[i].norm;
    }
    const bool pass = z_ok && gamma_err <= 1e-14 && repro_step && before <= 1e-12 && after <= 1e-12 && repro_free;
    std::string detail = std::string("s23=0: Z ") + (z_ok ? "== 1" : "!= 1");
    detail += fmt(", |gamma + ln P_LZ| = %.1e", gamma_err);
    detail += fmt("; v0=0: max |P1 - 1| before edge %.1e, max P1 after edge %.1e", before, after);
    detail += std::string("; bit-reproducible: ") + (repro_step && repro_free ? "yes" : "no");
    return Outcome{pass, detail};
  });

  check(8, "Scaling plot reproduction", 300.0, [] {
    RunSpec spec = default_run_spec("scaling");
    spec.v0_list = {1.0, 2.0, 3.0, 4.0};
    spec.n_points = 200;
    const auto rows = compute_scaling(spec);
    std::vector<double> ptp;
    double worst_offset = 0.0; // |phi_max - 2 pi j| in grid steps
    int maxima = 0;
    int failed_points = 0;
    for (double v0 : spec.v0_list) {
      std::vector<double> y, phi;
      for (const auto& r : rows)
        if (r.v0 == v0) {
          y.push_back(r.z_minus_1);
          phi.push_back(r.phi);
          if (r.status != "ok") ++failed_points;
        }
      const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
      ptp.push_back(*hi - *lo);
      for (const auto& m : find_local_maxima(y)) {
        if (m.prominence < 0.01 * ptp.back()) continue;
        ++maxima;
        const double step = std::abs(phi[m.index + 1] - phi[m.index - 1]) / 2;
        const double j = std::round(phi[m.index] / (2 * pi));
        worst_offset = std::max(worst_offset, std::abs(phi[m.index] - 2 * pi * j) / step);
      }
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < ptp.size(); ++i) decreasing = decreasing && ptp[i] < ptp[i - 1];
    const bool pass = decreasing && maxima > 0 && worst_offset <= 1.0 && failed_points == 0;
    std::string detail = "peak-to-peak Z-1 for v0 = 1..4:";
    for (double v : ptp) detail += fmt(" %.4g", v);
    detail += decreasing ? " (strictly decreasing)" : " (NOT strictly decreasing)";
    detail += fmt("; %g maxima, worst distance to phi = 2 pi j is %.2f grid steps",
                  static_cast<double>(maxima), worst_offset);
    if (failed_points > 0) detail += fmt("; %g failed points", static_cast<double>(failed_points));
    return Outcome{pass, detail};
  });

  check(9, "RET resonance location", 0.0, [] {
    const auto report = compute_ret(default_run_spec("ret"));
    bool pass = report.resonances.size() == 2;
    std::string detail = fmt("<dE> = %.5f, grid step %.4f;", report.mean_gap, report.grid_step);
    for (const auto& r : report.resonances) {
      pass = pass && r.within_one_step;
      detail += fmt(" j=%g: predicted %.4f", static_cast<double>(r.j), r.predicted_f0) + fmt(", detected %.4f", r.detected_f0);
    }
    return Outcome{pass, detail + " (maxima of gamma - gamma_LZ, tol one grid step)"};
  });

  check(10, "Band-structure checks", 0.0, [] {
    const auto free = band_energies({0.0, 1.0}, 2);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < free.grid_size(); ++i) {
      const double k = free.k_grid(i);
      worst = std::max(worst, std::abs(free.energies(i, 0) - k * k));
      worst = std::max(worst, std::abs(free.energies(i, 1) - (2 - std::abs(k)) * (2 - std::abs(k))));
    }
    const auto b1 = band_energies({1.0, 1.0}, 2);
    const double gap = b1.energies(0, 1) - b1.energies(0, 0);
    const double gap_rel = std::abs(gap - 0.5) / 0.5;
    const double mean0 = mean_band_gap({0.0, 1.0});
    const bool pass = worst <= 1e-12 && gap_rel <= 0.05 && std::abs(mean0 - 2.0) <= 1e-6;
    return Outcome{pass, fmt("free bands max error %.1e; zone-edge gap at v0=1 = %.5f", worst, gap) +
                             fmt(" (rel. %.4f); <dE>(v0=0) = %.12f", gap_rel, mean0)};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}

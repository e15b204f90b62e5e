#include "wfr/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <thread>

#include "wfr/csv.hpp"
#include "wfr/serialize.hpp"

namespace wfr {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kRunspecPrefix = "# runspec: ";

// Evaluates fn(i) for i in [0, n) on up to `jobs` threads. fn writes only its
// own slot, so the result order is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open output file " + path.string());
  return out;
}

// Commas and newlines would break the CSV row.
std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw StageError(name, e.what(), false);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), true);
  }
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) {
  return resolve_output(prefix + suffix);
}

std::string default_out(const std::string& command) {
  if (command == "bands") return "bands.csv";
  if (command == "run") return "run";
  if (command == "scaling") return "scaling.csv";
  if (command == "ret") return "ret.csv";
  return "out";
}

} // namespace

RunSpec default_run_spec(const std::string& command) {
  RunSpec spec;
  spec.command = command;
  spec.out = default_out(command);
  if (command == "ret") {
    spec.f0_min = 0.5;
    spec.f0_max = 3.0;
    spec.n_points = 101;
  }
  return spec;
}

json to_json(const RunSpec& s) {
  return json{{"command", s.command},
              {"v0", s.v0},
              {"f0", s.f0},
              {"v0_list", s.v0_list},
              {"convention", s.convention},
              {"n_bands", s.n_bands},
              {"grid", s.grid},
              {"band_cutoff", s.band_cutoff},
              {"cycles", s.cycles},
              {"dyn_cutoff", s.dyn_cutoff},
              {"dt", s.dt},
              {"samples_per_cycle", s.samples_per_cycle},
              {"fit_first", s.fit_first},
              {"fit_last", s.fit_last},
              {"f0_min", s.f0_min},
              {"f0_max", s.f0_max},
              {"n_points", s.n_points},
              {"j_max", s.j_max},
              {"out", s.out},
              {"seed", s.seed}};
}

RunSpec run_spec_from_json(const json& j) {
  RunSpec s = default_run_spec(j.at("command").get<std::string>());
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("v0", s.v0);
  get("f0", s.f0);
  get("v0_list", s.v0_list);
  get("convention", s.convention);
  get("n_bands", s.n_bands);
  get("grid", s.grid);
  get("band_cutoff", s.band_cutoff);
  get("cycles", s.cycles);
  get("dyn_cutoff", s.dyn_cutoff);
  get("dt", s.dt);
  get("samples_per_cycle", s.samples_per_cycle);
  get("fit_first", s.fit_first);
  get("fit_last", s.fit_last);
  get("f0_min", s.f0_min);
  get("f0_max", s.f0_max);
  get("n_points", s.n_points);
  get("j_max", s.j_max);
  get("out", s.out);
  get("seed", s.seed);
  return s;
}

RunSpec load_run_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read runspec from " + path.string());
  std::string first;
  std::getline(in, first);
  try {
    if (first.rfind(kRunspecPrefix, 0) == 0)
      return run_spec_from_json(json::parse(first.substr(std::string(kRunspecPrefix).size())));
    in.clear();
    in.seekg(0);
    return run_spec_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed runspec in " + path.string() + ": " + e.what());
  }
}

std::string runspec_comment(const RunSpec& spec) {
  return kRunspecPrefix + to_json(spec).dump();
}

fs::path resolve_output(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("WFR_OUTPUT_DIR"); dir != nullptr && *dir != '\0')
      return fs::path(dir) / p;
  }
  return p;
}

std::vector<double> inverse_force_grid(double f0_min, double f0_max, int n_points) {
  detail::require(f0_min > 0.0 && f0_max > 0.0, "force range must be positive");
  detail::require(n_points >= 0, "n_points must be non-negative");
  std::vector<double> f;
  if (n_points == 0 || f0_max < f0_min) return f;
  if (n_points == 1) return {f0_min};
  const double a = 1.0 / f0_min, b = 1.0 / f0_max;
  for (int i = 0; i < n_points; ++i) f.push_back(1.0 / (a + (b - a) * i / (n_points - 1)));
  return f;
}

std::vector<double> linear_force_grid(double f0_min, double f0_max, int n_points) {
  detail::require(f0_min > 0.0 && f0_max > 0.0, "force range must be positive");
  detail::require(n_points >= 0, "n_points must be non-negative");
  std::vector<double> f;
  if (n_points == 0 || f0_max < f0_min) return f;
  if (n_points == 1) return {f0_min};
  for (int i = 0; i < n_points; ++i) f.push_back(f0_min + (f0_max - f0_min) * i / (n_points - 1));
  return f;
}

std::vector<ScalingRow> compute_scaling(const RunSpec& spec) {
  const auto convention = crossing_convention_from_string(spec.convention);
  const auto forces = inverse_force_grid(spec.f0_min, spec.f0_max, spec.n_points);
  for (double v0 : spec.v0_list) validate_depth({v0, 1.0});

  std::vector<double> gaps(spec.v0_list.size());
  parallel_for(gaps.size(), spec.jobs, [&](std::size_t i) {
    gaps[i] = mean_band_gap({spec.v0_list[i], 1.0}, spec.grid, spec.band_cutoff);
  });

  const std::size_t nf = forces.size();
  std::vector<ScalingRow> rows(spec.v0_list.size() * nf);
  parallel_for(rows.size(), spec.jobs, [&](std::size_t idx) {
    ScalingRow& row = rows[idx];
    row.v0 = spec.v0_list[idx / nf];
    row.f0 = forces[idx % nf];
    const LatticeParams params{row.v0, row.f0};
    try {
      row.phi = bloch_phase(params, gaps[idx / nf]);
      const auto ing = step_ingredients(params, gaps[idx / nf], convention);
      row.z_minus_1 = z_exact(spectral_decompose(step_operator(ing))) - 1.0;
    } catch (const std::exception& e) {
      row.z_minus_1 = std::numeric_limits<double>::quiet_NaN();
      row.status = sanitize(e.what());
    }
  });
  return rows;
}

RetReport compute_ret(const RunSpec& spec) {
  const auto convention = crossing_convention_from_string(spec.convention);
  validate_depth({spec.v0, 1.0});
  RetReport report;
  const auto forces = linear_force_grid(spec.f0_min, spec.f0_max, spec.n_points);
  report.mean_gap = mean_band_gap({spec.v0, 1.0}, spec.grid, spec.band_cutoff);
  report.grid_step = forces.size() >= 2 ? forces[1] - forces[0] : 0.0;

  report.rows.resize(forces.size());
  parallel_for(forces.size(), spec.jobs, [&](std::size_t i) {
    RetRow& row = report.rows[i];
    row.f0 = forces[i];
    const LatticeParams params{spec.v0, row.f0};
    try {
      const auto ing = step_ingredients(params, report.mean_gap, convention);
      row.gamma = gamma_asymptotic(spectral_decompose(step_operator(ing)));
      row.gamma_lz = -std::log(ing.s12 * ing.s12);
      row.excess = row.gamma - row.gamma_lz;
      row.rate = row.gamma / bloch_period(params);
    } catch (const std::exception& e) {
      row.gamma = row.gamma_lz = row.excess = row.rate = std::numeric_limits<double>::quiet_NaN();
      row.status = sanitize(e.what());
    }
  });
  if (forces.empty()) return report;

  std::vector<double> excess;
  for (const auto& r : report.rows) excess.push_back(r.excess);
  std::vector<double> max_f0;
  for (const auto& m : find_local_maxima(excess)) {
    report.rows[m.index].is_max = true;
    max_f0.push_back(report.rows[m.index].f0);
  }
  for (int j = 1; j <= spec.j_max; ++j) {
    RetResonance res;
    res.j = j;
    res.predicted_f0 = report.mean_gap / j;
    res.detected_f0 = std::numeric_limits<double>::quiet_NaN();
    res.distance = std::numeric_limits<double>::infinity();
    for (double f : max_f0) {
      if (std::abs(f - res.predicted_f0) < res.distance) {
        res.distance = std::abs(f - res.predicted_f0);
        res.detected_f0 = f;
      }
    }
    res.within_one_step = res.distance <= report.grid_step * (1.0 + 1e-9);
    report.resonances.push_back(res);
  }
  return report;
}

std::vector<fs::path> cmd_bands(const RunSpec& spec) {
  const BandTable table = stage("band structure", [&] {
    return band_energies({spec.v0, 1.0}, spec.n_bands, spec.grid, spec.band_cutoff);
  });
  const fs::path path = resolve_output(spec.out);
  auto out = open_output(path);
  out << runspec_comment(spec) << '\n';
  write_csv(out, table);
  return {path};
}

std::vector<fs::path> cmd_run(const RunSpec& spec, RunResult* result) {
  RunResult local;
  RunResult& r = result != nullptr ? *result : local;
  std::vector<fs::path> written;
  const LatticeParams params{spec.v0, spec.f0};
  const auto convention = stage("arguments", [&] {
    validate(params);
    return crossing_convention_from_string(spec.convention);
  });

  const auto emit = [&](const std::string& suffix, auto&& write) {
    const fs::path path = with_suffix(spec.out, suffix);
    auto out = open_output(path);
    write(out);
    written.push_back(path);
  };

  // Cheap stages first so a degenerate step model fails before the long solve.
  stage("effective model", [&] {
    r.mean_gap = mean_band_gap(params, spec.grid, spec.band_cutoff);
    r.ingredients = step_ingredients(params, r.mean_gap, convention);
    r.steps = evolve_steps(step_operator(r.ingredients), spec.cycles, bloch_period(params));
    return 0;
  });
  emit("_steps.csv", [&](std::ostream& out) {
    out << runspec_comment(spec) << '\n';
    write_csv(out, r.steps);
  });

  // With s12 = s23 = 0 the survival is exactly zero after the first crossing;
  // gamma is infinite and Z undefined, so the asymptotic stages are skipped.
  r.complete_decay = std::all_of(r.steps.probabilities.begin() + 1, r.steps.probabilities.end(),
                                 [](double p) { return p == 0.0; });
  if (!r.complete_decay)
    r.renorm = stage("spectral analysis", [&] {
      return renormalization_fit(step_operator(r.ingredients), spec.cycles);
    });
  emit("_renorm.csv", [&](std::ostream& out) {
    out << runspec_comment(spec) << '\n';
    write_csv(out, r.renorm);
  });

  r.trace = stage("full solver", [&] {
    SolverConfig cfg;
    cfg.cutoff = spec.dyn_cutoff;
    cfg.dt = spec.dt;
    cfg.n_cycles = spec.cycles;
    cfg.samples_per_cycle = spec.samples_per_cycle;
    return evolve_lattice(params, cfg, 0.0);
  });
  emit("_trace.csv", [&](std::ostream& out) {
    out << runspec_comment(spec) << '\n';
    write_csv(out, r.trace);
  });

  stage("plateau fit", [&] {
    r.full_plateaus = extract_plateaus(r.trace, params);
    r.eff_plateaus = extract_plateaus(r.steps);
    if (r.complete_decay) return 0;
    // Clip the requested window to the plateaus available; the JSON records the one used.
    FitWindow window;
    window.last = std::min<std::size_t>(std::max(spec.fit_last, 1), r.full_plateaus.size() - 1);
    window.first = std::min<std::size_t>(std::max(spec.fit_first, 0), window.last - 1);
    r.full_fit = fit_exponential(r.full_plateaus, window);
    r.eff_fit = fit_exponential(r.eff_plateaus, window);
    return 0;
  });
  emit("_fit.json", [&](std::ostream& out) {
    json j{{"runspec", to_json(spec)},
           {"params", {{"v0", params.v0}, {"f0", params.f0}}},
           {"bloch_period", bloch_period(params)},
           {"mean_gap", r.mean_gap},
           {"p_lz_12", p_lz_12(params)},
           {"p_lz_23", p_lz_23(params)},
           {"convention", to_string(convention)},
           {"ingredients", to_json(r.ingredients)},
           {"complete_decay", r.complete_decay},
           {"full_solver", r.complete_decay ? json(nullptr) : to_json(r.full_fit)},
           {"effective_model", r.complete_decay ? json(nullptr) : to_json(r.eff_fit)},
           {"renormalization", r.complete_decay ? json(nullptr) : to_json(r.renorm)},
           {"plateaus_monotone", r.full_plateaus.monotone}};
    out << j.dump(2) << '\n';
  });

  r.comparison = stage("model comparison", [&] {
    return compare_models(r.full_plateaus, r.eff_plateaus);
  });
  emit("_comparison.csv", [&](std::ostream& out) {
    out << runspec_comment(spec) << '\n';
    write_csv(out, r.full_plateaus, r.eff_plateaus, r.comparison);
  });
  return written;
}

std::vector<fs::path> cmd_scaling(const RunSpec& spec) {
  const auto rows = stage("scaling sweep", [&] { return compute_scaling(spec); });
  const fs::path path = resolve_output(spec.out);
  auto out = open_output(path);
  out << runspec_comment(spec) << '\n';
  out << "v0,f0,phi,abs_phi,Z_minus_1,status\n";
  for (const auto& r : rows)
    out << csv::num(r.v0) << ',' << csv::num(r.f0) << ',' << csv::num(r.phi) << ','
        << csv::num(std::abs(r.phi)) << ',' << csv::num(r.z_minus_1) << ',' << r.status << '\n';
  return {path};
}

std::vector<fs::path> cmd_ret(const RunSpec& spec) {
  const auto report = stage("resonance scan", [&] { return compute_ret(spec); });
  const fs::path scan_path = resolve_output(spec.out);
  {
    auto out = open_output(scan_path);
    out << runspec_comment(spec) << '\n';
    out << "f0,gamma,gamma_lz,excess,rate,is_max,status\n";
    for (const auto& r : report.rows)
      out << csv::num(r.f0) << ',' << csv::num(r.gamma) << ',' << csv::num(r.gamma_lz) << ','
          << csv::num(r.excess) << ',' << csv::num(r.rate) << ',' << (r.is_max ? 1 : 0) << ','
          << r.status << '\n';
  }
  fs::path res_path = scan_path;
  res_path.replace_filename(scan_path.stem().string() + "_resonances.csv");
  {
    auto out = open_output(res_path);
    out << runspec_comment(spec) << '\n';
    out << "j,predicted_f0,detected_f0,distance,grid_step,within_one_step\n";
    for (const auto& r : report.resonances)
      out << r.j << ',' << csv::num(r.predicted_f0) << ',' << csv::num(r.detected_f0) << ','
          << csv::num(r.distance) << ',' << csv::num(report.grid_step) << ','
          << (r.within_one_step ? 1 : 0) << '\n';
  }
  return {scan_path, res_path};
}

std::vector<fs::path> execute(const RunSpec& spec) {
  if (spec.command == "bands") return cmd_bands(spec);
  if (spec.command == "run") return cmd_run(spec);
  if (spec.command == "scaling") return cmd_scaling(spec);
  if (spec.command == "ret") return cmd_ret(spec);
  throw StageError("arguments", "unknown command '" + spec.command + "'", false);
}

} // namespace wfr

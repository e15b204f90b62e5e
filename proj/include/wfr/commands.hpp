#pragma once

// Orchestration behind the `wfr` command line: band export, a single run
// comparing full dynamics with the step model, the Z scaling sweep and the
// resonance scan. Every output file starts with a `# runspec: {...}` comment
// line holding the full RunSpec, which `wfr replay` re-executes.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfr/analysis_fit.hpp"
#include "wfr/lattice_bands.hpp"
#include "wfr/lz_core.hpp"
#include "wfr/schrodinger.hpp"

namespace wfr {

struct RunSpec {
  std::string command; // bands | run | scaling | ret

  // lattice
  double v0 = 1.0;
  double f0 = 0.383;
  std::vector<double> v0_list{1.0, 2.0, 3.0, 4.0};
  std::string convention = "adiabatic";

  // band structure
  int n_bands = 3;
  int grid = kDefaultBandGrid;
  int band_cutoff = kDefaultBandCutoff;

  // dynamics
  int cycles = 16;
  int dyn_cutoff = kDefaultDynamicsCutoff;
  double dt = 0.02;
  int samples_per_cycle = 64;
  int fit_first = 6;
  int fit_last = 14;

  // sweeps
  double f0_min = 0.2;
  double f0_max = 2.0;
  int n_points = 200;
  int j_max = 2;

  std::string out;         // file (bands, scaling, ret) or prefix (run)
  std::uint64_t seed = 42; // reserved for randomized checks

  // Worker count; never serialized, outputs do not depend on it.
  int jobs = 0;

  bool operator==(const RunSpec&) const = default;
};

// Defaults for a given subcommand (sweep ranges differ between scaling and ret).
RunSpec default_run_spec(const std::string& command);

nlohmann::json to_json(const RunSpec& spec);
RunSpec run_spec_from_json(const nlohmann::json& j);
// JSON file, or any output file whose first line is the runspec comment.
RunSpec load_run_spec(const std::filesystem::path& path);
std::string runspec_comment(const RunSpec& spec);

// An error tagged with the pipeline stage it came from.
class StageError : public std::runtime_error {
public:
  StageError(std::string stage, const std::string& what, bool numerical)
      : std::runtime_error("stage '" + stage + "': " + what), stage_(std::move(stage)),
        numerical_(numerical) {}
  const std::string& stage() const { return stage_; }
  bool numerical() const { return numerical_; }

private:
  std::string stage_;
  bool numerical_;
};

// Relative paths go under $WFR_OUTPUT_DIR when that is set.
std::filesystem::path resolve_output(const std::string& path);

// f0 grid uniform in 1/f0, so phi is sampled uniformly. Ascending f0.
std::vector<double> inverse_force_grid(double f0_min, double f0_max, int n_points);
// f0 grid uniform in f0. Empty if n_points == 0 or f0_max < f0_min.
std::vector<double> linear_force_grid(double f0_min, double f0_max, int n_points);

struct ScalingRow {
  double v0 = 0.0;
  double f0 = 0.0;
  double phi = 0.0;
  double z_minus_1 = 0.0;
  std::string status = "ok";
};

std::vector<ScalingRow> compute_scaling(const RunSpec& spec);

struct RetRow {
  double f0 = 0.0;
  double gamma = 0.0;    // per cycle
  double gamma_lz = 0.0; // -ln s12^2
  double excess = 0.0;   // gamma - gamma_lz
  double rate = 0.0;     // gamma / T_B
  bool is_max = false;   // local maximum of the excess
  std::string status = "ok";
};

struct RetResonance {
  int j = 0;
  double predicted_f0 = 0.0;
  double detected_f0 = 0.0; // nearest detected maximum, NaN if none
  double distance = 0.0;
  bool within_one_step = false;
};

struct RetReport {
  double mean_gap = 0.0;
  double grid_step = 0.0;
  std::vector<RetRow> rows;
  std::vector<RetResonance> resonances;
};

RetReport compute_ret(const RunSpec& spec);

struct RunResult {
  LatticeTrace trace;
  SurvivalSeries<double> steps;
  RenormFit<double> renorm;
  PlateauSeries full_plateaus;
  PlateauSeries eff_plateaus;
  ExpFit full_fit;
  ExpFit eff_fit;
  ModelComparison comparison;
  StepIngredients<double> ingredients;
  double mean_gap = 0.0;
  bool complete_decay = false; // step model empties band 1 at the first crossing
};

// Command entry points; each writes its files and returns the paths written.
std::vector<std::filesystem::path> cmd_bands(const RunSpec& spec);
std::vector<std::filesystem::path> cmd_run(const RunSpec& spec, RunResult* result = nullptr);
std::vector<std::filesystem::path> cmd_scaling(const RunSpec& spec);
std::vector<std::filesystem::path> cmd_ret(const RunSpec& spec);
std::vector<std::filesystem::path> execute(const RunSpec& spec);

} // namespace wfr

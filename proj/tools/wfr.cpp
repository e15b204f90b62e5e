#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "wfr/commands.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

std::map<CLI::App*, std::string> config_files;

void add_common(CLI::App* sub, wfr::RunSpec& spec) {
  sub->add_option("--config", config_files[sub], "key=value file, one flag per line; command-line flags win")
      ->check(CLI::ExistingFile);
  sub->add_option("-o,--out", spec.out, "output file (or prefix for run); relative paths go under $WFR_OUTPUT_DIR")
      ->capture_default_str();
  sub->add_option("-j,--jobs", spec.jobs, "worker threads, 0 = all cores");
}

void add_bands_flags(CLI::App* sub, wfr::RunSpec& spec) {
  sub->add_option("--n-bands", spec.n_bands, "number of bands")->capture_default_str();
  sub->add_option("--grid", spec.grid, "quasimomentum grid points")->capture_default_str();
  sub->add_option("--band-cutoff", spec.band_cutoff, "plane-wave cutoff for band structure")
      ->capture_default_str();
}

void add_convention(CLI::App* sub, wfr::RunSpec& spec) {
  sub->add_option("--convention", spec.convention,
                  "crossing amplitude: adiabatic (s12^2 = 1 - P_LZ) or literal (s12^2 = P_LZ)")
      ->check(CLI::IsMember({"adiabatic", "literal"}))
      ->capture_default_str();
}

// Subcommand config files are not read by CLI11 itself, so feed each entry to
// the matching option unless that option was already given on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + item.name);
    } catch (const CLI::OptionNotFound&) {
      throw CLI::ConfigError::Extras(item.fullname());
    }
    if (opt->count() > 0) continue;
    for (const auto& value : item.inputs) opt->add_result(value);
    opt->run_callback();
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decay of a Bloch-oscillating wave packet: full dynamics and the step model"};
  app.require_subcommand(1);

  std::map<std::string, wfr::RunSpec> specs;
  for (const char* name : {"bands", "run", "scaling", "ret"}) specs[name] = wfr::default_run_spec(name);

  auto* bands = app.add_subcommand("bands", "export the lowest bands over the zone");
  {
    auto& s = specs["bands"];
    bands->add_option("--v0", s.v0, "lattice depth")->capture_default_str();
    add_bands_flags(bands, s);
    add_common(bands, s);
  }

  auto* run = app.add_subcommand("run", "full solver vs step model at one (v0, f0)");
  {
    auto& s = specs["run"];
    run->add_option("--v0", s.v0, "lattice depth")->capture_default_str();
    run->add_option("--f0", s.f0, "force")->capture_default_str();
    run->add_option("--cycles", s.cycles, "Bloch cycles")->capture_default_str();
    run->add_option("--cutoff", s.dyn_cutoff, "plane-wave cutoff for dynamics")->capture_default_str();
    run->add_option("--dt", s.dt, "maximum integrator step")->capture_default_str();
    run->add_option("--samples-per-cycle", s.samples_per_cycle, "trace samples per cycle")
        ->capture_default_str();
    run->add_option("--fit-first", s.fit_first, "first plateau of the fit window")->capture_default_str();
    run->add_option("--fit-last", s.fit_last, "last plateau of the fit window")->capture_default_str();
    add_bands_flags(run, s);
    add_convention(run, s);
    add_common(run, s);
  }

  auto* scaling = app.add_subcommand("scaling", "Z - 1 against phi for several depths");
  {
    auto& s = specs["scaling"];
    scaling->add_option("--v0", s.v0_list, "comma-separated depths")->delimiter(',')->capture_default_str();
    scaling->add_option("--f0-min", s.f0_min, "smallest force")->capture_default_str();
    scaling->add_option("--f0-max", s.f0_max, "largest force")->capture_default_str();
    scaling->add_option("--n-points", s.n_points, "grid points, uniform in 1/f0")->capture_default_str();
    add_bands_flags(scaling, s);
    add_convention(scaling, s);
    add_common(scaling, s);
  }

  auto* ret = app.add_subcommand("ret", "decay rate against force, resonance positions");
  {
    auto& s = specs["ret"];
    ret->add_option("--v0", s.v0, "lattice depth")->capture_default_str();
    ret->add_option("--f0-min", s.f0_min, "smallest force")->capture_default_str();
    ret->add_option("--f0-max", s.f0_max, "largest force")->capture_default_str();
    ret->add_option("--n-points", s.n_points, "grid points, uniform in f0")->capture_default_str();
    ret->add_option("--j-max", s.j_max, "highest resonance order")->capture_default_str();
    add_bands_flags(ret, s);
    add_convention(ret, s);
    add_common(ret, s);
  }

  std::string replay_from;
  std::string replay_out;
  int replay_jobs = 0;
  auto* replay = app.add_subcommand("replay", "re-execute the runspec stored in an output file");
  replay->add_option("file", replay_from, "output CSV or runspec JSON")->required();
  replay->add_option("-o,--out", replay_out, "override the stored output path");
  replay->add_option("-j,--jobs", replay_jobs, "worker threads, 0 = all cores");

  try {
    app.parse(argc, argv);
    for (auto* sub : app.get_subcommands())
      if (config_files.contains(sub)) apply_config(sub, config_files[sub]);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    wfr::RunSpec spec;
    if (replay->parsed()) {
      spec = wfr::load_run_spec(replay_from);
      if (!replay_out.empty()) spec.out = replay_out;
      spec.jobs = replay_jobs;
    } else {
      spec = specs.at(app.get_subcommands().front()->get_name());
    }
    for (const auto& path : wfr::execute(spec)) std::cout << path.string() << '\n';
    return 0;
  } catch (const wfr::StageError& e) {
    std::cerr << "wfr: " << e.what() << '\n';
    return e.numerical() ? kExitNumerical : kExitInvalid;
  } catch (const wfr::InvalidArgument& e) {
    std::cerr << "wfr: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "wfr: " << e.what() << '\n';
    return kExitNumerical;
  }
}

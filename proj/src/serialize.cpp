#include "wfr/serialize.hpp"

#include <cmath>
#include <ostream>

#include "wfr/csv.hpp"

namespace wfr {

using nlohmann::json;

namespace {

// JSON has no infinities; encode non-finite values as null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

} // namespace

json to_json(const SurvivalSeries<double>& series) {
  return json{{"probabilities", numbers(series.probabilities)},
              {"log_probabilities", numbers(series.log_probabilities)},
              {"step_times", numbers(series.step_times)},
              {"bloch_period", series.bloch_period}};
}

json to_json(const RenormFit<double>& fit) {
  return json{{"gamma", number(fit.gamma)},
              {"z", number(fit.z)},
              {"gamma_seq", numbers(fit.gamma_seq)},
              {"z_seq", numbers(fit.z_seq)},
              {"converged", fit.converged},
              {"achieved_tolerance", number(fit.achieved_tolerance)}};
}

json to_json(const ExpFit& fit) {
  return json{{"z", number(fit.z)},
              {"gamma", number(fit.gamma)},
              {"gamma_per_cycle", number(fit.gamma_per_cycle)},
              {"window", {fit.window.first, fit.window.last}},
              {"residual", number(fit.residual)}};
}

json to_json(const StepIngredients<double>& ing) {
  return json{{"s12", ing.s12}, {"p12", ing.p12}, {"s23", ing.s23}, {"phi", ing.phi}};
}

void write_csv(std::ostream& out, const SurvivalSeries<double>& series) {
  out << "n,t,P\n";
  for (std::size_t n = 0; n < series.size(); ++n)
    out << n << ',' << csv::num(series.step_times[n]) << ',' << csv::num(series.probabilities[n]) << '\n';
}

void write_csv(std::ostream& out, const RenormFit<double>& fit) {
  out << "n,gamma_n,Z_n\n";
  for (std::size_t n = 0; n < fit.gamma_seq.size(); ++n)
    out << n << ',' << csv::num(fit.gamma_seq[n]) << ',' << csv::num(fit.z_seq[n]) << '\n';
}

void write_csv(std::ostream& out, const PlateauSeries& full, const PlateauSeries& eff,
               const ModelComparison& cmp) {
  out << "n,P_full,P_eff,rel_dev\n";
  for (std::size_t n = 0; n < cmp.relative_deviation.size(); ++n)
    out << n << ',' << csv::num(full.values[n]) << ',' << csv::num(eff.values[n]) << ','
        << csv::num(cmp.relative_deviation[n]) << '\n';
}

} // namespace wfr

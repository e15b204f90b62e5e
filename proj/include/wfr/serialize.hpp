#pragma once

#include <iosfwd>

#include <json.hpp>

#include "wfr/analysis_fit.hpp"
#include "wfr/lz_core.hpp"

namespace wfr {

nlohmann::json to_json(const SurvivalSeries<double>& series);
nlohmann::json to_json(const RenormFit<double>& fit);
nlohmann::json to_json(const ExpFit& fit);
nlohmann::json to_json(const StepIngredients<double>& ing);

// `n,t,P`
void write_csv(std::ostream& out, const SurvivalSeries<double>& series);
// `n,gamma_n,Z_n`
void write_csv(std::ostream& out, const RenormFit<double>& fit);
// `n,P_full,P_eff,rel_dev`
void write_csv(std::ostream& out, const PlateauSeries& full, const PlateauSeries& eff,
               const ModelComparison& cmp);

} // namespace wfr

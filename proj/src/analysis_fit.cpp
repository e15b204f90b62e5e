#include "wfr/analysis_fit.hpp"

#include <algorithm>
#include <cmath>

namespace wfr {

const char* to_string(PlateauSource s) {
  return s == PlateauSource::full_solver ? "full-solver" : "effective-model";
}

namespace {

bool non_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::less<>()) == v.end();
}

} // namespace

PlateauSeries extract_plateaus(const LatticeTrace& trace, const LatticeParams& params,
                               int sample_offset) {
  validate(params);
  const int per_cycle = trace.config.samples_per_cycle;
  detail::require(per_cycle >= 64, "extract_plateaus: need at least 64 samples per cycle");
  detail::require(!trace.samples.empty(), "extract_plateaus: empty trace");
  const double tb = bloch_period(params);
  const double span = trace.samples.back().tau - trace.samples.front().tau;
  const int n_cycles = static_cast<int>(std::floor(span / tb + 1e-9));
  if (n_cycles < 3) throw InvalidArgument("extract_plateaus: trace covers fewer than 3 Bloch cycles");

  PlateauSeries out;
  out.source = PlateauSource::full_solver;
  out.bloch_period = tb;
  const auto last = static_cast<long long>(trace.samples.size()) - 1;
  for (int n = 0; n <= n_cycles; ++n) {
    const double target = trace.samples.front().tau + n * tb;
    const auto it = std::lower_bound(trace.samples.begin(), trace.samples.end(), target,
                                     [](const TraceSample& s, double t) { return s.tau < t; });
    long long idx = it - trace.samples.begin();
    if (idx > last) idx = last;
    if (idx > 0 && std::abs(trace.samples[idx - 1].tau - target) <= std::abs(trace.samples[idx].tau - target))
      --idx;
    idx = std::clamp(idx + sample_offset, 0LL, last);
    out.values.push_back(trace.samples[idx].p1);
    out.times.push_back(n * tb);
  }
  out.monotone = non_increasing(out.values);
  return out;
}

PlateauSeries extract_plateaus(const SurvivalSeries<double>& series) {
  PlateauSeries out;
  out.source = PlateauSource::effective_model;
  out.bloch_period = series.bloch_period;
  out.values = series.probabilities;
  for (std::size_t n = 0; n < series.size(); ++n) out.times.push_back(n * series.bloch_period);
  out.monotone = non_increasing(out.values);
  return out;
}

FitWindow default_fit_window(std::size_t n_plateaus) {
  detail::require(n_plateaus >= 2, "default_fit_window: need at least two plateaus");
  FitWindow w;
  w.last = std::min<std::size_t>(14, n_plateaus - 1);
  w.first = std::min<std::size_t>(6, w.last >= 1 ? w.last - 1 : 0);
  return w;
}

ExpFit fit_exponential(const PlateauSeries& series, FitWindow window) {
  detail::require(series.times.size() == series.values.size(), "fit_exponential: malformed series");
  detail::require(window.first < series.size(), "fit_exponential: window starts past the series");
  window.last = std::min(window.last, series.size() - 1);
  if (window.last < window.first + 1)
    throw InvalidArgument("fit_exponential: fewer than 2 points in the window");

  const std::size_t m = window.last - window.first + 1;
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double p = series.values[window.first + i];
    if (!(p > 0.0)) throw NumericalError("fit_exponential: non-positive survival probability in window");
    a(i, 0) = 1.0;
    a(i, 1) = series.times[window.first + i];
    y(i) = std::log(p);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);

  ExpFit fit;
  fit.z = std::exp(coef(0));
  fit.gamma = -coef(1);
  fit.gamma_per_cycle = fit.gamma * series.bloch_period;
  fit.window = window;
  fit.residual = (a * coef - y).cwiseAbs().maxCoeff();
  return fit;
}

ModelComparison compare_models(const PlateauSeries& full, const PlateauSeries& eff,
                               std::size_t range_first, std::size_t range_last) {
  if (full.size() != eff.size())
    throw InvalidArgument("compare_models: series lengths differ");
  ModelComparison cmp;
  cmp.relative_deviation.reserve(full.size());
  for (std::size_t n = 0; n < full.size(); ++n) {
    const double denom = eff.values[n];
    const double diff = std::abs(full.values[n] - denom);
    cmp.relative_deviation.push_back(diff == 0.0 ? 0.0 : diff / denom);
  }
  if (!full.values.empty()) {
    cmp.range_last = std::min(range_last, full.size() - 1);
    cmp.range_first = std::min(range_first, cmp.range_last);
    for (std::size_t n = cmp.range_first; n <= cmp.range_last; ++n)
      cmp.max_deviation = std::max(cmp.max_deviation, cmp.relative_deviation[n]);
  }
  return cmp;
}

std::vector<LocalMaximum> find_local_maxima(const std::vector<double>& y) {
  std::vector<LocalMaximum> out;
  const std::size_t n = y.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    std::size_t l = i;
    while (l > 0 && y[l - 1] <= y[l]) --l;
    std::size_t r = i;
    while (r + 1 < n && y[r + 1] <= y[r]) ++r;
    out.push_back({i, y[i] - std::max(y[l], y[r])});
  }
  return out;
}

} // namespace wfr

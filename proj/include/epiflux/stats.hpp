#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "epiflux/fluctuation.hpp"
#include "epiflux/model.hpp"
#include "epiflux/ode.hpp"
#include "epiflux/simulate.hpp"

namespace epiflux {

// Streaming mean/variance with exact pairwise merging, so ensemble halves
// reduce to the same numbers as a single pass.
struct RunningMoments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  static RunningMoments merged(const RunningMoments& a,
                               const RunningMoments& b);
  double variance() const;      // unbiased, needs n >= 2
  double variance_mle() const;  // divides by n
};

struct EnsembleSpec {
  SimConfig base;
  int n_runs = 500;
  std::vector<double> observe_times{1.0};
  bool collect_w = false;     // needs base.record_mode == FullEventLog
  bool collect_grid = false;  // needs base.record_mode == SampledGrid
  int threads = 0;            // 0 picks hardware concurrency
};

void validate(const EnsembleSpec& spec);

// Per-run digest. Full event logs are processed and dropped inside the
// runner; only the requested observables survive.
struct RunSummary {
  int run_index = 0;
  std::int64_t n_scale = 0;
  PopulationState endpoint;
  std::vector<FluctuationSample> w;        // when collect_w
  std::vector<PopulationState> at_times;   // states at observe_times
  std::vector<GridPoint> grid;             // when collect_grid
};

class EnsembleRunError : public std::runtime_error {
 public:
  EnsembleRunError(int run_index, const std::string& what);
  int run_index() const { return run_index_; }

 private:
  int run_index_;
};

// n_runs independent realizations on streams (seed, 0..n_runs-1). Results
// are reduced in run order, so the numbers do not depend on the thread
// count. The first failing run aborts the ensemble.
std::vector<RunSummary> run_ensemble(const EnsembleSpec& spec,
                                     const PopulationState& initial);

struct DeviationReport {
  std::vector<double> per_run;  // sup over the grid of the max-norm gap
  double mean = 0.0;
  double q05 = 0.0, q50 = 0.0, q95 = 0.0;
};

// Sup-norm distance between each run's fraction-of-total grid curve and the
// ODE curve. Runs must carry grids on a common time span inside the ODE's.
DeviationReport deviation_report(std::span<const RunSummary> runs,
                                 const OdeSolution& ode);

struct Histogram {
  std::vector<double> edges;        // size counts.size() + 1
  std::vector<std::int64_t> counts;
};

// Freedman-Diaconis binning.
Histogram make_histogram(std::span<const double> xs);

struct KsResult {
  double d = 0.0;
  double p_value = 0.0;
};

// One-sample Kolmogorov-Smirnov against Normal(mean, sd^2), p-value via the
// asymptotic Kolmogorov distribution with the Stephens small-sample
// correction.
KsResult ks_test_normal(std::span<const double> xs, double mean, double sd);

double normal_cdf(double x);        // standard normal
double kolmogorov_q(double lambda); // upper tail of the Kolmogorov law

struct NormalityReport {
  int component = 0;  // 1-based
  std::int64_t n = 0;
  double sample_mean = 0.0;
  double sample_std = 0.0;  // unbiased
  double fitted_mean = 0.0; // maximum likelihood
  double fitted_std = 0.0;
  double theory_var = 0.0;
  double ks_statistic = 0.0;
  double ks_p = 0.0;
  Histogram histogram;
};

// KS of one W component against the theory normal (mean 0, variance
// theory_var), plus the best-fitting normal. Needs >= 100 samples.
NormalityReport normality_report(std::span<const FluctuationSample> samples,
                                 int component, double theory_var);

struct ScalingPoint {
  std::int64_t n = 0;
  double sigma_i = 0.0;  // std of component 2 of Z_N(1) = std(w2)/sqrt(N)
  double f_i = 0.0;      // mean infective fraction at t = 1
  double ratio = 0.0;    // sigma_i / f_i
};

ScalingPoint make_scaling_point(std::int64_t n, std::span<const double> w2,
                                std::span<const double> infective_fracs);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// OLS of log10(ratio) on log10(n). Needs >= 3 points with distinct n and
// positive ratios.
RegressionResult scaling_regression(std::span<const ScalingPoint> points);

}  // namespace epiflux

#include "epiflux/stats.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "epiflux/ode.hpp"

namespace epiflux {

void RunningMoments::add(double x) {
  ++n;
  const double delta = x - mean;
  mean += delta / static_cast<double>(n);
  m2 += delta * (x - mean);
}

RunningMoments RunningMoments::merged(const RunningMoments& a,
                                      const RunningMoments& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  RunningMoments out;
  out.n = a.n + b.n;
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  const double delta = b.mean - a.mean;
  out.mean = a.mean + delta * nb / (na + nb);
  out.m2 = a.m2 + b.m2 + delta * delta * na * nb / (na + nb);
  return out;
}

double RunningMoments::variance() const {
  return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
}

double RunningMoments::variance_mle() const {
  return n > 0 ? m2 / static_cast<double>(n) : 0.0;
}

EnsembleRunError::EnsembleRunError(int run_index, const std::string& what)
    : std::runtime_error("run " + std::to_string(run_index) + ": " + what),
      run_index_(run_index) {}

void validate(const EnsembleSpec& spec) {
  validate(spec.base);
  if (spec.base.truncation == Truncation::Coupled) {
    throw std::invalid_argument("run_ensemble does not take coupled runs");
  }
  if (spec.n_runs < 2) throw std::invalid_argument("n_runs must be >= 2");
  if (spec.threads < 0) throw std::invalid_argument("threads must be >= 0");
  if (spec.observe_times.empty()) {
    throw std::invalid_argument("observe_times must not be empty");
  }
  double prev = 0.0;
  for (const double t : spec.observe_times) {
    if (t < prev || t > spec.base.t_end + 1e-12) {
      throw std::invalid_argument(
          "observe_times must be ascending within [0, t_end]");
    }
    prev = t;
  }
  if (spec.collect_grid && spec.base.record_mode != RecordMode::SampledGrid) {
    throw std::invalid_argument("collect_grid needs SampledGrid recording");
  }
  if (spec.collect_w && spec.base.record_mode != RecordMode::FullEventLog) {
    // Without an event log the fluctuation is only known at the endpoint.
    for (const double t : spec.observe_times) {
      if (std::abs(t - spec.base.t_end) > 1e-12) {
        throw std::invalid_argument(
            "collect_w without FullEventLog observes t_end only");
      }
    }
  }
}

namespace {

RunSummary summarize_run(const EnsembleSpec& spec,
                         const PopulationState& initial, int run_index) {
  SimConfig cfg = spec.base;
  cfg.stream = spec.base.stream + static_cast<std::uint64_t>(run_index);
  const Trajectory traj = simulate(cfg, initial);

  RunSummary out;
  out.run_index = run_index;
  out.n_scale = cfg.params.n_scale;
  out.endpoint = traj.final_state;
  if (cfg.record_mode == RecordMode::FullEventLog) {
    out.at_times = states_at(traj, spec.observe_times);
    if (spec.collect_w) {
      out.w = w_of_trajectory(traj, cfg.params, spec.observe_times);
    }
  } else if (spec.collect_w) {
    // Endpoint fluctuation straight from the running drift integral.
    const double sqrt_n = std::sqrt(static_cast<double>(traj.n_scale));
    const FractionState xi0 = fractions_by_scale(traj.initial, traj.n_scale);
    const FractionState xi = fractions_by_scale(traj.final_state, traj.n_scale);
    FluctuationSample sample;
    sample.t = traj.t_end;
    sample.w = sqrt_n * (xi - xi0 - traj.drift_integral);
    sample.n_scale = traj.n_scale;
    out.w.assign(spec.observe_times.size(), sample);
  }
  if (spec.collect_grid) out.grid = traj.grid;
  return out;
}

}  // namespace

std::vector<RunSummary> run_ensemble(const EnsembleSpec& spec,
                                     const PopulationState& initial) {
  validate(spec);
  const int n_runs = spec.n_runs;
  std::vector<RunSummary> out(static_cast<std::size_t>(n_runs));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_runs));

  unsigned n_threads = spec.threads > 0
                           ? static_cast<unsigned>(spec.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_runs));

  const auto worker = [&](unsigned offset, unsigned stride) {
    for (int k = static_cast<int>(offset); k < n_runs;
         k += static_cast<int>(stride)) {
      try {
        out[static_cast<std::size_t>(k)] = summarize_run(spec, initial, k);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(k)] =
            std::make_exception_ptr(EnsembleRunError(k, e.what()));
      }
    }
  };

  if (n_threads <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      pool.emplace_back(worker, w, n_threads);
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return out;
}

DeviationReport deviation_report(std::span<const RunSummary> runs,
                                 const OdeSolution& ode) {
  if (runs.empty()) throw std::invalid_argument("no runs to report on");
  DeviationReport out;
  out.per_run.reserve(runs.size());
  for (const RunSummary& run : runs) {
    if (run.grid.empty()) {
      throw std::invalid_argument("deviation_report needs sampled grids");
    }
    double sup = 0.0;
    for (const GridPoint& gp : run.grid) {
      const FractionState xi = fractions_by_scale(gp.state, run.n_scale);
      const FractionState ref = ode.at(gp.t);
      sup = std::max(sup, (xi - ref).cwiseAbs().maxCoeff());
    }
    out.per_run.push_back(sup);
  }
  std::vector<double> sorted = out.per_run;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (const double v : sorted) total += v;
  out.mean = total / static_cast<double>(sorted.size());
  const auto quantile = [&sorted](double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };
  out.q05 = quantile(0.05);
  out.q50 = quantile(0.50);
  out.q95 = quantile(0.95);
  return out;
}

Histogram make_histogram(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("histogram needs at least two values");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const auto n = static_cast<double>(sorted.size());
  const auto quantile = [&sorted](double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(pos));
    const std::size_t k2 = std::min(k + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(k);
    return sorted[k] * (1.0 - frac) + sorted[k2] * frac;
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double width = 2.0 * iqr / std::cbrt(n);
  if (!(width > 0.0)) {
    // Degenerate quartiles; fall back to the sample spread.
    width = (hi - lo) / std::cbrt(n);
  }
  Histogram out;
  if (!(width > 0.0)) {
    // All values identical: one token bin around the point.
    out.edges = {lo - 0.5, lo + 0.5};
    out.counts = {static_cast<std::int64_t>(sorted.size())};
    return out;
  }
  const auto bins = static_cast<std::size_t>(
      std::max<double>(1.0, std::ceil((hi - lo) / width - 1e-9)));
  out.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    out.edges[k] = lo + static_cast<double>(k) * width;
  }
  out.counts.assign(bins, 0);
  for (const double v : sorted) {
    auto k = static_cast<std::size_t>((v - lo) / width);
    if (k >= bins) k = bins - 1;
    ++out.counts[k];
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term =
        std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) *
                 lambda * lambda);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::span<const double> values, double mean,
                        double sd) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  if (!(sd > 0.0)) throw std::invalid_argument("sd must be > 0");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double f = normal_cdf((sorted[k] - mean) / sd);
    const double above = static_cast<double>(k + 1) / n - f;
    const double below = f - static_cast<double>(k) / n;
    d = std::max({d, above, below});
  }
  KsResult out;
  out.d = d;
  const double sqrt_n = std::sqrt(n);
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  out.p_value = kolmogorov_q(lambda);
  return out;
}

NormalityReport normality_report(std::span<const FluctuationSample> samples,
                                 int component, double theory_var) {
  if (component < 1 || component > 3) {
    throw std::invalid_argument("component must be 1, 2 or 3");
  }
  if (samples.size() < 100) {
    throw std::invalid_argument("normality needs at least 100 samples");
  }
  if (!(theory_var > 0.0)) {
    throw std::invalid_argument("theory variance must be > 0");
  }
  std::vector<double> values;
  values.reserve(samples.size());
  RunningMoments mom;
  for (const FluctuationSample& s : samples) {
    const double v = s.w[component - 1];
    values.push_back(v);
    mom.add(v);
  }
  if (!(mom.variance() > 0.0)) {
    throw std::invalid_argument("degenerate samples: zero variance");
  }
  NormalityReport out;
  out.component = component;
  out.n = mom.n;
  out.sample_mean = mom.mean;
  out.sample_std = std::sqrt(mom.variance());
  out.fitted_mean = mom.mean;
  out.fitted_std = std::sqrt(mom.variance_mle());
  out.theory_var = theory_var;
  const KsResult ks = ks_test_normal(values, 0.0, std::sqrt(theory_var));
  out.ks_statistic = ks.d;
  out.ks_p = ks.p_value;
  out.histogram = make_histogram(values);
  return out;
}

ScalingPoint make_scaling_point(std::int64_t n, std::span<const double> w2,
                                std::span<const double> infective_fracs) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (w2.size() < 2 || infective_fracs.size() < 2) {
    throw std::invalid_argument("scaling point needs at least two runs");
  }
  RunningMoments mw;
  for (const double v : w2) mw.add(v);
  RunningMoments mf;
  for (const double v : infective_fracs) mf.add(v);
  ScalingPoint out;
  out.n = n;
  out.sigma_i =
      std::sqrt(mw.variance()) / std::sqrt(static_cast<double>(n));
  out.f_i = mf.mean;
  if (!(out.f_i > 0.0)) {
    throw std::invalid_argument("mean infective fraction must be > 0");
  }
  out.ratio = out.sigma_i / out.f_i;
  return out;
}

RegressionResult scaling_regression(std::span<const ScalingPoint> points) {
  if (points.size() < 3) {
    throw std::invalid_argument("regression needs at least three points");
  }
  RunningMoments mx, my;
  for (const ScalingPoint& p : points) {
    if (!(p.ratio > 0.0) || p.n < 1) {
      throw std::invalid_argument("regression needs positive ratios");
    }
    mx.add(std::log10(static_cast<double>(p.n)));
    my.add(std::log10(p.ratio));
  }
  double sxy = 0.0;
  for (const ScalingPoint& p : points) {
    sxy += (std::log10(static_cast<double>(p.n)) - mx.mean) *
           (std::log10(p.ratio) - my.mean);
  }
  if (!(mx.m2 > 0.0)) {
    throw std::invalid_argument("regression needs at least two distinct n");
  }
  RegressionResult out;
  out.slope = sxy / mx.m2;
  out.intercept = my.mean - out.slope * mx.mean;
  out.r2 = my.m2 > 0.0 ? sxy * sxy / (mx.m2 * my.m2) : 1.0;
  return out;
}

}  // namespace epiflux

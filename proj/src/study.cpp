#include "epiflux/study.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "epiflux/config.hpp"
#include "epiflux/fluctuation.hpp"
#include "epiflux/io.hpp"
#include "epiflux/ode.hpp"
#include "epiflux/simulate.hpp"
#include "epiflux/stats.hpp"

namespace epiflux {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << content;
  if (!os) throw std::runtime_error("cannot write " + path.string());
}

template <typename Fn>
void write_csv(const fs::path& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_file(path, os.str());
}

ordered_json stop_times_json(const StopTimes& st) {
  ordered_json j;
  j["tau_n"] = st.tau_n ? ordered_json(*st.tau_n) : ordered_json(nullptr);
  j["tau_n_eps"] =
      st.tau_n_eps ? ordered_json(*st.tau_n_eps) : ordered_json(nullptr);
  return j;
}

ordered_json state_json(const PopulationState& st) {
  ordered_json j;
  j["s"] = st.s;
  j["i"] = st.i;
  j["r"] = st.r;
  return j;
}

Truncation truncation_from_name(const std::string& name) {
  if (name == "original") return Truncation::Original;
  if (name == "truncated") return Truncation::Truncated;
  return Truncation::Coupled;
}

SimConfig base_sim_config(const RunConfig& cfg) {
  SimConfig sim;
  sim.params = cfg.params;
  sim.t_end = cfg.t_end;
  sim.seed = cfg.seed;
  sim.stream = 0;
  sim.grid_dt = cfg.dt;
  sim.truncation = truncation_from_name(cfg.process);
  return sim;
}

bool run_trajectory_study(const RunConfig& cfg, const fs::path& out,
                          ordered_json& summary) {
  SimConfig sim = base_sim_config(cfg);
  sim.record_mode = RecordMode::FullEventLog;
  const PopulationState initial =
      initial_counts(cfg.s0_frac, cfg.i0_frac, cfg.r0_frac,
                     cfg.params.n_scale);
  summary["initial"] = state_json(initial);
  if (sim.truncation == Truncation::Coupled) {
    const auto [orig, trunc] = simulate_coupled(sim, initial);
    write_csv(out / "events_original.csv",
              [&](std::ostream& os) { write_event_csv(os, orig); });
    write_csv(out / "events_truncated.csv",
              [&](std::ostream& os) { write_event_csv(os, trunc); });
    summary["n_proposals"] = orig.n_proposals;
    summary["original"] = {
        {"n_events", orig.n_events},
        {"final", state_json(orig.final_state)},
        {"stop_times", stop_times_json(detect_stop_times(orig, cfg.epsilon))},
    };
    summary["truncated"] = {
        {"n_events", trunc.n_events},
        {"final", state_json(trunc.final_state)},
        {"stop_times", stop_times_json(detect_stop_times(trunc, cfg.epsilon))},
    };
  } else {
    const Trajectory traj = simulate(sim, initial);
    write_csv(out / "events.csv",
              [&](std::ostream& os) { write_event_csv(os, traj); });
    const std::vector<GridPoint> grid = sample_grid(traj, cfg.dt);
    write_csv(out / "grid.csv",
              [&](std::ostream& os) { write_grid_csv(os, grid); });
    summary["n_events"] = traj.n_events;
    summary["n_proposals"] = traj.n_proposals;
    summary["final"] = state_json(traj.final_state);
    summary["stop_times"] =
        stop_times_json(detect_stop_times(traj, cfg.epsilon));
  }
  return true;
}

bool run_ode_study(const RunConfig& cfg, const fs::path& out,
                   ordered_json& summary) {
  const FractionState x0(cfg.s0_frac, cfg.i0_frac, cfg.r0_frac);
  const OdeSolution ode = integrate(cfg.params, x0, cfg.t_end, cfg.h);
  write_csv(out / "ode.csv",
            [&](std::ostream& os) { write_ode_csv(os, ode); });
  const FractionState xf = ode.states.back();
  summary["steps"] = ode.times.size() - 1;
  summary["final"] = {{"x", xf[0]}, {"y", xf[1]}, {"z", xf[2]}};
  summary["mass_error"] = std::abs(xf.sum() - x0.sum());
  return true;
}

bool run_ensemble_study(const RunConfig& cfg, const fs::path& out,
                        ordered_json& summary) {
  EnsembleSpec spec;
  spec.base = base_sim_config(cfg);
  spec.base.record_mode = RecordMode::SampledGrid;
  spec.n_runs = cfg.runs;
  spec.observe_times = {cfg.t_end};
  spec.collect_grid = true;
  spec.threads = cfg.threads;
  const PopulationState initial =
      initial_counts(cfg.s0_frac, cfg.i0_frac, cfg.r0_frac,
                     cfg.params.n_scale);
  const std::vector<RunSummary> runs = run_ensemble(spec, initial);

  const FractionState x0(cfg.s0_frac, cfg.i0_frac, cfg.r0_frac);
  const OdeSolution ode = integrate(cfg.params, x0, cfg.t_end, cfg.h);
  const DeviationReport dev = deviation_report(runs, ode);
  write_csv(out / "deviations.csv",
            [&](std::ostream& os) { write_deviation_csv(os, dev.per_run); });

  RunningMoments frac;
  for (const RunSummary& run : runs) {
    frac.add(fractions_of_total(run.endpoint)[1]);
  }
  const double ode_frac = ode.states.back()[1] / ode.states.back().sum();
  const double se =
      std::sqrt(frac.variance() / static_cast<double>(frac.n));
  const double gap = std::abs(frac.mean - ode_frac);
  const bool pass = se > 0.0 ? gap <= 4.0 * se : gap == 0.0;

  summary["runs"] = cfg.runs;
  summary["deviation"] = {{"mean", dev.mean},
                          {"q05", dev.q05},
                          {"q50", dev.q50},
                          {"q95", dev.q95}};
  summary["mean_infective_frac"] = frac.mean;
  summary["ode_infective_frac"] = ode_frac;
  summary["standard_error"] = se;
  summary["gate_pass"] = pass;
  return pass;
}

bool run_fluctuation_study(const RunConfig& cfg, const fs::path& out,
                           ordered_json& summary) {
  EnsembleSpec spec;
  spec.base = base_sim_config(cfg);
  bool endpoint_only = true;
  for (const double t : cfg.times) {
    if (std::abs(t - cfg.t_end) > 1e-12) endpoint_only = false;
  }
  spec.base.record_mode =
      endpoint_only ? RecordMode::EndpointOnly : RecordMode::FullEventLog;
  spec.n_runs = cfg.runs;
  spec.observe_times = cfg.times;
  spec.collect_w = true;
  spec.threads = cfg.threads;
  const PopulationState initial =
      initial_counts(cfg.s0_frac, cfg.i0_frac, cfg.r0_frac,
                     cfg.params.n_scale);
  const std::vector<RunSummary> runs = run_ensemble(spec, initial);

  const FractionState x0(cfg.s0_frac, cfg.i0_frac, cfg.r0_frac);
  const OdeSolution ode = integrate(cfg.params, x0, cfg.t_end, cfg.h);
  const LimitCovariance sigma = limit_covariance(cfg.params, ode, cfg.t_end);
  write_csv(out / "sigma.csv",
            [&](std::ostream& os) { write_sigma_csv(os, sigma); });
  write_csv(out / "w_samples.csv",
            [&](std::ostream& os) { write_w_samples_csv(os, runs); });

  const double t_obs = cfg.times.back();
  std::vector<FluctuationSample> at_obs;
  at_obs.reserve(runs.size());
  for (const RunSummary& run : runs) at_obs.push_back(run.w.back());
  const int c = cfg.component;
  const double theory_var = sigma.at(t_obs)(c - 1, c - 1);
  const NormalityReport rep = normality_report(at_obs, c, theory_var);
  write_csv(out / "histogram.csv",
            [&](std::ostream& os) { write_histogram_csv(os, rep); });

  const double mean_budget =
      4.0 * rep.sample_std / std::sqrt(static_cast<double>(rep.n));
  const double var_ratio =
      rep.sample_std * rep.sample_std / rep.theory_var;
  const bool pass = rep.ks_p > 0.01 &&
                    std::abs(rep.sample_mean) <= mean_budget &&
                    std::abs(var_ratio - 1.0) <= 0.15;

  summary["runs"] = cfg.runs;
  summary["t"] = t_obs;
  summary["component"] = c;
  summary["sample_mean"] = rep.sample_mean;
  summary["sample_std"] = rep.sample_std;
  summary["theory_var"] = rep.theory_var;
  summary["var_ratio"] = var_ratio;
  summary["ks_d"] = rep.ks_statistic;
  summary["ks_p"] = rep.ks_p;
  summary["gate_pass"] = pass;
  return pass;
}

bool run_scaling_study(const RunConfig& cfg, const fs::path& out,
                       ordered_json& summary) {
  std::vector<ScalingPoint> points;
  ordered_json point_list = ordered_json::array();
  for (std::size_t p = 0; p < cfg.n_values.size(); ++p) {
    RunConfig local = cfg;
    local.params.n_scale = cfg.n_values[p];
    EnsembleSpec spec;
    spec.base = base_sim_config(local);
    spec.base.record_mode = RecordMode::EndpointOnly;
    // Disjoint stream blocks per population size.
    spec.base.stream = static_cast<std::uint64_t>(p) *
                       static_cast<std::uint64_t>(cfg.runs);
    spec.n_runs = cfg.runs;
    spec.observe_times = {cfg.t_end};
    spec.collect_w = true;
    spec.threads = cfg.threads;
    const PopulationState initial = initial_counts(
        cfg.s0_frac, cfg.i0_frac, cfg.r0_frac, local.params.n_scale);
    const std::vector<RunSummary> runs = run_ensemble(spec, initial);
    std::vector<double> w2, fracs;
    w2.reserve(runs.size());
    fracs.reserve(runs.size());
    for (const RunSummary& run : runs) {
      w2.push_back(run.w.back().w[1]);
      fracs.push_back(fractions_by_scale(run.endpoint, run.n_scale)[1]);
    }
    points.push_back(make_scaling_point(local.params.n_scale, w2, fracs));
    point_list.push_back({{"n", points.back().n},
                          {"sigma_i", points.back().sigma_i},
                          {"f_i", points.back().f_i},
                          {"ratio", points.back().ratio}});
  }
  write_csv(out / "scaling.csv",
            [&](std::ostream& os) { write_scaling_csv(os, points); });

  const RegressionResult reg = scaling_regression(points);
  const bool pass = reg.slope >= -0.6 && reg.slope <= -0.4;
  summary["points"] = point_list;
  summary["slope"] = reg.slope;
  summary["intercept"] = reg.intercept;
  summary["r2"] = reg.r2;
  summary["gate_pass"] = pass;
  return pass;
}

}  // namespace

int run_study(const RunConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);

  ordered_json summary;
  summary["study"] = to_string(cfg.study);
  bool gate_pass = true;
  switch (cfg.study) {
    case StudyKind::Trajectory:
      gate_pass = run_trajectory_study(cfg, out, summary);
      break;
    case StudyKind::Ode:
      gate_pass = run_ode_study(cfg, out, summary);
      break;
    case StudyKind::Ensemble:
      gate_pass = run_ensemble_study(cfg, out, summary);
      break;
    case StudyKind::Fluctuation:
      gate_pass = run_fluctuation_study(cfg, out, summary);
      break;
    case StudyKind::Scaling:
      gate_pass = run_scaling_study(cfg, out, summary);
      break;
  }
  write_file(out / "summary.json", summary.dump(2) + "\n");

  const std::chrono::duration<double> wall =
      std::chrono::steady_clock::now() - t_start;
  ordered_json meta;
  meta["version"] = kVersion;
  meta["config"] = ordered_json::parse(config_to_json(cfg));
  meta["wall_time_seconds"] = wall.count();
  write_file(out / "metadata.json", meta.dump(2) + "\n");

  return cfg.gate && !gate_pass ? kExitGateFailure : kExitOk;
}

}  // namespace epiflux

#include "epiflux/simulate.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "epiflux/ode.hpp"
#include "epiflux/rng.hpp"

namespace epiflux {

namespace {

constexpr int kNumChannels = 6;

// Proposal bounds per channel. Non-infection channels propose at their exact
// rate; the infection channel proposes at the beta_max envelope and is
// thinned afterwards. cap < 0 means uncapped (the original process).
struct ChannelBounds {
  double b[kNumChannels];
  double total;
};

inline ChannelBounds channel_bounds(const ModelParams& p, double bmax,
                                    const PopulationState& st,
                                    std::int64_t cap) {
  const auto capped = [cap](std::int64_t v) {
    return cap >= 0 && v > cap ? cap : v;
  };
  const auto sd = static_cast<double>(capped(st.s));
  const auto id = static_cast<double>(capped(st.i));
  const auto rd = static_cast<double>(capped(st.r));
  const auto totald = static_cast<double>(capped(st.total()));
  ChannelBounds out;
  out.b[0] = p.nu * totald;                       // Birth
  out.b[1] = p.nu * sd;                           // SusceptibleDeath
  out.b[2] = st.total() > 0                       // Infection envelope
                 ? bmax * sd * static_cast<double>(st.i) /
                       static_cast<double>(st.total())
                 : 0.0;
  out.b[3] = p.gamma * id;                        // Recovery
  out.b[4] = p.nu * id;                           // InfectiousDeath
  out.b[5] = p.nu * rd;                           // RecoveredDeath
  out.total = out.b[0] + out.b[1] + out.b[2] + out.b[3] + out.b[4] + out.b[5];
  return out;
}

inline int pick_channel(const double* b, double v) {
  for (int k = 0; k < kNumChannels; ++k) {
    if (v < b[k]) return k;
    v -= b[k];
  }
  // Floating-point residue past the last positive bound.
  for (int k = kNumChannels - 1; k >= 0; --k) {
    if (b[k] > 0.0) return k;
  }
  return 0;
}

constexpr EventKind kChannelKind[kNumChannels] = {
    EventKind::Birth,           EventKind::SusceptibleDeath,
    EventKind::Infection,       EventKind::Recovery,
    EventKind::InfectiousDeath, EventKind::RecoveredDeath,
};

// State observers shared by the plain and the coupled loop: grid filling,
// event logging and the closed-form drift integral, all per trajectory.
class Recorder {
 public:
  Recorder(const SimConfig& cfg, const PopulationState& initial) : cfg_(cfg) {
    traj_.initial = initial;
    traj_.n_scale = cfg.params.n_scale;
    traj_.t_end = cfg.t_end;
    traj_.final_state = initial;
    if (cfg.record_mode == RecordMode::SampledGrid) {
      grid_k_max_ =
          static_cast<std::int64_t>(std::floor(cfg.t_end / cfg.grid_dt + 1e-9));
      traj_.grid.reserve(static_cast<std::size_t>(grid_k_max_) + 1);
    }
    beta_anti_prev_ = beta_antiderivative(cfg.params, 0.0);
  }

  // Advances time from t to t_next with the state unchanged.
  void advance(const PopulationState& st, double t, double t_next) {
    fill_grid_before(st, t_next);
    accumulate_drift(st, t, t_next);
  }

  void record_event(const PopulationState& post, double t, EventKind kind) {
    if (cfg_.record_mode == RecordMode::FullEventLog) {
      traj_.events.push_back({t, kind});
    }
    ++traj_.n_events;
    traj_.final_state = post;
    if (!traj_.stop_times.tau_n &&
        post.total() > 2 * cfg_.params.n_scale) {
      traj_.stop_times.tau_n = t;
    }
  }

  Trajectory finish(const PopulationState& st) {
    fill_grid_before(st, std::numeric_limits<double>::infinity());
    traj_.final_state = st;
    return std::move(traj_);
  }

  void note_initial_past_cap() { traj_.stop_times.tau_n = 0.0; }

  Trajectory traj_;

 private:
  void fill_grid_before(const PopulationState& st, double limit) {
    if (cfg_.record_mode != RecordMode::SampledGrid) return;
    while (grid_k_ <= grid_k_max_) {
      const double gt = static_cast<double>(grid_k_) * cfg_.grid_dt;
      if (gt >= limit) break;
      traj_.grid.push_back({gt, st});
      ++grid_k_;
    }
  }

  void accumulate_drift(const PopulationState& st, double a, double b) {
    const double beta_anti_next = beta_antiderivative(cfg_.params, b);
    if (b > a && st.total() > 0) {
      const ModelParams& p = cfg_.params;
      const auto n = static_cast<double>(p.n_scale);
      const double y = static_cast<double>(st.i) / n;
      const double z = static_cast<double>(st.r) / n;
      const double xy_over_total = static_cast<double>(st.s) *
                                   static_cast<double>(st.i) /
                                   (n * static_cast<double>(st.total()));
      const double dt = b - a;
      const double transmission =
          (beta_anti_next - beta_anti_prev_) * xy_over_total;
      traj_.drift_integral[0] += p.nu * (y + z) * dt - transmission;
      traj_.drift_integral[1] += transmission - (p.nu + p.gamma) * y * dt;
      traj_.drift_integral[2] += p.gamma * y * dt - p.nu * z * dt;
    }
    beta_anti_prev_ = beta_anti_next;
  }

  const SimConfig& cfg_;
  std::int64_t grid_k_ = 0;
  std::int64_t grid_k_max_ = -1;
  double beta_anti_prev_ = 0.0;
};

void check_initial(const PopulationState& initial) {
  if (initial.s < 0 || initial.i < 0 || initial.r < 0) {
    throw std::invalid_argument("initial counts must be nonnegative");
  }
  if (initial.total() <= 0) {
    throw std::invalid_argument("initial total must be positive");
  }
}

[[noreturn]] void throw_budget(const SimConfig& cfg) {
  throw EventBudgetExceededError(
      "event budget of " + std::to_string(cfg.max_events) +
      " proposals exhausted before t_end on stream " +
      std::to_string(cfg.stream) + "; runaway growth");
}

}  // namespace

void validate(const SimConfig& cfg) {
  validate(cfg.params);
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) {
    throw std::invalid_argument("t_end must be finite and > 0");
  }
  if (cfg.record_mode == RecordMode::SampledGrid && !(cfg.grid_dt > 0.0)) {
    throw std::invalid_argument("grid_dt must be > 0 with SampledGrid");
  }
  if (cfg.max_events < 1) {
    throw std::invalid_argument("max_events must be >= 1");
  }
}

Trajectory simulate(const SimConfig& cfg, const PopulationState& initial) {
  validate(cfg);
  check_initial(initial);
  if (cfg.truncation == Truncation::Coupled) {
    throw std::invalid_argument("use simulate_coupled for coupled runs");
  }
  const std::int64_t cap =
      cfg.truncation == Truncation::Truncated ? 2 * cfg.params.n_scale : -1;
  const double bmax = beta_max(cfg.params);
  const double thin_floor = (1.0 - cfg.params.beta1) / (1.0 + cfg.params.beta1);

  RngStream rng(cfg.seed, cfg.stream);
  Recorder rec(cfg, initial);
  if (initial.total() > 2 * cfg.params.n_scale) rec.note_initial_past_cap();
  PopulationState st = initial;
  double t = 0.0;

  for (;;) {
    const ChannelBounds bounds = channel_bounds(cfg.params, bmax, st, cap);
    if (bounds.total <= 0.0) break;  // frozen state, zero drift too

    double t_next = t + rng.exponential(bounds.total);
    if (t_next <= t) {
      t_next = std::nextafter(t, std::numeric_limits<double>::infinity());
    }
    if (t_next > cfg.t_end) {
      rec.advance(st, t, cfg.t_end);
      rec.traj_.bound_rate_integral += bounds.total * (cfg.t_end - t);
      t = cfg.t_end;
      break;
    }
    rec.advance(st, t, t_next);
    rec.traj_.bound_rate_integral += bounds.total * (t_next - t);
    t = t_next;
    if (++rec.traj_.n_proposals > cfg.max_events) throw_budget(cfg);

    const int channel = pick_channel(bounds.b, rng.uniform() * bounds.total);
    const EventKind kind = kChannelKind[channel];
    if (kind == EventKind::Infection) {
      const double accept = beta_at(cfg.params, t) / bmax;
      assert(accept >= thin_floor - 1e-12 && accept <= 1.0 + 1e-12);
      (void)thin_floor;
      if (rng.uniform() > accept) continue;  // thinned, no event
    }
    st = apply_event(st, kind);
    rec.record_event(st, t, kind);
  }
  return rec.finish(st);
}

std::pair<Trajectory, Trajectory> simulate_coupled(
    const SimConfig& cfg, const PopulationState& initial) {
  validate(cfg);
  check_initial(initial);
  if (cfg.truncation != Truncation::Coupled) {
    throw std::invalid_argument("simulate_coupled needs truncation = Coupled");
  }
  const std::int64_t cap = 2 * cfg.params.n_scale;
  const double bmax = beta_max(cfg.params);

  RngStream rng(cfg.seed, cfg.stream);
  Recorder rec_orig(cfg, initial);
  Recorder rec_trunc(cfg, initial);
  if (initial.total() > cap) {
    rec_orig.note_initial_past_cap();
    rec_trunc.note_initial_past_cap();
  }
  PopulationState orig = initial;
  PopulationState trunc = initial;
  double t = 0.0;

  for (;;) {
    const ChannelBounds bo = channel_bounds(cfg.params, bmax, orig, -1);
    const ChannelBounds bt = channel_bounds(cfg.params, bmax, trunc, cap);
    ChannelBounds joint;
    joint.total = 0.0;
    for (int k = 0; k < kNumChannels; ++k) {
      joint.b[k] = bo.b[k] > bt.b[k] ? bo.b[k] : bt.b[k];
      joint.total += joint.b[k];
    }
    if (joint.total <= 0.0) break;

    double t_next = t + rng.exponential(joint.total);
    if (t_next <= t) {
      t_next = std::nextafter(t, std::numeric_limits<double>::infinity());
    }
    if (t_next > cfg.t_end) {
      rec_orig.advance(orig, t, cfg.t_end);
      rec_trunc.advance(trunc, t, cfg.t_end);
      rec_orig.traj_.bound_rate_integral += joint.total * (cfg.t_end - t);
      rec_trunc.traj_.bound_rate_integral += joint.total * (cfg.t_end - t);
      t = cfg.t_end;
      break;
    }
    rec_orig.advance(orig, t, t_next);
    rec_trunc.advance(trunc, t, t_next);
    rec_orig.traj_.bound_rate_integral += joint.total * (t_next - t);
    rec_trunc.traj_.bound_rate_integral += joint.total * (t_next - t);
    t = t_next;
    ++rec_orig.traj_.n_proposals;
    ++rec_trunc.traj_.n_proposals;
    if (rec_orig.traj_.n_proposals > cfg.max_events) throw_budget(cfg);

    const int channel = pick_channel(joint.b, rng.uniform() * joint.total);
    const EventKind kind = kChannelKind[channel];
    // One shared uniform decides acceptance for both processes, so their
    // decisions agree bit-for-bit while states agree and caps are slack.
    const double u = rng.uniform();
    const double scaled = u * joint.b[channel];
    const double rate_orig =
        kind == EventKind::Infection
            ? event_rate(cfg.params, orig, t, kind)
            : bo.b[channel];
    const double rate_trunc = truncated_event_rate(cfg.params, trunc, t, kind);
    if (scaled <= rate_orig) {
      orig = apply_event(orig, kind);
      rec_orig.record_event(orig, t, kind);
    }
    if (scaled <= rate_trunc) {
      trunc = apply_event(trunc, kind);
      rec_trunc.record_event(trunc, t, kind);
    }
  }
  return {rec_orig.finish(orig), rec_trunc.finish(trunc)};
}

StopTimes detect_stop_times(const Trajectory& traj, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (traj.events.empty() && traj.n_events > 0) {
    throw std::invalid_argument("detect_stop_times needs a full event log");
  }
  const std::int64_t n = traj.n_scale;
  const double band = epsilon * static_cast<double>(n);
  StopTimes out;
  const auto check = [&](const PopulationState& st, double t) {
    const std::int64_t total = st.total();
    if (!out.tau_n && total > 2 * n) out.tau_n = t;
    if (!out.tau_n_eps &&
        std::abs(static_cast<double>(total - n)) > band) {
      out.tau_n_eps = t;
    }
  };
  PopulationState st = traj.initial;
  check(st, 0.0);
  for (const Event& e : traj.events) {
    if (out.tau_n && out.tau_n_eps) break;
    st = apply_event(st, e.kind);
    check(st, e.t);
  }
  return out;
}

std::vector<GridPoint> sample_grid(const Trajectory& traj, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (traj.events.empty() && traj.n_events > 0) {
    throw std::invalid_argument("sample_grid needs a full event log");
  }
  const auto k_max =
      static_cast<std::int64_t>(std::floor(traj.t_end / dt + 1e-9));
  std::vector<GridPoint> grid;
  grid.reserve(static_cast<std::size_t>(k_max) + 1);
  PopulationState st = traj.initial;
  std::int64_t k = 0;
  for (const Event& e : traj.events) {
    while (k <= k_max && static_cast<double>(k) * dt < e.t) {
      grid.push_back({static_cast<double>(k) * dt, st});
      ++k;
    }
    st = apply_event(st, e.kind);
  }
  while (k <= k_max) {
    grid.push_back({static_cast<double>(k) * dt, st});
    ++k;
  }
  return grid;
}

std::vector<PopulationState> states_at(const Trajectory& traj,
                                       std::span<const double> times) {
  if (traj.events.empty() && traj.n_events > 0) {
    throw std::invalid_argument("states_at needs a full event log");
  }
  std::vector<PopulationState> out;
  out.reserve(times.size());
  PopulationState st = traj.initial;
  std::size_t next_event = 0;
  double prev = 0.0;
  for (const double tau : times) {
    if (tau < prev || tau < 0.0 || tau > traj.t_end + 1e-12) {
      throw std::out_of_range(
          "states_at: times must be ascending within [0, t_end]");
    }
    prev = tau;
    while (next_event < traj.events.size() &&
           traj.events[next_event].t <= tau) {
      st = apply_event(st, traj.events[next_event].kind);
      ++next_event;
    }
    out.push_back(st);
  }
  return out;
}

}  // namespace epiflux

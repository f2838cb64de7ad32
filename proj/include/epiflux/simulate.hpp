#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "epiflux/model.hpp"

namespace epiflux {

enum class RecordMode { FullEventLog, SampledGrid, EndpointOnly };
enum class Truncation { Original, Truncated, Coupled };

struct SimConfig {
  ModelParams params;
  double t_end = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // realization index within an ensemble
  RecordMode record_mode = RecordMode::FullEventLog;
  double grid_dt = 0.01;  // used when record_mode == SampledGrid
  Truncation truncation = Truncation::Original;
  // Proposal budget; exceeding it signals runaway growth, not a normal run.
  std::uint64_t max_events = 10'000'000'000ULL;
};

void validate(const SimConfig& config);

struct Event {
  double t;
  EventKind kind;
  bool operator==(const Event&) const = default;
};

struct GridPoint {
  double t;
  PopulationState state;
  bool operator==(const GridPoint&) const = default;
};

struct StopTimes {
  std::optional<double> tau_n;      // first time total > 2N
  std::optional<double> tau_n_eps;  // first time |total - N| > eps*N
};

class EventBudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trajectory {
  PopulationState initial;
  std::int64_t n_scale = 0;
  double t_end = 0.0;
  std::vector<Event> events;     // populated under FullEventLog
  std::vector<GridPoint> grid;   // populated under SampledGrid
  PopulationState final_state;
  // Exact integral of the drift along the piecewise-constant path over
  // [0, t_end], accumulated in closed form while simulating.
  Eigen::Vector3d drift_integral = Eigen::Vector3d::Zero();
  StopTimes stop_times;          // tau_n filled by simulate_coupled
  std::uint64_t n_events = 0;
  std::uint64_t n_proposals = 0;          // accepted + thinned proposals
  double bound_rate_integral = 0.0;       // integral of the proposal rate
};

// Exact realization of the time-inhomogeneous chain. One exponential per
// step at the state-dependent bounding rate
//   lambda(state) = nu*T + nu*S + nu*I + nu*R + gamma*I + beta_max*S*I/T,
// channel chosen proportionally; only the infection channel is thinned,
// accepting with probability beta(t) / beta_max. Rejected proposals consume
// RNG draws but emit no event.
Trajectory simulate(const SimConfig& config, const PopulationState& initial);

// Drives the original and the truncated process from one proposal stream
// (per-channel bound = max of the two processes' rates, one shared
// acceptance uniform), so the two event logs coincide exactly until the
// total first exceeds 2N. Returns (original, truncated).
std::pair<Trajectory, Trajectory> simulate_coupled(
    const SimConfig& config, const PopulationState& initial);

// Scans a full event log for the first time the total exceeds 2N and the
// first time it leaves [N - eps*N, N + eps*N]. The initial state counts:
// a starting total already past a threshold yields time 0.
StopTimes detect_stop_times(const Trajectory& traj, double epsilon);

// Piecewise-constant left-limit sampling at t = 0, dt, 2dt, ...; the last
// point is the largest multiple of dt <= t_end. A grid time that collides
// with an event time takes the post-event state.
std::vector<GridPoint> sample_grid(const Trajectory& traj, double dt);

// States at the requested times (ascending, within [0, t_end]), same
// tie convention as sample_grid. Requires a full event log.
std::vector<PopulationState> states_at(const Trajectory& traj,
                                       std::span<const double> times);

}  // namespace epiflux

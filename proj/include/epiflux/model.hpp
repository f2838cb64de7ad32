#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace epiflux {

// Population fractions (x, y, z) = (susceptible, infective, recovered).
// Eigen's named accessors x()/y()/z() line up with the model coordinates.
using FractionState = Eigen::Vector3d;
using DriftVector = Eigen::Vector3d;
using CovMatrix = Eigen::Matrix3d;

struct ModelParams {
  double nu = 1.0;      // per-capita birth and death rate (1/year)
  double gamma = 10.0;  // recovery rate (1/year)
  double beta0 = 20.0;  // baseline transmission rate (1/year)
  double beta1 = 0.4;   // seasonal amplitude; 0 switches forcing off
  std::int64_t n_scale = 10000;  // population scale N
};

// Throws std::invalid_argument naming the offending field.
void validate(const ModelParams& params);

struct PopulationState {
  std::int64_t s = 0;
  std::int64_t i = 0;
  std::int64_t r = 0;

  std::int64_t total() const { return s + i + r; }
  bool operator==(const PopulationState&) const = default;
};

enum class EventKind {
  Birth,
  SusceptibleDeath,
  Infection,
  Recovery,
  InfectiousDeath,
  RecoveredDeath,
};

inline constexpr std::array<EventKind, 6> kAllEventKinds = {
    EventKind::Birth,           EventKind::SusceptibleDeath,
    EventKind::Infection,       EventKind::Recovery,
    EventKind::InfectiousDeath, EventKind::RecoveredDeath,
};

const char* to_string(EventKind kind);

// Thrown by apply_event when a transition would drive a count negative.
// Always a simulator bug, never a reachable model state.
class StateUnderflowError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Seasonal transmission rate beta0 * (1 + beta1 * cos(2 pi t)).
double beta_at(const ModelParams& params, double t);

// Integral of beta_at over [0, t]: beta0 * (t + beta1 * sin(2 pi t) / (2 pi)).
double beta_antiderivative(const ModelParams& params, double t);

// Upper bound beta0 * (1 + beta1) on beta_at, attained at integer t.
double beta_max(const ModelParams& params);

// Per-event transition rate of the unrestricted process.
// The infection rate at an empty population is defined as 0.
double event_rate(const ModelParams& params, const PopulationState& state,
                  double t, EventKind kind);

// Transition rate with the indicated count capped at 2 * n_scale:
// total for Birth, s for SusceptibleDeath and Infection, i for Recovery
// and InfectiousDeath, r for RecoveredDeath.
double truncated_event_rate(const ModelParams& params,
                            const PopulationState& state, double t,
                            EventKind kind);

PopulationState apply_event(const PopulationState& state, EventKind kind);

// counts / n_scale; the scale the mean-field and fluctuation limits live on.
FractionState fractions_by_scale(const PopulationState& state,
                                 std::int64_t n_scale);

// counts / total; the all-zero state maps to the zero vector.
FractionState fractions_of_total(const PopulationState& state);

}  // namespace epiflux

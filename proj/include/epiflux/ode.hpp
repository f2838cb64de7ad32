#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "epiflux/model.hpp"
#include "epiflux/simulate.hpp"

namespace epiflux {

class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mean-field vector field
//   f1 = nu*(y+z) - beta(t)*x*y/(x+y+z)
//   f2 = beta(t)*x*y/(x+y+z) - (nu+gamma)*y
//   f3 = gamma*y - nu*z
// A zero-total state returns the zero vector (absorbing convention).
DriftVector drift(const ModelParams& params, const FractionState& state,
                  double t);

struct OdeSolution {
  std::vector<double> times;
  std::vector<FractionState> states;
  double step = 0.0;
  ModelParams params;

  double t_end() const { return times.empty() ? 0.0 : times.back(); }
  // Linear interpolation between stored steps; out_of_range outside the span.
  FractionState at(double t) const;
};

// Classical fixed-step RK4; beta evaluated at the stage times. Throws
// StepSizeError if a step drives any component below -1e-9.
OdeSolution integrate(const ModelParams& params, const FractionState& initial,
                      double t_end, double h);

// Exact integral of the drift over [a, b] while the population sits at a
// fixed state: non-beta terms are linear in (b - a), the transmission term
// uses beta_antiderivative differences. No quadrature error.
Eigen::Vector3d drift_increment(const ModelParams& params,
                                const PopulationState& state, double a,
                                double b);

// Sum of drift_increment over the inter-event intervals of a full event
// log, i.e. the integral of the drift along the realized path over
// [0, t_end].
Eigen::Vector3d drift_integral_along_path(const ModelParams& params,
                                          const Trajectory& traj);

}  // namespace epiflux

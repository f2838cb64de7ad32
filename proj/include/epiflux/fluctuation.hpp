#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "epiflux/model.hpp"
#include "epiflux/ode.hpp"
#include "epiflux/simulate.hpp"

namespace epiflux {

// Infinitesimal covariance of the fraction process:
//   g11 = nu*(2x+y+z) + q    g12 = -q        g13 = 0
//   g22 = q + (nu+gamma)*y   g23 = -gamma*y  g33 = nu*z + gamma*y
// with q = beta(t)*x*y/(x+y+z). Zero-total states give the zero matrix.
CovMatrix cov_matrix(const ModelParams& params, const FractionState& state,
                     double t);

struct FluctuationSample {
  double t = 0.0;
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  std::int64_t n_scale = 0;
};

// W_N at each requested time (ascending, within [0, t_end]):
//   w = sqrt(N) * (xi_t - xi_0 - integral of the drift over [0, t])
// where xi is the counts-over-N path. Single sweep over the event log with
// the closed-form drift integral, so no quadrature error. Requires a full
// event log.
std::vector<FluctuationSample> w_of_trajectory(const Trajectory& traj,
                                               const ModelParams& params,
                                               std::span<const double> times);

struct LimitCovariance {
  std::vector<double> times;
  std::vector<CovMatrix> sigma;  // cumulative integral of G up to times[k]
  double quadrature_step = 0.0;

  double t_end() const { return times.empty() ? 0.0 : times.back(); }
  // Linear interpolation; out_of_range outside the span.
  CovMatrix at(double t) const;
};

// Sigma(t) = integral over [0, t] of G(xi_s, s) along the ODE solution,
// cumulative composite Simpson on the ODE grid. The solution must span
// [0, t_end].
LimitCovariance limit_covariance(const ModelParams& params,
                                 const OdeSolution& ode, double t_end);

// exp(-1/2 theta' Sigma(t) theta); real-valued and in (0, 1].
std::complex<double> limit_char_function(const LimitCovariance& sigma,
                                         double t,
                                         const Eigen::Vector3d& theta);

}  // namespace epiflux

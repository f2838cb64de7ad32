#include "epiflux/fluctuation.hpp"

#include <cmath>
#include <stdexcept>

#include "epiflux/ode.hpp"

namespace epiflux {

CovMatrix cov_matrix(const ModelParams& p, const FractionState& xi, double t) {
  const double x = xi[0], y = xi[1], z = xi[2];
  const double total = x + y + z;
  CovMatrix g = CovMatrix::Zero();
  if (total <= 0.0) return g;
  const double q = beta_at(p, t) * x * y / total;
  g(0, 0) = p.nu * (2.0 * x + y + z) + q;
  g(0, 1) = -q;
  g(1, 0) = -q;
  g(1, 1) = q + (p.nu + p.gamma) * y;
  g(1, 2) = -p.gamma * y;
  g(2, 1) = -p.gamma * y;
  g(2, 2) = p.nu * z + p.gamma * y;
  return g;
}

std::vector<FluctuationSample> w_of_trajectory(const Trajectory& traj,
                                               const ModelParams& params,
                                               std::span<const double> times) {
  if (traj.events.empty() && traj.n_events > 0) {
    throw std::invalid_argument("w_of_trajectory needs a full event log");
  }
  const double sqrt_n = std::sqrt(static_cast<double>(traj.n_scale));
  const FractionState xi0 = fractions_by_scale(traj.initial, traj.n_scale);

  std::vector<FluctuationSample> out;
  out.reserve(times.size());
  PopulationState st = traj.initial;
  Eigen::Vector3d drift = Eigen::Vector3d::Zero();
  double t_cur = 0.0;
  std::size_t next_event = 0;
  double prev_tau = 0.0;
  for (const double tau : times) {
    if (tau < prev_tau || tau < 0.0 || tau > traj.t_end + 1e-12) {
      throw std::out_of_range(
          "w_of_trajectory: times must be ascending within [0, t_end]");
    }
    prev_tau = tau;
    while (next_event < traj.events.size() &&
           traj.events[next_event].t <= tau) {
      const Event& e = traj.events[next_event];
      drift += drift_increment(params, st, t_cur, e.t);
      st = apply_event(st, e.kind);
      t_cur = e.t;
      ++next_event;
    }
    drift += drift_increment(params, st, t_cur, tau);
    t_cur = tau;
    const FractionState xi = fractions_by_scale(st, traj.n_scale);
    FluctuationSample sample;
    sample.t = tau;
    sample.w = sqrt_n * (xi - xi0 - drift);
    sample.n_scale = traj.n_scale;
    out.push_back(sample);
  }
  return out;
}

namespace {

// Weights integrating the quadratic through (u0,f0),(u1,f1),(u2,f2)
// over [0, b], with u measured from the interval's left endpoint.
void quad_weights(double u0, double u1, double u2, double b, double* w) {
  const double us[3] = {u0, u1, u2};
  for (int j = 0; j < 3; ++j) {
    const double p = us[(j + 1) % 3];
    const double q = us[(j + 2) % 3];
    const double denom = (us[j] - p) * (us[j] - q);
    const double integral =
        b * b * b / 3.0 - (p + q) * b * b / 2.0 + p * q * b;
    w[j] = integral / denom;
  }
}

}  // namespace

CovMatrix LimitCovariance::at(double t) const {
  if (times.empty()) throw std::out_of_range("empty covariance table");
  const double lo = times.front(), hi = times.back();
  if (t < lo - 1e-12 || t > hi + 1e-12) {
    throw std::out_of_range("time outside the covariance table");
  }
  if (t <= lo) return sigma.front();
  if (t >= hi) return sigma.back();
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const auto k = static_cast<std::size_t>(it - times.begin());
  if (times[k] == t) return sigma[k];
  const double t1 = times[k - 1], t2 = times[k];
  const double a = (t - t1) / (t2 - t1);
  return sigma[k - 1] * (1.0 - a) + sigma[k] * a;
}

LimitCovariance limit_covariance(const ModelParams& params,
                                 const OdeSolution& ode, double t_end) {
  if (ode.times.size() < 2) {
    throw std::invalid_argument("mean-field path has fewer than two points");
  }
  if (!(t_end > 0.0) || t_end > ode.t_end() + 1e-12) {
    throw std::invalid_argument("t_end must lie inside the mean-field path");
  }

  LimitCovariance out;
  out.quadrature_step = ode.step;
  std::vector<FractionState> xs;
  for (std::size_t k = 0; k < ode.times.size(); ++k) {
    if (ode.times[k] > t_end + 1e-12) break;
    out.times.push_back(ode.times[k]);
    xs.push_back(ode.states[k]);
  }
  if (out.times.back() < t_end - 1e-12) {
    out.times.push_back(t_end);
    xs.push_back(ode.at(t_end));
  }

  const std::size_t n_pts = out.times.size();
  std::vector<CovMatrix> g(n_pts);
  for (std::size_t k = 0; k < n_pts; ++k) {
    g[k] = cov_matrix(params, xs[k], out.times[k]);
  }

  out.sigma.resize(n_pts);
  out.sigma[0] = CovMatrix::Zero();
  for (std::size_t k = 1; k < n_pts; ++k) {
    const double a = out.times[k - 1];
    const double b = out.times[k];
    CovMatrix inc;
    if (n_pts == 2) {
      inc = 0.5 * (b - a) * (g[0] + g[1]);
    } else {
      // Quadratic through three neighbouring grid points, integrated
      // over this one interval only; O(h^4) accumulated error.
      const std::size_t s0 = k + 1 < n_pts ? k - 1 : k - 2;
      double w[3];
      quad_weights(out.times[s0] - a, out.times[s0 + 1] - a,
                   out.times[s0 + 2] - a, b - a, w);
      inc = w[0] * g[s0] + w[1] * g[s0 + 1] + w[2] * g[s0 + 2];
    }
    out.sigma[k] = out.sigma[k - 1] + inc;
  }
  return out;
}

std::complex<double> limit_char_function(const LimitCovariance& cov, double t,
                                         const Eigen::Vector3d& theta) {
  const CovMatrix sig = cov.at(t);
  const double quad = theta.dot(sig * theta);
  return {std::exp(-0.5 * quad), 0.0};
}

}  // namespace epiflux

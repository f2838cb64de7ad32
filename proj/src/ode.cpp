#include "epiflux/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epiflux {

DriftVector drift(const ModelParams& p, const FractionState& f, double t) {
  const double total = f.x() + f.y() + f.z();
  if (total <= 0.0) return DriftVector::Zero();
  const double q = beta_at(p, t) * f.x() * f.y() / total;
  return {p.nu * (f.y() + f.z()) - q, q - (p.nu + p.gamma) * f.y(),
          p.gamma * f.y() - p.nu * f.z()};
}

FractionState OdeSolution::at(double t) const {
  if (times.empty() || t < times.front() - 1e-12 || t > times.back() + 1e-12) {
    throw std::out_of_range("OdeSolution::at: t outside the solution span");
  }
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const auto hi = static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(it - times.begin(),
                               static_cast<std::ptrdiff_t>(times.size() - 1)));
  if (hi == 0) return states.front();
  const std::size_t lo = hi - 1;
  const double span = times[hi] - times[lo];
  if (span <= 0.0) return states[hi];
  const double u = std::clamp((t - times[lo]) / span, 0.0, 1.0);
  return states[lo] + u * (states[hi] - states[lo]);
}

OdeSolution integrate(const ModelParams& p, const FractionState& initial,
                      double t_end, double h) {
  validate(p);
  if (!(h > 0.0)) throw std::invalid_argument("h must be > 0");
  if (!(t_end >= h)) throw std::invalid_argument("t_end must be >= h");
  if (initial.minCoeff() < 0.0) {
    throw std::invalid_argument("initial state must be nonnegative");
  }

  OdeSolution sol;
  sol.step = h;
  sol.params = p;
  const auto n_full = static_cast<std::int64_t>(std::floor(t_end / h + 1e-9));
  sol.times.reserve(static_cast<std::size_t>(n_full) + 2);
  sol.states.reserve(static_cast<std::size_t>(n_full) + 2);

  FractionState y = initial;
  double t = 0.0;
  sol.times.push_back(t);
  sol.states.push_back(y);

  const auto step_to = [&](double dt, double t0) {
    const DriftVector k1 = drift(p, y, t0);
    const DriftVector k2 = drift(p, y + 0.5 * dt * k1, t0 + 0.5 * dt);
    const DriftVector k3 = drift(p, y + 0.5 * dt * k2, t0 + 0.5 * dt);
    const DriftVector k4 = drift(p, y + dt * k3, t0 + dt);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (y.minCoeff() < -1e-9) {
      throw StepSizeError("integrate: component below -1e-9 near t = " +
                          std::to_string(t0) + "; reduce the step size");
    }
  };

  for (std::int64_t k = 1; k <= n_full; ++k) {
    const double t_next = static_cast<double>(k) * h;
    step_to(t_next - t, t);
    t = t_next;
    sol.times.push_back(t);
    sol.states.push_back(y);
  }
  if (t_end - t > 1e-12 * std::max(1.0, t_end)) {
    step_to(t_end - t, t);
    t = t_end;
    sol.times.push_back(t);
    sol.states.push_back(y);
  }
  return sol;
}

Eigen::Vector3d drift_increment(const ModelParams& p,
                                const PopulationState& st, double a,
                                double b) {
  if (b <= a) return Eigen::Vector3d::Zero();
  const std::int64_t total = st.total();
  if (total == 0) return Eigen::Vector3d::Zero();
  const auto n = static_cast<double>(p.n_scale);
  const double y = static_cast<double>(st.i) / n;
  const double z = static_cast<double>(st.r) / n;
  // x*y / (x+y+z) in fraction coordinates equals S*I / (N * T).
  const double xy_over_total = static_cast<double>(st.s) *
                               static_cast<double>(st.i) /
                               (n * static_cast<double>(total));
  const double dt = b - a;
  const double d_beta = beta_antiderivative(p, b) - beta_antiderivative(p, a);
  const double transmission = d_beta * xy_over_total;
  return {p.nu * (y + z) * dt - transmission,
          transmission - (p.nu + p.gamma) * y * dt,
          p.gamma * y * dt - p.nu * z * dt};
}

Eigen::Vector3d drift_integral_along_path(const ModelParams& p,
                                          const Trajectory& traj) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  PopulationState st = traj.initial;
  double t = 0.0;
  for (const Event& e : traj.events) {
    acc += drift_increment(p, st, t, e.t);
    st = apply_event(st, e.kind);
    t = e.t;
  }
  acc += drift_increment(p, st, t, traj.t_end);
  return acc;
}

}  // namespace epiflux

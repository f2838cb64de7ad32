#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epiflux/ode.hpp"
#include "epiflux/rng.hpp"
#include "oracles.hpp"

using namespace epiflux;

namespace {

ModelParams figure_params() {
  ModelParams p;
  p.nu = 1.0;
  p.gamma = 10.0;
  p.beta0 = 20.0;
  p.beta1 = 0.4;
  p.n_scale = 1'000'000;
  return p;
}

// Root of log(x / x0) = r0 * (x - 1) below x0, by bisection.
double final_size_root(double r0, double x0) {
  const auto g = [&](double x) { return std::log(x / x0) - r0 * (x - 1.0); };
  double lo = 1e-6;
  double hi = x0;
  REQUIRE(g(lo) < 0.0);
  REQUIRE(g(hi) > 0.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("vector field matches hand-evaluated points") {
  const ModelParams p = figure_params();
  CHECK(drift(p, {1.0, 0.0, 0.0}, 0.0).norm() == 0.0);
  CHECK(drift(p, {0.0, 0.0, 0.0}, 0.3).norm() == 0.0);

  const DriftVector f = drift(p, {0.92, 0.08, 0.0}, 0.0);
  CHECK(f[0] == doctest::Approx(-1.9808).epsilon(1e-13));
  CHECK(f[1] == doctest::Approx(1.1808).epsilon(1e-13));
  CHECK(f[2] == doctest::Approx(0.8).epsilon(1e-13));
}

TEST_CASE("vector field conserves total mass pointwise") {
  const ModelParams p = figure_params();
  RngStream rng(21, 0);
  for (int k = 0; k < 10'000; ++k) {
    const FractionState f{rng.uniform(), rng.uniform(), rng.uniform()};
    const double t = 3.0 * rng.uniform();
    CHECK(std::abs(drift(p, f, t).sum()) <= 1e-12);
  }
}

TEST_CASE("short steps reproduce the vector field") {
  const ModelParams p = figure_params();
  const FractionState u0{0.92, 0.08, 0.0};
  const double h = 1e-6;
  const OdeSolution sol = integrate(p, u0, h, h);
  const DriftVector fd = (sol.states.back() - u0) / h;
  const DriftVector f = drift(p, u0, 0.0);
  CHECK((fd - f).norm() <= 1e-4 * std::max(1.0, f.norm()));
}

TEST_CASE("the all-susceptible state is a fixed point") {
  const ModelParams p = figure_params();
  const OdeSolution sol = integrate(p, {1.0, 0.0, 0.0}, 2.0, 1e-3);
  for (const FractionState& f : sol.states) {
    CHECK(f[0] == 1.0);
    CHECK(f[1] == 0.0);
    CHECK(f[2] == 0.0);
  }
}

TEST_CASE("long runs conserve mass and stay nonnegative") {
  const ModelParams p = figure_params();
  const OdeSolution sol = integrate(p, {0.92, 0.08, 0.0}, 10.0, 1e-3);
  REQUIRE(sol.times.size() == 10'001);
  for (const FractionState& f : sol.states) {
    CHECK(std::abs(f.sum() - 1.0) <= 1e-9);
    CHECK(f.minCoeff() >= -1e-9);
  }
}

TEST_CASE("halving the step shrinks the error sixteenfold") {
  const ModelParams p = figure_params();
  const FractionState u0{0.92, 0.08, 0.0};
  const FractionState a = integrate(p, u0, 1.0, 0.004).states.back();
  const FractionState b = integrate(p, u0, 1.0, 0.002).states.back();
  const FractionState c = integrate(p, u0, 1.0, 0.001).states.back();
  const double ratio =
      (a - b).lpNorm<Eigen::Infinity>() / (b - c).lpNorm<Eigen::Infinity>();
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("without demography the epidemic obeys the final-size law") {
  ModelParams p;
  p.nu = 0.0;
  p.gamma = 10.0;
  p.beta0 = 20.0;
  p.beta1 = 0.0;
  p.n_scale = 1'000'000;
  const double r0 = p.beta0 / p.gamma;
  const double x0 = 0.92;
  const OdeSolution sol = integrate(p, {x0, 0.08, 0.0}, 20.0, 1e-3);

  // dx/dz = -r0 * x makes log(x/x0) + r0*(1 - x - y) a path invariant.
  for (std::size_t k = 0; k < sol.states.size(); k += 50) {
    const FractionState& f = sol.states[k];
    const double invariant =
        std::log(f[0] / x0) + r0 * (1.0 - f[0] - f[1]);
    CHECK(std::abs(invariant) <= 1e-5);
  }

  const FractionState fin = sol.states.back();
  CHECK(fin[1] <= 1e-12);  // infection has burned out by t = 20
  CHECK(std::abs(std::log(fin[0] / x0) - r0 * (fin[0] - 1.0)) <= 1e-6);
  CHECK(std::abs(fin[0] - final_size_root(r0, x0)) <= 2e-6);
}

TEST_CASE("a wildly oversized step is reported, not silently kept") {
  ModelParams p;
  p.nu = 0.0;
  p.gamma = 0.0;
  p.beta0 = 20.0;
  p.beta1 = 0.0;
  p.n_scale = 1'000;
  CHECK_THROWS_AS(integrate(p, {0.01, 0.99, 0.0}, 1.0, 0.5), StepSizeError);
  CHECK_NOTHROW(integrate(p, {0.01, 0.99, 0.0}, 1.0, 1e-3));
}

TEST_CASE("integration rejects malformed arguments") {
  const ModelParams p = figure_params();
  CHECK_THROWS_AS(integrate(p, {0.92, 0.08, 0.0}, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate(p, {0.92, 0.08, 0.0}, 1.0, -0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate(p, {0.92, 0.08, 0.0}, 1e-4, 1e-3),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate(p, {-0.1, 0.9, 0.0}, 1.0, 1e-3),
                  std::invalid_argument);
  ModelParams bad = p;
  bad.beta1 = 1.5;
  CHECK_THROWS_AS(integrate(bad, {0.92, 0.08, 0.0}, 1.0, 1e-3),
                  std::invalid_argument);
}

TEST_CASE("solution lookup interpolates and guards its span") {
  const ModelParams p = figure_params();
  const OdeSolution sol = integrate(p, {0.92, 0.08, 0.0}, 1.0, 0.01);
  CHECK((sol.at(0.0) - sol.states.front()).norm() <= 1e-14);
  CHECK((sol.at(1.0) - sol.states.back()).norm() <= 1e-14);
  CHECK((sol.at(0.25) - sol.states[25]).norm() <= 1e-14);
  const FractionState mid = 0.5 * (sol.states[25] + sol.states[26]);
  CHECK((sol.at(0.255) - mid).norm() <= 1e-12);
  CHECK_THROWS_AS(sol.at(-0.1), std::out_of_range);
  CHECK_THROWS_AS(sol.at(1.1), std::out_of_range);
  CHECK(sol.t_end() == 1.0);
}

TEST_CASE("drift increments at a frozen state have a closed form") {
  ModelParams p = figure_params();
  p.n_scale = 10;
  const PopulationState st{5, 3, 2};

  const Eigen::Vector3d inc = drift_increment(p, st, 0.0, 1.0);
  CHECK(inc[1] == doctest::Approx(-0.3).epsilon(1e-12));

  // cross-check every component against adaptive quadrature of the drift
  const FractionState f = fractions_by_scale(st, p.n_scale);
  for (int c = 0; c < 3; ++c) {
    const double byquad = oracles::quadrature(
        [&](double t) { return drift(p, f, t)[c]; }, 0.0, 1.0, 1e-12);
    CHECK(std::abs(inc[c] - byquad) <= 1e-9);
  }

  // additivity over adjacent spans
  const Eigen::Vector3d whole = drift_increment(p, st, 0.2, 1.7);
  const Eigen::Vector3d parts =
      drift_increment(p, st, 0.2, 0.9) + drift_increment(p, st, 0.9, 1.7);
  CHECK((whole - parts).lpNorm<Eigen::Infinity>() <= 1e-12);

  CHECK(drift_increment(p, st, 1.0, 1.0).norm() == 0.0);
  CHECK(drift_increment(p, {0, 0, 0}, 0.0, 1.0).norm() == 0.0);
}

TEST_CASE("the path integral of an eventless log is one frozen increment") {
  ModelParams p = figure_params();
  p.n_scale = 10;
  Trajectory traj;
  traj.initial = {5, 3, 2};
  traj.n_scale = p.n_scale;
  traj.t_end = 1.5;
  const Eigen::Vector3d got = drift_integral_along_path(p, traj);
  const Eigen::Vector3d want = drift_increment(p, traj.initial, 0.0, 1.5);
  CHECK((got - want).norm() == 0.0);
}

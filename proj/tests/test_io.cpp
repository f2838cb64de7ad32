#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "epiflux/io.hpp"
#include "epiflux/rng.hpp"
#include "epiflux/simulate.hpp"

using namespace epiflux;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string line;
  std::istringstream is(text);
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

TEST_CASE("doubles survive a text round trip exactly") {
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");

  RngStream rng(71, 0);
  for (int k = 0; k < 20'000; ++k) {
    double v = std::exp(40.0 * (rng.uniform() - 0.5));
    if (rng.uniform() < 0.5) v = -v;
    const std::string text = format_double(v);
    CHECK(std::stod(text) == v);
    CHECK(text.find(',') == std::string::npos);
  }
  CHECK(std::stod(format_double(1e-300)) == 1e-300);
  CHECK(std::stod(format_double(1e300)) == 1e300);
}

TEST_CASE("event logs print post-event states") {
  Trajectory traj;
  traj.initial = {1, 0, 0};
  traj.n_scale = 1;
  traj.t_end = 1.0;
  traj.events = {{0.25, EventKind::Birth}, {0.5, EventKind::Infection}};
  traj.n_events = 2;
  traj.final_state = {1, 1, 0};

  std::ostringstream os;
  write_event_csv(os, traj);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "t,kind,s,i,r");
  CHECK(lines[1] == "0.25,Birth,2,0,0");
  CHECK(lines[2] == "0.5,Infection,1,1,0");
  CHECK(os.str().find('\r') == std::string::npos);
  CHECK(os.str().back() == '\n');
}

TEST_CASE("grid files carry both counts and normalized fractions") {
  const std::vector<GridPoint> grid{{0.0, {2, 1, 1}}, {0.5, {2, 2, 0}}};
  std::ostringstream os;
  write_grid_csv(os, grid);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "t,s,i,r,x,y,z");
  CHECK(lines[1] == "0,2,1,1,0.5,0.25,0.25");
  CHECK(lines[2] == "0.5,2,2,0,0.5,0.5,0");
}

TEST_CASE("mean-field files print one row per step") {
  OdeSolution ode;
  ode.times = {0.0, 0.5};
  ode.states = {{1.0, 0.0, 0.0}, {0.5, 0.25, 0.25}};
  std::ostringstream os;
  write_ode_csv(os, ode);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "t,x,y,z");
  CHECK(lines[1] == "0,1,0,0");
  CHECK(lines[2] == "0.5,0.5,0.25,0.25");
}

TEST_CASE("covariance files flatten the upper triangle") {
  LimitCovariance sigma;
  sigma.times = {0.0, 1.0};
  CovMatrix m = CovMatrix::Zero();
  m(0, 0) = 1.5;
  m(0, 1) = -0.5;
  m(1, 1) = 2.0;
  m(1, 2) = 0.25;
  m(2, 2) = 4.0;
  m(1, 0) = m(0, 1);
  m(2, 1) = m(1, 2);
  sigma.sigma = {CovMatrix::Zero(), m};
  std::ostringstream os;
  write_sigma_csv(os, sigma);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "t,s11,s12,s13,s22,s23,s33");
  CHECK(lines[1] == "0,0,0,0,0,0,0");
  CHECK(lines[2] == "1,1.5,-0.5,0,2,0.25,4");
}

TEST_CASE("fluctuation samples print per run and observation time") {
  RunSummary run;
  run.run_index = 3;
  run.n_scale = 100;
  FluctuationSample s;
  s.t = 1.0;
  s.w = {0.5, -0.25, 0.0};
  s.n_scale = 100;
  run.w = {s, s};
  run.w[1].t = 2.0;
  const std::vector<RunSummary> runs{run};
  std::ostringstream os;
  write_w_samples_csv(os, runs);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "run_index,t,w1,w2,w3");
  CHECK(lines[1] == "3,1,0.5,-0.25,0");
  CHECK(lines[2] == "3,2,0.5,-0.25,0");
}

TEST_CASE("deviation and scaling files are plain two-column tables") {
  const std::vector<double> per_run{0.25, 0.5};
  std::ostringstream os;
  write_deviation_csv(os, per_run);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "run_index,sup_deviation");
  CHECK(lines[1] == "0,0.25");
  CHECK(lines[2] == "1,0.5");

  ScalingPoint pt;
  pt.n = 100;
  pt.sigma_i = 0.25;
  pt.f_i = 0.5;
  pt.ratio = 0.5;
  const std::vector<ScalingPoint> points{pt};
  std::ostringstream os2;
  write_scaling_csv(os2, points);
  const auto lines2 = lines_of(os2.str());
  REQUIRE(lines2.size() == 2);
  CHECK(lines2[0] == "n,sigma_i,f_i,ratio");
  CHECK(lines2[1] == "100,0.25,0.5,0.5");
}

TEST_CASE("histogram files hold consistent densities") {
  NormalityReport rep;
  rep.component = 2;
  rep.n = 100;
  rep.fitted_mean = 0.0;
  rep.fitted_std = 1.0;
  rep.theory_var = 1.0;
  rep.histogram.edges = {0.0, 1.0, 2.0};
  rep.histogram.counts = {30, 70};

  std::ostringstream os;
  write_histogram_csv(os, rep);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] ==
        "bin_left,bin_right,count,empirical_density,fitted_density,"
        "theory_density");
  const auto row = fields_of(lines[1]);
  REQUIRE(row.size() == 6);
  CHECK(std::stod(row[0]) == 0.0);
  CHECK(std::stod(row[1]) == 1.0);
  CHECK(row[2] == "30");
  CHECK(std::stod(row[3]) == doctest::Approx(0.3).epsilon(1e-15));
  const double pdf_half = std::exp(-0.125) / std::sqrt(2.0 * M_PI);
  CHECK(std::stod(row[4]) == doctest::Approx(pdf_half).epsilon(1e-14));
  CHECK(std::stod(row[5]) == doctest::Approx(pdf_half).epsilon(1e-14));
}

TEST_CASE("a simulated event log round-trips through its csv") {
  SimConfig cfg;
  cfg.params.nu = 1.0;
  cfg.params.gamma = 10.0;
  cfg.params.beta0 = 20.0;
  cfg.params.beta1 = 0.4;
  cfg.params.n_scale = 50;
  cfg.t_end = 0.3;
  cfg.seed = 9;
  const Trajectory traj = simulate(cfg, {46, 4, 0});
  REQUIRE(traj.n_events > 10);

  std::ostringstream os;
  write_event_csv(os, traj);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == traj.n_events + 1);

  double prev_t = 0.0;
  std::int64_t prev_total = traj.initial.total();
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto row = fields_of(lines[k]);
    REQUIRE(row.size() == 5);
    const double t = std::stod(row[0]);
    CHECK(t >= prev_t);
    CHECK(t <= traj.t_end);
    prev_t = t;
    const std::int64_t s = std::stoll(row[2]);
    const std::int64_t i = std::stoll(row[3]);
    const std::int64_t r = std::stoll(row[4]);
    CHECK(s >= 0);
    CHECK(i >= 0);
    CHECK(r >= 0);
    const std::int64_t total = s + i + r;
    CHECK(std::abs(total - prev_total) <= 1);
    prev_total = total;
  }
  const auto last = fields_of(lines.back());
  CHECK(std::stoll(last[2]) == traj.final_state.s);
  CHECK(std::stoll(last[3]) == traj.final_state.i);
  CHECK(std::stoll(last[4]) == traj.final_state.r);

  // identical inputs give byte-identical files
  std::ostringstream os2;
  write_event_csv(os2, traj);
  CHECK(os.str() == os2.str());
}

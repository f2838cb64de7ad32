#pragma once

#include <ostream>
#include <span>
#include <string>

#include "epiflux/fluctuation.hpp"
#include "epiflux/ode.hpp"
#include "epiflux/simulate.hpp"
#include "epiflux/stats.hpp"

namespace epiflux {

// All CSV output is UTF-8 with '\n' terminators, '.' decimal separator and
// floating-point values at 17 significant digits (locale-independent), so
// identical inputs produce byte-identical files.

// Shortest 17-significant-digit form, round-trip exact.
std::string format_double(double v);

// t,kind,s,i,r with the state after each event (replayed from the log).
void write_event_csv(std::ostream& os, const Trajectory& traj);

// t,s,i,r,x,y,z where x,y,z are fractions of the current total.
void write_grid_csv(std::ostream& os, std::span<const GridPoint> grid);

// t,x,y,z
void write_ode_csv(std::ostream& os, const OdeSolution& ode);

// t,s11,s12,s13,s22,s23,s33
void write_sigma_csv(std::ostream& os, const LimitCovariance& sigma);

// run_index,t,w1,w2,w3 (one row per run and observation time)
void write_w_samples_csv(std::ostream& os, std::span<const RunSummary> runs);

// run_index,sup_deviation
void write_deviation_csv(std::ostream& os, std::span<const double> per_run);

// n,sigma_i,f_i,ratio
void write_scaling_csv(std::ostream& os, std::span<const ScalingPoint> points);

// bin_left,bin_right,count,empirical_density,fitted_density,theory_density
void write_histogram_csv(std::ostream& os, const NormalityReport& report);

}  // namespace epiflux

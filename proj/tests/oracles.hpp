#pragma once

// Independent reference implementations used only by tests. Nothing here
// shares code with the library's simulation or quadrature paths: rates,
// forcing and integrals are written out by hand so that agreement between
// the two is evidence, not tautology.

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "epiflux/rng.hpp"

namespace oracles {

// Recursive adaptive Simpson quadrature to absolute tolerance tol.
double quadrature(const std::function<double(double)>& f, double a, double b,
                  double tol);

struct SirParams {
  double nu;
  double gamma;
  double beta0;
  double beta1;
};

struct Counts {
  std::int64_t s, i, r;
  bool operator<(const Counts& o) const;
  bool operator==(const Counts& o) const = default;
};

// Direct Gillespie simulation with the exact total rate and no thinning.
// Only valid for beta1 == 0 (time-homogeneous rates). Returns the state at
// t_end.
Counts gillespie_homogeneous(const SirParams& p, Counts initial, double t_end,
                             epiflux::RngStream& rng);

// Transition probabilities of the nu == 0 chain (total conserved) by
// explicit Euler steps of size h on the master equation. Returns the law of
// the state at t_end started from `initial`.
std::map<Counts, double> master_equation_law(const SirParams& p,
                                             Counts initial, double t_end,
                                             double h);

// Total-population-only birth-death chain (both rates nu * T). Returns true
// if |T - n| exceeds eps * n at any time in [0, t_end].
bool total_chain_band_exit(double nu, std::int64_t n, double eps, double t_end,
                           epiflux::RngStream& rng);

// Upper regularized incomplete gamma Q(a, x).
double gammq(double a, double x);

// Two-sample chi-square p-value over integer-valued samples. Bins are
// merged greedily until every pooled bin holds at least 5 observations;
// degrees of freedom = bins - 1.
double chi2_two_sample_p(const std::vector<std::int64_t>& xs,
                         const std::vector<std::int64_t>& ys);

}  // namespace oracles

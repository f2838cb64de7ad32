#include "epiflux/io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace epiflux {

std::string format_double(double v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

void write_event_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,kind,s,i,r\n";
  PopulationState st = traj.initial;
  for (const Event& e : traj.events) {
    st = apply_event(st, e.kind);
    os << format_double(e.t) << ',' << to_string(e.kind) << ',' << st.s << ','
       << st.i << ',' << st.r << '\n';
  }
}

void write_grid_csv(std::ostream& os, std::span<const GridPoint> grid) {
  os << "t,s,i,r,x,y,z\n";
  for (const GridPoint& gp : grid) {
    const FractionState xi = fractions_of_total(gp.state);
    os << format_double(gp.t) << ',' << gp.state.s << ',' << gp.state.i << ','
       << gp.state.r << ',' << format_double(xi[0]) << ','
       << format_double(xi[1]) << ',' << format_double(xi[2]) << '\n';
  }
}

void write_ode_csv(std::ostream& os, const OdeSolution& ode) {
  os << "t,x,y,z\n";
  for (std::size_t k = 0; k < ode.times.size(); ++k) {
    const FractionState& x = ode.states[k];
    os << format_double(ode.times[k]) << ',' << format_double(x[0]) << ','
       << format_double(x[1]) << ',' << format_double(x[2]) << '\n';
  }
}

void write_sigma_csv(std::ostream& os, const LimitCovariance& sigma) {
  os << "t,s11,s12,s13,s22,s23,s33\n";
  for (std::size_t k = 0; k < sigma.times.size(); ++k) {
    const CovMatrix& s = sigma.sigma[k];
    os << format_double(sigma.times[k]) << ',' << format_double(s(0, 0))
       << ',' << format_double(s(0, 1)) << ',' << format_double(s(0, 2))
       << ',' << format_double(s(1, 1)) << ',' << format_double(s(1, 2))
       << ',' << format_double(s(2, 2)) << '\n';
  }
}

void write_w_samples_csv(std::ostream& os, std::span<const RunSummary> runs) {
  os << "run_index,t,w1,w2,w3\n";
  for (const RunSummary& run : runs) {
    for (const FluctuationSample& s : run.w) {
      os << run.run_index << ',' << format_double(s.t) << ','
         << format_double(s.w[0]) << ',' << format_double(s.w[1]) << ','
         << format_double(s.w[2]) << '\n';
    }
  }
}

void write_deviation_csv(std::ostream& os, std::span<const double> per_run) {
  os << "run_index,sup_deviation\n";
  for (std::size_t k = 0; k < per_run.size(); ++k) {
    os << k << ',' << format_double(per_run[k]) << '\n';
  }
}

void write_scaling_csv(std::ostream& os,
                       std::span<const ScalingPoint> points) {
  os << "n,sigma_i,f_i,ratio\n";
  for (const ScalingPoint& p : points) {
    os << p.n << ',' << format_double(p.sigma_i) << ','
       << format_double(p.f_i) << ',' << format_double(p.ratio) << '\n';
  }
}

namespace {

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

}  // namespace

void write_histogram_csv(std::ostream& os, const NormalityReport& report) {
  os << "bin_left,bin_right,count,empirical_density,fitted_density,"
        "theory_density\n";
  const Histogram& h = report.histogram;
  const auto n = static_cast<double>(report.n);
  const double theory_sd = std::sqrt(report.theory_var);
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    const double left = h.edges[k];
    const double right = h.edges[k + 1];
    const double width = right - left;
    const double center = 0.5 * (left + right);
    const double emp =
        width > 0.0 ? static_cast<double>(h.counts[k]) / (n * width) : 0.0;
    os << format_double(left) << ',' << format_double(right) << ','
       << h.counts[k] << ',' << format_double(emp) << ','
       << format_double(normal_pdf(center, report.fitted_mean,
                                   report.fitted_std))
       << ',' << format_double(normal_pdf(center, 0.0, theory_sd)) << '\n';
  }
}

}  // namespace epiflux

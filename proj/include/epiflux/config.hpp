#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "epiflux/model.hpp"

namespace epiflux {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StudyKind { Trajectory, Ode, Ensemble, Fluctuation, Scaling };

const char* to_string(StudyKind kind);
StudyKind study_kind_from_string(const std::string& name);

// Fully resolved study description. Every field has a documented default;
// the resolved values (defaults included) are echoed into metadata.json.
struct RunConfig {
  StudyKind study = StudyKind::Trajectory;
  ModelParams params;           // keys beta0, beta1, gamma, nu, n
  double s0_frac = 0.92;
  double i0_frac = 0.08;
  double r0_frac = 0.0;
  double t_end = 1.0;
  double h = 1e-3;              // ODE step
  double dt = 1e-2;             // sampling grid step
  int runs = 500;
  std::vector<std::int64_t> n_values{1000, 3162, 10000, 31623, 100000};
  std::vector<double> times{1.0};  // W observation times; parse defaults to [t_end]
  int component = 2;            // W component for normality, 1-based
  std::string process = "original";  // original | truncated | coupled
  double epsilon = 0.05;        // stop-time band half-width
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int threads = 0;              // 0 picks hardware concurrency
  bool gate = false;            // nonzero exit on statistical gate failure
};

// Strict parse: unknown keys are rejected, types and ranges are checked,
// errors name the offending key. Malformed JSON reports line/column.
RunConfig parse_config(const std::string& json_text);

// Resolved-config echo used for metadata and for round-trip tests.
std::string config_to_json(const RunConfig& config);

// Initial counts from the configured fractions by largest-remainder
// rounding, so they sum to exactly n. Ties break in (s, i, r) order.
PopulationState initial_counts(double s_frac, double i_frac, double r_frac,
                               std::int64_t n);

}  // namespace epiflux

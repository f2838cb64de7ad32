#include "epiflux/config.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace epiflux {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& message) { throw ConfigError(message); }

double take_double(const json& j, const std::string& key) {
  if (!j.is_number()) bad("\"" + key + "\" must be a number");
  return j.get<double>();
}

std::int64_t take_int(const json& j, const std::string& key) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    bad("\"" + key + "\" must be an integer");
  }
  return j.get<std::int64_t>();
}

std::uint64_t take_uint(const json& j, const std::string& key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  bad("\"" + key + "\" must be a nonnegative integer");
}

std::string take_string(const json& j, const std::string& key) {
  if (!j.is_string()) bad("\"" + key + "\" must be a string");
  return j.get<std::string>();
}

bool take_bool(const json& j, const std::string& key) {
  if (!j.is_boolean()) bad("\"" + key + "\" must be a boolean");
  return j.get<bool>();
}

}  // namespace

const char* to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::Trajectory: return "trajectory";
    case StudyKind::Ode: return "ode";
    case StudyKind::Ensemble: return "ensemble";
    case StudyKind::Fluctuation: return "fluctuation";
    case StudyKind::Scaling: return "scaling";
  }
  return "?";
}

StudyKind study_kind_from_string(const std::string& name) {
  if (name == "trajectory" || name == "simulate") return StudyKind::Trajectory;
  if (name == "ode") return StudyKind::Ode;
  if (name == "ensemble") return StudyKind::Ensemble;
  if (name == "fluctuation") return StudyKind::Fluctuation;
  if (name == "scaling") return StudyKind::Scaling;
  bad("unknown study \"" + name +
      "\"; expected simulate, ode, ensemble, fluctuation or scaling");
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) bad("config root must be a JSON object");

  RunConfig cfg;
  const bool times_given = root.contains("times");
  for (const auto& [key, value] : root.items()) {
    if (key == "study") {
      cfg.study = study_kind_from_string(take_string(value, key));
    } else if (key == "beta0") {
      cfg.params.beta0 = take_double(value, key);
    } else if (key == "beta1") {
      cfg.params.beta1 = take_double(value, key);
    } else if (key == "gamma") {
      cfg.params.gamma = take_double(value, key);
    } else if (key == "nu") {
      cfg.params.nu = take_double(value, key);
    } else if (key == "n") {
      cfg.params.n_scale = take_int(value, key);
    } else if (key == "s0_frac") {
      cfg.s0_frac = take_double(value, key);
    } else if (key == "i0_frac") {
      cfg.i0_frac = take_double(value, key);
    } else if (key == "r0_frac") {
      cfg.r0_frac = take_double(value, key);
    } else if (key == "t_end") {
      cfg.t_end = take_double(value, key);
    } else if (key == "h") {
      cfg.h = take_double(value, key);
    } else if (key == "dt") {
      cfg.dt = take_double(value, key);
    } else if (key == "runs") {
      const std::int64_t r = take_int(value, key);
      if (r < 2 || r > 100'000'000) bad("\"runs\" must lie in [2, 1e8]");
      cfg.runs = static_cast<int>(r);
    } else if (key == "n_values") {
      if (!value.is_array() || value.empty()) {
        bad("\"n_values\" must be a nonempty array of integers");
      }
      cfg.n_values.clear();
      for (const auto& item : value) {
        const std::int64_t n = take_int(item, key);
        if (n < 1) bad("\"n_values\" entries must be >= 1");
        if (!cfg.n_values.empty() && n <= cfg.n_values.back()) {
          bad("\"n_values\" must be strictly increasing");
        }
        cfg.n_values.push_back(n);
      }
    } else if (key == "times") {
      if (!value.is_array() || value.empty()) {
        bad("\"times\" must be a nonempty array of numbers");
      }
      cfg.times.clear();
      for (const auto& item : value) {
        cfg.times.push_back(take_double(item, key));
      }
    } else if (key == "component") {
      const std::int64_t c = take_int(value, key);
      if (c < 1 || c > 3) bad("\"component\" must be 1, 2 or 3");
      cfg.component = static_cast<int>(c);
    } else if (key == "process") {
      cfg.process = take_string(value, key);
      if (cfg.process != "original" && cfg.process != "truncated" &&
          cfg.process != "coupled") {
        bad("\"process\" must be original, truncated or coupled");
      }
    } else if (key == "epsilon") {
      cfg.epsilon = take_double(value, key);
    } else if (key == "seed") {
      cfg.seed = take_uint(value, key);
    } else if (key == "out") {
      cfg.out_dir = take_string(value, key);
      if (cfg.out_dir.empty()) bad("\"out\" must not be empty");
    } else if (key == "threads") {
      const std::int64_t t = take_int(value, key);
      if (t < 0 || t > 4096) bad("\"threads\" must lie in [0, 4096]");
      cfg.threads = static_cast<int>(t);
    } else if (key == "gate") {
      cfg.gate = take_bool(value, key);
    } else {
      bad("unknown key \"" + key + "\"");
    }
  }

  // The observation default tracks the horizon, so shortening t_end never
  // invalidates a config that left "times" unset.
  if (!times_given) cfg.times = {cfg.t_end};

  // Range checks shared with the library validators, reworded per key.
  if (!std::isfinite(cfg.params.beta0) || !(cfg.params.beta0 > 0.0)) {
    bad("\"beta0\" must be finite and > 0");
  }
  if (!std::isfinite(cfg.params.beta1) || cfg.params.beta1 < 0.0 ||
      cfg.params.beta1 >= 1.0) {
    bad("\"beta1\" must lie in [0, 1)");
  }
  if (!std::isfinite(cfg.params.gamma) || cfg.params.gamma < 0.0) {
    bad("\"gamma\" must be finite and >= 0");
  }
  if (!std::isfinite(cfg.params.nu) || cfg.params.nu < 0.0) {
    bad("\"nu\" must be finite and >= 0");
  }
  if (cfg.params.n_scale < 1) bad("\"n\" must be >= 1");
  for (const double f : {cfg.s0_frac, cfg.i0_frac, cfg.r0_frac}) {
    if (!std::isfinite(f) || f < 0.0) {
      bad("initial fractions must be finite and >= 0");
    }
  }
  if (std::abs(cfg.s0_frac + cfg.i0_frac + cfg.r0_frac - 1.0) > 1e-9) {
    bad("initial fractions must sum to 1");
  }
  if (!std::isfinite(cfg.t_end) || !(cfg.t_end > 0.0)) {
    bad("\"t_end\" must be finite and > 0");
  }
  if (!std::isfinite(cfg.h) || !(cfg.h > 0.0)) bad("\"h\" must be > 0");
  if (!std::isfinite(cfg.dt) || !(cfg.dt > 0.0)) bad("\"dt\" must be > 0");
  if (!std::isfinite(cfg.epsilon) || !(cfg.epsilon > 0.0) ||
      cfg.epsilon >= 1.0) {
    bad("\"epsilon\" must lie in (0, 1)");
  }
  double prev = 0.0;
  for (const double t : cfg.times) {
    if (!std::isfinite(t) || t < prev || t > cfg.t_end + 1e-12) {
      bad("\"times\" must be ascending within [0, t_end]");
    }
    prev = t;
  }
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["study"] = to_string(cfg.study);
  j["beta0"] = cfg.params.beta0;
  j["beta1"] = cfg.params.beta1;
  j["gamma"] = cfg.params.gamma;
  j["nu"] = cfg.params.nu;
  j["n"] = cfg.params.n_scale;
  j["s0_frac"] = cfg.s0_frac;
  j["i0_frac"] = cfg.i0_frac;
  j["r0_frac"] = cfg.r0_frac;
  j["t_end"] = cfg.t_end;
  j["h"] = cfg.h;
  j["dt"] = cfg.dt;
  j["runs"] = cfg.runs;
  j["n_values"] = cfg.n_values;
  j["times"] = cfg.times;
  j["component"] = cfg.component;
  j["process"] = cfg.process;
  j["epsilon"] = cfg.epsilon;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out_dir;
  j["threads"] = cfg.threads;
  j["gate"] = cfg.gate;
  return j.dump(2) + "\n";
}

PopulationState initial_counts(double s_frac, double i_frac, double r_frac,
                               std::int64_t n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const double fracs[3] = {s_frac, i_frac, r_frac};
  double sum = 0.0;
  for (const double f : fracs) {
    if (!std::isfinite(f) || f < 0.0) {
      throw std::invalid_argument("fractions must be finite and >= 0");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("fractions must sum to 1");
  }
  std::int64_t base[3];
  double remainder[3];
  std::int64_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = fracs[k] * static_cast<double>(n);
    base[k] = static_cast<std::int64_t>(std::floor(exact));
    remainder[k] = exact - std::floor(exact);
    assigned += base[k];
  }
  std::int64_t left = n - assigned;
  // Hand the leftovers to the largest remainders, ties in (s, i, r) order.
  int order[3] = {0, 1, 2};
  std::stable_sort(order, order + 3,
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int k = 0; k < 3 && left > 0; ++k, --left) ++base[order[k]];
  if (left != 0) base[order[0]] += left;  // fp corner at astronomical n
  return PopulationState{base[0], base[1], base[2]};
}

}  // namespace epiflux

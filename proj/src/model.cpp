#include "epiflux/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace epiflux {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void validate(const ModelParams& p) {
  if (!(p.nu >= 0.0) || !std::isfinite(p.nu)) {
    throw std::invalid_argument("nu must be finite and >= 0");
  }
  if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma)) {
    throw std::invalid_argument("gamma must be finite and >= 0");
  }
  if (!(p.beta0 > 0.0) || !std::isfinite(p.beta0)) {
    throw std::invalid_argument("beta0 must be finite and > 0");
  }
  if (!(p.beta1 >= 0.0 && p.beta1 < 1.0)) {
    throw std::invalid_argument("beta1 must lie in [0, 1)");
  }
  if (p.n_scale < 1) {
    throw std::invalid_argument("n_scale must be >= 1");
  }
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Birth: return "Birth";
    case EventKind::SusceptibleDeath: return "SusceptibleDeath";
    case EventKind::Infection: return "Infection";
    case EventKind::Recovery: return "Recovery";
    case EventKind::InfectiousDeath: return "InfectiousDeath";
    case EventKind::RecoveredDeath: return "RecoveredDeath";
  }
  return "?";
}

double beta_at(const ModelParams& p, double t) {
  return p.beta0 * (1.0 + p.beta1 * std::cos(kTwoPi * t));
}

double beta_antiderivative(const ModelParams& p, double t) {
  return p.beta0 * (t + p.beta1 * std::sin(kTwoPi * t) / kTwoPi);
}

double beta_max(const ModelParams& p) { return p.beta0 * (1.0 + p.beta1); }

double event_rate(const ModelParams& p, const PopulationState& st, double t,
                  EventKind kind) {
  switch (kind) {
    case EventKind::Birth:
      return p.nu * static_cast<double>(st.total());
    case EventKind::SusceptibleDeath:
      return p.nu * static_cast<double>(st.s);
    case EventKind::Infection: {
      const std::int64_t total = st.total();
      if (total == 0) return 0.0;
      return beta_at(p, t) * static_cast<double>(st.s) *
             static_cast<double>(st.i) / static_cast<double>(total);
    }
    case EventKind::Recovery:
      return p.gamma * static_cast<double>(st.i);
    case EventKind::InfectiousDeath:
      return p.nu * static_cast<double>(st.i);
    case EventKind::RecoveredDeath:
      return p.nu * static_cast<double>(st.r);
  }
  return 0.0;
}

double truncated_event_rate(const ModelParams& p, const PopulationState& st,
                            double t, EventKind kind) {
  const std::int64_t cap = 2 * p.n_scale;
  const auto capped = [cap](std::int64_t v) { return v < cap ? v : cap; };
  switch (kind) {
    case EventKind::Birth:
      return p.nu * static_cast<double>(capped(st.total()));
    case EventKind::SusceptibleDeath:
      return p.nu * static_cast<double>(capped(st.s));
    case EventKind::Infection: {
      const std::int64_t total = st.total();
      if (total == 0) return 0.0;
      return beta_at(p, t) * static_cast<double>(capped(st.s)) *
             static_cast<double>(st.i) / static_cast<double>(total);
    }
    case EventKind::Recovery:
      return p.gamma * static_cast<double>(capped(st.i));
    case EventKind::InfectiousDeath:
      return p.nu * static_cast<double>(capped(st.i));
    case EventKind::RecoveredDeath:
      return p.nu * static_cast<double>(capped(st.r));
  }
  return 0.0;
}

PopulationState apply_event(const PopulationState& st, EventKind kind) {
  PopulationState out = st;
  const auto underflow = [kind]() -> PopulationState {
    throw StateUnderflowError(std::string("apply_event: ") + to_string(kind) +
                              " from an empty compartment");
  };
  switch (kind) {
    case EventKind::Birth:
      ++out.s;
      return out;
    case EventKind::SusceptibleDeath:
      if (out.s < 1) return underflow();
      --out.s;
      return out;
    case EventKind::Infection:
      if (out.s < 1) return underflow();
      --out.s;
      ++out.i;
      return out;
    case EventKind::Recovery:
      if (out.i < 1) return underflow();
      --out.i;
      ++out.r;
      return out;
    case EventKind::InfectiousDeath:
      if (out.i < 1) return underflow();
      --out.i;
      return out;
    case EventKind::RecoveredDeath:
      if (out.r < 1) return underflow();
      --out.r;
      return out;
  }
  return out;
}

FractionState fractions_by_scale(const PopulationState& st,
                                 std::int64_t n_scale) {
  if (n_scale < 1) throw std::invalid_argument("n_scale must be >= 1");
  const auto n = static_cast<double>(n_scale);
  return {static_cast<double>(st.s) / n, static_cast<double>(st.i) / n,
          static_cast<double>(st.r) / n};
}

FractionState fractions_of_total(const PopulationState& st) {
  const std::int64_t total = st.total();
  if (total == 0) return FractionState::Zero();
  const auto td = static_cast<double>(total);
  return {static_cast<double>(st.s) / td, static_cast<double>(st.i) / td,
          static_cast<double>(st.r) / td};
}

}  // namespace epiflux

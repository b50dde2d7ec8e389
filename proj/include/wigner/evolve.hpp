#pragma once

// Generic fixed-step time loop shared by every propagator, with per-step
// norm/min/max diagnostics.

#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wigner/errors.hpp"
#include "wigner/phasespace.hpp"

namespace wigner {

struct DiagnosticsRow {
  std::size_t step = 0;
  double time = 0.0;
  double norm = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct EvolveResult {
  WignerField field;
  std::vector<DiagnosticsRow> diagnostics;  ///< row 0 is the initial state
  std::vector<std::string> warnings;
};

/// Relative norm drift above which evolve records a warning.
inline constexpr double norm_drift_warning = 1e-6;

inline DiagnosticsRow diagnose(std::size_t step, const WignerField& f) {
  return {step, f.time(), norm(f), f.min_value(), f.max_value()};
}

/// Called after every step with the step count and the current field.
using StepObserver = std::function<void(std::size_t, const WignerField&)>;

/// Advances `field` from t0 to t1 in `nsteps` equal steps. `step(f, t, dt)`
/// must return the field at t + dt. Non-finite values raise NumericalError.
template <class StepFn>
EvolveResult evolve_with(const WignerField& field, double t0, double t1, std::size_t nsteps, StepFn&& step,
                         const StepObserver& observer = {}) {
  if (nsteps < 1) throw std::invalid_argument("evolve: nsteps must be at least 1");
  if (!(t1 > t0)) throw std::invalid_argument("evolve: t1 must exceed t0");
  const double dt = (t1 - t0) / static_cast<double>(nsteps);

  EvolveResult result;
  result.field = field;
  result.field.set_time(t0);
  result.diagnostics.push_back(diagnose(0, result.field));
  const double norm0 = result.diagnostics.front().norm;
  bool warned = false;

  for (std::size_t k = 0; k < nsteps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    WignerField next = step(result.field, t, dt);
    next.set_time(t0 + static_cast<double>(k + 1) * dt);
    if (!next.all_finite()) {
      std::ostringstream msg;
      msg << "non-finite field values after step " << k + 1 << " (t = " << next.time() << ")";
      throw NumericalError(msg.str());
    }
    result.field = std::move(next);
    const auto row = diagnose(k + 1, result.field);
    result.diagnostics.push_back(row);
    const double drift = std::abs(row.norm - norm0) / std::max(std::abs(norm0), 1e-300);
    if (!warned && drift > norm_drift_warning) {
      std::ostringstream msg;
      msg << "norm drift " << drift << " exceeds " << norm_drift_warning << " at step " << k + 1;
      result.warnings.push_back(msg.str());
      warned = true;
    }
    if (observer) observer(k + 1, result.field);
  }
  return result;
}

}  // namespace wigner

#pragma once

// Semiclassical propagation on a fixed lattice: the lowest-order (LO) step
// follows classical trajectories back to their departure point and
// interpolates; the next-to-leading-order (NLO) step adds the hbar^2 term
//   -(dt hbar^2 / 24) V'''(x) d^3 f_LO / dp^3.
// Also the Hermite-series delta approximant D and the particle <-> lattice
// transcription built on it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <istream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wigner/evolve.hpp"
#include "wigner/fft.hpp"
#include "wigner/phasespace.hpp"
#include "wigner/potentials.hpp"

namespace wigner::pseudoparticle {

/// Where the force of an LO step is evaluated.
///   departure: p0 = p + V'(x - p dt / m) dt, then x0 = x - p dt / m (the
///              exact inverse of kick-then-drift, symplectic).
///   arrival:   p0 = p + V'(x) dt, x0 = x - p dt / m.
enum class ForcePoint { departure, arrival };

struct LoOptions {
  double mass = 1.0;
  InterpolationKind interpolation = InterpolationKind::bicubic;
  ForcePoint force_point = ForcePoint::departure;
};

/// f(x, p, t + dt) = f(x0, p0, t) at every lattice node.
inline WignerField step_lo(const WignerField& field, const Potential& pot, double t, double dt,
                           const LoOptions& opts = {}) {
  if (!(opts.mass > 0.0)) throw std::invalid_argument("step_lo: mass must be positive");
  const auto& g = field.grid();
  if (dt == 0.0) {
    WignerField same = field;
    same.set_time(t);
    return same;
  }
  const FieldInterpolator interp(field, opts.interpolation);
  WignerField out(g, t + dt);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    const double force_arrival = pot.grad(x, t);
    for (std::size_t j = 0; j < g.np; ++j) {
      const double p = g.p(j);
      const double x0 = x - p * dt / opts.mass;
      const double force = opts.force_point == ForcePoint::departure ? pot.grad(x0, t) : force_arrival;
      out(i, j) = interp(x0, p + force * dt);
    }
  }
  return out;
}

enum class Derivative { spectral, finite_difference };

/// Third momentum derivative of every x-row. Spectral mode multiplies by
/// (i s / hbar)^3 on the s-lattice; finite-difference mode uses the 5-point
/// stencil with zeros beyond the lattice.
inline WignerField d_p3(const WignerField& field, Derivative mode = Derivative::spectral) {
  const auto& g = field.grid();
  WignerField out(g, field.time());
  if (mode == Derivative::finite_difference) {
    const double h = g.dp();
    const double scale = 1.0 / (2.0 * h * h * h);
    const auto np = static_cast<long long>(g.np);
    for (std::size_t i = 0; i < g.nx; ++i) {
      auto at = [&](long long j) { return (j < 0 || j >= np) ? 0.0 : field(i, static_cast<std::size_t>(j)); };
      for (long long j = 0; j < np; ++j)
        out(i, static_cast<std::size_t>(j)) = scale * (at(j + 2) - 2.0 * at(j + 1) + 2.0 * at(j - 1) - at(j - 2));
    }
    return out;
  }
  std::vector<std::complex<double>> data(field.values().begin(), field.values().end());
  const std::size_t shape[2] = {g.nx, g.np};
  fft::transform_axis(data, shape, 1, fft::Direction::forward);
  std::vector<std::complex<double>> mult(g.np);
  for (std::size_t k = 0; k < g.np; ++k) {
    const double s = fft::angular_frequency(k, g.np, g.dp());  // s / hbar
    mult[k] = fft::is_nyquist(k, g.np) ? 0.0 : std::complex<double>(0.0, -s * s * s);
  }
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t k = 0; k < g.np; ++k) data[i * g.np + k] *= mult[k];
  fft::transform_axis(data, shape, 1, fft::Direction::backward);
  for (std::size_t n = 0; n < data.size(); ++n) out.values()[n] = data[n].real();
  return out;
}

/// additive:      f_LO - (dt hbar^2 / 24) V''' d^3 f_LO / dp^3.
/// exponentiated: the same generator applied as the unitary s-space phase
///                exp(i V''' s^3 dt / 24 hbar); identical at first order in dt
///                but bounded for any dt.
enum class NloForm { exponentiated, additive };

struct NloOptions {
  NloForm form = NloForm::exponentiated;
  Derivative derivative = Derivative::spectral;  ///< additive form only
};

inline WignerField nlo_correction(const WignerField& field_lo, const Potential& pot, double t, double dt,
                                  int order = 1, const NloOptions& opts = {}) {
  if (order != 1) throw std::invalid_argument("nlo_correction: only order 1 is implemented");
  const auto& g = field_lo.grid();
  if (pot.is_at_most_quadratic() || dt == 0.0) return field_lo;

  if (opts.form == NloForm::additive) {
    const WignerField d3f = d_p3(field_lo, opts.derivative);
    WignerField out = field_lo;
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double c = -dt * hbar * hbar / 24.0 * pot.d3(g.x(i), t);
      for (std::size_t j = 0; j < g.np; ++j) out(i, j) += c * d3f(i, j);
    }
    return out;
  }

  std::vector<std::complex<double>> data(field_lo.values().begin(), field_lo.values().end());
  const std::size_t shape[2] = {g.nx, g.np};
  fft::transform_axis(data, shape, 1, fft::Direction::forward);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double c = pot.d3(g.x(i), t) * dt / (24.0 * hbar);
    for (std::size_t k = 0; k < g.np; ++k) {
      const double s = hbar * fft::angular_frequency(k, g.np, g.dp());
      const double theta = c * s * s * s;
      data[i * g.np + k] *= fft::is_nyquist(k, g.np) ? std::complex<double>(std::cos(theta), 0.0)
                                                     : std::polar(1.0, theta);
    }
  }
  fft::transform_axis(data, shape, 1, fft::Direction::backward);
  WignerField out(g, field_lo.time());
  for (std::size_t n = 0; n < data.size(); ++n) out.values()[n] = data[n].real();
  return out;
}

inline WignerField step_nlo(const WignerField& field, const Potential& pot, double t, double dt,
                            const LoOptions& lo = {}, const NloOptions& nlo = {}) {
  return nlo_correction(step_lo(field, pot, t, dt, lo), pot, t, dt, 1, nlo);
}

inline EvolveResult evolve_lo(const WignerField& field, const Potential& pot, double t0, double t1,
                              std::size_t nsteps, const LoOptions& opts = {}, const StepObserver& observer = {}) {
  return evolve_with(
      field, t0, t1, nsteps, [&](const WignerField& f, double t, double dt) { return step_lo(f, pot, t, dt, opts); },
      observer);
}

inline EvolveResult evolve_nlo(const WignerField& field, const Potential& pot, double t0, double t1,
                               std::size_t nsteps, const LoOptions& lo = {}, const NloOptions& nlo = {},
                               const StepObserver& observer = {}) {
  return evolve_with(
      field, t0, t1, nsteps,
      [&](const WignerField& f, double t, double dt) { return step_nlo(f, pot, t, dt, lo, nlo); }, observer);
}

// ---------------------------------------------------------------------------
// Hermite delta approximant

/// D(x) = A_M (alpha / sqrt(pi)) e^{-alpha^2 x^2 / 2}
///        sum_{m=0}^{M} H_2m(alpha x) (-1)^m / (4^m m!)
struct DFunctionParams {
  double alpha = 1.0;
  unsigned M = 3;
};

/// Largest supported truncation order.
inline constexpr unsigned max_dfunction_order = 40;

inline void validate(const DFunctionParams& params) {
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha))
    throw std::invalid_argument("D-function: alpha must be positive");
  if (params.M > max_dfunction_order)
    throw std::invalid_argument("D-function: M must not exceed " + std::to_string(max_dfunction_order));
}

/// A_M = [sqrt(2) sum_{m=0}^{M} (-1)^m (2m)! / (4^m (m!)^2)]^{-1}, which gives unit integral.
inline double normalization(unsigned M) {
  double term = 1.0, sum = 1.0;
  for (unsigned m = 1; m <= M; ++m) {
    term *= -static_cast<double>(2 * m) * static_cast<double>(2 * m - 1) / (4.0 * m * m);
    sum += term;
  }
  return 1.0 / (std::numbers::sqrt2 * sum);
}

inline double d_function(double x, const DFunctionParams& params) {
  validate(params);
  const double y = params.alpha * x;
  // Physicists' Hermite recurrence H_{n+1} = 2y H_n - 2n H_{n-1}.
  double h_prev = 1.0, h = 2.0 * y;  // H_0, H_1
  double coeff = 1.0;                // (-1)^m / (4^m m!)
  double series = 1.0;               // m = 0 term, H_0 = 1
  unsigned n = 1;
  for (unsigned m = 1; m <= params.M; ++m) {
    for (; n < 2 * m; ++n) {
      const double next = 2.0 * y * h - 2.0 * n * h_prev;
      h_prev = h;
      h = next;
    }
    coeff *= -1.0 / (4.0 * m);
    series += coeff * h;
  }
  return normalization(params.M) * params.alpha / std::sqrt(std::numbers::pi) * std::exp(-0.5 * y * y) * series;
}

/// alpha = factor / cell width.
inline DFunctionParams dfunction_for_cell(double cell_width, unsigned M, double factor = 1.0) {
  if (!(cell_width > 0.0)) throw std::invalid_argument("D-function: cell width must be positive");
  DFunctionParams params{factor / cell_width, M};
  validate(params);
  return params;
}

// ---------------------------------------------------------------------------
// Lagrangian ensembles

struct Pseudoparticle {
  double r = 0.0;
  double p = 0.0;
  double f = 0.0;  ///< Wigner weight, may be negative
  double dr = 0.0;
  double dp = 0.0;
};

struct Ensemble {
  std::vector<Pseudoparticle> particles;

  std::size_t size() const { return particles.size(); }
  /// sum f dr dp
  double weight() const {
    double sum = 0.0;
    for (const auto& q : particles) sum += q.f * q.dr * q.dp;
    return sum;
  }
};

/// One particle per lattice node, in x-major order.
inline Ensemble to_ensemble(const WignerField& field) {
  const auto& g = field.grid();
  Ensemble ens;
  ens.particles.reserve(g.size());
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.np; ++j) ens.particles.push_back({g.x(i), g.p(j), field(i, j), g.dx(), g.dp()});
  return ens;
}

namespace detail {

// D vanishes to double precision beyond |alpha x| = cutoff for M <= max_dfunction_order.
inline double dfunction_cutoff(unsigned M) { return 14.0 + 2.0 * std::sqrt(static_cast<double>(M)); }

}  // namespace detail

/// f_E(x_i, p_j) = sum_k D_r(x_i - r_k) D_p(p_j - p_k) f_k dr_k dp_k.
/// Particles are visited in ensemble order, so the result is deterministic.
inline WignerField deposit(const Ensemble& ens, const PhaseSpaceGrid& g, const DFunctionParams& dr,
                           const DFunctionParams& dp, double time = 0.0) {
  validate(dr);
  validate(dp);
  WignerField out(g, time);
  const double reach_x = detail::dfunction_cutoff(dr.M) / dr.alpha;
  const double reach_p = detail::dfunction_cutoff(dp.M) / dp.alpha;
  std::vector<double> wx, wp;
  for (const auto& q : ens.particles) {
    if (!std::isfinite(q.r) || !std::isfinite(q.p) || !std::isfinite(q.f) || !(q.dr > 0.0) || !(q.dp > 0.0))
      throw std::invalid_argument("deposit: particle entries must be finite with positive cell widths");
    if (q.f == 0.0) continue;
    const auto lo_i = static_cast<long long>(std::ceil((q.r - reach_x - g.x_min) / g.dx()));
    const auto hi_i = static_cast<long long>(std::floor((q.r + reach_x - g.x_min) / g.dx()));
    const auto lo_j = static_cast<long long>(std::ceil((q.p - reach_p - g.p_min) / g.dp()));
    const auto hi_j = static_cast<long long>(std::floor((q.p + reach_p - g.p_min) / g.dp()));
    const long long i0 = std::max(lo_i, 0LL), i1 = std::min(hi_i, static_cast<long long>(g.nx) - 1);
    const long long j0 = std::max(lo_j, 0LL), j1 = std::min(hi_j, static_cast<long long>(g.np) - 1);
    if (i0 > i1 || j0 > j1) continue;
    wx.resize(static_cast<std::size_t>(i1 - i0 + 1));
    wp.resize(static_cast<std::size_t>(j1 - j0 + 1));
    for (long long i = i0; i <= i1; ++i)
      wx[static_cast<std::size_t>(i - i0)] = d_function(g.x(static_cast<std::size_t>(i)) - q.r, dr);
    for (long long j = j0; j <= j1; ++j)
      wp[static_cast<std::size_t>(j - j0)] = d_function(g.p(static_cast<std::size_t>(j)) - q.p, dp);
    const double w = q.f * q.dr * q.dp;
    for (long long i = i0; i <= i1; ++i) {
      const double a = w * wx[static_cast<std::size_t>(i - i0)];
      double* row = &out(static_cast<std::size_t>(i), static_cast<std::size_t>(j0));
      for (std::size_t k = 0; k < wp.size(); ++k) row[k] += a * wp[k];
    }
  }
  return out;
}

/// Plain-text ensemble format: "# ensemble N" then N rows "r p f_L dr dp".
inline void write_ensemble(std::ostream& os, const Ensemble& ens, int precision = 6) {
  os << "# ensemble " << ens.size() << '\n' << std::setprecision(precision);
  for (const auto& q : ens.particles) os << q.r << ' ' << q.p << ' ' << q.f << ' ' << q.dr << ' ' << q.dp << '\n';
}

inline Ensemble read_ensemble(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_ensemble: empty input");
  std::istringstream header(line);
  std::string hash, tag;
  std::size_t n = 0;
  header >> hash >> tag >> n;
  if (!header || hash != "#" || tag != "ensemble") throw std::runtime_error("read_ensemble: malformed header: " + line);
  Ensemble ens;
  ens.particles.resize(n);
  for (auto& q : ens.particles) {
    if (!(is >> q.r >> q.p >> q.f >> q.dr >> q.dp)) throw std::runtime_error("read_ensemble: truncated particle list");
  }
  return ens;
}

}  // namespace wigner::pseudoparticle

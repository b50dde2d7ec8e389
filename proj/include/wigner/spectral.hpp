#pragma once

// Explicit phase-space propagator. One step is a free-streaming drift in x
// followed by a momentum kick realized on the s-lattice conjugate to p:
// each x-row is transformed p -> s, multiplied by
//   exp(-i [V(x - s/2) - V(x + s/2)] dt / hbar)
// and transformed back. A multi-dimensional variant applies the same kick
// axis by axis.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wigner/evolve.hpp"
#include "wigner/fft.hpp"
#include "wigner/phasespace.hpp"
#include "wigner/potentials.hpp"

namespace wigner::spectral {

enum class KickVariant { full, first_order };
enum class DriftMode { spectral_shift, interpolation };

/// drift_kick applies the whole drift before the kick. literal drifts each
/// output momentum row with its own p and kicks the drifted field, so the
/// drift argument uses the final rather than the pre-kick momentum.
enum class StepOrdering { drift_kick, literal };

struct SpectralStepConfig {
  double dt = 0.1;
  double mass = 1.0;
  KickVariant variant = KickVariant::full;
  DriftMode drift_mode = DriftMode::spectral_shift;
  StepOrdering ordering = StepOrdering::drift_kick;
  InterpolationKind interpolation = InterpolationKind::bicubic;  ///< used by DriftMode::interpolation
};

inline void validate(const SpectralStepConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw std::invalid_argument("spectral step: dt must be positive");
  if (!(cfg.mass > 0.0) || !std::isfinite(cfg.mass))
    throw std::invalid_argument("spectral step: mass must be positive");
}

/// Largest imaginary part discarded when a transformed field is truncated to real.
struct StepStats {
  double max_imag_residue = 0.0;
};

namespace detail {

using cvec = std::vector<std::complex<double>>;

inline cvec to_complex(const std::vector<double>& v) { return cvec(v.begin(), v.end()); }

inline std::vector<double> to_real(const cvec& v, StepStats* stats) {
  std::vector<double> out(v.size());
  double residue = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out[k] = v[k].real();
    residue = std::max(residue, std::abs(v[k].imag()));
  }
  if (stats) stats->max_imag_residue = std::max(stats->max_imag_residue, residue);
  return out;
}

// Multiplier applied to s-bin k of the row at x. The unpaired Nyquist bin
// keeps only the real part so the inverse transform stays real.
inline std::complex<double> kick_multiplier(const Potential& pot, double x, double s, double t, double dt,
                                            KickVariant variant, bool nyquist) {
  const double dv = pot.value(x - 0.5 * s, t) - pot.value(x + 0.5 * s, t);
  const double theta = dv * dt / hbar;
  if (variant == KickVariant::full)
    return nyquist ? std::complex<double>(std::cos(theta), 0.0) : std::polar(1.0, -theta);
  return nyquist ? std::complex<double>(1.0, 0.0) : std::complex<double>(1.0, -theta);
}

// multipliers[i * np + k] for every x-row i and FFT-ordered s-bin k.
inline cvec kick_table(const PhaseSpaceGrid& g, const Potential& pot, double t, double dt, KickVariant variant) {
  cvec table(g.size());
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    for (std::size_t k = 0; k < g.np; ++k) {
      const double s = hbar * fft::angular_frequency(k, g.np, g.dp());
      table[i * g.np + k] = kick_multiplier(pot, x, s, t, dt, variant, fft::is_nyquist(k, g.np));
    }
  }
  return table;
}

}  // namespace detail

/// Free streaming f(x, p) -> f(x - p dt / m, p).
inline WignerField drift(const WignerField& field, double dt, double mass, DriftMode mode = DriftMode::spectral_shift,
                         StepStats* stats = nullptr,
                         InterpolationKind interpolation = InterpolationKind::bicubic) {
  if (!(mass > 0.0)) throw std::invalid_argument("drift: mass must be positive");
  const auto& g = field.grid();
  if (dt == 0.0) return field;

  if (mode == DriftMode::interpolation) {
    const FieldInterpolator interp(field, interpolation);
    WignerField out(g, field.time());
    for (std::size_t i = 0; i < g.nx; ++i)
      for (std::size_t j = 0; j < g.np; ++j) out(i, j) = interp(g.x(i) - g.p(j) * dt / mass, g.p(j));
    return out;
  }

  auto data = detail::to_complex(field.values());
  const std::size_t shape[2] = {g.nx, g.np};
  fft::transform_axis(data, shape, 0, fft::Direction::forward);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double k = fft::angular_frequency(i, g.nx, g.dx());
    const bool nyq = fft::is_nyquist(i, g.nx);
    for (std::size_t j = 0; j < g.np; ++j) {
      const double shift = g.p(j) * dt / mass;
      data[i * g.np + j] *= nyq ? std::complex<double>(std::cos(k * shift), 0.0) : std::polar(1.0, -k * shift);
    }
  }
  fft::transform_axis(data, shape, 0, fft::Direction::backward);
  return WignerField(g, detail::to_real(data, stats), field.time());
}

namespace detail {

inline WignerField apply_kick(const WignerField& field, const cvec& table, StepStats* stats) {
  const auto& g = field.grid();
  auto data = to_complex(field.values());
  const std::size_t shape[2] = {g.nx, g.np};
  fft::transform_axis(data, shape, 1, fft::Direction::forward);
  for (std::size_t n = 0; n < data.size(); ++n) data[n] *= table[n];
  fft::transform_axis(data, shape, 1, fft::Direction::backward);
  return WignerField(g, to_real(data, stats), field.time());
}

}  // namespace detail

/// Exact momentum kick over dt with the potential frozen at time t.
inline WignerField kick_full(const WignerField& field, const Potential& pot, double t, double dt,
                             StepStats* stats = nullptr) {
  return detail::apply_kick(field, detail::kick_table(field.grid(), pot, t, dt, KickVariant::full), stats);
}

/// Kick truncated at first order in dt: f + (dt / hbar) (V_s convolved with f).
inline WignerField kick_first_order(const WignerField& field, const Potential& pot, double t, double dt,
                                    StepStats* stats = nullptr) {
  return detail::apply_kick(field, detail::kick_table(field.grid(), pot, t, dt, KickVariant::first_order), stats);
}

namespace detail {

// Each output row p_j is built from the field drifted with p_j and then
// kicked: out(x, p_j) = sum_l K_x(p_j - p_l) f(x - p_j dt / m, p_l).
inline WignerField literal_step(const WignerField& field, const Potential& pot, double t,
                                const SpectralStepConfig& cfg, StepStats* stats) {
  const auto& g = field.grid();
  const std::size_t nx = g.nx, np = g.np;

  // Circular p-kernel per row: inverse transform of the s-multipliers.
  cvec kernel = kick_table(g, pot, t, cfg.dt, cfg.variant);
  const std::size_t shape[2] = {nx, np};
  fft::transform_axis(kernel, shape, 1, fft::Direction::backward);

  cvec spectrum;
  std::unique_ptr<FieldInterpolator> interp;
  if (cfg.drift_mode == DriftMode::spectral_shift) {
    spectrum = to_complex(field.values());
    fft::transform_axis(spectrum, shape, 0, fft::Direction::forward);
  } else {
    interp = std::make_unique<FieldInterpolator>(field, cfg.interpolation);
  }

  WignerField out(g, field.time());
  cvec shifted(nx * np);
  double residue = 0.0;
  for (std::size_t j = 0; j < np; ++j) {
    const double shift = g.p(j) * cfg.dt / cfg.mass;
    if (interp) {
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t l = 0; l < np; ++l) shifted[i * np + l] = (*interp)(g.x(i) - shift, g.p(l));
    } else {
      for (std::size_t i = 0; i < nx; ++i) {
        const double k = fft::angular_frequency(i, nx, g.dx());
        const std::complex<double> ph =
            fft::is_nyquist(i, nx) ? std::complex<double>(std::cos(k * shift), 0.0) : std::polar(1.0, -k * shift);
        for (std::size_t l = 0; l < np; ++l) shifted[i * np + l] = spectrum[i * np + l] * ph;
      }
      fft::transform_axis(shifted, shape, 0, fft::Direction::backward);
    }
    for (std::size_t i = 0; i < nx; ++i) {
      std::complex<double> sum = 0.0;
      const std::complex<double>* kr = kernel.data() + i * np;
      const std::complex<double>* fr = shifted.data() + i * np;
      for (std::size_t l = 0; l < np; ++l) sum += kr[(j + np - l) % np] * fr[l].real();
      out(i, j) = sum.real();
      residue = std::max(residue, std::abs(sum.imag()));
    }
  }
  if (stats) stats->max_imag_residue = std::max(stats->max_imag_residue, residue);
  return out;
}

}  // namespace detail

/// One step of the configured variant; the result carries time t + dt.
inline WignerField step(const WignerField& field, const Potential& pot, double t, const SpectralStepConfig& cfg,
                        StepStats* stats = nullptr) {
  validate(cfg);
  WignerField out;
  if (cfg.ordering == StepOrdering::literal) {
    out = detail::literal_step(field, pot, t, cfg, stats);
  } else {
    const WignerField drifted = drift(field, cfg.dt, cfg.mass, cfg.drift_mode, stats, cfg.interpolation);
    out = cfg.variant == KickVariant::full ? kick_full(drifted, pot, t, cfg.dt, stats)
                                           : kick_first_order(drifted, pot, t, cfg.dt, stats);
  }
  out.set_time(t + cfg.dt);
  return out;
}

inline WignerField step_full(const WignerField& field, const Potential& pot, double t, SpectralStepConfig cfg,
                             StepStats* stats = nullptr) {
  cfg.variant = KickVariant::full;
  return step(field, pot, t, cfg, stats);
}

inline WignerField step_first_order(const WignerField& field, const Potential& pot, double t, SpectralStepConfig cfg,
                                    StepStats* stats = nullptr) {
  cfg.variant = KickVariant::first_order;
  return step(field, pot, t, cfg, stats);
}

/// Runs nsteps steps from t0 to t1; cfg.dt is replaced by (t1 - t0) / nsteps.
inline EvolveResult evolve(const WignerField& field, const Potential& pot, double t0, double t1, std::size_t nsteps,
                           SpectralStepConfig cfg, const StepObserver& observer = {}, StepStats* stats = nullptr) {
  if (nsteps >= 1 && t1 > t0) cfg.dt = (t1 - t0) / static_cast<double>(nsteps);
  return evolve_with(
      field, t0, t1, nsteps,
      [&](const WignerField& f, double t, double dt) {
        cfg.dt = dt;
        return step(f, pot, t, cfg, stats);
      },
      observer);
}

// ---------------------------------------------------------------------------
// Multi-dimensional separable kick

/// One uniform periodic axis: q_i = min + i h, h = (max - min) / n.
struct AxisLattice {
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;

  double h() const { return (max - min) / static_cast<double>(n); }
  double at(std::size_t i) const { return min + static_cast<double>(i) * h(); }
  friend bool operator==(const AxisLattice&, const AxisLattice&) = default;
};

/// Phase-space lattice in d dimensions; array axes are [x_1..x_d, p_1..p_d].
struct PhaseSpaceGridND {
  std::vector<AxisLattice> x;
  std::vector<AxisLattice> p;

  std::size_t dims() const { return x.size(); }
  std::vector<std::size_t> shape() const {
    std::vector<std::size_t> s;
    for (const auto& a : x) s.push_back(a.n);
    for (const auto& a : p) s.push_back(a.n);
    return s;
  }
  std::size_t size() const {
    std::size_t n = 1;
    for (auto v : shape()) n *= v;
    return n;
  }
  double cell_volume() const {
    double v = 1.0;
    for (const auto& a : x) v *= a.h();
    for (const auto& a : p) v *= a.h();
    return v;
  }
  friend bool operator==(const PhaseSpaceGridND&, const PhaseSpaceGridND&) = default;
};

inline PhaseSpaceGridND make_grid_nd(std::vector<AxisLattice> x, std::vector<AxisLattice> p) {
  if (x.size() != p.size() || x.empty()) throw std::invalid_argument("make_grid_nd: need matching x and p axes");
  if (x.size() > 3) throw std::invalid_argument("make_grid_nd: at most three dimensions are supported");
  for (const auto* axes : {&x, &p}) {
    for (const auto& a : *axes) {
      if (!std::isfinite(a.min) || !std::isfinite(a.max) || !(a.max > a.min))
        throw std::invalid_argument("make_grid_nd: axis bounds must be finite and ordered");
      if (a.n < 4 || !std::has_single_bit(a.n))
        throw std::invalid_argument("make_grid_nd: axis counts must be powers of two >= 4");
    }
  }
  return PhaseSpaceGridND{std::move(x), std::move(p)};
}

struct WignerFieldND {
  PhaseSpaceGridND grid;
  std::vector<double> values;
  double time = 0.0;
};

inline WignerFieldND make_field_nd(const PhaseSpaceGridND& grid, double time = 0.0) {
  return WignerFieldND{grid, std::vector<double>(grid.size(), 0.0), time};
}

/// Fills a field from f(x, p) evaluated at every node.
inline WignerFieldND sample_field_nd(const PhaseSpaceGridND& grid,
                                     const std::function<double(std::span<const double>, std::span<const double>)>& f,
                                     double time = 0.0) {
  WignerFieldND out = make_field_nd(grid, time);
  const auto shape = grid.shape();
  const std::size_t d = grid.dims();
  std::vector<std::size_t> idx(2 * d, 0);
  std::vector<double> xs(d), ps(d);
  for (std::size_t n = 0; n < out.values.size(); ++n) {
    std::size_t rem = n;
    for (std::size_t a = 2 * d; a-- > 0;) {
      idx[a] = rem % shape[a];
      rem /= shape[a];
    }
    for (std::size_t a = 0; a < d; ++a) {
      xs[a] = grid.x[a].at(idx[a]);
      ps[a] = grid.p[a].at(idx[d + a]);
    }
    out.values[n] = f(xs, ps);
  }
  return out;
}

inline double norm(const WignerFieldND& f) {
  return std::accumulate(f.values.begin(), f.values.end(), 0.0) * f.grid.cell_volume();
}

/// V(x, t) over a d-dimensional position.
using PotentialND = std::function<double(std::span<const double>, double)>;

/// V(x) = sum_a V_a(x_a).
inline PotentialND separable_potential(std::vector<Potential> axes) {
  return [axes = std::move(axes)](std::span<const double> x, double t) {
    double v = 0.0;
    for (std::size_t a = 0; a < axes.size(); ++a) v += axes[a].value(x[a], t);
    return v;
  };
}

/// V(x) = -depth exp(-|x|^2 / 2 sigma^2).
inline PotentialND radial_gaussian_well(double depth, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("radial_gaussian_well: sigma must be positive");
  return [depth, sigma](std::span<const double> x, double) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return -depth * std::exp(-r2 / (2.0 * sigma * sigma));
  };
}

/// f(x, p) -> f(x - p dt / m, p) on every axis, by spectral shift.
inline WignerFieldND drift_nd(const WignerFieldND& field, double dt, double mass, StepStats* stats = nullptr) {
  const auto& g = field.grid;
  const auto shape = g.shape();
  const auto strides = fft::strides_of(shape);
  const std::size_t d = g.dims();
  auto data = detail::to_complex(field.values);
  for (std::size_t a = 0; a < d; ++a) {
    fft::transform_axis(data, shape, a, fft::Direction::forward);
    const std::size_t nk = shape[a], np = shape[d + a];
    for (std::size_t n = 0; n < data.size(); ++n) {
      const std::size_t ik = (n / strides[a]) % nk;
      const std::size_t jp = (n / strides[d + a]) % np;
      const double k = fft::angular_frequency(ik, nk, g.x[a].h());
      const double shift = g.p[a].at(jp) * dt / mass;
      data[n] *= fft::is_nyquist(ik, nk) ? std::complex<double>(std::cos(k * shift), 0.0)
                                         : std::polar(1.0, -k * shift);
    }
    fft::transform_axis(data, shape, a, fft::Direction::backward);
  }
  return WignerFieldND{g, detail::to_real(data, stats), field.time};
}

/// Kick along axis `axis` only, using V(x - s e_axis / 2) - V(x + s e_axis / 2).
inline WignerFieldND kick_axis(const WignerFieldND& field, const PotentialND& pot, std::size_t axis, double t,
                               double dt, KickVariant variant = KickVariant::full, StepStats* stats = nullptr) {
  const auto& g = field.grid;
  const std::size_t d = g.dims();
  if (axis >= d) throw std::invalid_argument("kick_axis: axis out of range");
  const auto shape = g.shape();
  const auto strides = fft::strides_of(shape);
  const std::size_t np = shape[d + axis];

  std::size_t nxs = 1;
  for (std::size_t a = 0; a < d; ++a) nxs *= shape[a];
  const std::size_t per_x = field.values.size() / nxs;  // p-block length per position node

  auto data = detail::to_complex(field.values);
  fft::transform_axis(data, shape, d + axis, fft::Direction::forward);

  std::vector<double> xs(d), lo(d), hi(d);
  std::vector<std::complex<double>> mult(np);
  for (std::size_t n = 0; n < nxs; ++n) {
    std::size_t rem = n;
    for (std::size_t a = d; a-- > 0;) {
      xs[a] = g.x[a].at(rem % shape[a]);
      rem /= shape[a];
    }
    for (std::size_t k = 0; k < np; ++k) {
      const double s = hbar * fft::angular_frequency(k, np, g.p[axis].h());
      lo = xs;
      hi = xs;
      lo[axis] -= 0.5 * s;
      hi[axis] += 0.5 * s;
      const double theta = (pot(lo, t) - pot(hi, t)) * dt / hbar;
      const bool nyq = fft::is_nyquist(k, np);
      if (variant == KickVariant::full)
        mult[k] = nyq ? std::complex<double>(std::cos(theta), 0.0) : std::polar(1.0, -theta);
      else
        mult[k] = nyq ? std::complex<double>(1.0, 0.0) : std::complex<double>(1.0, -theta);
    }
    std::complex<double>* block = data.data() + n * per_x;
    for (std::size_t q = 0; q < per_x; ++q) block[q] *= mult[(q / strides[d + axis]) % np];
  }
  fft::transform_axis(data, shape, d + axis, fft::Direction::backward);
  return WignerFieldND{g, detail::to_real(data, stats), field.time};
}

/// Drift on all axes, then kick along each axis in turn, dropping the
/// cross terms of the potential difference.
inline WignerFieldND step_separable(const WignerFieldND& field, const PotentialND& pot, double t,
                                    const SpectralStepConfig& cfg, StepStats* stats = nullptr) {
  validate(cfg);
  const std::size_t d = field.grid.dims();
  if (d < 1 || d > 3) throw std::invalid_argument("step_separable: dimension must be 1, 2 or 3");
  if (field.values.size() != field.grid.size()) throw std::invalid_argument("step_separable: field size mismatch");
  WignerFieldND out = drift_nd(field, cfg.dt, cfg.mass, stats);
  for (std::size_t a = 0; a < d; ++a) out = kick_axis(out, pot, a, t, cfg.dt, cfg.variant, stats);
  out.time = t + cfg.dt;
  return out;
}

}  // namespace wigner::spectral

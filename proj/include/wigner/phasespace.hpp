#pragma once

// Uniform (x, p) lattices, Wigner fields sampled on them, and the quadrature,
// interpolation and comparison primitives shared by every propagator.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wigner {

/// Reduced Planck constant in the dimensionless units used throughout.
inline constexpr double hbar = 1.0;

/// Uniform periodic lattice x_i = x_min + i dx, p_j = p_min + j dp with
/// dx = (x_max - x_min)/nx and dp = (p_max - p_min)/np. The upper bounds are
/// excluded. The conjugate s-lattice of the p-lattice has spacing
/// ds = 2 pi hbar / (np dp) and indices k in [-np/2, np/2).
struct PhaseSpaceGrid {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t nx = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  std::size_t np = 0;

  double dx() const { return (x_max - x_min) / static_cast<double>(nx); }
  double dp() const { return (p_max - p_min) / static_cast<double>(np); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  double p(std::size_t j) const { return p_min + static_cast<double>(j) * dp(); }
  std::size_t size() const { return nx * np; }

  double ds() const { return 2.0 * std::numbers::pi * hbar / (static_cast<double>(np) * dp()); }
  /// s-lattice value for a signed index k in [-np/2, np/2).
  double s(long long k) const { return static_cast<double>(k) * ds(); }
  double s_min() const { return s(-static_cast<long long>(np / 2)); }
  double s_max() const { return s(static_cast<long long>(np / 2) - 1); }

  std::size_t nearest_x_index(double xq) const { return nearest(xq, x_min, dx(), nx); }
  std::size_t nearest_p_index(double pq) const { return nearest(pq, p_min, dp(), np); }

  friend bool operator==(const PhaseSpaceGrid&, const PhaseSpaceGrid&) = default;

 private:
  static std::size_t nearest(double q, double lo, double h, std::size_t n) {
    const double u = std::round((q - lo) / h);
    if (u <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(u), n - 1);
  }
};

/// Validating constructor for PhaseSpaceGrid.
inline PhaseSpaceGrid make_grid(double x_min, double x_max, std::size_t nx, double p_min, double p_max,
                                std::size_t np) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(x_min) || !finite(x_max) || !finite(p_min) || !finite(p_max))
    throw std::invalid_argument("make_grid: bounds must be finite");
  if (!(x_max > x_min)) throw std::invalid_argument("make_grid: x_max must exceed x_min");
  if (!(p_max > p_min)) throw std::invalid_argument("make_grid: p_max must exceed p_min");
  if (nx < 4 || !std::has_single_bit(nx))
    throw std::invalid_argument("make_grid: nx must be a power of two >= 4, got " + std::to_string(nx));
  if (np < 4 || !std::has_single_bit(np))
    throw std::invalid_argument("make_grid: np must be a power of two >= 4, got " + std::to_string(np));
  return PhaseSpaceGrid{x_min, x_max, nx, p_min, p_max, np};
}

/// Real samples f(x_i, p_j) at a given time. Storage is row-major with the
/// x index outermost: values()[i * np + j].
class WignerField {
 public:
  WignerField() = default;
  explicit WignerField(const PhaseSpaceGrid& grid, double time = 0.0)
      : grid_(grid), values_(grid.size(), 0.0), time_(time) {}
  WignerField(const PhaseSpaceGrid& grid, std::vector<double> values, double time)
      : grid_(grid), values_(std::move(values)), time_(time) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("WignerField: value count does not match the grid");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("WignerField: non-finite value");
  }

  const PhaseSpaceGrid& grid() const { return grid_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * grid_.np + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * grid_.np + j]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  /// Values along x at fixed p index j.
  std::vector<double> p_slice(std::size_t j) const {
    std::vector<double> out(grid_.nx);
    for (std::size_t i = 0; i < grid_.nx; ++i) out[i] = (*this)(i, j);
    return out;
  }

  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

 private:
  PhaseSpaceGrid grid_{};
  std::vector<double> values_;
  double time_ = 0.0;
};

inline WignerField scaled(const WignerField& f, double alpha) {
  WignerField out = f;
  for (double& v : out.values()) v *= alpha;
  return out;
}

/// Riemann sum dx dp sum f. Equals 2 pi hbar for a unit-normalized state.
inline double norm(const WignerField& field) {
  double sum = 0.0;
  for (double v : field.values()) sum += v;
  return sum * field.grid().dx() * field.grid().dp();
}

/// Position density rho(x_i) = (dp / 2 pi hbar) sum_j f(x_i, p_j).
inline std::vector<double> marginal_x(const WignerField& field) {
  const auto& g = field.grid();
  const double w = g.dp() / (2.0 * std::numbers::pi * hbar);
  std::vector<double> rho(g.nx, 0.0);
  for (std::size_t i = 0; i < g.nx; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < g.np; ++j) sum += field(i, j);
    rho[i] = w * sum;
  }
  return rho;
}

/// Momentum-integrated row sums sum_j f(x_i, p_j) (no measure factor).
inline std::vector<double> row_sums(const WignerField& field) {
  const auto& g = field.grid();
  std::vector<double> out(g.nx, 0.0);
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.np; ++j) out[i] += field(i, j);
  return out;
}

enum class InterpolationKind { bicubic, bilinear };

namespace detail {

// Cubic B-spline prefilter with mirror boundary: solves
// (c[i-1] + 4 c[i] + c[i+1]) / 6 = f[i] with c[-1] = c[1], c[n] = c[n-2].
inline void bspline_prefilter(double* data, std::size_t n, std::size_t stride, std::vector<double>& work_c,
                              std::vector<double>& work_d) {
  work_c.assign(n, 0.0);
  work_d.assign(n, 0.0);
  auto at = [&](std::size_t i) -> double& { return data[i * stride]; };
  // Thomas algorithm on the scaled system (a, 4, c) with first row (4, 2) and last row (2, 4).
  double denom = 4.0;
  work_c[0] = 2.0 / denom;
  work_d[0] = 6.0 * at(0) / denom;
  for (std::size_t i = 1; i < n; ++i) {
    const double lower = (i == n - 1) ? 2.0 : 1.0;
    const double upper = 1.0;
    denom = 4.0 - lower * work_c[i - 1];
    work_c[i] = upper / denom;
    work_d[i] = (6.0 * at(i) - lower * work_d[i - 1]) / denom;
  }
  at(n - 1) = work_d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) at(i) = work_d[i] - work_c[i] * at(i + 1);
}

inline std::size_t mirror(long long idx, std::size_t n) {
  const auto last = static_cast<long long>(n) - 1;
  if (idx < 0) idx = -idx;
  if (idx > last) idx = 2 * last - idx;
  return static_cast<std::size_t>(std::clamp(idx, 0LL, last));
}

inline void bspline_weights(double t, double w[4]) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double omt = 1.0 - t;
  w[0] = omt * omt * omt / 6.0;
  w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
  w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
  w[3] = t3 / 6.0;
}

}  // namespace detail

/// Evaluates a field at arbitrary (x, p). Construction does the O(N)
/// prefiltering once; each query is O(1). Queries outside the node hull
/// [x_0, x_{nx-1}] x [p_0, p_{np-1}] return 0.
class FieldInterpolator {
 public:
  explicit FieldInterpolator(const WignerField& field, InterpolationKind kind = InterpolationKind::bicubic)
      : grid_(field.grid()), kind_(kind), coeffs_(field.values()) {
    if (kind_ == InterpolationKind::bicubic) {
      std::vector<double> wc, wd;
      for (std::size_t j = 0; j < grid_.np; ++j)
        detail::bspline_prefilter(coeffs_.data() + j, grid_.nx, grid_.np, wc, wd);
      for (std::size_t i = 0; i < grid_.nx; ++i)
        detail::bspline_prefilter(coeffs_.data() + i * grid_.np, grid_.np, 1, wc, wd);
    }
  }

  double operator()(double x, double p) const {
    const double u = (x - grid_.x_min) / grid_.dx();
    const double v = (p - grid_.p_min) / grid_.dp();
    constexpr double slack = 1e-12;
    const double umax = static_cast<double>(grid_.nx - 1);
    const double vmax = static_cast<double>(grid_.np - 1);
    if (!(u >= -slack && u <= umax + slack && v >= -slack && v <= vmax + slack)) return 0.0;
    const double uc = std::clamp(u, 0.0, umax);
    const double vc = std::clamp(v, 0.0, vmax);
    return kind_ == InterpolationKind::bicubic ? cubic(uc, vc) : linear(uc, vc);
  }

  InterpolationKind kind() const { return kind_; }

 private:
  double cubic(double u, double v) const {
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    double wu[4], wv[4];
    detail::bspline_weights(u - fu, wu);
    detail::bspline_weights(v - fv, wv);
    const auto iu = static_cast<long long>(fu);
    const auto iv = static_cast<long long>(fv);
    std::size_t cols[4];
    for (int b = 0; b < 4; ++b) cols[b] = detail::mirror(iv - 1 + b, grid_.np);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double* row = coeffs_.data() + detail::mirror(iu - 1 + a, grid_.nx) * grid_.np;
      double inner = 0.0;
      for (int b = 0; b < 4; ++b) inner += wv[b] * row[cols[b]];
      sum += wu[a] * inner;
    }
    return sum;
  }

  double linear(double u, double v) const {
    const auto i0 = std::min(static_cast<std::size_t>(u), grid_.nx - 2);
    const auto j0 = std::min(static_cast<std::size_t>(v), grid_.np - 2);
    const double tu = u - static_cast<double>(i0);
    const double tv = v - static_cast<double>(j0);
    auto at = [&](std::size_t i, std::size_t j) { return coeffs_[i * grid_.np + j]; };
    return (1 - tu) * ((1 - tv) * at(i0, j0) + tv * at(i0, j0 + 1)) +
           tu * ((1 - tv) * at(i0 + 1, j0) + tv * at(i0 + 1, j0 + 1));
  }

  PhaseSpaceGrid grid_;
  InterpolationKind kind_;
  std::vector<double> coeffs_;
};

/// One-off query; prefer FieldInterpolator for many queries on one field.
inline double interpolate(const WignerField& field, double x, double p,
                          InterpolationKind kind = InterpolationKind::bicubic) {
  return FieldInterpolator(field, kind)(x, p);
}

struct DiffMetrics {
  double l2 = 0.0;
  double linf = 0.0;
  std::size_t linf_i = 0;  ///< x index of the largest deviation
  std::size_t linf_j = 0;  ///< p index of the largest deviation
};

inline DiffMetrics diff_metrics(const WignerField& a, const WignerField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("diff_metrics: grid mismatch");
  const auto& g = a.grid();
  DiffMetrics m;
  double sq = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i) {
    for (std::size_t j = 0; j < g.np; ++j) {
      const double d = a(i, j) - b(i, j);
      sq += d * d;
      if (std::abs(d) > m.linf) {
        m.linf = std::abs(d);
        m.linf_i = i;
        m.linf_j = j;
      }
    }
  }
  m.l2 = std::sqrt(sq * g.dx() * g.dp());
  return m;
}

/// Plain-text field format:
///   # wignerfield nx np x_min x_max p_min p_max time
/// followed by nx rows of np space-separated values (row = fixed x).
inline void write_field(std::ostream& os, const WignerField& field, int precision = 6) {
  const auto& g = field.grid();
  os << std::setprecision(17) << "# wignerfield " << g.nx << ' ' << g.np << ' ' << g.x_min << ' ' << g.x_max
     << ' ' << g.p_min << ' ' << g.p_max << ' ' << field.time() << '\n';
  os << std::setprecision(precision);
  for (std::size_t i = 0; i < g.nx; ++i) {
    for (std::size_t j = 0; j < g.np; ++j) {
      if (j) os << ' ';
      os << field(i, j);
    }
    os << '\n';
  }
}

inline WignerField read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_field: empty input");
  std::istringstream header(line);
  std::string hash, tag;
  std::size_t nx = 0, np = 0;
  double x_min, x_max, p_min, p_max, time;
  header >> hash >> tag >> nx >> np >> x_min >> x_max >> p_min >> p_max >> time;
  if (!header || hash != "#" || tag != "wignerfield")
    throw std::runtime_error("read_field: malformed header: " + line);
  const auto grid = make_grid(x_min, x_max, nx, p_min, p_max, np);
  std::vector<double> values(grid.size());
  for (auto& v : values) {
    if (!(is >> v)) throw std::runtime_error("read_field: truncated value block");
  }
  return WignerField(grid, std::move(values), time);
}

}  // namespace wigner

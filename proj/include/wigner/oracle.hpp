#pragma once

// Ground-truth dynamics for a particle in the Gaussian well
// V(x) = -depth exp(-x^2 / 2 sigma^2): a non-orthogonal even Gaussian basis,
// the generalized eigenproblem (T + V) a = E B a, and the closed-form Wigner
// function of a superposition of eigenstates at any time.
//
// Basis functions are labelled n = 1..n_max with widths beta_n^2 = n beta0^2:
//   psi_n(x) = exp(-x^2 / 2 beta_n^2) / (sqrt(pi) beta_n)^(1/2).
// The basis is even, so only even-parity eigenstates are reachable.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wigner/errors.hpp"
#include "wigner/phasespace.hpp"

namespace wigner::oracle {

struct GaussianBasis {
  double beta0_sq = 1.0;
  std::size_t n_max = 10;

  /// beta_n^2 for the 1-based label n.
  double beta_sq(std::size_t n) const { return static_cast<double>(n) * beta0_sq; }
};

inline GaussianBasis make_basis(double beta0_sq, std::size_t n_max) {
  if (!(beta0_sq > 0.0) || !std::isfinite(beta0_sq))
    throw std::invalid_argument("GaussianBasis: beta0_sq must be positive");
  if (n_max < 2) throw std::invalid_argument("GaussianBasis: n_max must be at least 2");
  return GaussianBasis{beta0_sq, n_max};
}

/// Normalized basis function psi_n(x), n 1-based.
inline double basis_function(const GaussianBasis& basis, std::size_t n, double x) {
  const double b2 = basis.beta_sq(n);
  return std::exp(-x * x / (2.0 * b2)) / std::sqrt(std::sqrt(std::numbers::pi * b2));
}

/// B_nm = sqrt(2 beta_n beta_m / (beta_n^2 + beta_m^2)).
inline Eigen::MatrixXd overlap_matrix(const GaussianBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.n_max);
  Eigen::MatrixXd B(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const double a = basis.beta_sq(static_cast<std::size_t>(r) + 1);
      const double b = basis.beta_sq(static_cast<std::size_t>(c) + 1);
      B(r, c) = std::sqrt(2.0 * std::sqrt(a * b) / (a + b));
    }
  }
  return B;
}

/// T_nm = B_nm / (2 (beta_n^2 + beta_m^2)).
inline Eigen::MatrixXd kinetic_matrix(const GaussianBasis& basis) {
  Eigen::MatrixXd T = overlap_matrix(basis);
  for (Eigen::Index r = 0; r < T.rows(); ++r) {
    for (Eigen::Index c = 0; c < T.cols(); ++c) {
      const double s = basis.beta_sq(static_cast<std::size_t>(r) + 1) + basis.beta_sq(static_cast<std::size_t>(c) + 1);
      T(r, c) *= 0.5 / s;
    }
  }
  return T;
}

/// V_nm = -depth sqrt(B_nm^2 sigma^2 / (beta_nm^2 + sigma^2)),
/// beta_nm^2 = beta_n^2 beta_m^2 / (beta_n^2 + beta_m^2).
inline Eigen::MatrixXd potential_matrix(const GaussianBasis& basis, double sigma, double depth = 1.0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("potential_matrix: sigma must be positive");
  const Eigen::MatrixXd B = overlap_matrix(basis);
  Eigen::MatrixXd V(B.rows(), B.cols());
  const double s2 = sigma * sigma;
  for (Eigen::Index r = 0; r < V.rows(); ++r) {
    for (Eigen::Index c = 0; c < V.cols(); ++c) {
      const double a = basis.beta_sq(static_cast<std::size_t>(r) + 1);
      const double b = basis.beta_sq(static_cast<std::size_t>(c) + 1);
      const double bnm = a * b / (a + b);
      V(r, c) = -depth * std::sqrt(B(r, c) * B(r, c) * s2 / (bnm + s2));
    }
  }
  return V;
}

/// Output of the generalized eigensolve. Column l of `coeffs` holds a_{l n};
/// each column satisfies a^T B a = 1 and is signed so that Psi_l(0) > 0.
struct EigenSolution {
  GaussianBasis basis;
  double sigma = 0.0;
  double depth = 1.0;
  Eigen::VectorXd energies;
  Eigen::MatrixXd coeffs;
  Eigen::MatrixXd overlap;
  Eigen::MatrixXd hamiltonian;
  double min_pivot = 0.0;  ///< smallest Cholesky pivot L_ii^2 of the overlap matrix

  std::size_t size() const { return static_cast<std::size_t>(energies.size()); }

  /// || (T + V) a_l - E_l B a_l ||_inf
  double residual(std::size_t l) const {
    const auto col = static_cast<Eigen::Index>(l);
    const Eigen::VectorXd a = coeffs.col(col);
    return (hamiltonian * a - energies(col) * (overlap * a)).cwiseAbs().maxCoeff();
  }
};

/// Pivots below this abort the solve rather than return a meaningless spectrum.
inline constexpr double min_cholesky_pivot = 1e-12;

namespace detail {

// Plain Cholesky that reports the pivot where it stops.
inline Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& B, double& min_pivot) {
  const Eigen::Index n = B.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = B(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
    min_pivot = std::min(min_pivot, pivot);
    if (!(pivot >= min_cholesky_pivot)) {
      std::ostringstream msg;
      msg << "overlap matrix is numerically singular: Cholesky pivot " << pivot << " at basis index " << j + 1
          << " of " << n << " (threshold " << min_cholesky_pivot
          << "); the n beta0^2 width ladder is nearly linearly dependent, reduce n_max";
      throw NumericalError(msg.str());
    }
    L(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = B(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = v / L(j, j);
    }
  }
  return L;
}

}  // namespace detail

inline double eigenfunction(const EigenSolution& sol, std::size_t l, double x) {
  double sum = 0.0;
  for (std::size_t n = 1; n <= sol.basis.n_max; ++n)
    sum += sol.coeffs(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(l)) *
           basis_function(sol.basis, n, x);
  return sum;
}

/// Solves (T + V) a = E B a through B = L L^T and a symmetric eigensolve of
/// L^-1 (T + V) L^-T. Throws NumericalError when B is too ill-conditioned.
inline EigenSolution solve(const GaussianBasis& basis, double sigma, double depth = 1.0) {
  EigenSolution sol;
  sol.basis = basis;
  sol.sigma = sigma;
  sol.depth = depth;
  sol.overlap = overlap_matrix(basis);
  sol.hamiltonian = kinetic_matrix(basis) + potential_matrix(basis, sigma, depth);

  const Eigen::MatrixXd L = detail::cholesky_lower(sol.overlap, sol.min_pivot);
  const auto lower = L.triangularView<Eigen::Lower>();
  // C = L^-1 H L^-T
  Eigen::MatrixXd tmp = lower.solve(sol.hamiltonian);
  Eigen::MatrixXd C = lower.solve(tmp.transpose());
  C = 0.5 * (C + C.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigensolve did not converge");
  sol.energies = eig.eigenvalues();
  sol.coeffs = L.transpose().triangularView<Eigen::Upper>().solve(eig.eigenvectors());

  for (Eigen::Index l = 0; l < sol.coeffs.cols(); ++l) {
    if (eigenfunction(sol, static_cast<std::size_t>(l), 0.0) < 0.0) sol.coeffs.col(l) *= -1.0;
  }
  return sol;
}

/// Analytic cross Wigner function
///   f_nm(x, p) = int ds e^{i p s} psi_n(x - s/2) psi_m(x + s/2)
///             = 2 sqrt(2 beta_n beta_m / (beta_n^2 + beta_m^2)) e^{-nu_nm},
/// with n, m 1-based labels. f_mn is the complex conjugate of f_nm.
inline std::complex<double> wigner_basis(std::size_t n, std::size_t m, double x, double p,
                                         const GaussianBasis& basis) {
  if (n < 1 || m < 1 || n > basis.n_max || m > basis.n_max)
    throw std::out_of_range("wigner_basis: labels must lie in 1..n_max");
  const double a = basis.beta_sq(n);
  const double b = basis.beta_sq(m);
  const double s = a + b;
  const double pref = 2.0 * std::sqrt(2.0 * std::sqrt(a * b) / s);
  const std::complex<double> mu = 4.0 * a * b / s * std::complex<double>(x * (0.5 / a - 0.5 / b), p / hbar);
  const std::complex<double> nu = s * (x * x - mu * mu / 4.0) / (2.0 * a * b);
  return pref * std::exp(-nu);
}

/// Superposition sum_l b_l Psi_l with sum |b_l|^2 = 1.
class SuperpositionState {
 public:
  SuperpositionState(EigenSolution solution, std::vector<std::complex<double>> amplitudes)
      : sol_(std::move(solution)), amps_(std::move(amplitudes)) {
    if (amps_.empty() || amps_.size() > sol_.size())
      throw std::invalid_argument("SuperpositionState: amplitude count must be in 1..number of eigenstates");
    double total = 0.0;
    for (const auto& b : amps_) total += std::norm(b);
    if (std::abs(total - 1.0) > 1e-10)
      throw std::invalid_argument("SuperpositionState: amplitudes must satisfy sum |b|^2 = 1");
  }

  /// Rescales arbitrary non-zero amplitudes to unit norm.
  static SuperpositionState normalized(EigenSolution solution, std::vector<std::complex<double>> amplitudes) {
    double total = 0.0;
    for (const auto& b : amplitudes) total += std::norm(b);
    if (!(total > 0.0)) throw std::invalid_argument("SuperpositionState: amplitudes are all zero");
    for (auto& b : amplitudes) b /= std::sqrt(total);
    return SuperpositionState(std::move(solution), std::move(amplitudes));
  }

  const EigenSolution& solution() const { return sol_; }
  const std::vector<std::complex<double>>& amplitudes() const { return amps_; }

  /// c_n(t) = sum_l b_l e^{-i E_l t / hbar} a_{l n}
  Eigen::VectorXcd coefficients(double t) const {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sol_.basis.n_max));
    for (std::size_t l = 0; l < amps_.size(); ++l) {
      const auto col = static_cast<Eigen::Index>(l);
      const std::complex<double> phase = amps_[l] * std::exp(std::complex<double>(0.0, -sol_.energies(col) * t / hbar));
      c += phase * sol_.coeffs.col(col).cast<std::complex<double>>();
    }
    return c;
  }

  std::complex<double> wavefunction(double t, double x) const {
    const Eigen::VectorXcd c = coefficients(t);
    std::complex<double> sum = 0.0;
    for (std::size_t n = 1; n <= sol_.basis.n_max; ++n)
      sum += c(static_cast<Eigen::Index>(n - 1)) * basis_function(sol_.basis, n, x);
    return sum;
  }

 private:
  EigenSolution sol_;
  std::vector<std::complex<double>> amps_;
};

/// The two-state superposition (Psi_0 + Psi_1) / sqrt(2).
inline SuperpositionState two_state_superposition(EigenSolution solution) {
  const double r = 1.0 / std::sqrt(2.0);
  return SuperpositionState(std::move(solution), {r, r});
}

/// Full double sum sum_nm c_n c_m^* f_nm; its imaginary part vanishes up to roundoff.
inline std::complex<double> wigner_complex(const SuperpositionState& state, double t, double x, double p) {
  const Eigen::VectorXcd c = state.coefficients(t);
  const auto& basis = state.solution().basis;
  std::complex<double> sum = 0.0;
  for (std::size_t n = 1; n <= basis.n_max; ++n)
    for (std::size_t m = 1; m <= basis.n_max; ++m)
      sum += c(static_cast<Eigen::Index>(n - 1)) * std::conj(c(static_cast<Eigen::Index>(m - 1))) *
             wigner_basis(n, m, x, p, basis);
  return sum;
}

inline double wigner_at(const SuperpositionState& state, double t, double x, double p) {
  return wigner_complex(state, t, x, p).real();
}

/// Evaluates the Wigner function on every lattice node, summing the
/// hermitian pairs once.
inline WignerField sample_field(const SuperpositionState& state, double t, const PhaseSpaceGrid& grid) {
  const Eigen::VectorXcd c = state.coefficients(t);
  const auto& basis = state.solution().basis;
  const std::size_t nb = basis.n_max;

  struct Pair {
    std::complex<double> weight;  // c_n c_m^* (doubled off-diagonal)
    double pref, gx, cross, width;
  };
  std::vector<Pair> pairs;
  for (std::size_t n = 1; n <= nb; ++n) {
    for (std::size_t m = n; m <= nb; ++m) {
      const double a = basis.beta_sq(n);
      const double b = basis.beta_sq(m);
      const double s = a + b;
      std::complex<double> w = c(static_cast<Eigen::Index>(n - 1)) * std::conj(c(static_cast<Eigen::Index>(m - 1)));
      if (m != n) w *= 2.0;
      // nu = x^2 s / 2ab - (2ab / s) (x d + i p)^2,  d = 1/2a - 1/2b
      pairs.push_back({w, 2.0 * std::sqrt(2.0 * std::sqrt(a * b) / s), s / (2.0 * a * b), 0.5 / a - 0.5 / b,
                       2.0 * a * b / s});
    }
  }

  WignerField field(grid, t);
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    for (std::size_t j = 0; j < grid.np; ++j) {
      const double p = grid.p(j) / hbar;
      double sum = 0.0;
      for (const auto& pr : pairs) {
        const std::complex<double> q(x * pr.cross, p);
        const std::complex<double> nu = pr.gx * x * x - pr.width * q * q;
        sum += (pr.weight * pr.pref * std::exp(-nu)).real();
      }
      field(i, j) = sum;
    }
  }
  return field;
}

/// Phi(x_i, t) on the x-lattice.
inline std::vector<std::complex<double>> wavefunction_on_lattice(const SuperpositionState& state, double t,
                                                                 const PhaseSpaceGrid& grid) {
  const Eigen::VectorXcd c = state.coefficients(t);
  const auto& basis = state.solution().basis;
  std::vector<std::complex<double>> psi(grid.nx);
  for (std::size_t i = 0; i < grid.nx; ++i) {
    std::complex<double> sum = 0.0;
    for (std::size_t n = 1; n <= basis.n_max; ++n)
      sum += c(static_cast<Eigen::Index>(n - 1)) * basis_function(basis, n, grid.x(i));
    psi[i] = sum;
  }
  return psi;
}

/// Direct quadrature of int ds e^{i p s / hbar} a(x - s/2) b^*(x + s/2) for
/// wavefunctions sampled on the x-lattice. The s-step is 2 dx so both shifted
/// arguments fall on lattice nodes; samples beyond the lattice count as zero.
/// Row-major nx x np, like WignerField.
inline std::vector<std::complex<double>> numeric_cross_wigner(std::span<const std::complex<double>> a,
                                                              std::span<const std::complex<double>> b,
                                                              const PhaseSpaceGrid& grid) {
  if (a.size() != grid.nx || b.size() != grid.nx)
    throw std::invalid_argument("numeric_cross_wigner: wavefunctions must have nx samples");
  const std::size_t nx = grid.nx;
  const std::size_t np = grid.np;
  const double ds = 2.0 * grid.dx();
  // phase[k][j] = e^{i p_j k ds / hbar} for k = 0..nx-1; negative k via conjugation.
  std::vector<std::complex<double>> phase(nx * np);
  for (std::size_t k = 0; k < nx; ++k)
    for (std::size_t j = 0; j < np; ++j)
      phase[k * np + j] = std::polar(1.0, grid.p(j) * static_cast<double>(k) * ds / hbar);

  std::vector<std::complex<double>> out(nx * np, 0.0);
  for (std::size_t i = 0; i < nx; ++i) {
    const auto ii = static_cast<long long>(i);
    const long long kmax = std::min(ii, static_cast<long long>(nx) - 1 - ii);
    std::complex<double>* row = out.data() + i * np;
    for (long long k = -kmax; k <= kmax; ++k) {
      const std::complex<double> prod = a[static_cast<std::size_t>(ii - k)] * std::conj(b[static_cast<std::size_t>(ii + k)]) * ds;
      const std::complex<double>* ph = phase.data() + static_cast<std::size_t>(std::abs(k)) * np;
      if (k >= 0) {
        for (std::size_t j = 0; j < np; ++j) row[j] += prod * ph[j];
      } else {
        for (std::size_t j = 0; j < np; ++j) row[j] += prod * std::conj(ph[j]);
      }
    }
  }
  return out;
}

/// Wigner transform of a single wavefunction; the imaginary part is dropped
/// (it is zero up to roundoff).
inline WignerField numeric_wigner(std::span<const std::complex<double>> psi, const PhaseSpaceGrid& grid,
                                  double time = 0.0) {
  const auto cross = numeric_cross_wigner(psi, psi, grid);
  std::vector<double> values(cross.size());
  for (std::size_t k = 0; k < cross.size(); ++k) values[k] = cross[k].real();
  return WignerField(grid, std::move(values), time);
}

}  // namespace wigner::oracle

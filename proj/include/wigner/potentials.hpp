#pragma once

// Closed-form one-dimensional potentials with analytic first and third
// derivatives. They are evaluated at arbitrary real coordinates, never
// sampled on the lattice.

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

namespace wigner {

struct ConstantPotential {
  double c = 0.0;
};
struct LinearPotential {
  double g = 0.0;  ///< V = g x
};
struct HarmonicPotential {
  double k = 1.0;  ///< V = k x^2 / 2
};
struct GaussianWellPotential {
  double depth = 1.0;  ///< V = -depth exp(-x^2 / 2 sigma^2)
  double sigma = 1.0;
};

/// Time is threaded through every evaluation so driven potentials can be
/// added without changing call sites; the built-in variants ignore it.
class Potential {
 public:
  using Variant = std::variant<ConstantPotential, LinearPotential, HarmonicPotential, GaussianWellPotential>;

  Potential() : v_(ConstantPotential{}) {}
  Potential(ConstantPotential p) : v_(p) {}
  Potential(LinearPotential p) : v_(p) {}
  Potential(HarmonicPotential p) : v_(p) {
    if (!(p.k >= 0.0) || !std::isfinite(p.k)) throw std::invalid_argument("harmonic potential needs k >= 0");
  }
  Potential(GaussianWellPotential p) : v_(p) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
      throw std::invalid_argument("gaussian_well potential needs sigma > 0");
    if (!std::isfinite(p.depth)) throw std::invalid_argument("gaussian_well depth must be finite");
  }

  static Potential constant(double c) { return ConstantPotential{c}; }
  static Potential linear(double g) { return LinearPotential{g}; }
  static Potential harmonic(double k) { return HarmonicPotential{k}; }
  static Potential gaussian_well(double depth, double sigma) { return GaussianWellPotential{depth, sigma}; }

  double value(double x, double /*t*/ = 0.0) const {
    return std::visit(
        [x](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ConstantPotential>) return p.c;
          else if constexpr (std::is_same_v<T, LinearPotential>) return p.g * x;
          else if constexpr (std::is_same_v<T, HarmonicPotential>) return 0.5 * p.k * x * x;
          else return -p.depth * std::exp(-x * x / (2.0 * p.sigma * p.sigma));
        },
        v_);
  }

  double grad(double x, double /*t*/ = 0.0) const {
    return std::visit(
        [x](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ConstantPotential>) return 0.0;
          else if constexpr (std::is_same_v<T, LinearPotential>) return p.g;
          else if constexpr (std::is_same_v<T, HarmonicPotential>) return p.k * x;
          else {
            const double s2 = p.sigma * p.sigma;
            return p.depth * (x / s2) * std::exp(-x * x / (2.0 * s2));
          }
        },
        v_);
  }

  double d3(double x, double /*t*/ = 0.0) const {
    return std::visit(
        [x](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, GaussianWellPotential>) {
            const double s2 = p.sigma * p.sigma;
            const double s4 = s2 * s2;
            return p.depth * std::exp(-x * x / (2.0 * s2)) * (x * x * x / (s4 * s2) - 3.0 * x / s4);
          } else {
            return 0.0;
          }
        },
        v_);
  }

  /// True when every derivative of order three and above vanishes.
  bool is_at_most_quadratic() const { return !std::holds_alternative<GaussianWellPotential>(v_); }

  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

/// Config spelling, e.g. "gaussian_well depth=1 sigma=3".
inline std::string to_config(const Potential& pot) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantPotential>) os << "constant c=" << p.c;
        else if constexpr (std::is_same_v<T, LinearPotential>) os << "linear g=" << p.g;
        else if constexpr (std::is_same_v<T, HarmonicPotential>) os << "harmonic k=" << p.k;
        else os << "gaussian_well depth=" << p.depth << " sigma=" << p.sigma;
      },
      pot.variant());
  return os.str();
}

/// Parses "<kind> name=value ...". Unknown kinds or parameters throw
/// std::invalid_argument; omitted parameters take the struct defaults.
inline Potential parse_potential(std::string_view spec) {
  std::istringstream is{std::string(spec)};
  std::string kind;
  if (!(is >> kind)) throw std::invalid_argument("empty potential string");
  std::map<std::string, double> params;
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected name=value, got '" + tok + "'");
    const std::string name = tok.substr(0, eq);
    const std::string text = tok.substr(eq + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.empty())
      throw std::invalid_argument("bad number for potential parameter '" + name + "': " + text);
    if (!params.emplace(name, value).second)
      throw std::invalid_argument("duplicate potential parameter '" + name + "'");
  }
  auto take = [&](const std::string& name, double fallback) {
    auto it = params.find(name);
    if (it == params.end()) return fallback;
    const double v = it->second;
    params.erase(it);
    return v;
  };
  Potential pot;
  if (kind == "constant") pot = ConstantPotential{take("c", 0.0)};
  else if (kind == "linear") pot = LinearPotential{take("g", 0.0)};
  else if (kind == "harmonic") pot = HarmonicPotential{take("k", 1.0)};
  else if (kind == "gaussian_well") {
    const double depth = take("depth", 1.0);
    pot = GaussianWellPotential{depth, take("sigma", 1.0)};
  } else {
    throw std::invalid_argument("unknown potential kind '" + kind + "'");
  }
  if (!params.empty())
    throw std::invalid_argument("unknown parameter '" + params.begin()->first + "' for potential " + kind);
  return pot;
}

}  // namespace wigner

#pragma once

// Scenario files, the run driver that turns one into a directory of field
// snapshots, slice tables and diagnostics, and the comparison of two runs.
//
// Grammar (one entry per line, '#' starts a comment):
//   [section]
//   key = value
// Sections and keys:
//   [grid]      x_min x_max nx p_min p_max np
//   [potential] potential = <kind> name=value ...
//   [initial]   kind = oracle|file, amplitudes, phases, beta0_sq, n_max, file
//   [run]       method, t0, t1, nsteps, checkpoints, slices, mass, ordering,
//               drift, interpolation, force_point, nlo_form, derivative
//   [output]    precision

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wigner/errors.hpp"
#include "wigner/oracle.hpp"
#include "wigner/phasespace.hpp"
#include "wigner/potentials.hpp"
#include "wigner/pseudoparticle.hpp"
#include "wigner/spectral.hpp"

namespace wigner::scenario {

enum class Method { spectral_full, spectral_fo, lo, nlo, oracle };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::spectral_full: return "spectral-full";
    case Method::spectral_fo: return "spectral-fo";
    case Method::lo: return "lo";
    case Method::nlo: return "nlo";
    case Method::oracle: return "oracle";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
  if (s == "spectral-full") return Method::spectral_full;
  if (s == "spectral-fo") return Method::spectral_fo;
  if (s == "lo") return Method::lo;
  if (s == "nlo") return Method::nlo;
  if (s == "oracle") return Method::oracle;
  return std::nullopt;
}

enum class InitialKind { oracle, file };

struct InitialSpec {
  InitialKind kind = InitialKind::oracle;
  std::vector<double> amplitudes{1.0, 1.0};  ///< normalized on use
  std::vector<double> phases;                ///< radians, default all zero
  double beta0_sq = 1.0;
  std::size_t n_max = 10;
  std::filesystem::path file;
};

struct Scenario {
  std::string source = "<scenario>";
  std::optional<PhaseSpaceGrid> grid;  ///< absent only for file initial states
  Potential potential = Potential::gaussian_well(1.0, 3.0);
  InitialSpec initial;
  Method method = Method::spectral_full;
  double t0 = 0.0;
  double t1 = 3.0;
  std::size_t nsteps = 30;
  std::vector<double> checkpoints;  ///< empty means {t1}
  std::vector<double> slices{0.0, 0.3, 0.6};
  spectral::SpectralStepConfig spectral;
  pseudoparticle::LoOptions lo;
  pseudoparticle::NloOptions nlo;
  int precision = 6;
};

/// Default lattice: contains both bound states of the sigma = 3 well and puts
/// p = 0, 0.3, 0.6 exactly on lattice rows.
inline PhaseSpaceGrid default_grid() { return make_grid(-16.0, 16.0, 256, -4.8, 4.8, 256); }

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

class Reader {
 public:
  Reader(std::string source, std::map<std::string, Section> sections)
      : source_(std::move(source)), sections_(std::move(sections)) {}

  [[noreturn]] void fail(std::size_t line, const std::string& what) const { throw ConfigError(source_, line, what); }

  Entry* find(const std::string& sec, const std::string& key) {
    auto s = sections_.find(sec);
    if (s == sections_.end()) return nullptr;
    auto e = s->second.find(key);
    if (e == s->second.end()) return nullptr;
    e->second.used = true;
    return &e->second;
  }

  bool has_section(const std::string& sec) const { return sections_.count(sec) != 0; }

  double number(const std::string& sec, const std::string& key, double fallback) {
    Entry* e = find(sec, key);
    return e ? parse_number(*e, key) : fallback;
  }

  std::size_t count(const std::string& sec, const std::string& key, std::size_t fallback) {
    Entry* e = find(sec, key);
    if (!e) return fallback;
    const double v = parse_number(*e, key);
    if (v < 0 || v != std::floor(v) || v > 1e15) fail(e->line, key + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> list(const std::string& sec, const std::string& key, std::vector<double> fallback) {
    Entry* e = find(sec, key);
    if (!e) return fallback;
    std::vector<double> out;
    std::istringstream is(e->value);
    std::string tok;
    while (is >> tok) {
      if (tok.back() == ',') tok.pop_back();
      if (tok.empty()) continue;
      Entry tmp{tok, e->line};
      out.push_back(parse_number(tmp, key));
    }
    return out;
  }

  std::string text(const std::string& sec, const std::string& key, std::string fallback) {
    Entry* e = find(sec, key);
    return e ? e->value : fallback;
  }

  std::size_t line_of(const std::string& sec, const std::string& key) {
    Entry* e = find(sec, key);
    return e ? e->line : 0;
  }

  void reject_unused() const {
    for (const auto& [name, sec] : sections_)
      for (const auto& [key, e] : sec)
        if (!e.used) fail(e.line, "unknown key '" + key + "' in section [" + name + "]");
  }

 private:
  double parse_number(const Entry& e, const std::string& key) const {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    if (!e.value.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
      fail(e.line, "expected a finite number for '" + key + "', got '" + e.value + "'");
    return v;
  }

  std::string source_;
  std::map<std::string, Section> sections_;
};

inline const std::set<std::string>& known_sections() {
  static const std::set<std::string> s{"grid", "potential", "initial", "run", "output"};
  return s;
}

}  // namespace detail

/// Parses a scenario. `base_dir` resolves relative initial-state files.
inline Scenario parse_scenario(std::istream& is, const std::string& source = "<scenario>",
                               const std::filesystem::path& base_dir = {}) {
  std::map<std::string, detail::Section> sections;
  std::string current;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, lineno, "malformed section header '" + line + "'");
      current = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::known_sections().count(current))
        throw ConfigError(source, lineno, "unknown section [" + current + "]");
      if (sections.count(current)) throw ConfigError(source, lineno, "duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, lineno, "expected 'key = value', got '" + line + "'");
    if (current.empty()) throw ConfigError(source, lineno, "entry outside of any [section]");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, lineno, "empty key");
    if (value.empty()) throw ConfigError(source, lineno, "empty value for '" + key + "'");
    if (!sections[current].emplace(key, detail::Entry{value, lineno}).second)
      throw ConfigError(source, lineno, "duplicate key '" + key + "'");
  }

  detail::Reader rd(source, std::move(sections));
  Scenario sc;
  sc.source = source;

  // [potential]
  if (auto* e = rd.find("potential", "potential")) {
    try {
      sc.potential = parse_potential(e->value);
    } catch (const std::invalid_argument& ex) {
      rd.fail(e->line, ex.what());
    }
  }

  // [initial]
  {
    const std::string kind = rd.text("initial", "kind", "oracle");
    const std::size_t kline = rd.line_of("initial", "kind");
    if (kind == "oracle") sc.initial.kind = InitialKind::oracle;
    else if (kind == "file") sc.initial.kind = InitialKind::file;
    else rd.fail(kline, "initial kind must be 'oracle' or 'file', got '" + kind + "'");
    sc.initial.amplitudes = rd.list("initial", "amplitudes", sc.initial.amplitudes);
    sc.initial.phases = rd.list("initial", "phases", {});
    sc.initial.beta0_sq = rd.number("initial", "beta0_sq", sc.initial.beta0_sq);
    sc.initial.n_max = rd.count("initial", "n_max", sc.initial.n_max);
    if (auto* e = rd.find("initial", "file")) {
      std::filesystem::path p(e->value);
      sc.initial.file = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
    if (sc.initial.kind == InitialKind::file && sc.initial.file.empty())
      rd.fail(kline, "initial kind 'file' needs a 'file' entry");
    if (sc.initial.kind == InitialKind::oracle) {
      const std::size_t aline = rd.line_of("initial", "amplitudes");
      if (sc.initial.amplitudes.empty()) rd.fail(aline, "amplitudes must not be empty");
      if (!sc.initial.phases.empty() && sc.initial.phases.size() != sc.initial.amplitudes.size())
        rd.fail(rd.line_of("initial", "phases"), "phases must match the number of amplitudes");
      if (sc.initial.amplitudes.size() > sc.initial.n_max)
        rd.fail(aline, "more amplitudes than basis functions");
      if (!(sc.initial.beta0_sq > 0.0)) rd.fail(rd.line_of("initial", "beta0_sq"), "beta0_sq must be positive");
      if (sc.initial.n_max < 2) rd.fail(rd.line_of("initial", "n_max"), "n_max must be at least 2");
      if (!std::holds_alternative<GaussianWellPotential>(sc.potential.variant()))
        rd.fail(rd.line_of("potential", "potential"), "oracle initial states require a gaussian_well potential");
    }
  }

  // [grid]
  if (rd.has_section("grid") || sc.initial.kind == InitialKind::oracle) {
    const auto d = default_grid();
    const double x_min = rd.number("grid", "x_min", d.x_min);
    const double x_max = rd.number("grid", "x_max", d.x_max);
    const std::size_t nx = rd.count("grid", "nx", d.nx);
    const double p_min = rd.number("grid", "p_min", d.p_min);
    const double p_max = rd.number("grid", "p_max", d.p_max);
    const std::size_t np = rd.count("grid", "np", d.np);
    try {
      sc.grid = make_grid(x_min, x_max, nx, p_min, p_max, np);
    } catch (const std::invalid_argument& ex) {
      std::size_t line = 0;
      for (const char* k : {"x_min", "x_max", "nx", "p_min", "p_max", "np"}) line = std::max(line, rd.line_of("grid", k));
      rd.fail(line, ex.what());
    }
  }

  // [run]
  {
    const std::string m = rd.text("run", "method", "spectral-full");
    const auto method = parse_method(m);
    if (!method)
      rd.fail(rd.line_of("run", "method"),
              "method must be one of spectral-full, spectral-fo, lo, nlo, oracle; got '" + m + "'");
    sc.method = *method;
    if (sc.method == Method::oracle && sc.initial.kind != InitialKind::oracle)
      rd.fail(rd.line_of("run", "method"), "method 'oracle' needs an oracle initial state");
    sc.t0 = rd.number("run", "t0", sc.t0);
    sc.t1 = rd.number("run", "t1", sc.t1);
    if (!(sc.t1 > sc.t0)) rd.fail(std::max(rd.line_of("run", "t0"), rd.line_of("run", "t1")), "t1 must exceed t0");
    sc.nsteps = rd.count("run", "nsteps", sc.nsteps);
    if (sc.nsteps < 1) rd.fail(rd.line_of("run", "nsteps"), "nsteps must be at least 1");
    sc.checkpoints = rd.list("run", "checkpoints", {sc.t1});
    const double dt = (sc.t1 - sc.t0) / static_cast<double>(sc.nsteps);
    for (double c : sc.checkpoints) {
      const std::size_t line = rd.line_of("run", "checkpoints");
      if (c < sc.t0 - 1e-12 || c > sc.t1 + 1e-12) rd.fail(line, "checkpoint outside [t0, t1]");
      const double k = (c - sc.t0) / dt;
      if (sc.method != Method::oracle && std::abs(k - std::round(k)) > 1e-9)
        rd.fail(line, "checkpoint does not fall on a step boundary");
    }
    std::sort(sc.checkpoints.begin(), sc.checkpoints.end());
    sc.checkpoints.erase(std::unique(sc.checkpoints.begin(), sc.checkpoints.end()), sc.checkpoints.end());
    sc.slices = rd.list("run", "slices", sc.slices);

    sc.spectral.mass = rd.number("run", "mass", 1.0);
    if (!(sc.spectral.mass > 0.0)) rd.fail(rd.line_of("run", "mass"), "mass must be positive");
    sc.lo.mass = sc.spectral.mass;

    auto choice = [&](const char* key, const std::string& fallback, std::initializer_list<const char*> allowed) {
      const std::string v = rd.text("run", key, fallback);
      for (const char* a : allowed)
        if (v == a) return v;
      std::string msg = std::string(key) + " must be one of";
      for (const char* a : allowed) msg += std::string(" ") + a;
      rd.fail(rd.line_of("run", key), msg + "; got '" + v + "'");
    };
    sc.spectral.ordering = choice("ordering", "drift-kick", {"drift-kick", "literal"}) == "literal"
                               ? spectral::StepOrdering::literal
                               : spectral::StepOrdering::drift_kick;
    sc.spectral.drift_mode = choice("drift", "spectral", {"spectral", "interpolation"}) == "interpolation"
                                 ? spectral::DriftMode::interpolation
                                 : spectral::DriftMode::spectral_shift;
    const auto interp = choice("interpolation", "bicubic", {"bicubic", "bilinear"}) == "bilinear"
                            ? InterpolationKind::bilinear
                            : InterpolationKind::bicubic;
    sc.spectral.interpolation = interp;
    sc.lo.interpolation = interp;
    sc.lo.force_point = choice("force_point", "departure", {"departure", "arrival"}) == "arrival"
                            ? pseudoparticle::ForcePoint::arrival
                            : pseudoparticle::ForcePoint::departure;
    sc.nlo.form = choice("nlo_form", "exponentiated", {"exponentiated", "additive"}) == "additive"
                      ? pseudoparticle::NloForm::additive
                      : pseudoparticle::NloForm::exponentiated;
    sc.nlo.derivative = choice("derivative", "spectral", {"spectral", "finite-difference"}) == "finite-difference"
                            ? pseudoparticle::Derivative::finite_difference
                            : pseudoparticle::Derivative::spectral;
  }

  // [output]
  {
    const std::size_t prec = rd.count("output", "precision", 6);
    if (prec < 1 || prec > 17) rd.fail(rd.line_of("output", "precision"), "precision must be in 1..17");
    sc.precision = static_cast<int>(prec);
  }

  rd.reject_unused();

  if (sc.grid) {
    for (double p : sc.slices)
      if (p < sc.grid->p_min || p > sc.grid->p_max)
        throw ConfigError(source, rd.line_of("run", "slices"), "slice momentum outside the grid p-bounds");
  }
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  return parse_scenario(in, path.string(), path.parent_path());
}

/// Builds the oracle superposition of a scenario.
inline oracle::SuperpositionState make_state(const Scenario& sc) {
  const auto* well = std::get_if<GaussianWellPotential>(&sc.potential.variant());
  if (!well) throw ConfigError("oracle states require a gaussian_well potential");
  auto sol = oracle::solve(oracle::make_basis(sc.initial.beta0_sq, sc.initial.n_max), well->sigma, well->depth);
  std::vector<std::complex<double>> amps;
  for (std::size_t l = 0; l < sc.initial.amplitudes.size(); ++l) {
    const double phase = sc.initial.phases.empty() ? 0.0 : sc.initial.phases[l];
    amps.push_back(std::polar(sc.initial.amplitudes[l], phase));
  }
  try {
    return oracle::SuperpositionState::normalized(std::move(sol), std::move(amps));
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
}

inline WignerField initial_field(const Scenario& sc) {
  if (sc.initial.kind == InitialKind::file) {
    std::ifstream in(sc.initial.file);
    if (!in) throw ConfigError("cannot open initial field '" + sc.initial.file.string() + "'");
    WignerField f;
    try {
      f = read_field(in);
    } catch (const std::exception& ex) {
      throw ConfigError(sc.initial.file.string() + ": " + ex.what());
    }
    if (sc.grid && !(*sc.grid == f.grid())) throw ConfigError("initial field grid differs from the [grid] section");
    f.set_time(sc.t0);
    return f;
  }
  return oracle::sample_field(make_state(sc), sc.t0, *sc.grid);
}

struct SliceTable {
  double p = 0.0;  ///< snapped lattice momentum
  double time = 0.0;
  std::string method;
  std::vector<double> x;
  std::vector<double> f;
};

inline SliceTable make_slice(const WignerField& field, double p_request, const std::string& method) {
  const auto& g = field.grid();
  const std::size_t j = g.nearest_p_index(p_request);
  SliceTable s{g.p(j), field.time(), method, {}, {}};
  for (std::size_t i = 0; i < g.nx; ++i) {
    s.x.push_back(g.x(i));
    s.f.push_back(field(i, j));
  }
  return s;
}

inline void write_slice(std::ostream& os, const SliceTable& s, int precision = 6) {
  os << std::setprecision(precision) << "# slice p=" << s.p << " t=" << s.time << " method=" << s.method << '\n';
  for (std::size_t i = 0; i < s.x.size(); ++i) os << s.x[i] << ' ' << s.f[i] << '\n';
}

inline SliceTable read_slice(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# slice ", 0) != 0)
    throw std::runtime_error("read_slice: malformed header");
  SliceTable s;
  std::istringstream hs(line.substr(8));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
    if (k == "p") s.p = std::stod(v);
    else if (k == "t") s.time = std::stod(v);
    else if (k == "method") s.method = v;
  }
  double x, f;
  while (is >> x >> f) {
    s.x.push_back(x);
    s.f.push_back(f);
  }
  return s;
}

struct Extremum {
  double x = 0.0;
  double value = 0.0;
};

inline Extremum slice_max(const SliceTable& s) {
  const auto it = std::max_element(s.f.begin(), s.f.end());
  const auto k = static_cast<std::size_t>(it - s.f.begin());
  return {s.x.at(k), *it};
}

inline Extremum slice_min(const SliceTable& s) {
  const auto it = std::min_element(s.f.begin(), s.f.end());
  const auto k = static_cast<std::size_t>(it - s.f.begin());
  return {s.x.at(k), *it};
}

struct CheckpointRecord {
  double time = 0.0;
  std::string field_file;
  std::vector<std::string> slice_files;
};

struct RunSummary {
  std::filesystem::path directory;
  std::vector<CheckpointRecord> checkpoints;
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<std::string> warnings;
  double max_imag_residue = 0.0;
};

namespace detail {

inline std::string index_name(const char* stem, std::size_t k, const char* ext) {
  std::ostringstream os;
  os << stem << std::setw(3) << std::setfill('0') << k << ext;
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// Executes a scenario and writes into `outdir`:
///   field_NNN.txt           snapshot per checkpoint
///   slice_NNN_MM.txt        one table per checkpoint and slice momentum
///   diagnostics.csv         step,time,norm,min,max
///   manifest.txt            method, grid, checkpoints and file names
inline RunSummary run_scenario(const Scenario& sc, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  const WignerField f0 = initial_field(sc);
  const auto& g = f0.grid();
  for (double p : sc.slices)
    if (p < g.p_min || p > g.p_max) throw ConfigError(sc.source + ": slice momentum outside the grid p-bounds");

  RunSummary summary;
  summary.directory = outdir;
  const std::string method = to_string(sc.method);

  auto emit = [&](const WignerField& field) {
    CheckpointRecord rec;
    rec.time = field.time();
    const std::size_t k = summary.checkpoints.size();
    rec.field_file = detail::index_name("field_", k, ".txt");
    detail::write_text(outdir / rec.field_file, [&](std::ostream& os) { write_field(os, field, sc.precision); });
    for (std::size_t m = 0; m < sc.slices.size(); ++m) {
      std::ostringstream name;
      name << "slice_" << std::setw(3) << std::setfill('0') << k << '_' << std::setw(2) << std::setfill('0') << m
           << ".txt";
      const auto table = make_slice(field, sc.slices[m], method);
      detail::write_text(outdir / name.str(), [&](std::ostream& os) { write_slice(os, table, sc.precision); });
      rec.slice_files.push_back(name.str());
    }
    summary.checkpoints.push_back(std::move(rec));
  };

  if (sc.method == Method::oracle) {
    const auto state = make_state(sc);
    for (double t : sc.checkpoints) {
      const WignerField f = oracle::sample_field(state, t, g);
      summary.diagnostics.push_back(diagnose(summary.diagnostics.size(), f));
      emit(f);
    }
  } else {
    const double dt = (sc.t1 - sc.t0) / static_cast<double>(sc.nsteps);
    std::vector<std::size_t> wanted;
    for (double c : sc.checkpoints) wanted.push_back(static_cast<std::size_t>(std::llround((c - sc.t0) / dt)));
    std::size_t next = 0;
    if (next < wanted.size() && wanted[next] == 0) {
      emit(f0);
      ++next;
    }
    const StepObserver observer = [&](std::size_t step, const WignerField& f) {
      while (next < wanted.size() && wanted[next] == step) {
        emit(f);
        ++next;
      }
    };
    EvolveResult result;
    spectral::StepStats stats;
    switch (sc.method) {
      case Method::spectral_full:
      case Method::spectral_fo: {
        auto cfg = sc.spectral;
        cfg.variant = sc.method == Method::spectral_full ? spectral::KickVariant::full : spectral::KickVariant::first_order;
        result = spectral::evolve(f0, sc.potential, sc.t0, sc.t1, sc.nsteps, cfg, observer, &stats);
        break;
      }
      case Method::lo:
        result = pseudoparticle::evolve_lo(f0, sc.potential, sc.t0, sc.t1, sc.nsteps, sc.lo, observer);
        break;
      case Method::nlo:
        result = pseudoparticle::evolve_nlo(f0, sc.potential, sc.t0, sc.t1, sc.nsteps, sc.lo, sc.nlo, observer);
        break;
      case Method::oracle:
        break;
    }
    summary.diagnostics = std::move(result.diagnostics);
    summary.warnings = std::move(result.warnings);
    summary.max_imag_residue = stats.max_imag_residue;
  }

  detail::write_text(outdir / "diagnostics.csv", [&](std::ostream& os) {
    os << "step,time,norm,min,max\n" << std::setprecision(sc.precision);
    for (const auto& r : summary.diagnostics)
      os << r.step << ',' << r.time << ',' << r.norm << ',' << r.min << ',' << r.max << '\n';
  });
  detail::write_text(outdir / "manifest.txt", [&](std::ostream& os) {
    os << std::setprecision(17);
    os << "method " << method << '\n';
    os << "potential " << to_config(sc.potential) << '\n';
    os << "grid " << g.x_min << ' ' << g.x_max << ' ' << g.nx << ' ' << g.p_min << ' ' << g.p_max << ' ' << g.np
       << '\n';
    os << "steps " << sc.nsteps << " t0 " << sc.t0 << " t1 " << sc.t1 << '\n';
    for (const auto& c : summary.checkpoints) {
      os << "checkpoint " << c.time << ' ' << c.field_file;
      for (const auto& s : c.slice_files) os << ' ' << s;
      os << '\n';
    }
    for (const auto& w : summary.warnings) os << "warning " << w << '\n';
  });
  return summary;
}

/// Manifest contents read back from a run directory.
struct RunManifest {
  std::filesystem::path directory;
  std::string method;
  std::vector<CheckpointRecord> checkpoints;
};

inline RunManifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw ConfigError("no manifest.txt in '" + dir.string() + "'");
  RunManifest m;
  m.directory = dir;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "method") ls >> m.method;
    else if (tag == "checkpoint") {
      CheckpointRecord c;
      ls >> c.time >> c.field_file;
      std::string s;
      while (ls >> s) c.slice_files.push_back(s);
      m.checkpoints.push_back(std::move(c));
    }
  }
  return m;
}

struct CompareTolerances {
  double linf = 0.02;
  double extremum_value = 0.005;
};

struct CheckpointDiff {
  double time = 0.0;
  DiffMetrics metrics;
  double x_at = 0.0, p_at = 0.0;
};

struct SliceDiff {
  double time = 0.0;
  double p = 0.0;
  Extremum a_max, a_min, b_max, b_min;
};

struct CompareReport {
  std::string method_a, method_b;
  std::vector<CheckpointDiff> checkpoints;
  std::vector<SliceDiff> slices;
  std::vector<std::string> verdicts;
  bool pass = true;
};

inline CompareReport compare_runs(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b,
                                  const CompareTolerances& tol = {}) {
  const auto a = read_manifest(dir_a);
  const auto b = read_manifest(dir_b);
  if (a.checkpoints.size() != b.checkpoints.size())
    throw ConfigError("runs have different checkpoint counts");
  CompareReport rep;
  rep.method_a = a.method;
  rep.method_b = b.method;

  auto load_field = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open '" + p.string() + "'");
    return read_field(in);
  };
  auto load_slice = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open '" + p.string() + "'");
    return read_slice(in);
  };
  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
  };

  for (std::size_t k = 0; k < a.checkpoints.size(); ++k) {
    const auto& ca = a.checkpoints[k];
    const auto& cb = b.checkpoints[k];
    if (std::abs(ca.time - cb.time) > 1e-9 * std::max(1.0, std::abs(ca.time)))
      throw ConfigError("checkpoint times differ: " + fmt(ca.time) + " vs " + fmt(cb.time));
    const WignerField fa = load_field(a.directory / ca.field_file);
    const WignerField fb = load_field(b.directory / cb.field_file);
    if (!(fa.grid() == fb.grid())) throw ConfigError("runs use different grids");
    CheckpointDiff d{ca.time, diff_metrics(fa, fb), 0.0, 0.0};
    d.x_at = fa.grid().x(d.metrics.linf_i);
    d.p_at = fa.grid().p(d.metrics.linf_j);
    rep.checkpoints.push_back(d);
    const bool ok = d.metrics.linf <= tol.linf;
    rep.pass = rep.pass && ok;
    rep.verdicts.push_back("t=" + fmt(d.time) + " linf " + fmt(d.metrics.linf) + (ok ? " <= " : " > ") +
                           fmt(tol.linf) + (ok ? " PASS" : " FAIL"));

    if (ca.slice_files.size() != cb.slice_files.size()) throw ConfigError("runs have different slice lists");
    for (std::size_t m = 0; m < ca.slice_files.size(); ++m) {
      const auto sa = load_slice(a.directory / ca.slice_files[m]);
      const auto sb = load_slice(b.directory / cb.slice_files[m]);
      if (std::abs(sa.p - sb.p) > 1e-9) throw ConfigError("slice momenta differ");
      SliceDiff s{d.time, sa.p, slice_max(sa), slice_min(sa), slice_max(sb), slice_min(sb)};
      rep.slices.push_back(s);
      const double dx = fa.grid().dx();
      const bool peak_loc = std::abs(s.a_max.x - s.b_max.x) <= 0.5 * dx;
      const bool trough_loc = std::abs(s.a_min.x - s.b_min.x) <= 0.5 * dx;
      const double peak_gap = std::abs(s.a_max.value - s.b_max.value);
      const double trough_gap = std::abs(s.a_min.value - s.b_min.value);
      const std::string where = "t=" + fmt(d.time) + " p=" + fmt(s.p);
      rep.verdicts.push_back(where + " peak location " + (peak_loc ? "match PASS" : "mismatch FAIL"));
      rep.verdicts.push_back(where + " trough location " + (trough_loc ? "match PASS" : "mismatch FAIL"));
      rep.verdicts.push_back(where + " peak gap " + fmt(peak_gap) +
                             (peak_gap <= tol.extremum_value ? " PASS" : " FAIL"));
      rep.verdicts.push_back(where + " trough gap " + fmt(trough_gap) +
                             (trough_gap <= tol.extremum_value ? " PASS" : " FAIL"));
      rep.pass = rep.pass && peak_loc && trough_loc && peak_gap <= tol.extremum_value &&
                 trough_gap <= tol.extremum_value;
    }
  }
  return rep;
}

inline void print_report(std::ostream& os, const CompareReport& rep) {
  os << std::setprecision(6);
  os << "# compare " << rep.method_a << " vs " << rep.method_b << '\n';
  os << "# time l2 linf x_at p_at\n";
  for (const auto& c : rep.checkpoints)
    os << c.time << ' ' << c.metrics.l2 << ' ' << c.metrics.linf << ' ' << c.x_at << ' ' << c.p_at << '\n';
  os << "# time p a_max@x a_min@x b_max@x b_min@x\n";
  for (const auto& s : rep.slices)
    os << s.time << ' ' << s.p << ' ' << s.a_max.value << '@' << s.a_max.x << ' ' << s.a_min.value << '@'
       << s.a_min.x << ' ' << s.b_max.value << '@' << s.b_max.x << ' ' << s.b_min.value << '@' << s.b_min.x << '\n';
  for (const auto& v : rep.verdicts) os << "verdict " << v << '\n';
  os << "overall " << (rep.pass ? "PASS" : "FAIL") << '\n';
}

}  // namespace wigner::scenario

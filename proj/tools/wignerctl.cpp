// wignerctl: command-line front end for scenario runs, run comparison, the
// Gaussian-well oracle, single-method evolution and particle transcription.
//
// Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
// 3 numerical failure.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wigner/wigner.hpp"

namespace fs = std::filesystem;
using namespace wigner;

namespace {

struct GridOptions {
  double x_min = -16.0, x_max = 16.0, p_min = -4.8, p_max = 4.8;
  std::size_t nx = 256, np = 256;

  void add(CLI::App* app) {
    app->add_option("--x-min", x_min, "Lower x bound")->capture_default_str();
    app->add_option("--x-max", x_max, "Upper x bound (excluded)")->capture_default_str();
    app->add_option("--nx", nx, "x nodes, power of two")->capture_default_str();
    app->add_option("--p-min", p_min, "Lower p bound")->capture_default_str();
    app->add_option("--p-max", p_max, "Upper p bound (excluded)")->capture_default_str();
    app->add_option("--np", np, "p nodes, power of two")->capture_default_str();
  }
  PhaseSpaceGrid grid() const {
    try {
      return make_grid(x_min, x_max, nx, p_min, p_max, np);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

struct OracleOptions {
  double sigma = 3.0, depth = 1.0, beta0_sq = 1.0;
  std::size_t n_max = 10;

  void add(CLI::App* app) {
    app->add_option("--sigma", sigma, "Well width")->capture_default_str();
    app->add_option("--depth", depth, "Well depth")->capture_default_str();
    app->add_option("--beta0sq", beta0_sq, "Basis width scale beta0^2")->capture_default_str();
    app->add_option("--nmax", n_max, "Number of basis functions")->capture_default_str();
  }
  oracle::EigenSolution solve() const {
    oracle::GaussianBasis basis;
    try {
      basis = oracle::make_basis(beta0_sq, n_max);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return oracle::solve(basis, sigma, depth);
  }
};

WignerField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file '" + path + "'");
  try {
    return read_field(in);
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_field(const std::string& path, const WignerField& f, int precision) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_field(out, f, precision);
}

oracle::SuperpositionState make_superposition(const OracleOptions& o, const std::vector<double>& amps,
                                              const std::vector<double>& phases) {
  if (!phases.empty() && phases.size() != amps.size())
    throw ConfigError("--phases must have as many entries as --amplitudes");
  std::vector<std::complex<double>> b;
  for (std::size_t k = 0; k < amps.size(); ++k) b.push_back(std::polar(amps[k], phases.empty() ? 0.0 : phases[k]));
  auto sol = o.solve();
  try {
    return oracle::SuperpositionState::normalized(std::move(sol), std::move(b));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Potential potential_from(const std::string& spec) {
  try {
    return parse_potential(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

pseudoparticle::DFunctionParams dfunction(const std::string& alpha, unsigned M, double cell) {
  double factor = 1.0;
  if (alpha != "auto") {
    try {
      std::size_t used = 0;
      factor = std::stod(alpha, &used);
      if (used != alpha.size()) throw std::invalid_argument(alpha);
    } catch (const std::exception&) {
      throw ConfigError("--dfunc-alpha must be 'auto' or a number, got '" + alpha + "'");
    }
  }
  try {
    return pseudoparticle::dfunction_for_cell(cell, M, factor);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// Lattice spanned by the particle positions of an ensemble built by to_ensemble.
PhaseSpaceGrid infer_grid(const pseudoparticle::Ensemble& ens) {
  if (ens.particles.empty()) throw ConfigError("cannot infer a grid from an empty ensemble; pass --like");
  std::set<double> rs, ps;
  for (const auto& q : ens.particles) {
    rs.insert(q.r);
    ps.insert(q.p);
  }
  const double dr = ens.particles.front().dr, dp = ens.particles.front().dp;
  const auto nx = static_cast<std::size_t>(std::llround((*rs.rbegin() - *rs.begin()) / dr)) + 1;
  const auto np = static_cast<std::size_t>(std::llround((*ps.rbegin() - *ps.begin()) / dp)) + 1;
  try {
    return make_grid(*rs.begin(), *rs.begin() + nx * dr, nx, *ps.begin(), *ps.begin() + np * dp, np);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("ensemble does not span a power-of-two lattice (") + e.what() + "); pass --like");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-space quantum dynamics: Wigner-function propagation and verification"};
  app.require_subcommand(1);

  // run
  std::string scenario_file, run_out;
  auto* run = app.add_subcommand("run", "Execute a scenario file");
  run->add_option("scenario", scenario_file, "Scenario file")->required();
  run->add_option("-o,--out", run_out, "Output directory (default: <scenario stem>.run)");

  // compare
  std::string dir_a, dir_b;
  scenario::CompareTolerances tol;
  auto* compare = app.add_subcommand("compare", "Compare two run directories");
  compare->add_option("run_a", dir_a, "Reference run directory")->required();
  compare->add_option("run_b", dir_b, "Run directory to check")->required();
  compare->add_option("--tol-linf", tol.linf, "Global max-abs tolerance")->capture_default_str();
  compare->add_option("--tol-extremum", tol.extremum_value, "Peak/trough value tolerance")->capture_default_str();

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Gaussian-well eigenfunction oracle");
  oracle_cmd->require_subcommand(1);
  OracleOptions solve_opts;
  std::size_t print_states = 2;
  auto* solve_cmd = oracle_cmd->add_subcommand("solve", "Print the even-parity energies");
  solve_opts.add(solve_cmd);
  solve_cmd->add_option("--states", print_states, "How many energies to print")->capture_default_str();

  OracleOptions field_opts;
  GridOptions field_grid;
  double field_t = 0.0;
  std::vector<double> field_amps{1.0, 1.0}, field_phases;
  std::string field_out = "-";
  int field_precision = 6;
  auto* field_cmd = oracle_cmd->add_subcommand("field", "Sample the superposition's Wigner function");
  field_opts.add(field_cmd);
  field_grid.add(field_cmd);
  field_cmd->add_option("--t", field_t, "Time")->capture_default_str();
  field_cmd->add_option("--amplitudes", field_amps, "Eigenstate amplitudes b_l (normalized)");
  field_cmd->add_option("--phases", field_phases, "Amplitude phases in radians");
  field_cmd->add_option("-o,--out", field_out, "Output file, '-' for stdout")->capture_default_str();
  field_cmd->add_option("--precision", field_precision, "Significant digits")->capture_default_str();

  // evolve
  std::string ev_method = "spectral-full", ev_potential = "gaussian_well depth=1 sigma=3", ev_in, ev_out = "evolve.run";
  double ev_dt = 0.1, ev_t0 = 0.0, ev_mass = 1.0;
  std::size_t ev_steps = 30, ev_every = 0;
  int ev_precision = 6;
  std::string ev_ordering = "drift-kick", ev_force = "departure", ev_nlo_form = "exponentiated";
  OracleOptions ev_oracle;
  GridOptions ev_grid;
  auto* evolve = app.add_subcommand("evolve", "Propagate a field with one method");
  evolve->add_option("--method", ev_method, "spectral-full | spectral-fo | lo | nlo")
      ->check(CLI::IsMember({"spectral-full", "spectral-fo", "lo", "nlo"}))
      ->capture_default_str();
  evolve->add_option("--dt", ev_dt, "Time step")->capture_default_str();
  evolve->add_option("--steps", ev_steps, "Number of steps")->capture_default_str();
  evolve->add_option("--t0", ev_t0, "Start time")->capture_default_str();
  evolve->add_option("--mass", ev_mass, "Particle mass")->capture_default_str();
  evolve->add_option("--potential", ev_potential, "Potential, e.g. 'harmonic k=1'")->capture_default_str();
  evolve->add_option("--in", ev_in, "Initial field file (default: oracle two-state superposition)");
  evolve->add_option("-o,--out-dir", ev_out, "Output directory")->capture_default_str();
  evolve->add_option("--every", ev_every, "Also write a snapshot every N steps");
  evolve->add_option("--precision", ev_precision, "Significant digits")->capture_default_str();
  evolve->add_option("--ordering", ev_ordering, "drift-kick | literal (spectral methods)")
      ->check(CLI::IsMember({"drift-kick", "literal"}))
      ->capture_default_str();
  evolve->add_option("--force-point", ev_force, "departure | arrival (lo, nlo)")
      ->check(CLI::IsMember({"departure", "arrival"}))
      ->capture_default_str();
  evolve->add_option("--nlo-form", ev_nlo_form, "exponentiated | additive")
      ->check(CLI::IsMember({"exponentiated", "additive"}))
      ->capture_default_str();
  ev_oracle.add(evolve);
  ev_grid.add(evolve);

  // transcribe
  std::string tr_to, tr_in, tr_out = "-", tr_like, tr_alpha = "auto";
  unsigned tr_M = 3;
  int tr_precision = 6;
  auto* transcribe = app.add_subcommand("transcribe", "Convert between lattice fields and particle ensembles");
  transcribe->add_option("--to", tr_to, "ensemble | field")->required()->check(CLI::IsMember({"ensemble", "field"}));
  transcribe->add_option("--in", tr_in, "Input file")->required();
  transcribe->add_option("-o,--out", tr_out, "Output file, '-' for stdout")->capture_default_str();
  transcribe->add_option("--like", tr_like, "Field file whose lattice the deposit targets");
  transcribe->add_option("--dfunc-M", tr_M, "D-function truncation order")->capture_default_str();
  transcribe->add_option("--dfunc-alpha", tr_alpha, "'auto' (1/cell) or a factor c for alpha = c/cell")
      ->capture_default_str();
  transcribe->add_option("--precision", tr_precision, "Significant digits")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      const auto sc = scenario::load_scenario(scenario_file);
      const fs::path out = run_out.empty() ? fs::path(scenario_file).replace_extension(".run") : fs::path(run_out);
      const auto summary = scenario::run_scenario(sc, out);
      for (const auto& w : summary.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << std::setprecision(6);
      std::cout << "method " << scenario::to_string(sc.method) << '\n';
      for (const auto& c : summary.checkpoints) {
        std::cout << "checkpoint t=" << c.time << ' ' << (out / c.field_file).string() << '\n';
        std::ifstream in(out / c.field_file);
        const auto f = read_field(in);
        for (double p : sc.slices) {
          const auto s = scenario::make_slice(f, p, scenario::to_string(sc.method));
          const auto mx = scenario::slice_max(s), mn = scenario::slice_min(s);
          std::cout << "  slice p=" << s.p << " max " << mx.value << " at x=" << mx.x << " min " << mn.value
                    << " at x=" << mn.x << '\n';
        }
      }
      return 0;
    }

    if (*compare) {
      const auto rep = scenario::compare_runs(dir_a, dir_b, tol);
      scenario::print_report(std::cout, rep);
      return 0;
    }

    if (*solve_cmd) {
      const auto sol = solve_opts.solve();
      std::cout << std::setprecision(6);
      std::cout << "# sigma " << solve_opts.sigma << " depth " << solve_opts.depth << " beta0sq " << solve_opts.beta0_sq
                << " nmax " << solve_opts.n_max << " min_pivot " << sol.min_pivot << '\n';
      std::cout << "# state energy residual\n";
      for (std::size_t l = 0; l < std::min(print_states, sol.size()); ++l)
        std::cout << l << ' ' << sol.energies(static_cast<Eigen::Index>(l)) << ' ' << sol.residual(l) << '\n';
      return 0;
    }

    if (*field_cmd) {
      const auto state = make_superposition(field_opts, field_amps, field_phases);
      const auto f = oracle::sample_field(state, field_t, field_grid.grid());
      if (field_out == "-") write_field(std::cout, f, field_precision);
      else save_field(field_out, f, field_precision);
      return 0;
    }

    if (*evolve) {
      if (!(ev_dt > 0.0)) throw ConfigError("--dt must be positive");
      if (ev_steps < 1) throw ConfigError("--steps must be at least 1");
      if (!(ev_mass > 0.0)) throw ConfigError("--mass must be positive");
      const Potential pot = potential_from(ev_potential);
      WignerField f0;
      if (!ev_in.empty()) {
        f0 = load_field(ev_in);
      } else {
        auto opts = ev_oracle;
        if (const auto* well = std::get_if<GaussianWellPotential>(&pot.variant())) {
          opts.sigma = well->sigma;
          opts.depth = well->depth;
        }
        f0 = oracle::sample_field(make_superposition(opts, {1.0, 1.0}, {}), ev_t0, ev_grid.grid());
      }
      f0.set_time(ev_t0);
      fs::create_directories(ev_out);
      const double t1 = ev_t0 + ev_dt * static_cast<double>(ev_steps);
      auto snapshot = [&](std::size_t step, const WignerField& f) {
        std::ostringstream name;
        name << "field_" << std::setw(5) << std::setfill('0') << step << ".txt";
        save_field((fs::path(ev_out) / name.str()).string(), f, ev_precision);
      };
      const StepObserver observer = [&](std::size_t step, const WignerField& f) {
        if ((ev_every > 0 && step % ev_every == 0) || step == ev_steps) snapshot(step, f);
      };
      snapshot(0, f0);
      EvolveResult result;
      spectral::StepStats stats;
      if (ev_method == "spectral-full" || ev_method == "spectral-fo") {
        spectral::SpectralStepConfig cfg;
        cfg.mass = ev_mass;
        cfg.variant = ev_method == "spectral-full" ? spectral::KickVariant::full : spectral::KickVariant::first_order;
        cfg.ordering = ev_ordering == "literal" ? spectral::StepOrdering::literal : spectral::StepOrdering::drift_kick;
        result = spectral::evolve(f0, pot, ev_t0, t1, ev_steps, cfg, observer, &stats);
      } else {
        pseudoparticle::LoOptions lo;
        lo.mass = ev_mass;
        lo.force_point = ev_force == "arrival" ? pseudoparticle::ForcePoint::arrival : pseudoparticle::ForcePoint::departure;
        if (ev_method == "lo") {
          result = pseudoparticle::evolve_lo(f0, pot, ev_t0, t1, ev_steps, lo, observer);
        } else {
          pseudoparticle::NloOptions nlo;
          nlo.form = ev_nlo_form == "additive" ? pseudoparticle::NloForm::additive : pseudoparticle::NloForm::exponentiated;
          result = pseudoparticle::evolve_nlo(f0, pot, ev_t0, t1, ev_steps, lo, nlo, observer);
        }
      }
      std::ofstream csv(fs::path(ev_out) / "diagnostics.csv");
      csv << "step,time,norm,min,max\n" << std::setprecision(ev_precision);
      for (const auto& r : result.diagnostics)
        csv << r.step << ',' << r.time << ',' << r.norm << ',' << r.min << ',' << r.max << '\n';
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      const auto& last = result.diagnostics.back();
      std::cout << std::setprecision(6) << "t=" << last.time << " norm " << last.norm << " min " << last.min << " max "
                << last.max << '\n';
      return 0;
    }

    if (*transcribe) {
      std::ifstream in(tr_in);
      if (!in) throw ConfigError("cannot open '" + tr_in + "'");
      std::ofstream file_out;
      std::ostream* os = &std::cout;
      if (tr_out != "-") {
        file_out.open(tr_out);
        if (!file_out) throw std::runtime_error("cannot write '" + tr_out + "'");
        os = &file_out;
      }
      if (tr_to == "ensemble") {
        const auto f = read_field(in);
        pseudoparticle::write_ensemble(*os, pseudoparticle::to_ensemble(f), tr_precision);
      } else {
        const auto ens = pseudoparticle::read_ensemble(in);
        const PhaseSpaceGrid g = tr_like.empty() ? infer_grid(ens) : load_field(tr_like).grid();
        const auto dr = dfunction(tr_alpha, tr_M, g.dx());
        const auto dp = dfunction(tr_alpha, tr_M, g.dp());
        write_field(*os, pseudoparticle::deposit(ens, g, dr, dp), tr_precision);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

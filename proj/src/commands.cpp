// The six nls-npd subcommands.  Each one reads its block of the config,
// runs the library, writes CSV tables plus a JSON report into the output
// directory and returns the invariant checks it evaluated.

#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "nlsnpd/cli_io.hpp"
#include "nlsnpd/dynamics.hpp"
#include "nlsnpd/exact_solutions.hpp"
#include "nlsnpd/potentials.hpp"
#include "nlsnpd/stationary.hpp"

namespace nlsnpd::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v) { return format_double(v); }
std::string num(std::optional<double> v) { return v ? format_double(*v) : ""; }

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

json report_header(const std::string& command, const ModelParams& params,
                   const RunConfig& cfg) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["params"] = params_json(params);
  j["config"] = cfg.entries();
  return j;
}

void check(CommandOutcome& out, bool ok, const std::string& what) {
  out.summary["checks"][what] = ok;
  if (!ok) {
    out.passed = false;
    out.failures.push_back(what);
  }
}

long positive(const RunConfig& cfg, const std::string& key, long fallback) {
  const long v = cfg.get_long(key, fallback);
  if (v < 1) throw ConfigError(key + " must be >= 1");
  return v;
}

NodeGuard guard_from(const RunConfig& cfg) {
  NodeGuard g;
  g.floor_rel = cfg.get_double("guard.floor_rel", g.floor_rel);
  g.exclusion_halfwidth_steps =
      cfg.get_long("guard.halfwidth_steps", g.exclusion_halfwidth_steps);
  if (!(g.floor_rel >= 0.0) || g.exclusion_halfwidth_steps < 0)
    throw ConfigError("guard values must be non-negative");
  return g;
}

PotentialKind kind_from(const RunConfig& cfg, const std::string& key) {
  const std::string name = cfg.get_string(key, "regularized");
  try {
    return PotentialKind::parse(name);
  } catch (const DomainError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

// "sine", or comma-separated a0,c1,s1,c2,s2,... with period eta*L.
FourierSeries alpha_from(const RunConfig& cfg, const std::string& key,
                         const ModelParams& params) {
  const std::string text = cfg.get_string(key, "sine");
  if (text == "sine") return FourierSeries::sine(params.shift_length());
  std::vector<double> coef;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || !std::isfinite(v))
      throw ConfigError(key + ": bad coefficient '" + item + "'");
    coef.push_back(v);
  }
  if (coef.empty() || coef.size() % 2 == 0)
    throw ConfigError(key + ": expected a0 followed by (cos, sin) pairs");
  FourierSeries a;
  a.period = params.shift_length();
  a.a0 = coef[0];
  for (std::size_t i = 1; i < coef.size(); i += 2) {
    a.cos_coef.push_back(coef[i]);
    a.sin_coef.push_back(coef[i + 1]);
  }
  return a;
}

// Runs f(i) for i in [0, n) on up to sweep_threads() workers.  Results are
// written by index, so row order never depends on scheduling.
template <typename F>
void parallel_for(long n, F&& f) {
  const long workers = std::min<long>(n, static_cast<long>(sweep_threads()));
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (long i = w; i < n; i += workers) f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

CommandOutcome cmd_spectrum(const RunConfig& cfg, const fs::path& out) {
  const ModelParams params = cfg.params();
  const std::string family = cfg.get_string("spectrum.family", "regularized");
  double lo = 0.0, hi = 5.0;
  if (family == "qdeformed") {
    lo = -5.0;
    hi = 0.0;
  } else if (family == "symmetrized") {
    lo = -5.0;
  } else if (family != "regularized") {
    throw ConfigError("spectrum.family must be regularized, qdeformed or symmetrized");
  }
  lo = cfg.get_double("spectrum.kappa_min", lo);
  hi = cfg.get_double("spectrum.kappa_max", hi);
  const long count = positive(cfg, "spectrum.count", 101);
  if (!(hi >= lo)) throw ConfigError("spectrum.kappa_max must be >= kappa_min");
  if (count == 1 && hi != lo) throw ConfigError("spectrum.count = 1 needs kappa_min == kappa_max");

  std::vector<SpectrumPoint> points(static_cast<std::size_t>(count));
  parallel_for(count, [&](long i) {
    const double kappa =
        count == 1 ? lo
                   : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    SpectrumPoint pt;
    if (family == "regularized") {
      pt = energy_regularized(kappa, params);
    } else if (family == "qdeformed") {
      pt = energy_qdeformed(kappa, params);
    } else {
      pt.kappa = kappa;
      pt.gamma = std::exp(-2.0 * kappa * params.shift_length());
      pt.E = energy_symmetrized(kappa, params);
    }
    points[static_cast<std::size_t>(i)] = pt;
  });

  EnergyBound bound;
  if (family == "regularized") bound = energy_bound_regularized(params);
  else if (family == "qdeformed") bound = energy_bound_qdeformed(params);

  CsvTable table({"kappa", "gamma", "theta", "lambda", "E"});
  for (const auto& p : points)
    table.add_row({num(p.kappa), num(p.gamma), num(p.theta), num(p.lambda), num(p.E)});
  table.write(out / "spectrum.csv");

  CsvTable bound_table({"family", "bound", "small_eta_asymptote"});
  bound_table.add_row({family, bound.bounded ? num(bound.value) : "unbounded",
                       num(bound.small_eta_asymptote)});
  bound_table.write(out / "spectrum_bound.csv");

  CommandOutcome result;
  const double es = params.energy_scale();
  bool finite = true, above_bound = true, zero_at_origin = true;
  for (const auto& p : points) {
    finite = finite && std::isfinite(p.E);
    if (p.kappa == 0.0) zero_at_origin = zero_at_origin && std::abs(p.E) <= 1e-15 * es;
    // the bound is an infimum over the normalizable branch only
    const bool on_branch = family == "regularized" ? p.kappa >= 0.0 : p.kappa <= 0.0;
    if (bound.bounded && on_branch)
      above_bound = above_bound &&
                    p.E >= bound.value - 1e-12 * std::max(es, std::abs(bound.value));
  }
  check(result, finite, "finite_energies");
  check(result, zero_at_origin, "zero_energy_at_kappa_0");
  if (bound.bounded) check(result, above_bound, "energies_above_bound");

  json report = report_header("spectrum", params, cfg);
  report["family"] = family;
  report["rows"] = count;
  report["bound"] = bound.bounded ? json(bound.value) : json("unbounded");
  if (bound.small_eta_asymptote) report["small_eta_asymptote"] = *bound.small_eta_asymptote;
  report["checks"] = result.summary["checks"];
  write_json(report, out / "spectrum.json");
  result.summary["bound"] = report["bound"];
  return result;
}

CommandOutcome cmd_verify(const RunConfig& cfg, const fs::path& out) {
  const ModelParams params = cfg.params();
  const PotentialKind kind = kind_from(cfg, "verify.kind");
  const double kappa = cfg.get_double("verify.kappa", 0.0);
  const long m = positive(cfg, "grid.points_per_shift", 32);
  const long periods = positive(cfg, "grid.periods", 4);
  const double tol = cfg.get_double("verify.tolerance", 1e-10);
  const NodeGuard guard = guard_from(cfg);

  const Grid1D grid = Grid1D::for_params(params, 0.0, m, periods * m + 1);
  const AnsatzSpec spec = make_normalized_ansatz(
      kappa, alpha_from(cfg, "verify.alpha", params), Box{periods}, params, grid);
  const WaveField psi = build_ansatz(spec, grid);

  double E = 0.0;
  if (auto given = cfg.get_double("verify.energy")) {
    E = *given;
  } else {
    const ModelParams unit_eta = params.with_eta(1.0);
    switch (kind.base()) {
      case PotentialKind::Base::Regularized:
        E = kind.is_symmetrized() ? energy_symmetrized(kappa, params) : spec.E;
        break;
      case PotentialKind::Base::Raw:
        E = kind.is_symmetrized() ? energy_symmetrized(kappa, unit_eta)
                                  : energy_regularized(kappa, unit_eta).E;
        break;
      case PotentialKind::Base::QDeformed:
        if (kind.is_symmetrized())
          throw ConfigError("verify.energy is required for " + kind.name());
        E = energy_qdeformed(kappa, params).E;
        break;
      case PotentialKind::Base::PerturbativeO1:
        E = 0.0;
        break;
    }
  }

  const ResidualReport rep = stationary_residual(psi, E, kind, params, guard);
  CsvTable table({"x", "psi_re", "psi_im", "residual", "residual_imag", "excluded"});
  for (long i = 0; i < grid.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    table.add_row({num(grid.x(i)), num(psi.values()[u].real()), num(psi.values()[u].imag()),
                   num(rep.residual[u]), num(rep.residual_imag[u]),
                   rep.excluded[u] ? "1" : "0"});
  }
  table.write(out / "residual.csv");

  CommandOutcome result;
  const double scale = std::max(params.energy_scale(), std::abs(E));
  check(result, rep.max_abs_outside_guards <= tol * scale, "residual_within_tolerance");

  json report = report_header("verify", params, cfg);
  report["kind"] = kind.name();
  report["kappa"] = kappa;
  report["E"] = E;
  report["C"] = spec.C;
  report["max_abs_residual"] = rep.max_abs_outside_guards;
  report["max_abs_residual_over_energy_scale"] =
      rep.max_abs_outside_guards / params.energy_scale();
  report["excluded_windows"] = json::array();
  for (const auto& w : rep.excluded_windows)
    report["excluded_windows"].push_back({grid.x(w.first), grid.x(w.last)});
  report["checks"] = result.summary["checks"];
  write_json(report, out / "verify.json");
  result.summary["max_abs_residual"] = rep.max_abs_outside_guards;
  return result;
}

CommandOutcome cmd_recurse(const RunConfig& cfg, const fs::path& out) {
  const ModelParams params = cfg.params();
  const double p0 = cfg.get_double("recurse.p0", 1.0);
  const long steps = positive(cfg, "recurse.steps", 50);
  double p1 = cfg.get_double("recurse.p1", p0);
  double E = 0.0;
  std::optional<double> seed_ratio;
  if (auto kappa = cfg.get_double("recurse.kappa")) {
    if (cfg.has("recurse.p1"))
      throw ConfigError("recurse.kappa and recurse.p1 are mutually exclusive");
    // Geometric seed: the integer-sampled exponential density at eta = 1.
    const ModelParams unit_eta = params.with_eta(1.0);
    const SpectrumPoint sp = energy_regularized(*kappa, unit_eta);
    seed_ratio = *sp.gamma;
    p1 = p0 * *sp.gamma;
    E = sp.E;
  }
  E = cfg.get_double("recurse.energy", E);

  const RecursionOrbit orbit = recursion_orbit(p0, p1, E, steps, params);
  CsvTable table({"n", "p", "ratio"});
  double max_dev = 0.0;
  for (std::size_t n = 0; n < orbit.p_seq.size(); ++n) {
    std::string ratio;
    if (n > 0) {
      const double r = orbit.p_seq[n] / orbit.p_seq[n - 1];
      ratio = num(r);
      if (seed_ratio) max_dev = std::max(max_dev, std::abs(r / *seed_ratio - 1.0));
    }
    table.add_row({std::to_string(n), num(orbit.p_seq[n]), ratio});
  }
  table.write(out / "orbit.csv");

  CommandOutcome result;
  bool positive_orbit = true;
  for (double p : orbit.p_seq) positive_orbit = positive_orbit && p > 0.0 && std::isfinite(p);
  check(result, positive_orbit, "positive_orbit");
  if (seed_ratio && orbit.p_seq.size() >= 3) {
    // one step is always accurate; later steps amplify rounding for |ratio| < 1
    const double r2 = orbit.p_seq[2] / orbit.p_seq[1];
    check(result, std::abs(r2 / *seed_ratio - 1.0) <= 1e-10, "first_step_ratio");
  }

  json report = report_header("recurse", params, cfg);
  report["E"] = E;
  report["classification"] = to_string(orbit.classification);
  report["tail_ratio"] = orbit.tail_ratio;
  report["length"] = orbit.p_seq.size();
  if (seed_ratio) {
    report["seed_ratio"] = *seed_ratio;
    report["max_ratio_deviation"] = max_dev;
  }
  report["checks"] = result.summary["checks"];
  write_json(report, out / "orbit.json");
  result.summary["classification"] = report["classification"];
  return result;
}

CommandOutcome cmd_evolve(const RunConfig& cfg, const fs::path& out) {
  const ModelParams params = cfg.params();
  const std::string initial = cfg.get_string("evolve.initial", "plane_wave");
  const long m = positive(cfg, "grid.points_per_shift", 32);
  const long periods = positive(cfg, "grid.periods", 4);

  EvolutionConfig ec;
  ec.kind = kind_from(cfg, "evolve.kind");
  ec.n_steps = positive(cfg, "evolve.steps", 1000);
  ec.snapshot_every = positive(cfg, "evolve.snapshot_every", ec.n_steps);
  ec.guard = guard_from(cfg);
  ec.norm_tolerance = cfg.get_double("evolve.norm_tolerance", ec.norm_tolerance);
  ec.absorbing_rate = cfg.get_double("evolve.absorbing_rate", 0.0);
  ec.max_stiffness = cfg.get_double("evolve.max_stiffness", ec.max_stiffness);
  // default: half the stiffness limit of the Bohm term
  const double dx = params.shift_length() / static_cast<double>(m);
  ec.dt = cfg.get_double("evolve.dt", 0.5 * ec.max_stiffness * params.mass() * dx * dx /
                                          params.hbar());

  std::optional<WaveField> psi0;
  std::optional<double> expected_E;
  double k = 0.0;
  if (initial == "plane_wave") {
    if (periods < 3) throw ConfigError("grid.periods must be >= 3 on a ring");
    const Grid1D grid = Grid1D::for_params(params, 0.0, m, periods * m);
    const double length = static_cast<double>(periods) * params.shift_length();
    k = 2.0 * std::numbers::pi * static_cast<double>(cfg.get_long("evolve.wavenumber", 1)) /
        length;
    std::vector<Complex> v(static_cast<std::size_t>(grid.size()));
    for (long i = 0; i < grid.size(); ++i)
      v[static_cast<std::size_t>(i)] = std::polar(1.0 / std::sqrt(length), k * grid.x(i));
    psi0.emplace(grid, std::move(v), Periodic{});
    ec.boundary = Boundary::PeriodicRing;
    expected_E = params.hbar() * params.hbar() * k * k / (2.0 * params.mass());
  } else if (initial == "ansatz") {
    const double kappa = cfg.get_double("evolve.kappa", 0.0);
    const Grid1D grid = Grid1D::for_params(params, 0.0, m, periods * m + 1);
    const AnsatzSpec spec = make_normalized_ansatz(
        kappa, FourierSeries::sine(params.shift_length()), Box{periods}, params, grid);
    const WaveField raw = build_ansatz(spec, grid);
    psi0.emplace(raw.scaled(1.0 / std::sqrt(raw.norm_squared())));
    ec.boundary = Boundary::BoxWalls;
    if (ec.kind == PotentialKind::regularized()) expected_E = spec.E;
  } else {
    throw ConfigError("evolve.initial must be plane_wave or ansatz");
  }
  const std::string boundary = cfg.get_string("evolve.boundary", "");
  if (!boundary.empty()) {
    if (boundary == "ring") ec.boundary = Boundary::PeriodicRing;
    else if (boundary == "box") ec.boundary = Boundary::BoxWalls;
    else throw ConfigError("evolve.boundary must be ring or box");
  }
  // Nodal ansatz states need the midpoint integrator (see dynamics.hpp).
  const std::string integrator = cfg.get_string(
      "evolve.integrator", initial == "ansatz" ? "implicit_midpoint" : "strang");
  if (integrator == "strang") ec.integrator = Integrator::Strang;
  else if (integrator == "implicit_midpoint") ec.integrator = Integrator::ImplicitMidpoint;
  else throw ConfigError("evolve.integrator must be strang or implicit_midpoint");
  const std::string scheme = cfg.get_string("evolve.scheme", "auto");
  if (scheme == "auto") ec.kinetic = KineticScheme::Auto;
  else if (scheme == "spectral") ec.kinetic = KineticScheme::Spectral;
  else if (scheme == "crank_nicolson") ec.kinetic = KineticScheme::CrankNicolson;
  else throw ConfigError("evolve.scheme must be auto, spectral or crank_nicolson");

  CommandOutcome result;
  json report = report_header("evolve", params, cfg);
  EvolutionResult evo;
  try {
    evo = evolve(*psi0, ec, params);
  } catch (const StabilityError& e) {
    check(result, false, std::string("stability: ") + e.what());
    report["checks"] = result.summary["checks"];
    write_json(report, out / "evolve.json");
    return result;
  }

  const WaveField& first = evo.snapshots.front().psi;
  CsvTable diag({"step", "t", "norm", "overlap_re", "overlap_im", "overlap_abs",
                 "phase", "expected_phase"});
  double unwrapped = 0.0, last = 0.0, max_phase_error = 0.0;
  for (const auto& s : evo.snapshots) {
    const Complex ov = overlap(first, s.psi);
    const double raw_phase = std::arg(ov);
    double d = raw_phase - last;
    d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    unwrapped += d;
    last = raw_phase;
    std::string expected;
    if (expected_E) {
      const double e = -*expected_E * s.t / params.hbar();
      expected = num(e);
      max_phase_error = std::max(max_phase_error, std::abs(unwrapped - e));
    }
    diag.add_row({std::to_string(s.step), num(s.t), num(s.psi.norm_squared()),
                  num(ov.real()), num(ov.imag()), num(std::abs(ov)), num(unwrapped),
                  expected});
  }
  diag.write(out / "diagnostics.csv");

  CsvTable snaps({"step", "t", "x", "re", "im"});
  for (const auto& s : evo.snapshots)
    for (long i = 0; i < s.psi.size(); ++i) {
      const Complex z = s.psi.values()[static_cast<std::size_t>(i)];
      snaps.add_row({std::to_string(s.step), num(s.t), num(s.psi.grid().x(i)),
                     num(z.real()), num(z.imag())});
    }
  snaps.write(out / "snapshots.csv");

  const ContinuityReport cont = continuity_defect(evo.snapshots, params);
  CsvTable ct({"t", "sup_defect"});
  for (std::size_t i = 0; i < cont.times.size(); ++i)
    ct.add_row({num(cont.times[i]), num(cont.sup_defect[i])});
  ct.write(out / "continuity.csv");

  if (ec.absorbing_rate == 0.0)
    check(result, evo.max_step_norm_drift <= 1e-9, "norm_drift_per_step");

  report["initial"] = initial;
  report["integrator"] = integrator;
  report["stiffness"] = stiffness(ec, psi0->grid(), params);
  report["kind"] = ec.kind.name();
  report["max_step_norm_drift"] = evo.max_step_norm_drift;
  report["final_norm_drift"] = evo.final_norm_drift;
  report["max_continuity_defect"] = cont.max_defect;
  if (expected_E) {
    report["expected_E"] = *expected_E;
    report["max_phase_error"] = max_phase_error;
  }
  report["checks"] = result.summary["checks"];
  write_json(report, out / "evolve.json");
  result.summary["max_step_norm_drift"] = evo.max_step_norm_drift;
  return result;
}

CommandOutcome cmd_search(const RunConfig& cfg, const fs::path& out) {
  const ModelParams params = cfg.params();
  const PotentialKind kind = kind_from(cfg, "search.kind");
  if (!kind.is_difference_term())
    throw ConfigError("search.kind must be a difference term");
  const long m = positive(cfg, "grid.points_per_shift", 32);
  const long each_side = positive(cfg, "search.periods_each_side", 6);

  PatchedSpec seed = patch_relation(cfg.get_double("search.kappa_plus", 1.0), params);
  if (auto km = cfg.get_double("search.kappa_minus")) seed.kappa_minus = *km;
  SearchOptions opts;
  opts.max_iters = static_cast<int>(positive(cfg, "search.max_iters", opts.max_iters));
  opts.optimize_energy = cfg.get_bool("search.optimize_energy", opts.optimize_energy);
  opts.window_halfwidth_shifts =
      cfg.get_double("search.window_shifts", opts.window_halfwidth_shifts);
  opts.guard = guard_from(cfg);

  const Grid1D grid = Grid1D::for_params(
      params, -static_cast<double>(each_side) * params.shift_length(), m,
      2 * each_side * m + 1);
  const WaveField start = build_patched(seed, grid, params);
  const SearchResult res = search_localized(seed, grid, kind, params, opts);

  CsvTable table({"x", "seed", "final", "residual", "excluded"});
  for (long i = 0; i < grid.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    table.add_row({num(grid.x(i)), num(start.values()[u].real()),
                   num(res.field.values()[u].real()), num(res.report.residual[u]),
                   res.report.excluded[u] ? "1" : "0"});
  }
  table.write(out / "field.csv");

  CommandOutcome result;
  bool monotone = true;
  for (std::size_t i = 1; i < res.objective_history.size(); ++i)
    monotone = monotone && res.objective_history[i] <= res.objective_history[i - 1];
  check(result, monotone, "objective_non_increasing");

  json report = report_header("search", params, cfg);
  report["kind"] = kind.name();
  report["kappa_plus"] = seed.kappa_plus;
  report["kappa_minus"] = seed.kappa_minus;
  report["E_seed"] = seed.E;
  report["E_final"] = res.E;
  report["iterations"] = res.iterations;
  report["converged"] = res.converged;
  report["objective_history"] = res.objective_history;
  report["window"] = {grid.x(res.window.first), grid.x(res.window.last)};
  report["max_abs_residual"] = res.report.max_abs_outside_guards;
  report["checks"] = result.summary["checks"];
  write_json(report, out / "search.json");
  result.summary["converged"] = res.converged;
  result.summary["E_final"] = res.E;
  return result;
}

CommandOutcome cmd_limits(const RunConfig& cfg, const fs::path& out) {
  const ModelParams params = cfg.params();
  const double kappa = cfg.get_double("limits.kappa", 1.0);
  const int lambda_count = static_cast<int>(positive(cfg, "limits.lambda_count", 19));
  const double es = params.energy_scale();

  const LimitReport qrep = limit_consistency_q_to_1(params, lambda_count);
  CsvTable qt({"q", "lambda", "E_q", "E_reg", "deviation"});
  double max_near = 0.0, max_exact = 0.0;
  for (const auto& r : qrep.rows) {
    qt.add_row({num(r.parameter), num(r.lambda), num(r.E_family), num(r.E_reference),
                num(r.deviation)});
    if (r.parameter == 1.0) max_exact = std::max(max_exact, r.deviation);
    else if (std::abs(r.parameter - 1.0) <= 1e-6 * (1.0 + 1e-9))
      max_near = std::max(max_near, r.deviation);
  }
  qt.write(out / "limits_q.csv");

  const std::vector<double> etas = {1e-2, 1e-3, 1e-4};
  const LimitReport erep = limit_consistency_eta_to_0(params, kappa, etas);
  CsvTable et({"eta", "E", "E_linear", "deviation", "deviation_over_eta"});
  double worst_ratio = 0.0;
  for (const auto& r : erep.rows) {
    et.add_row({num(r.parameter), num(r.E_family), num(r.E_reference), num(r.deviation),
                num(r.deviation / r.parameter)});
    worst_ratio = std::max(worst_ratio, r.deviation / r.parameter);
  }
  et.write(out / "limits_eta.csv");

  std::ofstream summary(out / "limits_summary.txt");
  summary << "q_to_1 max_deviation " << num(qrep.max_deviation) << '\n'
          << "q_to_1 max_deviation_at_1e-6 " << num(max_near) << '\n'
          << "eta_to_0 max_deviation " << num(erep.max_deviation) << '\n'
          << "eta_to_0 max_deviation_over_eta " << num(worst_ratio) << '\n';

  CommandOutcome result;
  // E + hbar^2 kappa^2/2m = (hbar^2 kappa^3 L / m) eta + O(eta^2)
  const double slope = params.hbar() * params.hbar() * std::abs(kappa * kappa * kappa) *
                       params.L() / params.mass();
  check(result, max_exact == 0.0, "q_equals_1_identical");
  check(result, max_near <= 1e-4 * es, "q_near_1_within_1e-4_energy_scale");
  check(result, worst_ratio <= 5.0 * std::max(1.0, slope), "eta_to_0_linear_in_eta");

  json report = report_header("limits", params, cfg);
  report["q_to_1_max_deviation"] = qrep.max_deviation;
  report["q_to_1_max_deviation_at_1e-6"] = max_near;
  report["eta_to_0_max_deviation"] = erep.max_deviation;
  report["eta_to_0_max_deviation_over_eta"] = worst_ratio;
  report["checks"] = result.summary["checks"];
  write_json(report, out / "limits.json");
  result.summary["q_to_1_max_deviation"] = qrep.max_deviation;
  result.summary["eta_to_0_max_deviation"] = erep.max_deviation;
  return result;
}

}  // namespace nlsnpd::cli

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cattaneo/cattaneo.hpp"
#include "cattaneo/cli/config.hpp"
#include "cattaneo/cli/report.hpp"

namespace cattaneo::cli {

struct RunContext {
  ExperimentConfig config;
  ThermoClosure closure;
  unsigned threads = 1;
  std::filesystem::path out_dir;

  explicit RunContext(ExperimentConfig c)
      : config(std::move(c)),
        closure(closure_of(config)),
        threads(config.threads > 0 ? static_cast<unsigned>(config.threads) : default_threads()),
        out_dir(config.out_dir) {}
};

namespace detail {

inline std::array<double, 2> model_lambda_nu(const ExperimentConfig& c) {
  switch (c.model) {
    case Model::Ccj3d: return {-1.0, 1.0};
    case Model::GeneralLambdaNu: return c.lambda_nu;
    default: return {1.0, -1.0};
  }
}

inline Eigen::MatrixXd model_symbol(const RunContext& ctx, const Direction& xi, const FluidState& u) {
  const auto [lambda, nu] = model_lambda_nu(ctx.config);
  return assemble_general(xi, u, ctx.closure, lambda, nu).m;
}

inline StateSampler box_sampler(const ExperimentConfig& c, double q_min_fraction = 0.0) {
  StateSampler s;
  s.rho0 = c.box.rho[0];
  s.rho1 = c.box.rho[1];
  s.theta0 = c.box.theta[0];
  s.theta1 = c.box.theta[1];
  s.v_max = c.box.v_max;
  s.q_max = c.box.q_max;
  s.q_min = q_min_fraction * c.box.q_max;
  return s;
}

inline json state_json(const FluidState& u) {
  return {{"rho", u.rho}, {"v", vec_to_json(u.v)}, {"theta", u.theta}, {"q", vec_to_json(u.q)}};
}

inline EquilibriumState equilibrium_part(const FluidState& u) { return {u.rho, u.v, u.theta}; }

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::filesystem::create_directories(p.parent_path().empty() ? "." : p.parent_path());
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot open '" + p.string() + "' for writing");
  os << std::setprecision(17);
  return os;
}

inline json certificate_json(const SymmetrizerCertificate& c) {
  json forced = json::array();
  for (const auto& f : c.forced) forced.push_back({{"entry", f.label}, {"bound", number(f.bound)}});
  json out = {{"verdict", to_string(c.verdict)},
              {"matrix_size", c.n},
              {"constraint_rows", c.constraint_rows},
              {"null_space_dimension", c.null_dim},
              {"forced_zeros", forced},
              {"forced_diagonal", c.forced_diagonal},
              {"pd_margin", number(c.pd_margin)},
              {"within_theorem_hypothesis", c.within_hypothesis}};
  if (c.witness) {
    out["witness"] = matrix_json(*c.witness);
    out["witness_min_eigenvalue"] = number(c.witness_min_eig);
    out["witness_residual"] = number(c.witness_residual);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Section cmd_spectrum(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  Section sec("spectrum");
  auto& d = sec.data();
  const FluidState u = cfg.state;
  const auto dc = check_derivatives(ctx.closure, u.rho, u.theta, cfg.tol("closure_derivatives"));
  d["closure_derivative_check"] = {{"max_relative_error", dc.max_relative_error}, {"worst", dc.worst}};
  sec.check("closure_derivatives_max_relative_error", dc.max_relative_error, "<=",
            cfg.tol("closure_derivatives"));

  if (cfg.model == Model::Cattaneo1d) {
    const auto sys = reduce_1d(detail::equilibrium_part(u), ctx.closure);
    const auto cs = char_speeds(Direction(1, 0, 0), u, ctx.closure);
    const auto es = eigen_structure(sys.A[0]);
    const std::vector<double> expected{cs.eta3, cs.eta4, cs.eta2, cs.eta1};
    double err = 0.0;
    for (int i = 0; i < 4; ++i) err = std::max(err, std::abs(es.eigenvalues[i] - cplx(expected[i], 0.0)));
    const double scale = 1.0 + std::abs(cs.eta0) + std::sqrt(cs.z_plus_sq);
    d["state"] = detail::state_json(u);
    d["z_plus_sq"] = cs.z_plus_sq;
    d["z_minus_sq"] = cs.z_minus_sq;
    d["closed_form"] = expected;
    d["numeric"] = complex_list(es.eigenvalues);
    d["note"] = "1D reading: rows/columns (rho, v1, theta, q1) of A(e1); no eigenvalue at v1";
    sec.check("pairing_error_relative", err / scale, "<=", cfg.tol("pairing"));
    return sec;
  }

  const auto [lambda, nu] = detail::model_lambda_nu(cfg);
  d["lambda_nu"] = {lambda, nu};

  if (cfg.model == Model::Cattaneo3d) {
    // Closed form against numeric at the configured state.
    const auto cs = char_speeds(Direction(1, 0, 0), u, ctx.closure);
    const auto t = eval_closure(ctx.closure, u.rho, u.theta);
    d["state"] = detail::state_json(u);
    d["z_plus_sq"] = cs.z_plus_sq;
    d["z_minus_sq"] = cs.z_minus_sq;
    d["Theta"] = cs.theta_sum;
    d["Phi"] = cs.phi;
    const double product = t.p_rho * t.kappa / (u.rho * t.e_theta * ctx.closure.tau);
    d["product_identity_residual"] = std::abs(cs.z_plus_sq * cs.z_minus_sq - product);

    auto dirs = feasibility_directions(cfg.spectrum.directions, cfg.seed);
    double worst_rel = 0.0, worst_cond = 0.0;
    int mismatches = 0;
    json table = json::array();
    auto csv = detail::open_output(ctx.out_dir / "spectrum_sweep.csv");
    csv << "xi1,xi2,xi3";
    for (int k = 0; k < kDim; ++k) csv << ",closed" << k;
    for (int k = 0; k < kDim; ++k) csv << ",re" << k << ",im" << k;
    csv << "\n";
    for (const auto& xi : dirs) {
      const auto r = spectrum_report(xi, u, ctx.closure);
      const double scale = 1.0 + std::abs(r.eta0) + std::sqrt(r.z_plus_sq);
      worst_rel = std::max(worst_rel, r.pairing_error / scale);
      worst_cond = std::max(worst_cond, r.condition);
      try {
        multiplicity_profile(xi, u, ctx.closure);
      } catch (const ProfileMismatch&) {
        ++mismatches;
      }
      if (table.size() < 3) {
        table.push_back({{"xi", vec_to_json(xi.xi())},
                         {"closed_form", r.sorted_closed_form()},
                         {"numeric", complex_list(r.numeric)},
                         {"pairing_error", r.pairing_error},
                         {"condition", number(r.condition)}});
      }
      csv << xi.xi()(0) << ',' << xi.xi()(1) << ',' << xi.xi()(2);
      for (double c : r.sorted_closed_form()) csv << ',' << c;
      for (const auto& z : r.numeric) csv << ',' << z.real() << ',' << z.imag();
      csv << "\n";
    }
    d["table"] = table;
    d["directions_checked"] = dirs.size();
    d["max_eigenvector_condition"] = number(worst_cond);
    sec.check("pairing_error_relative", worst_rel, "<=", cfg.tol("pairing"));
    sec.check("multiplicity_profile_mismatches", mismatches, "<=", 0.0);

    // Uniform gap over the state box.
    const StateBox box = box_bounds(ctx.closure, cfg.box.rho[0], cfg.box.rho[1], cfg.box.theta[0],
                                    cfg.box.theta[1], cfg.box.samples);
    const GapBounds gb = gap_bounds(box, ctx.closure.tau);
    d["gap_bounds"] = {{"M1", box.M1}, {"M2", box.M2}, {"delta1", gb.delta1},
                       {"delta2", gb.delta2}, {"delta3", gb.delta3}, {"delta4", gb.delta4},
                       {"delta", gb.delta}, {"bounds_gap", gb.bounds_gap}};
    const int n = cfg.spectrum.box_samples;
    Rng rng(cfg.seed + 1);
    const auto sampler = detail::box_sampler(cfg);
    std::vector<std::pair<Vec3, FluidState>> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i) {
      const Vec3 xi = random_unit_vector(rng);
      samples.emplace_back(xi, random_state(rng, sampler));
    }
    std::vector<double> gaps(n);
    std::vector<char> ordered(n);
    parallel_for(n, ctx.threads, [&](std::size_t i) {
      const Direction xi(samples[i].first);
      const auto r = char_speeds(xi, samples[i].second, ctx.closure);
      ordered[i] = r.eta3 < r.eta4 && r.eta4 < r.eta0 && r.eta0 < r.eta2 && r.eta2 < r.eta1;
      gaps[i] = min_speed_gap(assemble_A(xi, samples[i].second, ctx.closure).m);
    });
    const auto it = std::min_element(gaps.begin(), gaps.end());
    const auto worst = static_cast<std::size_t>(it - gaps.begin());
    d["gap_verification"] = {{"samples", n},
                             {"min_pairwise_gap", *it},
                             {"worst_xi", vec_to_json(samples[worst].first)},
                             {"worst_state", detail::state_json(samples[worst].second)}};
    sec.check("ordering_violations", static_cast<double>(std::count(ordered.begin(), ordered.end(), 0)),
              "<=", 0.0);
    sec.check("min_pairwise_gap_minus_delta", *it - gb.delta, ">=", 0.0);
    return sec;
  }

  // Hyperbolicity sweep for a general (lambda, nu) law.
  const auto dirs = icosphere(2);
  Rng rng(cfg.seed + 2);
  const auto sampler = detail::box_sampler(cfg, 0.25);
  std::vector<FluidState> states;
  for (int i = 0; i < cfg.spectrum.sweep_states; ++i) states.push_back(random_state(rng, sampler));
  const std::size_t total = states.size() * dirs.size();
  std::vector<DiagonalizabilityResult> results(total);
  parallel_for(total, ctx.threads, [&](std::size_t k) {
    const Direction xi(dirs[k % dirs.size()]);
    results[k] = diagonalizability_check(detail::model_symbol(ctx, xi, states[k / dirs.size()]));
  });
  int complex_count = 0, defective_count = 0;
  double max_imag = 0.0;
  json witness = nullptr;
  for (std::size_t k = 0; k < total; ++k) {
    max_imag = std::max(max_imag, results[k].max_imag);
    if (results[k].verdict == Diagonalizability::Complex) ++complex_count;
    if (results[k].verdict == Diagonalizability::Defective) ++defective_count;
    if (results[k].verdict != Diagonalizability::Diagonalizable && witness.is_null()) {
      witness = {{"xi", vec_to_json(dirs[k % dirs.size()])},
                 {"state", detail::state_json(states[k / dirs.size()])},
                 {"verdict", to_string(results[k].verdict)},
                 {"condition", number(results[k].condition)},
                 {"max_imag", results[k].max_imag}};
    }
  }
  const int bad = complex_count + defective_count;
  d["sweep"] = {{"states", states.size()},
                {"directions", dirs.size()},
                {"complex", complex_count},
                {"defective", defective_count},
                {"max_imag", max_imag},
                {"first_non_hyperbolic", witness}};
  d["hyperbolic_on_sweep"] = bad == 0;
  if (cfg.model == Model::Ccj3d) sec.check("non_hyperbolic_samples", bad, ">=", 1.0);
  return sec;
}

// ---------------------------------------------------------------------------

inline Section cmd_symmetrizer(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  Section sec("symmetrizer");
  auto& d = sec.data();
  FeasibilityOptions opt;
  opt.null_tol = cfg.tol("null_space");
  opt.zero_tol = cfg.tol("forced_zero");
  opt.pd_tol = cfg.tol("pd");
  opt.pd.seed = cfg.seed;
  const FluidState u = cfg.state;

  if (cfg.model == Model::Cattaneo1d) {
    const auto sys = reduce_1d(detail::equilibrium_part(u), ctx.closure);
    const auto cert = friedrichs_feasibility_matrices(sys.A, opt);
    d["certificate"] = detail::certificate_json(cert);
    sec.require("feasible", cert.verdict == Feasibility::Feasible);
    const Mat8 s0 = friedrichs_S0(u, ctx.closure).m;
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(4, 4);
    const int keep[4] = {kRho, kVel, kTheta, kFlux};
    for (int i = 0; i < 4; ++i) s1(i, i) = s0(keep[i], keep[i]);
    const auto chk = validate_symmetrizer(s1, sys.A);
    d["restricted_S0"] = {{"residual", chk.residual}, {"min_eigenvalue", chk.min_eig}};
    sec.check("restricted_S0_residual", chk.residual, "<=", cfg.tol("symmetry"));
    return sec;
  }

  // Certificate at the configured state.
  const auto dirs = feasibility_directions(cfg.symmetrizer.random_directions, cfg.seed);
  auto symbols_at = [&](const FluidState& s) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& xi : dirs) out.push_back(detail::model_symbol(ctx, xi, s));
    return out;
  };
  auto cert = friedrichs_feasibility_matrices(symbols_at(u), opt);
  cert.within_hypothesis = u.q.isZero(0.0) || (u.q.array() != 0.0).all();
  d["state"] = detail::state_json(u);
  d["directions"] = dirs.size();
  d["certificate"] = detail::certificate_json(cert);

  const bool hyperbolic_model = cfg.model == Model::Cattaneo3d;
  const bool all_q_nonzero = (u.q.array() != 0.0).all();
  if (hyperbolic_model && all_q_nonzero) {
    sec.require("verdict_infeasible", cert.verdict == Feasibility::Infeasible);
    for (int i : {6, 7, 8}) {
      const int idx = unknown_index(kDim, i - 1, i - 1);
      double bound = std::numeric_limits<double>::infinity();
      for (const auto& f : cert.forced)
        if (f.index == idx) bound = f.bound;
      sec.check("forced_zero_bound_s" + std::to_string(i) + std::to_string(i), bound, "<=",
                cfg.tol("forced_zero"));
    }
    json steps = json::array();
    try {
      for (const auto& s : forced_zero_trace(u, ctx.closure, cfg.tol("forced_zero")))
        steps.push_back({{"equations", s.equations}, {"forced", s.forced}});
      d["cascade"] = steps;
      sec.require("cascade_complete", true);
    } catch (const CascadeBroken& e) {
      d["cascade"] = steps;
      d["cascade_error"] = e.what();
      sec.require("cascade_complete", false);
    }
  } else if (hyperbolic_model && !u.q.isZero(0.0)) {
    d["note"] = "some q_i = 0: outside the hypothesis of the infeasibility argument; verdict is numeric only";
  }

  if (hyperbolic_model) {
    // Equilibrium companion state: S0 must symmetrize and the engine must agree.
    FluidState ueq = u;
    ueq.q.setZero();
    const auto symbols = symbols_at(ueq);
    const auto ceq = friedrichs_feasibility_matrices(symbols, opt);
    const Eigen::MatrixXd s0 = friedrichs_S0(ueq, ctx.closure).m;
    const auto chk = validate_symmetrizer(s0, symbols);
    const double s0_margin = s0.diagonal().minCoeff() / s0.norm();
    d["equilibrium"] = {{"state", detail::state_json(ueq)},
                        {"certificate", detail::certificate_json(ceq)},
                        {"S0_residual", chk.residual},
                        {"S0_min_eigenvalue", chk.min_eig},
                        {"S0_normalized_margin", s0_margin}};
    sec.require("equilibrium_feasible", ceq.verdict == Feasibility::Feasible);
    sec.check("equilibrium_S0_residual", chk.residual, "<=", cfg.tol("symmetry"));
    sec.check("equilibrium_S0_min_eig_vs_diagonal",
              std::abs(chk.min_eig - s0.diagonal().minCoeff()), "<=", cfg.tol("symmetry"));
    sec.check("equilibrium_pd_margin_over_S0", ceq.pd_margin / s0_margin, ">=", 0.9);

    // Microlocal symmetrizer over a nested low-discrepancy sweep.
    const int n = cfg.symmetrizer.microlocal_points;
    const auto sampler = detail::box_sampler(cfg);
    std::vector<double> min_eig(n), residual(n), herm(n), homog(n);
    std::vector<char> failed(n, 0);
    parallel_for(n, ctx.threads, [&](std::size_t i) {
      const auto [xi, s] = halton_sample(i + 1, sampler);
      try {
        const auto m = microlocal_symmetrizer(Direction(xi), s, ctx.closure);
        const auto m2 = microlocal_symmetrizer(Direction(2.5 * xi), s, ctx.closure);
        min_eig[i] = m.min_eigenvalue;
        residual[i] = m.residual;
        herm[i] = m.hermitian_error;
        homog[i] = (m.S - m2.S).cwiseAbs().maxCoeff();
      } catch (const NotDiagonalizable&) {
        failed[i] = 1;
      }
    });
    const double floor_full = *std::min_element(min_eig.begin(), min_eig.end());
    const double floor_half = *std::min_element(min_eig.begin(), min_eig.begin() + std::max(1, n / 2));
    const double change = std::abs(floor_full - floor_half) / floor_half;
    d["microlocal"] = {{"points", n},
                       {"min_eigenvalue", floor_full},
                       {"min_eigenvalue_first_half", floor_half},
                       {"max_residual", *std::max_element(residual.begin(), residual.end())},
                       {"max_hermitian_error", *std::max_element(herm.begin(), herm.end())},
                       {"max_homogeneity_error", *std::max_element(homog.begin(), homog.end())}};
    sec.check("microlocal_not_diagonalizable", std::count(failed.begin(), failed.end(), 1), "<=", 0.0);
    sec.check("microlocal_min_eigenvalue", floor_full, ">", 0.0);
    sec.check("microlocal_floor_change_under_doubling", change, "<=", cfg.tol("microlocal_doubling"));
    sec.check("microlocal_residual", *std::max_element(residual.begin(), residual.end()), "<=",
              cfg.tol("microlocal_residual"));
    sec.check("microlocal_hermitian", *std::max_element(herm.begin(), herm.end()), "<=",
              cfg.tol("hermitian"));
    sec.check("microlocal_homogeneity", *std::max_element(homog.begin(), homog.end()), "<=",
              cfg.tol("homogeneity"));
  }
  return sec;
}

// ---------------------------------------------------------------------------

inline Section cmd_coupling(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  Section sec("coupling");
  auto& d = sec.data();
  const auto& eq = cfg.coupling.equilibrium;
  d["equilibrium"] = detail::equilibrium_json(eq);

  auto write_sweep_csv = [&](const DissipativitySweep& sw, int n) {
    auto csv = detail::open_output(ctx.out_dir / "dissipativity.csv");
    csv << "xi1,xi2,xi3";
    for (int k = 0; k < n; ++k) csv << ",re" << k << ",im" << k;
    csv << "\n";
    for (const auto& p : sw.points) {
      csv << p.xi(0) << ',' << p.xi(1) << ',' << p.xi(2);
      for (const auto& z : p.eigenvalues) csv << ',' << z.real() << ',' << z.imag();
      csv << "\n";
    }
  };

  if (cfg.model == Model::Cattaneo1d) {
    const auto sys = reduce_1d(eq, ctx.closure);
    const auto& r = cfg.coupling.radii_1d;
    const auto radii = log_space(r.min, r.max, r.count);
    int violated = 0;
    double margin = std::numeric_limits<double>::infinity();
    for (double k : radii) {
      const auto gc = genuinely_coupled(sys, Vec3(k, 0, 0), cfg.tol("coupling"));
      violated += gc.violated;
      margin = std::min(margin, gc.margin);
    }
    const auto sw = dissipativity_sweep(sys, {Vec3::UnitX()}, radii, ctx.threads, cfg.tol("dissipative"));
    write_sweep_csv(sw, sys.n);
    d["note"] = "1D reading: rows/columns (rho, v1, theta, q1) of A(e1), B = diag(0,0,0,1/tau)";
    d["grid_points"] = radii.size();
    d["coupling_margin"] = margin;
    d["max_re_lambda"] = sw.max_re;
    d["argmax_xi"] = vec_to_json(sw.points[sw.argmax].xi);
    d["strictly_dissipative"] = sw.strictly_dissipative;
    sec.check("coupling_violations", violated, "<=", 0.0);
    sec.check("max_re_lambda", sw.max_re, "<", -cfg.tol("dissipative"));
    return sec;
  }

  const auto sys = linearize(eq, ctx.closure);
  const auto dirs = icosphere(cfg.coupling.sphere_subdivisions);
  int violated = 0;
  double ker_res = 0.0, eig_res = 0.0, analytic_res = 0.0;
  for (const auto& xi : dirs) {
    const auto gc = genuinely_coupled(sys, xi, cfg.tol("coupling"));
    if (gc.violated && gc.witness) {
      ++violated;
      ker_res = std::max(ker_res, gc.witness->kernel_residual);
      eig_res = std::max(eig_res, gc.witness->eigen_residual);
    }
    const auto kw = kernel_witness(sys, xi);
    analytic_res = std::max({analytic_res, kw.kernel_residual, kw.eigen_residual});
  }
  const auto w1 = kernel_witness(sys, Vec3::UnitX());
  d["directions"] = dirs.size();
  d["violated"] = violated;
  d["witness_e1"] = {{"Z", matrix_json(w1.Z.transpose())}, {"mu", w1.mu}};
  d["max_witness_kernel_residual"] = ker_res;
  d["max_witness_eigen_residual"] = eig_res;
  d["max_analytic_witness_residual"] = analytic_res;
  sec.check("violated_directions", violated, ">=", static_cast<double>(dirs.size()));
  sec.check("witness_residual", std::max(ker_res, eig_res), "<=", cfg.tol("witness"));
  sec.check("analytic_witness_residual", analytic_res, "<=", cfg.tol("witness"));

  const auto& r = cfg.coupling.radii;
  const auto sw = dissipativity_sweep(sys, dirs, log_space(r.min, r.max, r.count), ctx.threads,
                                      cfg.tol("dissipative"));
  write_sweep_csv(sw, sys.n);
  d["dissipativity"] = {{"grid_points", sw.points.size()},
                        {"max_re_lambda", sw.max_re},
                        {"argmax_xi", vec_to_json(sw.points[sw.argmax].xi)},
                        {"argmax_eigenvalue", complex_json(sw.argmax_eigenvalue)},
                        {"strictly_dissipative", sw.strictly_dissipative}};
  sec.check("max_re_lambda_abs", std::abs(sw.max_re), "<=", cfg.tol("energy_bound"));
  sec.require("not_strictly_dissipative", !sw.strictly_dissipative);

  // Smooth witness branch around e1 with probe e3.
  const auto branch = witness_branch(Direction(1, 0, 0), Vec3::UnitZ(), eq.v);
  double branch_res = 0.0;
  const int np = cfg.coupling.branch_points;
  for (int i = 1; i <= np; ++i) {
    const double rad = cfg.coupling.branch_radius * std::cbrt(halton(i, 2));
    const double z = 2.0 * halton(i, 3) - 1.0, phi = 2.0 * std::numbers::pi * halton(i, 5);
    const double rxy = std::sqrt(1.0 - z * z);
    const Vec3 xi = Vec3::UnitX() + rad * Vec3(rxy * std::cos(phi), rxy * std::sin(phi), z);
    const auto p = branch(xi);
    const Eigen::MatrixXd a = sys.symbol(xi);
    const Eigen::VectorXd zv = p.Z;
    branch_res = std::max({branch_res, (a * zv - p.mu * zv).cwiseAbs().maxCoeff(),
                           (sys.B * zv).cwiseAbs().maxCoeff(),
                           branch.defining_residuals(xi).cwiseAbs().maxCoeff()});
  }
  d["witness_branch"] = {{"center", vec_to_json(branch.center())},
                         {"probe", vec_to_json(branch.probe())},
                         {"points", np},
                         {"radius", cfg.coupling.branch_radius},
                         {"max_residual", branch_res}};
  sec.check("witness_branch_residual", branch_res, "<=", cfg.tol("branch"));
  return sec;
}

// ---------------------------------------------------------------------------

inline WaveExperiment wave_experiment_of(const ExperimentConfig& cfg) {
  WaveExperiment ex;
  ex.grid = SpectralGrid(cfg.wave.N, cfg.wave.L);
  ex.bump.center = cfg.wave.center;
  ex.bump.r_inner = cfg.wave.r_inner;
  ex.bump.r_outer = cfg.wave.r_outer;
  ex.bump.probe = cfg.wave.probe;
  ex.state = cfg.wave.equilibrium;
  ex.t_end = cfg.wave.t_end;
  ex.checkpoints = cfg.wave.checkpoints;
  return ex;
}

inline Section cmd_wave(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  if (cfg.model == Model::Cattaneo1d) throw ConfigError("model: the wave command needs a 3D model");
  Section sec("wave");
  auto& d = sec.data();
  WaveExperiment ex;
  try {
    ex = wave_experiment_of(cfg);
    validate_bump(ex.grid, ex.bump);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("wave: ") + e.what());
  }
  auto series = run_wave_experiment(ex, ctx.closure, ctx.threads);

  {
    auto csv = detail::open_output(ctx.out_dir / "norms.csv");
    csv << "t,l2_norm,s0_energy,max_q,translation_error\n";
    for (const auto& s : series.samples)
      csv << s.t << ',' << s.l2 << ',' << s.s0 << ',' << s.max_q << ',' << s.translation_error << "\n";
  }
  json manifest = {
      {"grid", {{"N", ex.grid.N}, {"L", ex.grid.L}}},
      {"bump",
       {{"center", vec_to_json(ex.bump.center)}, {"r_inner", ex.bump.r_inner},
        {"r_outer", ex.bump.r_outer}, {"probe", vec_to_json(ex.bump.probe)}}},
      {"state", {{"rho", ex.state.rho}, {"v", vec_to_json(ex.state.v)}, {"theta", ex.state.theta}}},
      {"closure", {{"name", ctx.closure.name}, {"tau", ctx.closure.tau}}},
      {"seed", cfg.seed},
      {"conventions",
       {{"forward_transform", "V_hat(k) = N^-3 sum_x V(x) exp(-i xi_k.x)"},
        {"l2_norm", "||V||^2 = L1 L2 L3 sum_k |V_hat(k)|^2"},
        {"layout", "component-major, (component, i, j, k), k fastest"},
        {"domain", "periodic box; the compactly supported spectrum is restricted to the lattice"}}},
      {"checkpoints", ex.checkpoints},
      {"t_end", ex.t_end},
  };
  {
    auto os = detail::open_output(ctx.out_dir / "manifest.json");
    os << manifest.dump(2) << "\n";
  }
  if (cfg.wave.write_field) {
    write_field_bin((ctx.out_dir / "field.bin").string(), series.final_field);
    d["field_file"] = "field.bin";
  }

  d["manifest"] = manifest;
  d["support_modes"] = series.support_size;
  d["initial_l2_norm"] = series.samples.front().l2;
  d["l2_max_relative_deviation"] = series.l2_max_relative_deviation;
  d["max_q_component"] = series.max_q;
  d["max_translation_error"] = series.max_translation_error;
  d["max_imaginary_fraction"] = series.max_imaginary;
  sec.check("l2_max_relative_deviation", series.l2_max_relative_deviation, "<=", cfg.tol("l2_drift"));
  sec.check("max_q_component", series.max_q, "<=", cfg.tol("flux"));
  sec.check("max_translation_error", series.max_translation_error, "<=", cfg.tol("translation"));
  sec.check("max_imaginary_fraction", series.max_imaginary, "<=", cfg.tol("realness"));
  sec.check("initial_conjugate_symmetry_error", series.conjugate_symmetry_error, "<=", 0.0);

  // Contrast: generic data loses S0-energy through the flux components.
  const SpectralGrid small(8, cfg.wave.L);
  const auto sys = linearize(ex.state, ctx.closure);
  const auto data = random_initial_data(small, cfg.seed);
  const auto ds = dissipation_contrast(data, sys, ctx.closure, 2.0, 21, ctx.threads);
  d["dissipation_contrast"] = {{"grid_N", small.N},
                               {"times", ds.times},
                               {"s0_energy", ds.s0},
                               {"initial_rate", ds.initial_rate},
                               {"max_increase", ds.max_increase},
                               {"zero_mode_error", ds.zero_mode_error}};
  sec.check("contrast_initial_rate", ds.initial_rate, "<", 0.0);
  sec.check("contrast_max_relative_increase", ds.max_increase / ds.s0.front(), "<=",
            cfg.tol("energy_bound"));
  sec.check("contrast_zero_mode_error", ds.zero_mode_error, "<=", cfg.tol("energy_bound"));
  return sec;
}

// ---------------------------------------------------------------------------

struct RunResult {
  json report;
  bool pass = true;
};

inline RunResult run_command(const std::string& command, const RunContext& ctx) {
  std::vector<Section> sections;
  const bool all = command == "all";
  if (all || command == "spectrum") sections.push_back(cmd_spectrum(ctx));
  if (all || command == "symmetrizer") sections.push_back(cmd_symmetrizer(ctx));
  if (all || command == "coupling") sections.push_back(cmd_coupling(ctx));
  if ((all && ctx.config.model != Model::Cattaneo1d) || command == "wave")
    sections.push_back(cmd_wave(ctx));
  if (sections.empty()) throw ConfigError("unknown command '" + command + "'");

  RunResult out;
  json secs = json::object();
  int n_checks = 0, n_failed = 0;
  json failed = json::array();
  for (const auto& s : sections) {
    secs[s.name()] = s.to_json();
    for (const auto& c : s.checks()) {
      ++n_checks;
      if (!c.pass) {
        ++n_failed;
        failed.push_back(s.name() + "." + c.name);
      }
    }
  }
  out.pass = n_failed == 0;
  out.report = {{"tool", "cattaneo"},
                {"version", kToolVersion},
                {"command", command},
                {"config_hash", config_hash(ctx.config)},
                {"config", config_to_json(ctx.config)},
                {"sections", secs},
                {"summary", {{"checks", n_checks}, {"failed", n_failed}, {"failed_checks", failed},
                             {"pass", out.pass}}}};
  return out;
}

}  // namespace cattaneo::cli

#include "vpfp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>

#include <Eigen/Dense>
#include <json.hpp>

#include "vpfp/errors.hpp"

namespace vpfp {

namespace {

std::string format_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

MeshPtr perturbed_mesh(double length, int nx, double jitter, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-jitter, jitter);
  std::vector<double> nodes(nx + 1);
  const double h = length / nx;
  for (int i = 0; i <= nx; ++i) nodes[i] = h * i;
  for (int i = 1; i < nx; ++i) nodes[i] += h * unif(rng);
  nodes[nx] = length;
  return make_mesh_from_nodes(nodes, length);
}

DGField random_field(MeshPtr mesh, int degree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  DGField u(std::move(mesh), degree);
  for (int n = 0; n < u.size(); ++n) u.coeffs()[n] = unif(rng);
  return u;
}

DGField zero_mean_random_field(MeshPtr mesh, int degree, std::mt19937_64& rng) {
  DGField u = random_field(std::move(mesh), degree, rng);
  for (int pass = 0; pass < 2; ++pass) {
    const double mean = u.mean();
    for (int j = 0; j < u.num_cells(); ++j)
      u.coeff(j, 0) -= mean * std::sqrt(u.mesh().cell_size(j));
  }
  return u;
}

DGField constant_field(MeshPtr mesh, int degree, double value) {
  DGField u(std::move(mesh), degree);
  for (int j = 0; j < u.num_cells(); ++j)
    u.coeff(j, 0) = value * std::sqrt(u.mesh().cell_size(j));
  return u;
}

/// <E, dE/dx> by exact quadrature for a degree-d field.
double e_times_dx_e(const DGField& e) {
  const int d = e.degree();
  const BasisTable table = tabulate_basis(d, default_quadrature_points(d));
  const Mesh1D& mesh = e.mesh();
  double acc = 0.0;
  for (int j = 0; j < mesh.num_cells(); ++j) {
    const double h = mesh.cell_size(j);
    for (int a = 0; a < table.rule.size(); ++a) {
      double val = 0.0, der = 0.0;
      for (int i = 0; i <= d; ++i) {
        val += e.coeff(j, i) * table.values(a, i);
        if (i >= 1) der += e.coeff(j, i) * table.derivatives(a, i);
      }
      acc += table.rule.weights[a] * 0.5 * h * (val / std::sqrt(h)) *
             (der * 2.0 / h / std::sqrt(h));
    }
  }
  return acc;
}

struct EnergyPairing {
  double derivative = 0.0;  // d/dt of the energy functional, by pairing
  double scale = 0.0;       // magnitude of the individual pairing terms
};

EnergyPairing energy_time_derivative(const VpfpSystem& system, const HermiteState& state,
                                     const VpfpSystem::RhsResult& rhs) {
  const ModelParams& p = system.params();
  EnergyPairing out;
  DGField dev = system.charge_deviation(state);
  const double t0 = l2_inner(dev, rhs.derivative.mode(0)) / p.rho_inf;
  out.derivative += t0;
  out.scale += std::abs(t0);
  for (int k = 1; k <= state.NH(); ++k) {
    const double tk = l2_inner(state.mode(k), rhs.derivative.mode(k)) / p.rho_inf;
    out.derivative += tk;
    out.scale += std::abs(tk);
  }
  // dE/dt enters through a Poisson solve with the (zero-mean) density rate.
  const ElectricSolution field_dot = system.solve_poisson(rhs.derivative.mode(0));
  const double tfield = rhs.field.E.coeffs().dot(field_dot.E.coeffs()) / p.T0;
  out.derivative += tfield;
  out.scale += std::abs(tfield);
  return out;
}

}  // namespace

NormTriple cross_resolution_error(const HermiteState& coarse, const HermiteState& fine) {
  if (coarse.degree() != fine.degree())
    throw std::invalid_argument("cross_resolution_error: degree mismatch");
  const int m = coarse.degree();
  const Mesh1D& fmesh = fine.mesh();
  const Mesh1D& cmesh = coarse.mesh();
  const QuadratureRule rule = gauss_legendre(default_quadrature_points(m));
  const int kmax = std::max(coarse.NH(), fine.NH());
  std::vector<double> l1(kmax + 1, 0.0), l2(kmax + 1, 0.0), linf(kmax + 1, 0.0);
  for (int j = 0; j < fmesh.num_cells(); ++j) {
    const double h = fmesh.cell_size(j);
    for (int a = 0; a < rule.size(); ++a) {
      const double x = fmesh.cell_center(j) + 0.5 * h * rule.nodes[a];
      const double w = rule.weights[a] * 0.5 * h;
      const int cj = cmesh.locate(x);
      for (int k = 0; k <= kmax; ++k) {
        const double fv = k <= fine.NH() ? fine.mode(k).evaluate_in_cell(j, x) : 0.0;
        const double cv = k <= coarse.NH() ? coarse.mode(k).evaluate_in_cell(cj, x) : 0.0;
        const double diff = fv - cv;
        l1[k] += w * std::abs(diff);
        l2[k] += w * diff * diff;
        linf[k] = std::max(linf[k], std::abs(diff));
      }
    }
  }
  NormTriple out;
  for (int k = 0; k <= kmax; ++k) {
    out.l1 += l1[k] * l1[k];
    out.l2 += l2[k];
    out.linf += linf[k] * linf[k];
  }
  out.l1 = std::sqrt(out.l1);
  out.l2 = std::sqrt(out.l2);
  out.linf = std::sqrt(out.linf);
  return out;
}

RunArtifacts run_single(const RunConfig& config) {
  const MeshPtr mesh = config.make_mesh();
  const VpfpSystem system(config.make_params(mesh), config.transport_flux(),
                          config.poisson_method(), config.ldg_flux());
  const TimeIntegrator integrator(system, config.make_time_config());

  HermiteState state0 = config.ic.kind == "equilibrium"
                            ? system.equilibrium_state()
                            : system.initial_condition_landau(config.ic.delta);
  const double alpha0 =
      config.diagnostics.calibrate_alpha0
          ? calibrate_alpha0(system, config.diagnostics.calibration_states,
                             config.diagnostics.seed)
          : config.diagnostics.alpha0;

  std::filesystem::create_directories(config.output.dir);
  RunArtifacts artifacts{{}, state0, {}};
  const std::string fingerprint = config.fingerprint();

  std::vector<bool> snapshot_done(config.output.snapshot_times.size(), false);
  auto emit_snapshot = [&](std::size_t idx, const HermiteState& state) {
    const double vmax = config.output.vmax_factor * std::sqrt(config.model.T0);
    std::vector<double> xs(config.output.phase_grid_nx), vs(config.output.phase_grid_nv);
    const double x0 = mesh->endpoints().front();
    for (std::size_t i = 0; i < xs.size(); ++i)
      xs[i] = x0 + config.model.L * static_cast<double>(i) / xs.size();
    for (std::size_t i = 0; i < vs.size(); ++i)
      vs[i] = -vmax + 2.0 * vmax * static_cast<double>(i) / (vs.size() - 1);
    const Eigen::MatrixXd f = system.reconstruct_f_grid(state, xs, vs);
    const std::string path = config.output.dir + "/f_slice_t" +
                             format_g(config.output.snapshot_times[idx]) + ".csv";
    std::ofstream os(path);
    os << "# config_fingerprint=" << fingerprint << "\nx,v,f\n";
    char line[160];
    for (std::size_t ix = 0; ix < xs.size(); ++ix)
      for (std::size_t iv = 0; iv < vs.size(); ++iv) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", xs[ix], vs[iv], f(ix, iv));
        os << line;
      }
    artifacts.files.push_back(path);
  };

  const Observer observer = [&](int step, double t, const HermiteState& state) {
    if (step % config.output.stride == 0 || t == config.time.t_end)
      artifacts.series.push_back(compute_record(system, state, t, alpha0));
    for (std::size_t i = 0; i < snapshot_done.size(); ++i) {
      if (!snapshot_done[i] &&
          std::abs(t - config.output.snapshot_times[i]) <= 0.5 * config.time.dt) {
        snapshot_done[i] = true;
        emit_snapshot(i, state);
      }
    }
  };

  artifacts.final_state = integrator.run(state0, config.time.t_end, 1, observer);

  {
    const std::string path = config.output.dir + "/diagnostics.csv";
    std::ofstream os(path);
    write_csv_header(os, fingerprint);
    for (const DiagnosticsRecord& r : artifacts.series) write_csv_row(os, r);
    artifacts.files.push_back(path);
  }
  {
    const std::string path = config.output.dir + "/state_final.csv";
    std::ofstream os(path);
    os << "# config_fingerprint=" << fingerprint << "\n";
    write_csv(os, artifacts.final_state);
    artifacts.files.push_back(path);
  }
  {
    nlohmann::json summary;
    summary["config_fingerprint"] = fingerprint;
    summary["records"] = artifacts.series.size();
    const DiagnosticsRecord& last = artifacts.series.back();
    summary["final"] = {{"t", last.t},           {"energy_E", last.energy_E},
                        {"mass_m0", last.mass_m0}, {"momentum_m1", last.momentum_m1},
                        {"total_W", last.total_W}, {"norm_E", last.norm_E}};
    const std::string path = config.output.dir + "/summary.json";
    std::ofstream os(path);
    os << summary.dump(2) << "\n";
    artifacts.files.push_back(path);
  }
  return artifacts;
}

ConvergenceReport run_convergence_study(const RunConfig& config) {
  const auto& levels = config.convergence.levels;
  if (levels.size() < 2)
    throw std::invalid_argument("convergence: need at least two refinement levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i][0] != 2 * levels[i - 1][0] || levels[i][1] != 2 * levels[i - 1][1])
      throw std::invalid_argument(
          "convergence: refinement levels must double (Nx, NH) jointly");
  }

  std::vector<HermiteState> finals;
  finals.reserve(levels.size());
  for (const auto& level : levels) {
    RunConfig local = config;
    local.model.Nx = level[0];
    local.model.NH = level[1];
    local.model.nodes.clear();
    local.time.dt = config.convergence.dt;
    const MeshPtr mesh = local.make_mesh();
    const VpfpSystem system(local.make_params(mesh), local.transport_flux(),
                            local.poisson_method(), local.ldg_flux());
    const TimeIntegrator integrator(system, local.make_time_config());
    const HermiteState state0 = local.ic.kind == "equilibrium"
                                    ? system.equilibrium_state()
                                    : system.initial_condition_landau(local.ic.delta);
    finals.push_back(integrator.run(state0, local.time.t_end));
  }

  ConvergenceReport report;
  report.tau0 = config.model.tau0;
  for (std::size_t i = 1; i < finals.size(); ++i) {
    ConvergencePair pair;
    pair.nx_coarse = levels[i - 1][0];
    pair.nh_coarse = levels[i - 1][1];
    pair.nx_fine = levels[i][0];
    pair.nh_fine = levels[i][1];
    pair.error = cross_resolution_error(finals[i - 1], finals[i]);
    if (!report.pairs.empty()) {
      const NormTriple& prev = report.pairs.back().error;
      pair.order = NormTriple{std::log2(prev.l1 / pair.error.l1),
                              std::log2(prev.l2 / pair.error.l2),
                              std::log2(prev.linf / pair.error.linf)};
    }
    report.pairs.push_back(pair);
  }
  return report;
}

std::string ConvergenceReport::to_json() const {
  nlohmann::json root;
  root["tau0"] = tau0;
  root["comparison"] =
      "pointwise sampling on the finer run's quadrature grid; L1/L2 by quadrature "
      "weights, Linf by max over sample points; Hermite modes aligned on the coarser "
      "NH with the finer run's extra modes included as-is";
  root["pairs"] = nlohmann::json::array();
  for (const ConvergencePair& p : pairs) {
    nlohmann::json entry = {{"nx_coarse", p.nx_coarse}, {"nh_coarse", p.nh_coarse},
                            {"nx_fine", p.nx_fine},     {"nh_fine", p.nh_fine},
                            {"eps_l1", p.error.l1},     {"eps_l2", p.error.l2},
                            {"eps_linf", p.error.linf}};
    if (p.order) {
      entry["order_l1"] = p.order->l1;
      entry["order_l2"] = p.order->l2;
      entry["order_linf"] = p.order->linf;
    }
    root["pairs"].push_back(entry);
  }
  return root.dump(2);
}

std::vector<RegimeResult> run_regime_sweep(const RunConfig& config) {
  if (config.sweep.tau0_list.empty())
    throw config_error("sweep: tau0_list must not be empty");
  std::vector<RegimeResult> results;
  for (const double tau0 : config.sweep.tau0_list) {
    RunConfig local = config;
    local.model.tau0 = tau0;
    local.output.dir = config.output.dir + "/tau" + format_g(tau0);
    local.output.snapshot_times.clear();
    const RunArtifacts artifacts = run_single(local);
    RegimeResult regime;
    regime.tau0 = tau0;
    regime.series = artifacts.series;
    try {
      regime.energy_rate = decay_rate_fit(regime.series, 0.0, config.time.t_end);
    } catch (const invalid_window&) {
    }
    // Same least-squares fit applied to the field norm.
    {
      std::vector<DiagnosticsRecord> surrogate = regime.series;
      bool usable = surrogate.size() >= 10;
      for (DiagnosticsRecord& r : surrogate) {
        if (!(r.norm_E > 0.0)) usable = false;
        r.energy_E = r.norm_E;
      }
      if (usable) regime.field_rate = decay_rate_fit(surrogate, 0.0, config.time.t_end);
    }
    results.push_back(std::move(regime));
  }

  nlohmann::json root = nlohmann::json::array();
  for (const RegimeResult& r : results) {
    nlohmann::json entry = {{"tau0", r.tau0}};
    if (r.energy_rate) {
      entry["energy_rate"] = r.energy_rate->rate;
      entry["energy_rate_residual"] = r.energy_rate->residual;
    }
    if (r.field_rate) entry["field_norm_rate"] = r.field_rate->rate;
    root.push_back(entry);
  }
  std::filesystem::create_directories(config.output.dir);
  std::ofstream os(config.output.dir + "/sweep_rates.json");
  os << root.dump(2) << "\n";
  return results;
}

// ---------------------------------------------------------------------------
// Invariant battery
// ---------------------------------------------------------------------------

namespace {

class BatteryBuilder {
public:
  BatteryBuilder(const RunConfig& config) : config_(config), rng_(config.battery.seed) {}

  BatteryReport run() {
    operator_identities();
    poisson_identities();
    coercivity_and_equivalence();
    trace_inequality();
    semidiscrete_laws();
    elliptic_regularity_sweep();
    entropy_equivalence();
    collisionless_limit();
    return std::move(report_);
  }

private:
  void record(const std::string& name, bool pass, double measured, double threshold,
              std::string detail = {}) {
    report_.checks.push_back({name, pass, measured, threshold, std::move(detail)});
  }

  void check_max(const std::string& name, double measured, double threshold,
                 std::string detail = {}) {
    record(name, measured <= threshold, measured, threshold, std::move(detail));
  }

  MeshPtr random_mesh() {
    std::uniform_int_distribution<int> size(8, 64);
    std::uniform_real_distribution<double> len(2.0, 16.0);
    return perturbed_mesh(len(rng_), size(rng_), 0.35, rng_);
  }

  VpfpSystem make_system(MeshPtr mesh, int m, int nh, double tau0, PoissonMethod method,
                         Flux aflux, Flux bflux, double t0 = 1.0) {
    ModelParams p;
    p.T0 = t0;
    p.tau0 = tau0;
    p.rho_inf = 1.0;
    p.NH = nh;
    p.degree = m;
    p.mesh = std::move(mesh);
    return VpfpSystem(p, aflux, method, bflux);
  }

  void operator_identities() {
    double worst_dual = 0.0, worst_kernel = 0.0;
    for (int trial = 0; trial < config_.battery.trials; ++trial) {
      const MeshPtr mesh = random_mesh();
      for (const int m : {0, 1, 2}) {
        for (const Flux flux : {Flux::minus_plus, Flux::plus_minus}) {
          std::uniform_real_distribution<double> t0_dist(0.5, 3.0);
          const TransportOperator op(mesh, m, t0_dist(rng_), flux);
          const DGField u = random_field(mesh, m, rng_);
          const DGField v = random_field(mesh, m, rng_);
          const DGField au = op.apply(u);
          const DGField asv = op.apply_star(v);
          const double lhs = l2_inner(au, v);
          const double rhs = l2_inner(u, asv);
          const double scale = au.l2_norm() * v.l2_norm() + u.l2_norm() * asv.l2_norm() + 1e-300;
          worst_dual = std::max(worst_dual, std::abs(lhs - rhs) / scale);

          const DGField ones = constant_field(mesh, m, 1.0);
          const DGField a_ones = op.apply(ones);
          const double kscale = op.norm_estimate() * ones.l2_norm() + 1e-300;
          worst_kernel = std::max(worst_kernel, a_ones.l2_norm() / kscale);
        }
      }
    }
    check_max("ah_duality", worst_dual, 1e-11,
              "max |a_h(u,v) - a_h*(v,u)| over random meshes, m in {0,1,2}, both fluxes");
    check_max("ah_kernel", worst_kernel, 1e-11, "||A_h 1|| relative to ||A_h|| ||1||");
  }

  void poisson_identities() {
    double worst_ldg_dual = 0.0, worst_jump = 0.0;
    double worst_rt_dual = 0.0, worst_rt_strong = 0.0, worst_rt_primal = 0.0;
    double worst_rt_continuity = 0.0, worst_rt_pairing = 0.0, worst_phi_mean = 0.0;
    for (int trial = 0; trial < config_.battery.trials; ++trial) {
      const MeshPtr mesh = random_mesh();
      std::uniform_int_distribution<int> mdist(0, 2);
      const int m = mdist(rng_);
      for (const Flux flux : {Flux::minus_plus, Flux::plus_minus}) {
        const LdgPoissonOperator ldg(mesh, m, flux);
        const DGField phi = random_field(mesh, m, rng_);
        const DGField w = random_field(mesh, m, rng_);
        const DGField bphi = ldg.apply_B(phi);
        const DGField bsw = ldg.apply_B_star(w);
        const double lhs = l2_inner(bphi, w);
        const double rhs = l2_inner(phi, bsw);
        const double scale =
            bphi.l2_norm() * w.l2_norm() + phi.l2_norm() * bsw.l2_norm() + 1e-300;
        worst_ldg_dual = std::max(worst_ldg_dual, std::abs(lhs - rhs) / scale);

        if (flux == Flux::minus_plus) {
          // <E, B* E> = (1/2) sum of squared jumps for the (phi^-, E^+) pairing.
          const DGField e = random_field(mesh, m, rng_);
          const DGField bse = ldg.apply_B_star(e);
          double jumps = 0.0;
          for (int s = 0; s < mesh->num_cells(); ++s) {
            const auto [minus, plus] = e.trace(s);
            jumps += (plus - minus) * (plus - minus);
          }
          const double lhs_pairing = l2_inner(e, bse);
          const double scale_j = bse.l2_norm() * e.l2_norm() + 1e-300;
          worst_jump = std::max(worst_jump, std::abs(lhs_pairing - 0.5 * jumps) / scale_j);
        }
      }

      // Raviart-Thomas: duality of the forms, the strong identity
      // B* E = -dE/dx through the solve, continuity, and <E, dE/dx> = 0.
      const RtPoissonOperator rt(mesh, m);
      const std::vector<DGField> basis = rt.wh_basis();
      {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(basis.size()) - 1);
        const DGField& w = basis[pick(rng_)];
        const DGField v = random_field(mesh, m, rng_);
        const double lhs = rt_b_form(v, w);
        const double rhs = l2_inner(rt.apply_B_star(w), v);
        const double scale = v.l2_norm() * broken_seminorm(w) + 1e-300;
        worst_rt_dual = std::max(worst_rt_dual, std::abs(lhs - rhs) / scale);
      }
      {
        const DGField rho = zero_mean_random_field(mesh, m, rng_);
        const ElectricSolution sol = rt.solve(rho);
        DGField strong = rt.apply_B_star(sol.E);
        strong += rho;
        worst_rt_strong =
            std::max(worst_rt_strong, strong.l2_norm() / (rho.l2_norm() + 1e-300));
        const double e_linf = linf_norm(sol.E);
        for (int s = 0; s < mesh->num_cells(); ++s) {
          const auto [minus, plus] = sol.E.trace(s);
          worst_rt_continuity =
              std::max(worst_rt_continuity, std::abs(plus - minus) / (e_linf + 1e-300));
        }
        worst_rt_pairing = std::max(
            worst_rt_pairing, std::abs(e_times_dx_e(sol.E)) /
                                  (sol.E.l2_norm() * rho.l2_norm() + 1e-300));
        double primal = 0.0;
        for (const DGField& w : basis)
          primal = std::max(primal, std::abs(l2_inner(sol.E, w) + rt_b_form(sol.phi, w)));
        worst_rt_primal =
            std::max(worst_rt_primal,
                     primal / (sol.E.l2_norm() + sol.phi.l2_norm() + 1e-300));
        worst_phi_mean = std::max(
            worst_phi_mean, std::abs(sol.phi.integral()) / (sol.phi.l2_norm() + 1e-300));
      }
    }
    check_max("bh_duality_ldg", worst_ldg_dual, 1e-11, "both alternating flux pairs");
    check_max("ldg_jump_identity", worst_jump, 1e-11,
              "<E,B*E> = sum of squared jumps / 2, flux (phi^-, E^+)");
    check_max("bh_duality_rt", worst_rt_dual, 1e-11);
    check_max("rt_strong_identity", worst_rt_strong, 1e-11, "dE/dx = rho_dev cellwise");
    check_max("rt_continuity", worst_rt_continuity, 1e-11);
    check_max("rt_e_pairing", worst_rt_pairing, 1e-11, "<E, dE/dx> = 0");
    check_max("rt_primal_residual", worst_rt_primal, 1e-10,
              "first mixed equation over the full W_h basis");
    check_max("poisson_phi_zero_mean", worst_phi_mean, 1e-10);
  }

  void coercivity_and_equivalence() {
    for (const Flux flux : {Flux::minus_plus, Flux::plus_minus}) {
      std::vector<double> sigma_min;
      std::vector<double> up_ratios, lo_ratios;
      for (const int nx : {16, 32, 64, 128}) {
        const MeshPtr mesh = make_uniform_mesh(4.0 * M_PI, nx);
        const TransportOperator op(mesh, 1, 1.0, flux);
        const Eigen::MatrixXd a = op.dense();
        // Restrict to the zero-mean subspace through an orthonormal basis of
        // the complement of the constant direction.
        Eigen::VectorXd w = Eigen::VectorXd::Zero(op.dim());
        for (int j = 0; j < nx; ++j)
          w[2 * j] = std::sqrt(mesh->cell_size(j) / mesh->length());
        Eigen::MatrixXd householder = Eigen::MatrixXd::Identity(op.dim(), op.dim());
        Eigen::VectorXd v = w;
        v[0] += (w[0] >= 0 ? 1.0 : -1.0) * w.norm();
        householder -= 2.0 / v.squaredNorm() * v * v.transpose();
        const Eigen::MatrixXd q = householder.rightCols(op.dim() - 1);
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a * q);
        sigma_min.push_back(svd.singularValues().tail(1)(0));

        double up = 0.0, lo = 1e300;
        for (int t = 0; t < 20; ++t) {
          const DGField u = random_field(mesh, 1, rng_);
          const double ratio = op.apply(u).l2_norm() / (broken_seminorm(u) + 1e-300);
          const double ratio_star = op.apply_star(u).l2_norm() / (broken_seminorm(u) + 1e-300);
          up = std::max({up, ratio, ratio_star});
          lo = std::min({lo, ratio, ratio_star});
        }
        up_ratios.push_back(up);
        lo_ratios.push_back(lo);
      }
      const std::string suffix = flux == Flux::minus_plus ? "_mp" : "_pm";
      record("coercivity_sigma_min" + suffix, sigma_min.back() >= 0.5 * sigma_min.front(),
             sigma_min.back() / sigma_min.front(), 0.5,
             "sigma_min(Nx=128) >= 0.5 sigma_min(Nx=16) on the zero-mean subspace");
      const double up_spread = *std::max_element(up_ratios.begin(), up_ratios.end()) /
                               *std::min_element(up_ratios.begin(), up_ratios.end());
      const double lo_spread = *std::max_element(lo_ratios.begin(), lo_ratios.end()) /
                               *std::min_element(lo_ratios.begin(), lo_ratios.end());
      check_max("norm_equivalence_upper" + suffix, up_spread, 2.0,
                "spread of max ||A_h u|| / |u|_{1,h} across Nx in {16..128}");
      check_max("norm_equivalence_lower" + suffix, lo_spread, 2.0,
                "spread of min ||A_h u|| / |u|_{1,h} across Nx in {16..128}");
    }
  }

  void trace_inequality() {
    // One-sided traces carry the sharp constant C_tr(m) = m+1 (the form the
    // coercivity proofs rely on); the two-sided boundary norm needs
    // sqrt((m+1)(m+2)).
    double worst_one = 0.0, worst_two = 0.0;
    for (int trial = 0; trial < config_.battery.trials; ++trial) {
      const MeshPtr mesh = random_mesh();
      for (const int m : {0, 1, 2}) {
        const DGField u = random_field(mesh, m, rng_);
        for (int j = 0; j < mesh->num_cells(); ++j) {
          const double left = u.evaluate_in_cell(j, mesh->cell_left(j));
          const double right = u.evaluate_in_cell(j, mesh->cell_right(j));
          double cell_norm = 0.0;
          for (int i = 0; i <= m; ++i) cell_norm += u.coeff(j, i) * u.coeff(j, i);
          cell_norm = std::sqrt(cell_norm) / std::sqrt(mesh->cell_size(j));
          const double one_bound = (m + 1) * cell_norm + 1e-300;
          worst_one = std::max({worst_one, std::abs(left) / one_bound,
                                std::abs(right) / one_bound});
          const double two_bound =
              std::sqrt((m + 1.0) * (m + 2.0)) * cell_norm + 1e-300;
          worst_two =
              std::max(worst_two, std::sqrt(left * left + right * right) / two_bound);
        }
      }
    }
    check_max("trace_inequality_one_sided", worst_one, 1.0 + 1e-12,
              "|u(x+-)| <= (m+1) h^(-1/2) ||u||_K, sharp");
    check_max("trace_inequality_two_sided", worst_two, 1.0 + 1e-12,
              "boundary norm <= sqrt((m+1)(m+2)) h^(-1/2) ||u||_K");
  }

  void semidiscrete_laws() {
    double worst_energy_law = 0.0;
    double worst_mass = 0.0;
    double worst_rt_momentum = 0.0;
    double worst_ldg_momentum = 0.0;  // positive part of the inequality residual
    double worst_matched_energy = 0.0;
    double control_violation = 1e300;

    for (int trial = 0; trial < std::max(10, config_.battery.trials); ++trial) {
      const MeshPtr mesh = perturbed_mesh(4.0 * M_PI, 16 + 4 * (trial % 5), 0.25, rng_);
      const int nh = 6;
      std::uniform_real_distribution<double> tau_dist(0.5, 20.0);
      const double tau0 = tau_dist(rng_);

      for (const PoissonMethod method : {PoissonMethod::ldg, PoissonMethod::rt}) {
        const VpfpSystem system = make_system(mesh, 1, nh, tau0, method, Flux::minus_plus,
                                              Flux::minus_plus, 1.3);
        const HermiteState state = random_state(system, rng_(), 0.2);
        // Linearized energy law (the pairing derivative plus I/tau0 vanishes).
        const VpfpSystem::RhsResult lin = system.rhs_linearized(state);
        const EnergyPairing pairing = energy_time_derivative(system, state, lin);
        const double dissipation = dissipation_functional(state, system.params());
        const double scale = pairing.scale + dissipation / tau0 + 1e-300;
        worst_energy_law = std::max(
            worst_energy_law, std::abs(pairing.derivative + dissipation / tau0) / scale);

        // Mass: the nonlinear D_0 pairing with 1 vanishes.
        const VpfpSystem::RhsResult nonlin = system.rhs_nonlinear(state);
        const double mass_rate = nonlin.derivative.mode(0).integral();
        const double mass_scale =
            nonlin.derivative.mode(0).l2_norm() * std::sqrt(mesh->length()) + 1e-300;
        worst_mass = std::max(worst_mass, std::abs(mass_rate) / mass_scale);

        const ModelParams& p = system.params();
        const double m1 = std::sqrt(p.T0) * state.mode(1).integral();
        const double m1_rate = std::sqrt(p.T0) * nonlin.derivative.mode(1).integral();
        const double mom_scale = std::abs(m1_rate) + std::abs(m1) / tau0 +
                                 nonlin.field.E.l2_norm() + 1e-300;
        if (method == PoissonMethod::rt) {
          worst_rt_momentum =
              std::max(worst_rt_momentum, std::abs(m1_rate + m1 / tau0) / mom_scale);
        } else {
          worst_ldg_momentum =
              std::max(worst_ldg_momentum, (m1_rate + m1 / tau0) / mom_scale);
        }

        if (method == PoissonMethod::ldg) {
          // Matched fluxes: dW/dt = -(2K - T0 m0)/tau0 exactly.
          const ElectricSolution field_dot =
              system.solve_poisson(nonlin.derivative.mode(0));
          const PhysicalInvariants inv = physical_invariants(state, nonlin.field, p);
          const double k_rate =
              p.T0 / std::sqrt(2.0) *
              (nonlin.derivative.mode(2).integral() +
               nonlin.derivative.mode(0).integral() / std::sqrt(2.0));
          const double w_rate = k_rate + nonlin.field.E.coeffs().dot(field_dot.E.coeffs());
          const double target = -(2.0 * inv.K - p.T0 * inv.m0) / tau0;
          const double wscale = std::abs(k_rate) +
                                nonlin.field.E.l2_norm() * field_dot.E.l2_norm() +
                                std::abs(target) + 1e-300;
          worst_matched_energy =
              std::max(worst_matched_energy, std::abs(w_rate - target) / wscale);

          // Negative control: mismatched a/b fluxes break the cancellation.
          const VpfpSystem mismatched = make_system(mesh, 1, nh, tau0, PoissonMethod::ldg,
                                                    Flux::minus_plus, Flux::plus_minus, 1.3);
          const VpfpSystem::RhsResult bad = mismatched.rhs_nonlinear(state);
          const ElectricSolution bad_dot =
              mismatched.solve_poisson(bad.derivative.mode(0));
          const PhysicalInvariants bad_inv = physical_invariants(state, bad.field, p);
          const double bad_k_rate =
              p.T0 / std::sqrt(2.0) *
              (bad.derivative.mode(2).integral() +
               bad.derivative.mode(0).integral() / std::sqrt(2.0));
          const double bad_w_rate =
              bad_k_rate + bad.field.E.coeffs().dot(bad_dot.E.coeffs());
          const double bad_target = -(2.0 * bad_inv.K - p.T0 * bad_inv.m0) / tau0;
          const double bad_scale = std::abs(bad_k_rate) + std::abs(bad_target) + 1e-300;
          control_violation =
              std::min(control_violation, std::abs(bad_w_rate - bad_target) / bad_scale);
        }
      }
    }
    check_max("linearized_energy_law", worst_energy_law, 1e-11,
              "dE_h/dt + I_h/tau0 = 0 by pairing, both Poisson methods");
    check_max("mass_rhs_zero", worst_mass, 1e-12, "<dD_0/dt, 1> = 0, nonlinear RHS");
    check_max("rt_momentum_identity", worst_rt_momentum, 1e-11,
              "dm_1/dt = -m_1/tau0 with Raviart-Thomas");
    check_max("ldg_momentum_inequality", worst_ldg_momentum, 1e-12,
              "dm_1/dt <= -m_1/tau0 with the (phi^-, E^+) pairing");
    check_max("ldg_energy_law_matched", worst_matched_energy, 1e-11,
              "dW/dt = -(2K - T0 m0)/tau0 with matched fluxes");
    record("energy_law_negative_control", control_violation > 1e-6, control_violation,
           1e-6, "mismatched flux pairs must break the energy identity");
  }

  void elliptic_regularity_sweep() {
    // A fixed smooth random function projected onto each mesh, so the four
    // regularity ratios converge to their continuum values.
    std::mt19937_64 rng(config_.battery.seed + 101);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> ac(8), bc(8);
    for (int n = 0; n < 8; ++n) {
      ac[n] = unif(rng);
      bc[n] = unif(rng);
    }
    const double length = 4.0 * M_PI;
    const auto g = [&](double x) {
      double acc = 0.0;
      for (int n = 1; n <= 8; ++n)
        acc += ac[n - 1] * std::cos(2.0 * M_PI * n * x / length) +
               bc[n - 1] * std::sin(2.0 * M_PI * n * x / length);
      return acc;
    };

    std::vector<double> r_f, r_af, r_e2_ldg, r_einf_ldg, r_e2_rt, r_einf_rt;
    for (const int nx : {16, 32, 64, 128, 256}) {
      const MeshPtr mesh = make_uniform_mesh(length, nx);
      const int m = 1;
      DGField rhs = l2_project(g, mesh, m, 10);
      for (int pass = 0; pass < 2; ++pass) {
        const double mean = rhs.mean();
        for (int j = 0; j < nx; ++j)
          rhs.coeff(j, 0) -= mean * std::sqrt(mesh->cell_size(j));
      }
      const double rhs_norm = rhs.l2_norm();

      const TransportOperator op(mesh, m, 1.0, Flux::minus_plus);
      const AuxiliaryEllipticSolution aux = op.solve_auxiliary_elliptic(rhs);
      r_f.push_back(aux.F.l2_norm() / rhs_norm);
      r_af.push_back(op.apply(aux.F).l2_norm() / rhs_norm);

      const LdgPoissonOperator ldg(mesh, m, Flux::minus_plus);
      const ElectricSolution sol_ldg = ldg.solve(rhs);
      r_e2_ldg.push_back(sol_ldg.E.l2_norm() / rhs_norm);
      r_einf_ldg.push_back(electric_linf_ratio(sol_ldg, rhs));

      const RtPoissonOperator rt(mesh, m);
      const ElectricSolution sol_rt = rt.solve(rhs);
      r_e2_rt.push_back(sol_rt.E.l2_norm() / rhs_norm);
      r_einf_rt.push_back(electric_linf_ratio(sol_rt, rhs));
    }
    const auto spread = [](const std::vector<double>& v) {
      return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
    };
    check_max("regularity_h1_F", spread(r_f), 2.0, "||F||/||rhs|| across Nx in {16..256}");
    check_max("regularity_h2_AF", spread(r_af), 2.0, "||A_h F||/||rhs||");
    check_max("regularity_E_l2_ldg", spread(r_e2_ldg), 2.0);
    check_max("regularity_E_linf_ldg", spread(r_einf_ldg), 2.0);
    check_max("regularity_E_l2_rt", spread(r_e2_rt), 2.0);
    check_max("regularity_E_linf_rt", spread(r_einf_rt), 2.0);
  }

  void entropy_equivalence() {
    double alpha0 = 1.0;
    std::vector<VpfpSystem> systems;
    for (const int nx : {16, 32, 64}) {
      systems.push_back(make_system(make_uniform_mesh(4.0 * M_PI, nx), 1, 8, 10.0,
                                    PoissonMethod::ldg, Flux::minus_plus,
                                    Flux::minus_plus));
      alpha0 = std::min(alpha0, calibrate_alpha0(systems.back(), 60, config_.battery.seed));
    }
    double worst_margin = 0.0;
    for (const VpfpSystem& system : systems) {
      for (int s = 0; s < 100; ++s) {
        const HermiteState state = random_state(system, rng_(), 0.4);
        const ElectricSolution field =
            system.solve_poisson(system.charge_deviation(state));
        const double energy = energy_functional(state, field, system.params());
        const double entropy = modified_entropy(state, field, system, alpha0);
        const double margin =
            std::max(0.5 * energy - entropy, entropy - 1.5 * energy) / (energy + 1e-300);
        worst_margin = std::max(worst_margin, margin);
      }
    }
    record("entropy_equivalence", worst_margin <= 0.0, worst_margin, 0.0,
           "E/2 <= H <= 3E/2 at calibrated alpha0 = " + format_g(alpha0) +
               ", 100 states x 3 mesh levels");
  }

  void collisionless_limit() {
    const MeshPtr mesh = make_uniform_mesh(4.0 * M_PI, 24);
    const VpfpSystem weak = make_system(mesh, 1, 8, 1e12, PoissonMethod::ldg,
                                        Flux::minus_plus, Flux::minus_plus);
    const HermiteState state = random_state(weak, config_.battery.seed + 5, 0.2);
    const VpfpSystem::RhsResult with_collision = weak.rhs_nonlinear(state);
    const VpfpSystem::RhsResult without = weak.rhs(state, false, false);
    Eigen::VectorXd a, b;
    with_collision.derivative.to_flat(a);
    without.derivative.to_flat(b);
    check_max("collisionless_limit", (a - b).norm() / (b.norm() + 1e-300), 1e-12,
              "tau0 = 1e12 matches the collisionless RHS");
  }

  const RunConfig& config_;
  std::mt19937_64 rng_;
  BatteryReport report_;
};

}  // namespace

BatteryReport run_invariant_battery(const RunConfig& config) {
  return BatteryBuilder(config).run();
}

bool BatteryReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const InvariantCheck& c) { return c.pass; });
}

void print_battery(std::ostream& os, const BatteryReport& report) {
  for (const InvariantCheck& c : report.checks) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-32s %s  measured=%.3e threshold=%.3e %s\n",
                  c.name.c_str(), c.pass ? "PASS" : "FAIL", c.measured, c.threshold,
                  c.detail.c_str());
    os << line;
  }
}

}  // namespace vpfp

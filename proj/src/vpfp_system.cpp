#include "vpfp/vpfp_system.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "vpfp/legendre.hpp"

namespace vpfp {

void ModelParams::validate() const {
  if (!(T0 > 0.0)) throw std::invalid_argument("params: T0 must be positive");
  if (!(tau0 > 0.0)) throw std::invalid_argument("params: tau0 must be positive");
  if (!(rho_inf > 0.0)) throw std::invalid_argument("params: rho_inf must be positive");
  if (NH < 1) throw std::invalid_argument("params: NH must be at least 1");
  if (degree < 0) throw std::invalid_argument("params: negative degree");
  if (!mesh) throw std::invalid_argument("params: missing mesh");
}

HermiteState::HermiteState(MeshPtr mesh, int degree, int NH) {
  if (NH < 1) throw std::invalid_argument("state: NH must be at least 1");
  modes_.reserve(NH + 1);
  for (int k = 0; k <= NH; ++k) modes_.emplace_back(mesh, degree);
}

void HermiteState::to_flat(Eigen::VectorXd& out) const {
  const int stride = modes_.front().size();
  out.resize(flat_size());
  for (int k = 0; k < num_modes(); ++k)
    out.segment(k * stride, stride) = modes_[k].coeffs();
}

void HermiteState::from_flat(const Eigen::VectorXd& in) {
  const int stride = modes_.front().size();
  if (in.size() != flat_size()) throw std::invalid_argument("state: flat size mismatch");
  for (int k = 0; k < num_modes(); ++k)
    modes_[k].coeffs() = in.segment(k * stride, stride);
}

double HermiteState::l2_norm() const {
  double acc = 0.0;
  for (const DGField& d : modes_) acc += d.coeffs().squaredNorm();
  return std::sqrt(acc);
}

HermiteState& HermiteState::operator+=(const HermiteState& other) {
  if (NH() != other.NH()) throw std::invalid_argument("state: NH mismatch");
  for (int k = 0; k < num_modes(); ++k) modes_[k] += other.modes_[k];
  return *this;
}

HermiteState& HermiteState::operator-=(const HermiteState& other) {
  if (NH() != other.NH()) throw std::invalid_argument("state: NH mismatch");
  for (int k = 0; k < num_modes(); ++k) modes_[k] -= other.modes_[k];
  return *this;
}

HermiteState& HermiteState::operator*=(double factor) {
  for (DGField& d : modes_) d *= factor;
  return *this;
}

VpfpSystem::VpfpSystem(ModelParams params, Flux transport_flux, PoissonMethod method,
                       Flux ldg_flux)
    : params_(std::move(params)),
      method_(method),
      ldg_flux_(ldg_flux),
      transport_(params_.mesh, params_.degree, params_.T0, transport_flux),
      table_m_(tabulate_basis(params_.degree, default_quadrature_points(params_.degree))),
      table_e_(tabulate_basis(params_.degree + 1, default_quadrature_points(params_.degree))) {
  params_.validate();
  if (method_ == PoissonMethod::ldg)
    ldg_ = std::make_unique<LdgPoissonOperator>(params_.mesh, params_.degree, ldg_flux_);
  else
    rt_ = std::make_unique<RtPoissonOperator>(params_.mesh, params_.degree);
}

HermiteState VpfpSystem::equilibrium_state() const {
  HermiteState state(params_.mesh, params_.degree, params_.NH);
  const Mesh1D& mesh = *params_.mesh;
  for (int j = 0; j < mesh.num_cells(); ++j)
    state.mode(0).coeff(j, 0) = params_.rho_inf * std::sqrt(mesh.cell_size(j));
  return state;
}

HermiteState VpfpSystem::initial_condition_landau(double delta) const {
  HermiteState state(params_.mesh, params_.degree, params_.NH);
  const double two_pi_over_l = 2.0 * M_PI / params_.mesh->length();
  state.mode(0) = l2_project(
      [&](double x) { return params_.rho_inf * (1.0 + delta * std::cos(two_pi_over_l * x)); },
      params_.mesh, params_.degree);
  return state;
}

DGField VpfpSystem::charge_deviation(const HermiteState& state) const {
  DGField dev = state.mode(0);
  const Mesh1D& mesh = *params_.mesh;
  for (int j = 0; j < mesh.num_cells(); ++j)
    dev.coeff(j, 0) -= params_.rho_inf * std::sqrt(mesh.cell_size(j));
  return dev;
}

ElectricSolution VpfpSystem::solve_poisson(const DGField& rho_dev) const {
  return ldg_ ? ldg_->solve(rho_dev) : rt_->solve(rho_dev);
}

void VpfpSystem::check_state(const HermiteState& state) const {
  if (state.NH() != params_.NH || state.degree() != params_.degree ||
      !state.mesh().same_partition(*params_.mesh))
    throw std::invalid_argument("system: state does not match the discretization");
}

DGField VpfpSystem::nonlinear_term(const DGField& e_field, const DGField& d) const {
  const Mesh1D& mesh = *params_.mesh;
  const int m = params_.degree;
  const bool e_high = e_field.degree() == m + 1;
  if (!e_high && e_field.degree() != m)
    throw std::invalid_argument("nonlinear_term: unexpected E degree");
  const BasisTable& te = e_high ? table_e_ : table_m_;
  const int q = table_m_.rule.size();
  DGField out(d.mesh_ptr(), m);
  for (int j = 0; j < mesh.num_cells(); ++j) {
    const double h = mesh.cell_size(j);
    const double scale = 1.0 / std::sqrt(h);
    for (int a = 0; a < q; ++a) {
      double e_val = 0.0;
      for (int i = 0; i <= e_field.degree(); ++i)
        e_val += e_field.coeff(j, i) * te.values(a, i);
      double d_val = 0.0;
      for (int i = 0; i <= m; ++i) d_val += d.coeff(j, i) * table_m_.values(a, i);
      const double w = table_m_.rule.weights[a] * 0.5 * h * e_val * d_val * scale * scale;
      for (int i = 0; i <= m; ++i) out.coeff(j, i) += w * table_m_.values(a, i) * scale;
    }
  }
  return out;
}

VpfpSystem::RhsResult VpfpSystem::field_source(const HermiteState& state,
                                               bool linearized) const {
  check_state(state);
  const int nh = params_.NH;
  const DGField rho_dev = charge_deviation(state);
  ElectricSolution field = solve_poisson(rho_dev);

  HermiteState out(state.mesh_ptr(), params_.degree, nh);
  // Linearized field coupling, discretized as (rho_inf/T0) A phi: this exact
  // pairing carries the linearized energy identity.
  transport_.apply_scaled_add(field.phi.coeffs().data(), out.mode(1).coeffs().data(),
                              -params_.rho_inf / params_.T0);
  if (!linearized) {
    DGField proj = nonlinear_term(field.E, rho_dev);
    out.mode(1).coeffs() += (1.0 / std::sqrt(params_.T0)) * proj.coeffs();
    for (int k = 2; k <= nh; ++k) {
      proj = nonlinear_term(field.E, state.mode(k - 1));
      out.mode(k).coeffs() += std::sqrt(k / params_.T0) * proj.coeffs();
    }
  }
  return {std::move(out), std::move(field)};
}

VpfpSystem::RhsResult VpfpSystem::rhs(const HermiteState& state, bool linearized,
                                      bool include_collision) const {
  RhsResult result = field_source(state, linearized);
  const int nh = params_.NH;
  HermiteState& out = result.derivative;
  const auto apply_a = [&](const DGField& u, DGField& target, double scale) {
    transport_.apply_scaled_add(u.coeffs().data(), target.coeffs().data(), scale);
  };
  const auto apply_a_star = [&](const DGField& u, DGField& target, double scale) {
    transport_.apply_star_scaled_add(u.coeffs().data(), target.coeffs().data(), scale);
  };

  // dD_0/dt = A* D_1
  apply_a_star(state.mode(1), out.mode(0), 1.0);

  // dD_1/dt = -A D_0 + sqrt(2) A* D_2 + field terms - D_1 / tau0
  apply_a(state.mode(0), out.mode(1), -1.0);
  if (nh >= 2) apply_a_star(state.mode(2), out.mode(1), std::sqrt(2.0));
  if (include_collision) out.mode(1).coeffs() -= (1.0 / params_.tau0) * state.mode(1).coeffs();

  // dD_k/dt = -sqrt(k) A D_{k-1} + sqrt(k+1) A* D_{k+1} + field terms
  //           - k D_k / tau0,  with the closure D_{NH+1} = 0
  for (int k = 2; k <= nh; ++k) {
    apply_a(state.mode(k - 1), out.mode(k), -std::sqrt(static_cast<double>(k)));
    if (k + 1 <= nh)
      apply_a_star(state.mode(k + 1), out.mode(k), std::sqrt(static_cast<double>(k + 1)));
    if (include_collision)
      out.mode(k).coeffs() -= (static_cast<double>(k) / params_.tau0) * state.mode(k).coeffs();
  }
  return result;
}

VpfpSystem::RhsResult VpfpSystem::rhs_nonlinear(const HermiteState& state) const {
  return rhs(state, false, true);
}

VpfpSystem::RhsResult VpfpSystem::rhs_linearized(const HermiteState& state) const {
  return rhs(state, true, true);
}

double VpfpSystem::reconstruct_f(const HermiteState& state, double x, double v) const {
  check_state(state);
  const int nh = params_.NH;
  const double sqrt_t0 = std::sqrt(params_.T0);
  std::vector<double> hermite(nh + 1);
  hermite_values(nh, v / sqrt_t0, hermite.data());
  const double maxwellian =
      std::exp(-0.5 * v * v / params_.T0) / std::sqrt(2.0 * M_PI * params_.T0);
  const int cell = params_.mesh->locate(x);
  double acc = 0.0;
  for (int k = 0; k <= nh; ++k)
    acc += state.mode(k).evaluate_in_cell(cell, x) * hermite[k];
  return acc * maxwellian;
}

Eigen::MatrixXd VpfpSystem::reconstruct_f_grid(const HermiteState& state,
                                               const std::vector<double>& xs,
                                               const std::vector<double>& vs) const {
  check_state(state);
  const int nh = params_.NH;
  const double sqrt_t0 = std::sqrt(params_.T0);
  Eigen::MatrixXd mode_values(nh + 1, xs.size());
  for (std::size_t ix = 0; ix < xs.size(); ++ix) {
    const int cell = params_.mesh->locate(xs[ix]);
    for (int k = 0; k <= nh; ++k)
      mode_values(k, ix) = state.mode(k).evaluate_in_cell(cell, xs[ix]);
  }
  Eigen::MatrixXd basis(nh + 1, vs.size());
  std::vector<double> hermite(nh + 1);
  for (std::size_t iv = 0; iv < vs.size(); ++iv) {
    hermite_values(nh, vs[iv] / sqrt_t0, hermite.data());
    const double maxwellian =
        std::exp(-0.5 * vs[iv] * vs[iv] / params_.T0) / std::sqrt(2.0 * M_PI * params_.T0);
    for (int k = 0; k <= nh; ++k) basis(k, iv) = hermite[k] * maxwellian;
  }
  return mode_values.transpose() * basis;
}

HermiteState random_state(const VpfpSystem& system, std::uint64_t seed, double amplitude) {
  const ModelParams& p = system.params();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  HermiteState state(p.mesh, p.degree, p.NH);
  for (int k = 0; k <= p.NH; ++k)
    for (int n = 0; n < state.mode(k).size(); ++n)
      state.mode(k).coeffs()[n] = amplitude * unif(rng);
  // Re-center D_0 on the equilibrium density so the state is quasi-neutral;
  // the second pass removes the roundoff left by the first.
  DGField& d0 = state.mode(0);
  const Mesh1D& mesh = *p.mesh;
  for (int pass = 0; pass < 2; ++pass) {
    const double mean = d0.mean();
    for (int j = 0; j < mesh.num_cells(); ++j)
      d0.coeff(j, 0) += (p.rho_inf - mean) * std::sqrt(mesh.cell_size(j));
  }
  return state;
}

void write_csv(std::ostream& os, const HermiteState& state) {
  char line[160];
  std::snprintf(line, sizeof(line), "# Nx=%d m=%d NH=%d L=%.17g\n", state.mesh().num_cells(),
                state.degree(), state.NH(), state.mesh().length());
  os << line << "mode,cell,index,coefficient\n";
  for (int k = 0; k <= state.NH(); ++k)
    for (int j = 0; j < state.mesh().num_cells(); ++j)
      for (int i = 0; i <= state.degree(); ++i) {
        std::snprintf(line, sizeof(line), "%d,%d,%d,%.17g\n", k, j, i, state.mode(k).coeff(j, i));
        os << line;
      }
}

}  // namespace vpfp

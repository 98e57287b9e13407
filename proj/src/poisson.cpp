#include "vpfp/poisson.hpp"

#include <cmath>
#include <stdexcept>

#include "vpfp/errors.hpp"
#include "vpfp/legendre.hpp"

namespace vpfp {

namespace {

void check_quasi_neutrality(const DGField& rho_dev) {
  const double norm = rho_dev.l2_norm();
  if (std::abs(rho_dev.integral()) > 1e-10 * std::max(norm, 1e-300))
    throw compatibility_violation("poisson: rho_dev violates quasi-neutrality");
}

Eigen::VectorXd mean_direction_for(const Mesh1D& mesh, int degree) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.num_cells() * (degree + 1));
  const double inv_sqrt_l = 1.0 / std::sqrt(mesh.length());
  for (int j = 0; j < mesh.num_cells(); ++j)
    w[j * (degree + 1)] = std::sqrt(mesh.cell_size(j)) * inv_sqrt_l;
  return w;
}

}  // namespace

LdgPoissonOperator::LdgPoissonOperator(MeshPtr mesh, int degree, Flux flux)
    : ops_(std::move(mesh), degree, 1.0, flux) {
  const Eigen::MatrixXd b = ops_.dense();
  normal_ = b.transpose() * b;
  mean_direction_ = mean_direction_for(ops_.mesh(), degree);
  const double shift = normal_.trace() / normal_.rows();
  factorization_.compute(normal_ +
                         shift * mean_direction_ * mean_direction_.transpose());
}

ElectricSolution LdgPoissonOperator::solve(const DGField& rho_dev) const {
  if (rho_dev.degree() != degree() || !rho_dev.mesh().same_partition(mesh()))
    throw std::invalid_argument("poisson: rho_dev space mismatch");
  check_quasi_neutrality(rho_dev);

  DGField phi(rho_dev.mesh_ptr(), degree());
  phi.coeffs() = factorization_.solve(rho_dev.coeffs());
  phi.coeffs() -= mean_direction_.dot(phi.coeffs()) * mean_direction_;

  DGField e(rho_dev.mesh_ptr(), degree());
  ops_.apply_scaled_add(phi.coeffs().data(), e.coeffs().data(), -1.0);

  const double rhs_norm = rho_dev.l2_norm();
  const double dual_residual = (normal_ * phi.coeffs() - rho_dev.coeffs()).norm();
  if (rhs_norm > 0.0 && dual_residual > 1e-10 * rhs_norm)
    throw numeric_failure("ldg poisson solve did not meet the residual contract",
                          dual_residual / rhs_norm);
  return {std::move(e), std::move(phi), PoissonMethod::ldg, 0.0, dual_residual};
}

RtPoissonOperator::RtPoissonOperator(MeshPtr mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (!mesh_) throw std::invalid_argument("poisson: null mesh");
  if (degree_ < 0) throw std::invalid_argument("poisson: negative degree");
}

namespace {

// Antiderivative of a single cell polynomial given by orthonormal
// coefficients c: values of int_{x_left}^{x} u at reference points xi,
// using int_{-1}^{xi} P_i = (P_{i+1} - P_{i-1}) / (2i+1) for i >= 1.
class CellAntiderivative {
public:
  CellAntiderivative(const double* coeffs, int degree, double h)
      : coeffs_(coeffs), degree_(degree), h_(h), inv_sqrt_h_(1.0 / std::sqrt(h)) {}

  double at(double xi) const {
    std::vector<double> p(degree_ + 2);
    legendre_values(degree_ + 1, xi, p.data());
    double acc = coeffs_[0] * (xi + 1.0);
    for (int i = 1; i <= degree_; ++i)
      acc += coeffs_[i] * std::sqrt(2.0 * i + 1.0) * (p[i + 1] - p[i - 1]) / (2.0 * i + 1.0);
    return acc * 0.5 * h_ * inv_sqrt_h_;
  }

  double full() const { return coeffs_[0] * h_ * inv_sqrt_h_; }

private:
  const double* coeffs_;
  int degree_;
  double h_;
  double inv_sqrt_h_;
};

}  // namespace

ElectricSolution RtPoissonOperator::solve(const DGField& rho_dev) const {
  if (rho_dev.degree() != degree_ || !rho_dev.mesh().same_partition(*mesh_))
    throw std::invalid_argument("poisson: rho_dev space mismatch");
  check_quasi_neutrality(rho_dev);

  const Mesh1D& mesh = *mesh_;
  const int nx = mesh.num_cells();
  const int nb = degree_ + 1;
  const int q = default_quadrature_points(degree_);
  const BasisTable table_e = tabulate_basis(degree_ + 1, q);
  const BasisTable table_m = tabulate_basis(degree_, q);

  // E: continuous antiderivative of rho_dev, made zero-mean afterwards.
  // Periodicity across the wrap interface follows from quasi-neutrality.
  DGField e(rho_dev.mesh_ptr(), degree_ + 1);
  std::vector<double> left_value(nx + 1);
  left_value[0] = 0.0;
  for (int j = 0; j < nx; ++j) {
    const CellAntiderivative anti(rho_dev.coeffs().data() + j * nb, degree_, mesh.cell_size(j));
    left_value[j + 1] = left_value[j] + anti.full();
    const double h = mesh.cell_size(j);
    const double scale = 1.0 / std::sqrt(h);
    for (int a = 0; a < q; ++a) {
      const double value = left_value[j] + anti.at(table_e.rule.nodes[a]);
      const double w = table_e.rule.weights[a] * 0.5 * h;
      for (int i = 0; i <= degree_ + 1; ++i)
        e.coeff(j, i) += w * value * table_e.values(a, i) * scale;
    }
  }
  const double e_mean = e.mean();
  for (int j = 0; j < nx; ++j) e.coeff(j, 0) -= e_mean * std::sqrt(mesh.cell_size(j));

  // Phi: Riesz representer of v -> <E, W_v> over zero-mean v, where W_v is
  // the periodic antiderivative of v. Built from per-basis antiderivatives:
  // for phi_{j,i} the primitive ramps inside K_j and stays constant
  // (sqrt(h_j) delta_{i0}) afterwards; suffix integrals of E close the sum.
  std::vector<double> cell_integral(nx);
  for (int j = 0; j < nx; ++j)
    cell_integral[j] = e.coeff(j, 0) * std::sqrt(mesh.cell_size(j));
  std::vector<double> suffix(nx + 1, 0.0);
  for (int j = nx - 1; j >= 0; --j) suffix[j] = suffix[j + 1] + cell_integral[j];

  DGField phi(rho_dev.mesh_ptr(), degree_);
  for (int j = 0; j < nx; ++j) {
    const double h = mesh.cell_size(j);
    const double sqrt_h = std::sqrt(h);
    // quadrature of E * (per-mode primitive) over K_j
    std::vector<double> acc(nb, 0.0);
    for (int a = 0; a < q; ++a) {
      const double w = table_e.rule.weights[a] * 0.5 * h;
      double e_val = 0.0;
      for (int i = 0; i <= degree_ + 1; ++i)
        e_val += e.coeff(j, i) * table_e.values(a, i);
      e_val /= sqrt_h;
      const double xi = table_e.rule.nodes[a];
      std::vector<double> p(degree_ + 2);
      legendre_values(degree_ + 1, xi, p.data());
      acc[0] += w * e_val * (xi + 1.0) * 0.5 * h / sqrt_h;
      for (int i = 1; i <= degree_; ++i)
        acc[i] += w * e_val * std::sqrt(2.0 * i + 1.0) * (p[i + 1] - p[i - 1]) /
                  (2.0 * i + 1.0) * 0.5 * h / sqrt_h;
    }
    for (int i = 0; i < nb; ++i) phi.coeff(j, i) = acc[i];
    phi.coeff(j, 0) += sqrt_h * suffix[j + 1];
  }
  const double phi_mean = phi.mean();
  for (int j = 0; j < nx; ++j) phi.coeff(j, 0) -= phi_mean * std::sqrt(mesh.cell_size(j));

  // Dual residual: dE/dx - rho_dev, zero up to roundoff by construction.
  DGField dual = apply_B_star(e);
  dual += rho_dev;
  const double rhs_norm = rho_dev.l2_norm();
  const double dual_residual = dual.l2_norm();
  if (rhs_norm > 0.0 && dual_residual > 1e-10 * rhs_norm)
    throw numeric_failure("rt poisson solve did not meet the residual contract",
                          dual_residual / rhs_norm);
  return {std::move(e), std::move(phi), PoissonMethod::rt, 0.0, dual_residual};
}

DGField RtPoissonOperator::apply_B_star(const DGField& e_field) const {
  if (e_field.degree() != degree_ + 1 || !e_field.mesh().same_partition(*mesh_))
    throw std::invalid_argument("poisson: E space mismatch");
  const int q = default_quadrature_points(degree_);
  const BasisTable table_e = tabulate_basis(degree_ + 1, q);
  const BasisTable table_m = tabulate_basis(degree_, q);
  DGField out(e_field.mesh_ptr(), degree_);
  const Mesh1D& mesh = *mesh_;
  for (int j = 0; j < mesh.num_cells(); ++j) {
    const double h = mesh.cell_size(j);
    const double scale = 1.0 / std::sqrt(h);
    for (int a = 0; a < q; ++a) {
      double de = 0.0;
      for (int i = 1; i <= degree_ + 1; ++i)
        de += e_field.coeff(j, i) * table_e.derivatives(a, i);
      de *= 2.0 / h * scale;
      const double w = table_e.rule.weights[a] * 0.5 * h;
      for (int i = 0; i <= degree_; ++i)
        out.coeff(j, i) -= w * de * table_m.values(a, i) * scale;
    }
  }
  return out;
}

std::vector<DGField> RtPoissonOperator::wh_basis() const {
  const Mesh1D& mesh = *mesh_;
  const int nx = mesh.num_cells();
  std::vector<DGField> basis;
  basis.reserve(nx * (degree_ + 1));
  // Interface hats: affine tents with value 1 at interface s, 0 at the
  // neighboring interfaces.
  for (int s = 0; s < nx; ++s) {
    const int jl = mesh.left_cell(s);
    const int jr = mesh.right_cell(s);
    DGField hat(mesh_, degree_ + 1);
    auto add_ramp = [&](int cell, bool rising) {
      const double h = mesh.cell_size(cell);
      const int q = degree_ + 3;
      const BasisTable table = tabulate_basis(degree_ + 1, q);
      const double scale = 1.0 / std::sqrt(h);
      for (int a = 0; a < table.rule.size(); ++a) {
        const double xi = table.rule.nodes[a];
        const double value = rising ? 0.5 * (1.0 + xi) : 0.5 * (1.0 - xi);
        const double w = table.rule.weights[a] * 0.5 * h;
        for (int i = 0; i <= degree_ + 1; ++i)
          hat.coeff(cell, i) += w * value * table.values(a, i) * scale;
      }
    };
    add_ramp(jl, true);
    add_ramp(jr, false);
    basis.push_back(std::move(hat));
  }
  // Cell bubbles: integrated Legendre polynomials P_{i+1} - P_{i-1},
  // vanishing at both endpoints.
  for (int j = 0; j < nx; ++j) {
    for (int i = 1; i <= degree_; ++i) {
      DGField bubble(mesh_, degree_ + 1);
      const double h = mesh.cell_size(j);
      const int q = degree_ + 3;
      const BasisTable table = tabulate_basis(degree_ + 1, q);
      const double scale = 1.0 / std::sqrt(h);
      std::vector<double> p(degree_ + 2);
      for (int a = 0; a < table.rule.size(); ++a) {
        const double xi = table.rule.nodes[a];
        legendre_values(degree_ + 1, xi, p.data());
        const double value = p[i + 1] - p[i - 1];
        const double w = table.rule.weights[a] * 0.5 * h;
        for (int ib = 0; ib <= degree_ + 1; ++ib)
          bubble.coeff(j, ib) += w * value * table.values(a, ib) * scale;
      }
      basis.push_back(std::move(bubble));
    }
  }
  return basis;
}

double rt_b_form(const DGField& phi, const DGField& w) {
  if (!phi.mesh().same_partition(w.mesh()))
    throw std::invalid_argument("rt_b_form: mesh mismatch");
  const int q = default_quadrature_points(std::max(phi.degree(), w.degree()));
  const BasisTable table_phi = tabulate_basis(phi.degree(), q);
  const BasisTable table_w = tabulate_basis(w.degree(), q);
  const Mesh1D& mesh = phi.mesh();
  double acc = 0.0;
  for (int j = 0; j < mesh.num_cells(); ++j) {
    const double h = mesh.cell_size(j);
    const double scale = 1.0 / std::sqrt(h);
    for (int a = 0; a < q; ++a) {
      double phi_val = 0.0;
      for (int i = 0; i <= phi.degree(); ++i)
        phi_val += phi.coeff(j, i) * table_phi.values(a, i);
      double dw = 0.0;
      for (int i = 1; i <= w.degree(); ++i)
        dw += w.coeff(j, i) * table_w.derivatives(a, i);
      acc -= table_phi.rule.weights[a] * 0.5 * h * (phi_val * scale) * (dw * 2.0 / h * scale);
    }
  }
  return acc;
}

double electric_linf_ratio(const ElectricSolution& sol, const DGField& rho_dev) {
  const double rhs_norm = rho_dev.l2_norm();
  if (rhs_norm == 0.0) throw undefined_ratio("electric_linf_ratio: zero rho_dev");
  return linf_norm(sol.E) / rhs_norm;
}

}  // namespace vpfp

#include "vpfp/dg_field.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "vpfp/legendre.hpp"

namespace vpfp {

DGField::DGField(MeshPtr mesh, int degree) : mesh_(std::move(mesh)), degree_(degree) {
  if (!mesh_) throw std::invalid_argument("dg_field: null mesh");
  if (degree_ < 0) throw std::invalid_argument("dg_field: negative degree");
  coeffs_ = Eigen::VectorXd::Zero(mesh_->num_cells() * (degree_ + 1));
}

double DGField::integral() const {
  // <u, 1>: only mode 0 carries cell mass, with phi_{j,0} = 1/sqrt(h_j).
  double sum = 0.0;
  for (int j = 0; j < num_cells(); ++j)
    sum += coeff(j, 0) * std::sqrt(mesh_->cell_size(j));
  return sum;
}

double DGField::evaluate_in_cell(int cell, double x) const {
  const double h = mesh_->cell_size(cell);
  const double xi = 2.0 * (x - mesh_->cell_center(cell)) / h;
  std::vector<double> p(degree_ + 1);
  legendre_values(degree_, xi, p.data());
  const double scale = 1.0 / std::sqrt(h);
  double value = 0.0;
  for (int i = 0; i <= degree_; ++i)
    value += coeff(cell, i) * std::sqrt(2.0 * i + 1.0) * p[i] * scale;
  return value;
}

double DGField::evaluate(double x) const { return evaluate_in_cell(mesh_->locate(x), x); }

std::pair<double, double> DGField::trace(int interface) const {
  const int jl = mesh_->left_cell(interface);
  const int jr = mesh_->right_cell(interface);
  const double sl = 1.0 / std::sqrt(mesh_->cell_size(jl));
  const double sr = 1.0 / std::sqrt(mesh_->cell_size(jr));
  double minus = 0.0, plus = 0.0;
  for (int i = 0; i <= degree_; ++i) {
    const double c = std::sqrt(2.0 * i + 1.0);
    minus += coeff(jl, i) * c * sl;                          // P_i(+1) = 1
    plus += coeff(jr, i) * c * sr * legendre_at_left(i);     // P_i(-1) = (-1)^i
  }
  return {minus, plus};
}

DGField& DGField::operator+=(const DGField& other) {
  if (!same_space(other)) throw std::invalid_argument("dg_field: space mismatch");
  coeffs_ += other.coeffs_;
  return *this;
}

DGField& DGField::operator-=(const DGField& other) {
  if (!same_space(other)) throw std::invalid_argument("dg_field: space mismatch");
  coeffs_ -= other.coeffs_;
  return *this;
}

DGField& DGField::operator*=(double factor) {
  coeffs_ *= factor;
  return *this;
}

bool DGField::same_space(const DGField& other) const {
  return degree_ == other.degree_ &&
         (mesh_ == other.mesh_ || mesh_->same_partition(*other.mesh_));
}

BasisTable tabulate_basis(int degree, int quad_points) {
  BasisTable table;
  table.rule = gauss_legendre(quad_points);
  const int q = table.rule.size();
  table.values.resize(q, degree + 1);
  table.derivatives.resize(q, degree + 1);
  std::vector<double> p(degree + 1), dp(degree + 1);
  for (int a = 0; a < q; ++a) {
    legendre_values_and_derivatives(degree, table.rule.nodes[a], p.data(), dp.data());
    for (int i = 0; i <= degree; ++i) {
      const double c = std::sqrt(2.0 * i + 1.0);
      table.values(a, i) = c * p[i];
      table.derivatives(a, i) = c * dp[i];
    }
  }
  return table;
}

DGField l2_project(const std::function<double(double)>& g, MeshPtr mesh, int degree,
                   int quad_points) {
  if (quad_points < 0) quad_points = std::max(default_quadrature_points(degree), 12);
  DGField u(std::move(mesh), degree);
  const BasisTable table = tabulate_basis(degree, quad_points);
  const Mesh1D& m = u.mesh();
  for (int j = 0; j < m.num_cells(); ++j) {
    const double h = m.cell_size(j);
    const double mid = m.cell_center(j);
    const double scale = 1.0 / std::sqrt(h);
    for (int a = 0; a < table.rule.size(); ++a) {
      const double x = mid + 0.5 * h * table.rule.nodes[a];
      const double gw = g(x) * table.rule.weights[a] * 0.5 * h;
      for (int i = 0; i <= degree; ++i)
        u.coeff(j, i) += gw * table.values(a, i) * scale;
    }
  }
  return u;
}

double l2_inner(const DGField& u, const DGField& v) {
  if (!u.same_space(v)) throw std::invalid_argument("l2_inner: space mismatch");
  return u.coeffs().dot(v.coeffs());
}

double broken_seminorm(const DGField& u) {
  const Mesh1D& mesh = u.mesh();
  const int m = u.degree();
  double total = 0.0;
  if (m > 0) {
    const BasisTable table = tabulate_basis(m, default_quadrature_points(m));
    for (int j = 0; j < mesh.num_cells(); ++j) {
      const double h = mesh.cell_size(j);
      const double dscale = 2.0 / (h * std::sqrt(h));
      double cell = 0.0;
      for (int a = 0; a < table.rule.size(); ++a) {
        double du = 0.0;
        for (int i = 1; i <= m; ++i) du += u.coeff(j, i) * table.derivatives(a, i);
        cell += table.rule.weights[a] * du * du;
      }
      total += 0.5 * h * cell * dscale * dscale;
    }
  }
  for (int s = 0; s < mesh.num_cells(); ++s) {
    const auto [minus, plus] = u.trace(s);
    const double jump = plus - minus;
    total += jump * jump / mesh.interface_size(s);
  }
  return std::sqrt(total);
}

double linf_norm(const DGField& u) {
  const Mesh1D& mesh = u.mesh();
  const int n = 4 * (u.degree() + 2);
  double best = 0.0;
  for (int j = 0; j < mesh.num_cells(); ++j) {
    for (int a = 0; a < n; ++a) {
      const double xi = std::cos(M_PI * (2.0 * a + 1.0) / (2.0 * n));
      const double x = mesh.cell_center(j) + 0.5 * mesh.cell_size(j) * xi;
      best = std::max(best, std::abs(u.evaluate_in_cell(j, x)));
    }
    best = std::max(best, std::abs(u.evaluate_in_cell(j, mesh.cell_left(j))));
    best = std::max(best, std::abs(u.evaluate_in_cell(j, mesh.cell_right(j))));
  }
  return best;
}

void write_csv(std::ostream& os, const DGField& u) {
  char line[128];
  std::snprintf(line, sizeof(line), "# Nx=%d m=%d L=%.17g\n", u.num_cells(), u.degree(),
                u.mesh().length());
  os << line << "cell,index,coefficient\n";
  for (int j = 0; j < u.num_cells(); ++j)
    for (int i = 0; i <= u.degree(); ++i) {
      std::snprintf(line, sizeof(line), "%d,%d,%.17g\n", j, i, u.coeff(j, i));
      os << line;
    }
}

}  // namespace vpfp

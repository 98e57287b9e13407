#include "vpfp/transport.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "vpfp/errors.hpp"

namespace vpfp {

namespace {

// Exact integral over [-1,1] of P_{i'} P_i': 2 when i > i' with odd i - i'.
double legendre_stiffness(int i, int iprime) {
  return (i > iprime && (i - iprime) % 2 == 1) ? 2.0 : 0.0;
}

}  // namespace

TransportOperator::TransportOperator(MeshPtr mesh, int degree, double T0, Flux flux)
    : mesh_(std::move(mesh)), degree_(degree), T0_(T0), flux_(flux) {
  if (!mesh_) throw std::invalid_argument("transport: null mesh");
  if (degree_ < 0) throw std::invalid_argument("transport: negative degree");
  if (!(T0_ > 0.0)) throw std::invalid_argument("transport: T0 must be positive");
  neighbor_ = (flux_ == Flux::minus_plus) ? -1 : +1;

  const int nb = degree_ + 1;
  const int nx = mesh_->num_cells();
  const double rt = std::sqrt(T0_);
  std::vector<double> inv_sqrt_h(nx);
  for (int j = 0; j < nx; ++j) inv_sqrt_h[j] = 1.0 / std::sqrt(mesh_->cell_size(j));

  diag_.assign(nx, Eigen::MatrixXd::Zero(nb, nb));
  off_.assign(nx, Eigen::MatrixXd::Zero(nb, nb));
  for (int j = 0; j < nx; ++j) {
    const int nbr = (j + neighbor_ + nx) % nx;
    const double sj = inv_sqrt_h[j];
    const double sn = inv_sqrt_h[nbr];
    for (int i = 0; i <= degree_; ++i) {
      const double li = std::sqrt(2.0 * i + 1.0);
      const double sign_i = (i % 2 == 0) ? 1.0 : -1.0;
      for (int ip = 0; ip <= degree_; ++ip) {
        const double lip = std::sqrt(2.0 * ip + 1.0);
        const double vol = legendre_stiffness(i, ip);
        if (flux_ == Flux::minus_plus) {
          // g_a = u^-: the right-interface flux of cell j sees cell j itself,
          // the left-interface flux sees cell j-1.
          diag_[j](i, ip) = rt * li * lip * (1.0 - vol) * sj * sj;
          off_[j](i, ip) = -rt * li * lip * sign_i * sj * sn;
        } else {
          // g_a = u^+: the left-interface flux sees cell j, the right-interface
          // flux sees cell j+1.
          const double sign_ip = (ip % 2 == 0) ? 1.0 : -1.0;
          diag_[j](i, ip) = -rt * li * lip * (sign_i * sign_ip + vol) * sj * sj;
          off_[j](i, ip) = rt * li * lip * sign_ip * sj * sn;
        }
      }
    }
  }
}

void TransportOperator::apply_scaled_add(const double* u, double* out, double scale) const {
  const int nb = degree_ + 1;
  const int nx = mesh_->num_cells();
  for (int j = 0; j < nx; ++j) {
    const int nbr = (j + neighbor_ + nx) % nx;
    const Eigen::MatrixXd& d = diag_[j];
    const Eigen::MatrixXd& o = off_[j];
    const double* uj = u + j * nb;
    const double* un = u + nbr * nb;
    double* oj = out + j * nb;
    for (int i = 0; i < nb; ++i) {
      double acc = 0.0;
      for (int ip = 0; ip < nb; ++ip) acc += d(i, ip) * uj[ip] + o(i, ip) * un[ip];
      oj[i] += scale * acc;
    }
  }
}

void TransportOperator::apply_star_scaled_add(const double* u, double* out, double scale) const {
  // A_h* is the transpose of A_h: row block j of A^T couples cell j to
  // itself (diag_[j]^T) and to cell j - neighbor_ (off of that cell).
  const int nb = degree_ + 1;
  const int nx = mesh_->num_cells();
  for (int j = 0; j < nx; ++j) {
    const int src = (j - neighbor_ + nx) % nx;
    const Eigen::MatrixXd& d = diag_[j];
    const Eigen::MatrixXd& o = off_[src];
    const double* uj = u + j * nb;
    const double* us = u + src * nb;
    double* oj = out + j * nb;
    for (int i = 0; i < nb; ++i) {
      double acc = 0.0;
      for (int ip = 0; ip < nb; ++ip) acc += d(ip, i) * uj[ip] + o(ip, i) * us[ip];
      oj[i] += scale * acc;
    }
  }
}

DGField TransportOperator::apply(const DGField& u) const {
  if (u.degree() != degree_ || !u.mesh().same_partition(*mesh_))
    throw std::invalid_argument("transport: field/operator space mismatch");
  DGField out(u.mesh_ptr(), degree_);
  apply_scaled_add(u.coeffs().data(), out.coeffs().data(), 1.0);
  return out;
}

DGField TransportOperator::apply_star(const DGField& u) const {
  if (u.degree() != degree_ || !u.mesh().same_partition(*mesh_))
    throw std::invalid_argument("transport: field/operator space mismatch");
  DGField out(u.mesh_ptr(), degree_);
  apply_star_scaled_add(u.coeffs().data(), out.coeffs().data(), 1.0);
  return out;
}

double TransportOperator::norm_estimate() const {
  double best = 0.0;
  const int nb = degree_ + 1;
  for (int j = 0; j < mesh_->num_cells(); ++j) {
    for (int i = 0; i < nb; ++i) {
      double row = 0.0;
      for (int ip = 0; ip < nb; ++ip)
        row += std::abs(diag_[j](i, ip)) + std::abs(off_[j](i, ip));
      best = std::max(best, row);
    }
  }
  return best;
}

Eigen::MatrixXd TransportOperator::dense() const {
  const int nb = degree_ + 1;
  const int nx = mesh_->num_cells();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim(), dim());
  for (int j = 0; j < nx; ++j) {
    const int nbr = (j + neighbor_ + nx) % nx;
    a.block(j * nb, j * nb, nb, nb) = diag_[j];
    a.block(j * nb, nbr * nb, nb, nb) += off_[j];
  }
  return a;
}

void TransportOperator::dump_coordinate(std::ostream& os) const {
  const Eigen::MatrixXd a = dense();
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      if (a(r, c) != 0.0) os << r << ' ' << c << ' ' << a(r, c) << '\n';
}

const TransportOperator::EllipticCache& TransportOperator::elliptic() const {
  if (!elliptic_cache_) {
    auto cache = std::make_shared<EllipticCache>();
    const Eigen::MatrixXd a = dense();
    cache->normal = a.transpose() * a;
    cache->mean_direction.resize(dim());
    cache->mean_direction.setZero();
    const double inv_sqrt_l = 1.0 / std::sqrt(mesh_->length());
    for (int j = 0; j < mesh_->num_cells(); ++j)
      cache->mean_direction[j * (degree_ + 1)] = std::sqrt(mesh_->cell_size(j)) * inv_sqrt_l;
    const double shift = cache->normal.trace() / dim();
    Eigen::MatrixXd shifted =
        cache->normal + shift * cache->mean_direction * cache->mean_direction.transpose();
    cache->factorization.compute(shifted);
    elliptic_cache_ = std::move(cache);
  }
  return *elliptic_cache_;
}

AuxiliaryEllipticSolution TransportOperator::solve_auxiliary_elliptic(const DGField& rhs) const {
  if (rhs.degree() != degree_ || !rhs.mesh().same_partition(*mesh_))
    throw std::invalid_argument("transport: rhs space mismatch");
  const double rhs_norm = rhs.l2_norm();
  if (std::abs(rhs.integral()) > 1e-10 * std::max(rhs_norm, 1e-300))
    throw compatibility_violation("auxiliary elliptic solve: rhs must have zero mean");

  const EllipticCache& cache = elliptic();
  DGField psi(rhs.mesh_ptr(), degree_);
  psi.coeffs() = cache.factorization.solve(rhs.coeffs());
  psi.coeffs() -= cache.mean_direction.dot(psi.coeffs()) * cache.mean_direction;

  const double residual = (cache.normal * psi.coeffs() - rhs.coeffs()).norm();
  if (rhs_norm > 0.0 && residual > 1e-10 * rhs_norm)
    throw numeric_failure("auxiliary elliptic solve did not meet the residual contract",
                          residual / rhs_norm);

  DGField f(rhs.mesh_ptr(), degree_);
  apply_scaled_add(psi.coeffs().data(), f.coeffs().data(), -1.0);
  return {std::move(f), std::move(psi), residual};
}

}  // namespace vpfp

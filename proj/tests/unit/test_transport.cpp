#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "vpfp/errors.hpp"
#include "vpfp/transport.hpp"

using namespace vpfp;
using namespace vpfp::testing;

TEST_SUITE_BEGIN("transport");

namespace {

MeshPtr test_mesh(std::uint64_t seed, int nx) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.3, 0.3);
  const double length = 6.0;
  std::vector<double> nodes(nx + 1);
  for (int i = 0; i <= nx; ++i) nodes[i] = length * i / nx;
  for (int i = 1; i < nx; ++i) nodes[i] += unif(rng) * length / nx;
  return make_mesh_from_nodes(nodes, length);
}

DGField random_field(MeshPtr mesh, int degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  DGField u(std::move(mesh), degree);
  for (int n = 0; n < u.size(); ++n) u.coeffs()[n] = unif(rng);
  return u;
}

}  // namespace

TEST_CASE("banded assembly matches the dense form-by-form oracle") {
  for (const Flux flux : {Flux::minus_plus, Flux::plus_minus}) {
    for (const int m : {0, 1, 2}) {
      const MeshPtr mesh = test_mesh(100 + m, 7);
      const double t0 = 1.7;
      const TransportOperator op(mesh, m, t0, flux);
      const Eigen::MatrixXd a = op.dense();
      const Eigen::MatrixXd a_oracle = dense_operator_oracle(mesh, m, t0, flux, false);
      const double scale = a_oracle.cwiseAbs().maxCoeff();
      CHECK((a - a_oracle).cwiseAbs().maxCoeff() < 1e-11 * scale);

      // The adjoint form assembles to exactly the transpose.
      const Eigen::MatrixXd astar_oracle = dense_operator_oracle(mesh, m, t0, flux, true);
      CHECK((a.transpose() - astar_oracle).cwiseAbs().maxCoeff() < 1e-11 * scale);

      // apply_star is the transposed banded product.
      const DGField u = random_field(mesh, m, 1234 + m);
      const DGField asu = op.apply_star(u);
      const Eigen::VectorXd expected = a.transpose() * u.coeffs();
      CHECK((asu.coeffs() - expected).norm() < 1e-12 * expected.norm());
    }
  }
}

TEST_CASE("constants span the kernel of A_h and A_h*") {
  for (const Flux flux : {Flux::minus_plus, Flux::plus_minus}) {
    const MeshPtr mesh = test_mesh(7, 12);
    const TransportOperator op(mesh, 2, 2.5, flux);
    DGField ones(mesh, 2);
    for (int j = 0; j < mesh->num_cells(); ++j)
      ones.coeff(j, 0) = std::sqrt(mesh->cell_size(j));
    const double scale = op.norm_estimate() * ones.l2_norm();
    CHECK(op.apply(ones).l2_norm() < 1e-13 * scale);
    CHECK(op.apply_star(ones).l2_norm() < 1e-13 * scale);
  }
}

TEST_CASE("duality holds for random pairs") {
  const MeshPtr mesh = test_mesh(11, 16);
  const TransportOperator op(mesh, 1, 1.0, Flux::minus_plus);
  for (int trial = 0; trial < 100; ++trial) {
    const DGField u = random_field(mesh, 1, 2 * trial);
    const DGField v = random_field(mesh, 1, 2 * trial + 1);
    const double lhs = l2_inner(op.apply(u), v);
    const double rhs = l2_inner(u, op.apply_star(v));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * u.l2_norm() * v.l2_norm() * op.norm_estimate());
  }
}

TEST_CASE("consistency: A_h approximates sqrt(T0) d/dx at order m") {
  const double length = 4.0 * M_PI;
  const double t0 = 1.5;
  for (const int m : {1, 2}) {
    std::vector<double> errors;
    for (const int nx : {16, 32, 64}) {
      const MeshPtr mesh = make_uniform_mesh(length, nx);
      const TransportOperator op(mesh, m, t0, Flux::minus_plus);
      const DGField u = l2_project(
          [&](double x) { return std::sin(2.0 * M_PI * x / length); }, mesh, m);
      const DGField target = l2_project(
          [&](double x) {
            return std::sqrt(t0) * 2.0 * M_PI / length * std::cos(2.0 * M_PI * x / length);
          },
          mesh, m);
      DGField diff = op.apply(u);
      diff -= target;
      errors.push_back(diff.l2_norm());
    }
    const double order1 = std::log2(errors[0] / errors[1]);
    const double order2 = std::log2(errors[1] / errors[2]);
    CHECK(order1 >= m - 0.35);
    CHECK(order2 >= m - 0.35);
  }
}

TEST_CASE("auxiliary elliptic solve") {
  const double length = 4.0 * M_PI;
  SUBCASE("zero data gives the zero solution") {
    const MeshPtr mesh = make_uniform_mesh(length, 16);
    const TransportOperator op(mesh, 1, 1.0, Flux::minus_plus);
    const AuxiliaryEllipticSolution sol = op.solve_auxiliary_elliptic(DGField(mesh, 1));
    CHECK(sol.F.l2_norm() == 0.0);
    CHECK(sol.Psi.l2_norm() == 0.0);
  }
  SUBCASE("nonzero-mean data is rejected") {
    const MeshPtr mesh = make_uniform_mesh(length, 16);
    const TransportOperator op(mesh, 1, 1.0, Flux::minus_plus);
    const DGField bad = l2_project([](double) { return 1.0; }, mesh, 1);
    CHECK_THROWS_AS((void)op.solve_auxiliary_elliptic(bad), compatibility_violation);
  }
  SUBCASE("manufactured cosine solution converges at order m+1") {
    const double t0 = 2.0;
    const int m = 1;
    const double k = 2.0 * M_PI / length;
    std::vector<double> psi_errors, f_errors;
    for (const int nx : {16, 32, 64}) {
      const MeshPtr mesh = make_uniform_mesh(length, nx);
      const TransportOperator op(mesh, m, t0, Flux::minus_plus);
      const DGField rhs = l2_project([&](double x) { return std::cos(k * x); }, mesh, m);
      const AuxiliaryEllipticSolution sol = op.solve_auxiliary_elliptic(rhs);
      psi_errors.push_back(l2_error_against(
          sol.Psi, [&](double x) { return std::cos(k * x) / (t0 * k * k); }));
      // F = -A Psi = -sqrt(t0) dPsi/dx in the limit.
      f_errors.push_back(l2_error_against(sol.F, [&](double x) {
        return std::sin(k * x) / (std::sqrt(t0) * k);
      }));
      // F = -A Psi holds exactly by construction.
      DGField residual = op.apply(sol.Psi);
      residual += sol.F;
      CHECK(residual.l2_norm() < 1e-12 * sol.F.l2_norm());
    }
    CHECK(std::log2(psi_errors[0] / psi_errors[1]) == doctest::Approx(m + 1).epsilon(0.2));
    CHECK(std::log2(psi_errors[1] / psi_errors[2]) == doctest::Approx(m + 1).epsilon(0.2));
    CHECK(std::log2(f_errors[1] / f_errors[2]) >= m + 0.5);
  }
  SUBCASE("H1 and H2 regularity ratios stay bounded under refinement") {
    std::vector<double> rf, raf;
    for (const int nx : {32, 64, 128}) {
      const MeshPtr mesh = make_uniform_mesh(length, nx);
      const TransportOperator op(mesh, 1, 1.0, Flux::minus_plus);
      const DGField rhs = l2_project(
          [&](double x) { return std::cos(2.0 * M_PI * x / length) + 0.5 * std::sin(4.0 * M_PI * x / length); },
          mesh, 1);
      const AuxiliaryEllipticSolution sol = op.solve_auxiliary_elliptic(rhs);
      rf.push_back(sol.F.l2_norm() / rhs.l2_norm());
      raf.push_back(op.apply(sol.F).l2_norm() / rhs.l2_norm());
    }
    for (std::size_t i = 1; i < rf.size(); ++i) {
      CHECK(rf[i] / rf[0] == doctest::Approx(1.0).epsilon(0.2));
      CHECK(raf[i] / raf[0] == doctest::Approx(1.0).epsilon(0.2));
    }
  }
}

TEST_CASE("coordinate dump emits every nonzero entry") {
  const MeshPtr mesh = make_uniform_mesh(1.0, 4);
  const TransportOperator op(mesh, 0, 1.0, Flux::minus_plus);
  std::ostringstream os;
  op.dump_coordinate(os);
  int rows = 0;
  std::string text = os.str();
  for (const char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 8);  // diagonal + one neighbor per cell at m = 0
}

TEST_SUITE_END();

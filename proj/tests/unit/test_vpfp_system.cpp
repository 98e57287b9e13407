#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "vpfp/legendre.hpp"
#include "vpfp/vpfp_system.hpp"

using namespace vpfp;
using namespace vpfp::testing;

TEST_SUITE_BEGIN("vpfp_system");

namespace {

VpfpSystem make_system(int nx, int nh, int m, double tau0, PoissonMethod method,
                       double t0 = 1.0, double rho_inf = 1.0) {
  ModelParams p;
  p.T0 = t0;
  p.tau0 = tau0;
  p.rho_inf = rho_inf;
  p.NH = nh;
  p.degree = m;
  p.mesh = make_uniform_mesh(4.0 * M_PI, nx);
  return VpfpSystem(p, Flux::minus_plus, method, Flux::minus_plus);
}

}  // namespace

TEST_CASE("equilibrium state is stationary with zero field") {
  const VpfpSystem system = make_system(16, 4, 1, 2.0, PoissonMethod::ldg, 1.5, 0.7);
  const HermiteState eq = system.equilibrium_state();
  for (int j = 0; j < 16; ++j)
    CHECK(eq.mode(0).evaluate_in_cell(j, eq.mesh().cell_center(j)) ==
          doctest::Approx(0.7).epsilon(1e-14));

  for (const bool linearized : {false, true}) {
    const VpfpSystem::RhsResult rhs = system.rhs(eq, linearized, true);
    Eigen::VectorXd flat;
    rhs.derivative.to_flat(flat);
    CHECK(flat.norm() < 1e-13);
    CHECK(rhs.field.E.l2_norm() < 1e-13);
  }
}

TEST_CASE("Landau initial data reduces to the equilibrium at delta = 0") {
  const VpfpSystem system = make_system(16, 4, 1, 2.0, PoissonMethod::ldg);
  const HermiteState landau = system.initial_condition_landau(0.0);
  const HermiteState eq = system.equilibrium_state();
  Eigen::VectorXd a, b;
  landau.to_flat(a);
  eq.to_flat(b);
  CHECK((a - b).norm() < 1e-14);

  const HermiteState perturbed = system.initial_condition_landau(0.05);
  CHECK(std::abs(system.charge_deviation(perturbed).integral()) < 1e-12);
  for (int k = 1; k <= 4; ++k) CHECK(perturbed.mode(k).l2_norm() == 0.0);
}

TEST_CASE("mass pairing of the nonlinear RHS vanishes") {
  for (const PoissonMethod method : {PoissonMethod::ldg, PoissonMethod::rt}) {
    const VpfpSystem system = make_system(12, 5, 1, 3.0, method);
    for (int trial = 0; trial < 10; ++trial) {
      const HermiteState state = random_state(system, 100 + trial, 0.3);
      const VpfpSystem::RhsResult rhs = system.rhs_nonlinear(state);
      const double scale =
          rhs.derivative.mode(0).l2_norm() * std::sqrt(state.mesh().length());
      CHECK(std::abs(rhs.derivative.mode(0).integral()) < 1e-12 * (scale + 1e-300));
    }
  }
}

TEST_CASE("nonlinear projection term") {
  const VpfpSystem system = make_system(10, 3, 1, 1.0, PoissonMethod::ldg);
  const MeshPtr mesh = system.params().mesh;
  SUBCASE("zero field gives zero") {
    const DGField e(mesh, 1);
    const DGField d = l2_project([](double x) { return std::sin(x); }, mesh, 1);
    CHECK(system.nonlinear_term(e, d).l2_norm() == 0.0);
  }
  SUBCASE("cellwise constants multiply") {
    DGField e(mesh, 1), d(mesh, 1);
    for (int j = 0; j < 10; ++j) {
      e.coeff(j, 0) = 2.0 * std::sqrt(mesh->cell_size(j));
      d.coeff(j, 0) = -1.5 * std::sqrt(mesh->cell_size(j));
    }
    const DGField prod = system.nonlinear_term(e, d);
    for (int j = 0; j < 10; ++j)
      CHECK(prod.evaluate_in_cell(j, mesh->cell_center(j)) ==
            doctest::Approx(-3.0).epsilon(1e-13));
  }
  SUBCASE("random polynomial pair matches the dense quadrature projection") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (const int e_degree : {1, 2}) {  // LDG-degree and RT-degree fields
      DGField e(mesh, e_degree), d(mesh, 1);
      for (int n = 0; n < e.size(); ++n) e.coeffs()[n] = unif(rng);
      for (int n = 0; n < d.size(); ++n) d.coeffs()[n] = unif(rng);
      const DGField prod = system.nonlinear_term(e, d);
      const DGField oracle = l2_project(
          [&](double x) { return e.evaluate(x) * d.evaluate(x); }, mesh, 1, 30);
      CHECK((prod.coeffs() - oracle.coeffs()).norm() < 1e-13 * oracle.coeffs().norm());
    }
  }
}

TEST_CASE("nonlinear minus linearized RHS equals the projected products") {
  for (const PoissonMethod method : {PoissonMethod::ldg, PoissonMethod::rt}) {
    const VpfpSystem system = make_system(12, 4, 1, 2.0, method);
    const HermiteState state = random_state(system, 42, 0.25);
    const VpfpSystem::RhsResult full = system.rhs_nonlinear(state);
    const VpfpSystem::RhsResult lin = system.rhs_linearized(state);
    const ModelParams& p = system.params();

    CHECK((full.derivative.mode(0).coeffs() - lin.derivative.mode(0).coeffs()).norm() ==
          0.0);
    const DGField rho_dev = system.charge_deviation(state);
    for (int k = 1; k <= p.NH; ++k) {
      const DGField& source = k == 1 ? rho_dev : state.mode(k - 1);
      const DGField oracle = l2_project(
          [&](double x) {
            return std::sqrt(k / p.T0) * full.field.E.evaluate(x) * source.evaluate(x);
          },
          p.mesh, p.degree, 30);
      Eigen::VectorXd diff =
          full.derivative.mode(k).coeffs() - lin.derivative.mode(k).coeffs();
      CHECK((diff - oracle.coeffs()).norm() < 1e-12 * (oracle.coeffs().norm() + 1e-300));
    }
  }
}

TEST_CASE("kinetic reconstruction") {
  const double t0 = 1.7;
  const VpfpSystem system = make_system(12, 6, 1, 1.0, PoissonMethod::ldg, t0, 0.8);
  SUBCASE("equilibrium peaks at the Maxwellian value") {
    const HermiteState eq = system.equilibrium_state();
    const double peak = 0.8 / std::sqrt(2.0 * M_PI * t0);
    CHECK(system.reconstruct_f(eq, 1.0, 0.0) == doctest::Approx(peak).epsilon(1e-13));
    // f = rho_inf * M(v) everywhere at equilibrium.
    for (const double v : {-2.0, -0.3, 0.9, 3.4}) {
      const double maxwellian =
          std::exp(-0.5 * v * v / t0) / std::sqrt(2.0 * M_PI * t0);
      CHECK(system.reconstruct_f(eq, 2.5, v) ==
            doctest::Approx(0.8 * maxwellian).epsilon(1e-13));
    }
  }
  SUBCASE("a single mode reproduces its Hermite shape") {
    HermiteState state(system.params().mesh, 1, 6);
    const int k = 3;
    for (int j = 0; j < 12; ++j)
      state.mode(k).coeff(j, 0) = std::sqrt(state.mesh().cell_size(j));
    const double v = 0.9;
    std::vector<double> h(k + 1);
    hermite_values(k, v / std::sqrt(t0), h.data());
    const double maxwellian = std::exp(-0.5 * v * v / t0) / std::sqrt(2.0 * M_PI * t0);
    CHECK(system.reconstruct_f(state, 0.5, v) ==
          doctest::Approx(h[k] * maxwellian).epsilon(1e-13));
  }
  SUBCASE("velocity integral recovers the density (Gauss-Hermite oracle)") {
    const HermiteState state = random_state(system, 9, 0.4);
    std::vector<double> nodes, weights;
    gauss_hermite_prob(200, nodes, weights);
    for (const double x : {0.3, 5.0, 11.0}) {
      // f(x, v) = sum_k D_k(x) H_k(v / sqrt(T0)) M(v); with v = sqrt(T0) s the
      // integral becomes the Gaussian average of sum_k D_k H_k(s).
      double integral = 0.0;
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double v = std::sqrt(t0) * nodes[q];
        const double maxwellian =
            std::exp(-0.5 * nodes[q] * nodes[q]) / std::sqrt(2.0 * M_PI);
        integral += weights[q] * system.reconstruct_f(state, x, v) *
                    std::sqrt(t0) / maxwellian;
      }
      CHECK(integral ==
            doctest::Approx(state.mode(0).evaluate(x)).epsilon(1e-11));
    }
  }
  SUBCASE("grid reconstruction matches pointwise evaluation") {
    const HermiteState state = random_state(system, 10, 0.4);
    const std::vector<double> xs = {0.1, 3.3, 7.7};
    const std::vector<double> vs = {-1.2, 0.0, 2.5};
    const Eigen::MatrixXd grid = system.reconstruct_f_grid(state, xs, vs);
    for (std::size_t ix = 0; ix < xs.size(); ++ix)
      for (std::size_t iv = 0; iv < vs.size(); ++iv)
        CHECK(grid(ix, iv) ==
              doctest::Approx(system.reconstruct_f(state, xs[ix], vs[iv])).epsilon(1e-13));
  }
}

TEST_CASE("hermite recurrence matches the explicit low-order polynomials") {
  double h[4];
  const double xi = 0.83;
  hermite_values(3, xi, h);
  CHECK(h[0] == 1.0);
  CHECK(h[1] == doctest::Approx(xi));
  CHECK(h[2] == doctest::Approx((xi * xi - 1.0) / std::sqrt(2.0)));
  CHECK(h[3] == doctest::Approx((xi * xi * xi - 3.0 * xi) / std::sqrt(6.0)));
}

TEST_SUITE_END();

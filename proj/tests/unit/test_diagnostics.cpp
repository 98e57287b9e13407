#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "vpfp/diagnostics.hpp"
#include "vpfp/errors.hpp"

using namespace vpfp;
using namespace vpfp::testing;

TEST_SUITE_BEGIN("diagnostics");

namespace {

VpfpSystem make_system(int nx, int nh, double tau0 = 10.0, double t0 = 1.0,
                       double rho_inf = 1.0) {
  ModelParams p;
  p.T0 = t0;
  p.tau0 = tau0;
  p.rho_inf = rho_inf;
  p.NH = nh;
  p.degree = 1;
  p.mesh = make_uniform_mesh(4.0 * M_PI, nx);
  return VpfpSystem(p, Flux::minus_plus, PoissonMethod::ldg, Flux::minus_plus);
}

}  // namespace

TEST_CASE("energy functional") {
  const VpfpSystem system = make_system(32, 4, 10.0, 1.3, 0.9);
  const ModelParams& p = system.params();
  SUBCASE("equilibrium has zero energy") {
    const HermiteState eq = system.equilibrium_state();
    const ElectricSolution field = system.solve_poisson(system.charge_deviation(eq));
    CHECK(energy_functional(eq, field, p) < 1e-26);
  }
  SUBCASE("perturbed density matches the dense quadrature oracle") {
    const double delta = 0.05;
    const HermiteState state = system.initial_condition_landau(delta);
    const ElectricSolution field = system.solve_poisson(system.charge_deviation(state));
    const double kinetic_oracle = dense_integral(*p.mesh, [&](double x) {
      const double dev = state.mode(0).evaluate(x) - p.rho_inf;
      return dev * dev;
    });
    const double field_oracle = dense_integral(*p.mesh, [&](double x) {
      const double e = field.E.evaluate(x);
      return e * e;
    });
    const double expected =
        kinetic_oracle / (2.0 * p.rho_inf) + field_oracle / (2.0 * p.T0);
    CHECK(energy_functional(state, field, p) ==
          doctest::Approx(expected).epsilon(1e-11));
  }
  SUBCASE("quadratic homogeneity") {
    HermiteState state = random_state(system, 4, 0.2);
    const ElectricSolution field = system.solve_poisson(system.charge_deviation(state));
    const double base = energy_functional(state, field, p);
    // Double the deviation from equilibrium: D - D_inf and E both double.
    HermiteState doubled = state;
    doubled *= 2.0;
    const Mesh1D& mesh = *p.mesh;
    for (int j = 0; j < mesh.num_cells(); ++j)
      doubled.mode(0).coeff(j, 0) -= p.rho_inf * std::sqrt(mesh.cell_size(j));
    const ElectricSolution dfield =
        system.solve_poisson(system.charge_deviation(doubled));
    CHECK(energy_functional(doubled, dfield, p) ==
          doctest::Approx(4.0 * base).epsilon(1e-12));
  }
}

TEST_CASE("dissipation functional and the hypocoercivity gap") {
  const VpfpSystem system = make_system(16, 4, 10.0, 1.0, 0.8);
  const ModelParams& p = system.params();
  SUBCASE("equilibrium gives zero") {
    CHECK(dissipation_functional(system.equilibrium_state(), p) == 0.0);
  }
  SUBCASE("density-only perturbations are invisible to the dissipation") {
    const HermiteState state = system.initial_condition_landau(0.3);
    CHECK(dissipation_functional(state, p) == 0.0);
    const ElectricSolution field = system.solve_poisson(system.charge_deviation(state));
    CHECK(energy_functional(state, field, p) > 0.0);
  }
  SUBCASE("a unit k = 2 mode contributes 2 / rho_inf") {
    HermiteState state = system.equilibrium_state();
    state.mode(2).coeff(3, 0) = 1.0;
    CHECK(dissipation_functional(state, p) == doctest::Approx(2.0 / 0.8).epsilon(1e-14));
  }
}

TEST_CASE("modified entropy") {
  const VpfpSystem system = make_system(24, 6);
  const ModelParams& p = system.params();
  SUBCASE("equilibrium gives zero and alpha0 = 0 reduces to the energy") {
    const HermiteState eq = system.equilibrium_state();
    const ElectricSolution feq = system.solve_poisson(system.charge_deviation(eq));
    CHECK(std::abs(modified_entropy(eq, feq, system, 0.25)) < 1e-24);

    const HermiteState state = random_state(system, 6, 0.3);
    const ElectricSolution field = system.solve_poisson(system.charge_deviation(state));
    CHECK(modified_entropy(state, field, system, 0.0) ==
          doctest::Approx(energy_functional(state, field, p)).epsilon(1e-14));
  }
  SUBCASE("equivalence band at the calibrated alpha0") {
    const double alpha0 = calibrate_alpha0(system, 40, 2024);
    CHECK(alpha0 > 0.0);
    for (int trial = 0; trial < 25; ++trial) {
      const HermiteState state = random_state(system, 3000 + trial, 0.35);
      const ElectricSolution field =
          system.solve_poisson(system.charge_deviation(state));
      const double energy = energy_functional(state, field, p);
      const double entropy = modified_entropy(state, field, system, alpha0);
      CHECK(entropy >= 0.5 * energy);
      CHECK(entropy <= 1.5 * energy);
    }
  }
}

TEST_CASE("physical invariants") {
  const double t0 = 1.4;
  const VpfpSystem system = make_system(16, 4, 10.0, t0, 1.0);
  const ModelParams& p = system.params();
  SUBCASE("equilibrium values, kinetic energy against Gauss-Hermite") {
    const HermiteState eq = system.equilibrium_state();
    const ElectricSolution field = system.solve_poisson(system.charge_deviation(eq));
    const PhysicalInvariants inv = physical_invariants(eq, field, p);
    const double length = 4.0 * M_PI;
    CHECK(inv.m0 == doctest::Approx(length).epsilon(1e-13));
    CHECK(std::abs(inv.m1) < 1e-14);
    CHECK(inv.kinetic_complete);
    // K = int v^2/2 f = L * int v^2/2 rho_inf M(v) dv, via Gauss-Hermite.
    std::vector<double> nodes, weights;
    gauss_hermite_prob(60, nodes, weights);
    double kinetic = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double v = std::sqrt(t0) * nodes[q];
      kinetic += weights[q] * 0.5 * v * v;
    }
    kinetic *= length;
    CHECK(inv.K == doctest::Approx(kinetic).epsilon(1e-12));
    CHECK(inv.K == doctest::Approx(t0 * length / 2.0).epsilon(1e-12));
    CHECK(inv.W == doctest::Approx(inv.K).epsilon(1e-12));
  }
  SUBCASE("momentum flips sign with D_1") {
    HermiteState state = random_state(system, 8, 0.3);
    const ElectricSolution field = system.solve_poisson(system.charge_deviation(state));
    const double m1 = physical_invariants(state, field, p).m1;
    state.mode(1) *= -1.0;
    CHECK(physical_invariants(state, field, p).m1 == doctest::Approx(-m1).epsilon(1e-14));
  }
  SUBCASE("NH = 1 flags the truncated kinetic energy") {
    ModelParams small = p;
    small.NH = 1;
    const VpfpSystem sys1(small, Flux::minus_plus, PoissonMethod::ldg, Flux::minus_plus);
    const HermiteState state = sys1.equilibrium_state();
    const ElectricSolution field = sys1.solve_poisson(sys1.charge_deviation(state));
    CHECK(!physical_invariants(state, field, small).kinetic_complete);
  }
}

TEST_CASE("decay rate fitting") {
  std::vector<DiagnosticsRecord> series;
  for (int i = 0; i <= 40; ++i) {
    DiagnosticsRecord r;
    r.t = 0.25 * i;
    r.energy_E = 3.7 * std::exp(-0.3 * r.t);
    series.push_back(r);
  }
  SUBCASE("recovers an exact exponential") {
    const RateFit fit = decay_rate_fit(series, 0.0, 10.0);
    CHECK(fit.rate == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(fit.residual < 1e-10);
    CHECK(fit.samples == 41);
  }
  SUBCASE("constant series fits rate zero") {
    for (DiagnosticsRecord& r : series) r.energy_E = 2.0;
    CHECK(decay_rate_fit(series, 0.0, 10.0).rate == doctest::Approx(0.0));
  }
  SUBCASE("too few samples or nonpositive energies are rejected") {
    CHECK_THROWS_AS((void)decay_rate_fit(series, 0.0, 1.0), invalid_window);
    series[5].energy_E = 0.0;
    CHECK_THROWS_AS((void)decay_rate_fit(series, 0.0, 10.0), invalid_window);
  }
}

TEST_CASE("records expose the panel quantities consistently") {
  const VpfpSystem system = make_system(16, 6);
  const HermiteState state = random_state(system, 12, 0.2);
  const DiagnosticsRecord r = compute_record(system, state, 1.25, 0.01);
  CHECK(r.t == 1.25);
  CHECK(r.alpha0 == 0.01);
  CHECK(r.energy_E > 0.0);
  CHECK(r.dissipation_I >= 0.0);
  // dist_f_finf^2 = dist_rho_rhoinf^2 + dist_f_localmaxwellian^2 by
  // orthogonality of the Hermite modes.
  CHECK(r.dist_f_finf * r.dist_f_finf ==
        doctest::Approx(r.dist_rho_rhoinf * r.dist_rho_rhoinf +
                        r.dist_f_localmax * r.dist_f_localmax)
            .epsilon(1e-12));
  // energy = dist_f_finf^2 / 2 + norm_E^2 / (2 T0).
  CHECK(r.energy_E ==
        doctest::Approx(0.5 * r.dist_f_finf * r.dist_f_finf +
                        0.5 * r.norm_E * r.norm_E)
            .epsilon(1e-12));
}

TEST_SUITE_END();

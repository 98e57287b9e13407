#include <doctest.h>

#include <cmath>

#include "vpfp/time_integration.hpp"

using namespace vpfp;

TEST_SUITE_BEGIN("time_integration");

namespace {

VpfpSystem make_system(int nx, int nh, double tau0, PoissonMethod method,
                       Flux flux = Flux::minus_plus) {
  ModelParams p;
  p.T0 = 1.0;
  p.tau0 = tau0;
  p.rho_inf = 1.0;
  p.NH = nh;
  p.degree = 1;
  p.mesh = make_uniform_mesh(4.0 * M_PI, nx);
  return VpfpSystem(p, flux, method, flux);
}

double state_distance(const HermiteState& a, const HermiteState& b) {
  Eigen::VectorXd fa, fb;
  a.to_flat(fa);
  b.to_flat(fb);
  return (fa - fb).norm();
}

}  // namespace

TEST_CASE("collision half-step is the exact mode-wise decay") {
  const VpfpSystem system = make_system(8, 4, 2.0, PoissonMethod::ldg);
  const TimeIntegrator integrator(system, {});
  const HermiteState state = random_state(system, 3, 0.5);

  SUBCASE("mode zero is untouched") {
    const HermiteState out = integrator.collision_half_step(state, 0.37);
    CHECK((out.mode(0).coeffs() - state.mode(0).coeffs()).norm() == 0.0);
  }
  SUBCASE("dt = tau0 ln 2 halves the first mode") {
    const HermiteState out = integrator.collision_half_step(state, 2.0 * std::log(2.0));
    CHECK((out.mode(1).coeffs() - 0.5 * state.mode(1).coeffs()).norm() < 1e-15);
    CHECK((out.mode(4).coeffs() - 0.0625 * state.mode(4).coeffs()).norm() < 1e-15);
  }
  SUBCASE("two half steps compose into one full step") {
    const HermiteState twice =
        integrator.collision_half_step(integrator.collision_half_step(state, 0.21), 0.21);
    const HermiteState once = integrator.collision_half_step(state, 0.42);
    CHECK(state_distance(twice, once) < 1e-14 * state.l2_norm());
  }
  SUBCASE("every mode k >= 1 decays for positive dt") {
    const HermiteState out = integrator.collision_half_step(state, 0.1);
    for (int k = 1; k <= 4; ++k)
      CHECK(out.mode(k).l2_norm() < state.mode(k).l2_norm());
  }
}

TEST_CASE("Hou-Li filter") {
  const VpfpSystem system = make_system(8, 12, 2.0, PoissonMethod::ldg);
  TimeStepperConfig config;
  const TimeIntegrator integrator(system, config);
  const HermiteState state = random_state(system, 5, 0.5);
  const HermiteState out = integrator.hou_li_filter(state);

  // Below the 2/3 cut the modes are untouched; k = 12 is damped by exp(-36).
  for (int k = 0; k <= 8; ++k)
    CHECK((out.mode(k).coeffs() - state.mode(k).coeffs()).norm() == 0.0);
  CHECK(out.mode(12).coeffs().norm() ==
        doctest::Approx(std::exp(-36.0) * state.mode(12).coeffs().norm()).epsilon(1e-12));
  CHECK(out.mode(0).integral() == state.mode(0).integral());

  TimeStepperConfig hard = config;
  hard.filter_hard_cut = true;
  const TimeIntegrator trunc(system, hard);
  const HermiteState chopped = trunc.hou_li_filter(state);
  CHECK(chopped.mode(12).coeffs().norm() == 0.0);
  CHECK((chopped.mode(8).coeffs() - state.mode(8).coeffs()).norm() == 0.0);
}

TEST_CASE("equilibrium is a fixed point of the full step") {
  for (const PoissonMethod method : {PoissonMethod::ldg, PoissonMethod::rt}) {
    const VpfpSystem system = make_system(12, 6, 3.0, method);
    TimeStepperConfig config;
    config.dt = 0.1;
    config.picard_tol = 1e-13;
    const TimeIntegrator integrator(system, config);
    const HermiteState eq = system.equilibrium_state();
    const HermiteState out = integrator.step(eq, 0.1);
    CHECK(state_distance(out, eq) < 1e-12 * eq.l2_norm());
  }
}

TEST_CASE("per-step mass conservation") {
  const VpfpSystem system = make_system(16, 8, 5.0, PoissonMethod::ldg);
  TimeStepperConfig config;
  config.dt = 0.1;
  const TimeIntegrator integrator(system, config);
  HermiteState state = system.initial_condition_landau(0.4);
  const double m0 = state.mode(0).integral();
  for (int n = 0; n < 5; ++n) {
    state = integrator.step(state, config.dt);
    CHECK(std::abs(state.mode(0).integral() - m0) <= 1e-12 * std::abs(m0));
  }
}

TEST_CASE("temporal order two for the linearized dynamics") {
  const VpfpSystem system = make_system(16, 8, 2.0, PoissonMethod::ldg);
  TimeStepperConfig config;
  config.linearized = true;
  config.filter_enabled = false;
  config.picard_tol = 1e-13;
  const HermiteState init = system.initial_condition_landau(0.05);

  const double t_end = 0.5;
  const auto advance = [&](double dt) {
    TimeStepperConfig local = config;
    local.dt = dt;
    const TimeIntegrator integrator(system, local);
    return integrator.run(init, t_end);
  };
  const HermiteState ref = advance(0.1 / 16.0);
  const double e1 = state_distance(advance(0.1), ref);
  const double e2 = state_distance(advance(0.05), ref);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.7);
  CHECK(order <= 2.3);
}

TEST_CASE("temporal self-convergence order two for the full nonlinear scheme") {
  // Landau damping setup, joint Strang/DIRK2/Picard path with the filter on.
  const VpfpSystem system = make_system(32, 32, 10.0, PoissonMethod::ldg);
  TimeStepperConfig config;
  config.picard_tol = 1e-13;
  const HermiteState init = system.initial_condition_landau(0.05);
  const double t_end = 0.5;
  const auto advance = [&](double dt) {
    TimeStepperConfig local = config;
    local.dt = dt;
    const TimeIntegrator integrator(system, local);
    return integrator.run(init, t_end);
  };
  const HermiteState ref = advance(0.1 / 16.0);
  const double e1 = state_distance(advance(0.1), ref);
  const double e2 = state_distance(advance(0.05), ref);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.8);
  CHECK(order <= 2.2);
}

TEST_CASE("strang composition is reversible for the linear sub-flows") {
  const VpfpSystem system = make_system(8, 4, 1.0, PoissonMethod::ldg);
  TimeStepperConfig config;
  config.linearized = true;
  config.filter_enabled = false;
  config.picard_tol = 1e-14;
  config.dt = 2e-4;
  const TimeIntegrator integrator(system, config);
  const HermiteState init = system.initial_condition_landau(0.05);
  const HermiteState forward = integrator.step(init, config.dt);
  const HermiteState back = integrator.step(forward, -config.dt);
  CHECK(state_distance(back, init) <= 1e-10 * init.l2_norm());
}

TEST_CASE("run handles t_end = 0 and invokes observers on the stride") {
  const VpfpSystem system = make_system(8, 4, 1.0, PoissonMethod::ldg);
  TimeStepperConfig config;
  config.dt = 0.25;
  const TimeIntegrator integrator(system, config);
  const HermiteState init = system.initial_condition_landau(0.05);

  int count = 0;
  const HermiteState same =
      integrator.run(init, 0.0, 1, [&](int, double, const HermiteState&) { ++count; });
  CHECK(count == 1);
  CHECK(state_distance(same, init) == 0.0);

  std::vector<double> times;
  (void)integrator.run(init, 1.0, 2,
                       [&](int, double t, const HermiteState&) { times.push_back(t); });
  CHECK(times == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_SUITE_END();

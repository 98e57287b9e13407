#include "vpfp/time_integration.hpp"

#include <cmath>
#include <stdexcept>

#include "vpfp/errors.hpp"

namespace vpfp {

namespace {

constexpr double kDirkGamma = 0.29289321881345254;  // 1 - sqrt(2)/2

/// Mode-coupling transport part of the collisionless system in flat
/// coefficient space: (S u)_k = sqrt(k) A u_{k-1} - sqrt(k+1) A* u_{k+1},
/// so the evolution reads du/dt = -S u + G(u). S is skew-symmetric because
/// the matrix of A* is exactly the transpose of the matrix of A.
class TransportChain {
public:
  TransportChain(const TransportOperator& op, int nh)
      : op_(op), nh_(nh), stride_(op.dim()) {}

  int size() const { return (nh_ + 1) * stride_; }

  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
    out.setZero();
    for (int k = 0; k <= nh_; ++k) {
      double* target = out.data() + k * stride_;
      if (k >= 1)
        op_.apply_scaled_add(in.data() + (k - 1) * stride_, target,
                             std::sqrt(static_cast<double>(k)));
      if (k + 1 <= nh_)
        op_.apply_star_scaled_add(in.data() + (k + 1) * stride_, target,
                                  -std::sqrt(static_cast<double>(k + 1)));
    }
  }

  double norm_estimate() const {
    return 2.0 * std::sqrt(static_cast<double>(nh_ + 1)) * op_.norm_estimate();
  }

private:
  const TransportOperator& op_;
  int nh_;
  int stride_;
};

struct CgOutcome {
  int iterations = 0;
  double residual = 0.0;
};

/// Solve (I + a S) x = b through CG on the SPD normal equations
/// (I + a^2 S^T S) x = (I - a S) b, using S^T = -S. Started from a warm
/// vector whose invariant-channel components (anything in ker S, e.g. the
/// total mass) match those of b, the iterates keep them to roundoff.
CgOutcome solve_shifted_skew(const TransportChain& chain, double a, const Eigen::VectorXd& b,
                             Eigen::VectorXd& x, double rel_tol, int max_iters) {
  const int n = static_cast<int>(b.size());
  Eigen::VectorXd tmp(n), mp(n), r(n), p(n);

  chain.apply(b, tmp);
  Eigen::VectorXd b2 = b - a * tmp;
  const double b2_norm = b2.norm();
  if (b2_norm == 0.0) {
    x.setZero();
    return {0, 0.0};
  }
  const double target = rel_tol * b2_norm;

  const auto apply_m = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    chain.apply(v, tmp);
    chain.apply(tmp, out);
    out = v - (a * a) * out;
  };

  apply_m(x, mp);
  r = b2 - mp;
  p = r;
  double rs = r.squaredNorm();
  double best = std::sqrt(rs);
  int stall = 0;
  int it = 0;
  for (; it < max_iters && std::sqrt(rs) > target; ++it) {
    apply_m(p, mp);
    const double alpha = rs / p.dot(mp);
    x += alpha * p;
    r -= alpha * mp;
    const double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
    const double rnorm = std::sqrt(rs);
    if (rnorm < 0.99 * best) {
      best = rnorm;
      stall = 0;
    } else if (++stall > 60) {
      break;  // stagnated at the attainable floor
    }
  }
  return {it, std::sqrt(rs) / b2_norm};
}

}  // namespace

void TimeStepperConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("time: dt must be positive");
  if (!(picard_tol > 0.0)) throw std::invalid_argument("time: picard_tol must be positive");
  if (picard_max_iters < 1) throw std::invalid_argument("time: picard_max_iters must be >= 1");
  if (filter_order < 2 || filter_order % 2 != 0)
    throw std::invalid_argument("filter: order must be a positive even integer");
  if (!(filter_cut > 0.0) || !(filter_cut <= 1.0))
    throw std::invalid_argument("filter: cut must lie in (0, 1]");
}

TimeIntegrator::TimeIntegrator(const VpfpSystem& system, TimeStepperConfig config)
    : system_(system), config_(config) {
  config_.validate();
  transport_norm_estimate_ =
      TransportChain(system_.transport(), system_.params().NH).norm_estimate();
}

HermiteState TimeIntegrator::collision_half_step(const HermiteState& state,
                                                 double dt_half) const {
  HermiteState out = state;
  const double tau0 = system_.params().tau0;
  for (int k = 1; k <= state.NH(); ++k)
    out.mode(k) *= std::exp(-static_cast<double>(k) * dt_half / tau0);
  return out;
}

HermiteState TimeIntegrator::hou_li_filter(const HermiteState& state) const {
  HermiteState out = state;
  const int nh = state.NH();
  for (int k = 1; k <= nh; ++k) {
    const double eta = static_cast<double>(k) / nh;
    if (eta <= config_.filter_cut) continue;
    const double sigma =
        config_.filter_hard_cut
            ? 0.0
            : std::exp(-config_.filter_alpha * std::pow(eta, config_.filter_order));
    out.mode(k) *= sigma;
  }
  return out;
}

Eigen::VectorXd TimeIntegrator::solve_stage(const Eigen::VectorXd& base, double a,
                                            const Eigen::VectorXd& warm_start,
                                            HermiteState& work) const {
  const TransportChain chain(system_.transport(), system_.params().NH);
  const double a_sigma = std::abs(a) * transport_norm_estimate_;
  const int cg_cap = 400 + static_cast<int>(40.0 * a_sigma);
  const double cg_tol = std::max(0.1 * config_.picard_tol, 1e-14);

  Eigen::VectorXd y = warm_start;
  Eigen::VectorXd g(base.size());
  const double scale = std::max(1.0, base.norm());
  for (int iter = 0; iter < config_.picard_max_iters; ++iter) {
    // Freeze the field and the projected nonlinear products at the current
    // iterate; the remaining transport system is linear and banded.
    work.from_flat(y);
    const VpfpSystem::RhsResult frozen = system_.field_source(work, config_.linearized);
    frozen.derivative.to_flat(g);
    const Eigen::VectorXd rhs = base + a * g;

    Eigen::VectorXd x = y;
    const CgOutcome cg = solve_shifted_skew(chain, a, rhs, x, cg_tol, cg_cap);
    stats_.cg_iterations += cg.iterations;
    if (cg.residual > config_.picard_tol)
      throw numeric_failure("stage linear solve stalled above the Picard tolerance",
                            cg.residual);

    const double increment = (x - y).norm();
    y = std::move(x);
    ++stats_.picard_iterations;
    if (increment <= config_.picard_tol * scale) return y;
  }
  throw numeric_failure("Picard iteration did not converge within the allowed iterations",
                        config_.picard_tol);
}

HermiteState TimeIntegrator::transport_field_dirk2_step(const HermiteState& state,
                                                        double dt) const {
  stats_ = {};
  HermiteState work = state;
  Eigen::VectorXd d0;
  state.to_flat(d0);
  const double a = dt * kDirkGamma;

  // Stage 1: Y1 = D + dt gamma F(Y1).
  const Eigen::VectorXd y1 = solve_stage(d0, a, d0, work);
  // F(Y1) with the converged frozen terms, recovered algebraically.
  const Eigen::VectorXd f1 = (y1 - d0) / a;

  // Stage 2 (stiffly accurate): Y2 = D + dt (1-gamma) F(Y1) + dt gamma F(Y2).
  const Eigen::VectorXd base2 = d0 + dt * (1.0 - kDirkGamma) * f1;
  const Eigen::VectorXd y2 = solve_stage(base2, a, y1, work);

  HermiteState out = state;
  out.from_flat(y2);
  return out;
}

HermiteState TimeIntegrator::step(const HermiteState& state, double dt) const {
  HermiteState current = collision_half_step(state, 0.5 * dt);
  current = transport_field_dirk2_step(current, dt);
  current = collision_half_step(current, 0.5 * dt);
  if (config_.filter_enabled) current = hou_li_filter(current);
  return current;
}

HermiteState TimeIntegrator::run(const HermiteState& initial, double t_end, int stride,
                                 const Observer& observer) const {
  if (t_end < 0.0) throw std::invalid_argument("time: t_end must be nonnegative");
  if (stride < 1) throw std::invalid_argument("time: observer stride must be >= 1");
  HermiteState state = initial;
  if (observer) observer(0, 0.0, state);
  if (t_end == 0.0) return state;

  const double dt = config_.dt;
  const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
  double t = 0.0;
  for (int n = 1; n <= steps; ++n) {
    const double dt_n = (n == steps) ? t_end - t : dt;
    state = step(state, dt_n);
    t = (n == steps) ? t_end : t + dt;
    if (observer && (n % stride == 0 || n == steps)) observer(n, t, state);
  }
  return state;
}

}  // namespace vpfp

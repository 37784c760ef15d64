#include "sparse_ukf/models.hpp"

#include <cmath>
#include <numbers>

#include "sparse_ukf/errors.hpp"

namespace sparse_ukf {

Vector duffing_derivative(const Vector& x, double u, const DuffingParams& p) {
  Vector dx(2);
  dx << x(1), -p.p3 * x(1) - p.p1 * x(0) - p.p2 * x(0) * x(0) * x(0) + u;
  return dx;
}

double golf_friction(const Vector& x, const GolfParams& p) {
  const double load = p.m * x(1) * x(1) * p.a + p.m * kGravity * std::cos(x(0));
  return p.d * x(1) + 2.0 * p.r * p.mu * std::atan(1e3 * x(1)) / std::numbers::pi * std::abs(load);
}

Vector golf_derivative(const Vector& x, double u, const GolfParams& p) {
  Vector dx(2);
  dx << x(1), (-p.m * kGravity * p.a * std::sin(x(0)) - golf_friction(x, p) + 4.0 * u) / p.J;
  return dx;
}

TransitionFn euler_discretize(DerivativeFn derivative, double dt) {
  if (!(dt > 0.0)) throw InvalidParams("euler_discretize: dt must be positive");
  return [f = std::move(derivative), dt](const Vector& x, double u) -> Vector {
    return x + dt * f(x, u);
  };
}

Vector rk4_step(const DerivativeFn& derivative, const Vector& x, double u, double dt) {
  if (!(dt > 0.0)) throw InvalidParams("rk4_step: dt must be positive");
  const Vector k1 = derivative(x, u);
  const Vector k2 = derivative(x + 0.5 * dt * k1, u);
  const Vector k3 = derivative(x + 0.5 * dt * k2, u);
  const Vector k4 = derivative(x + dt * k3, u);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vector first_state_observation(const Vector& x, double /*u*/) { return x.head(1); }

DiscreteModel make_joint_model(const GSlotModel& base, std::shared_ptr<const FunctionLibrary> lib) {
  if (!lib) throw InvalidParams("make_joint_model: library is null");
  if (static_cast<Eigen::Index>(lib->state_dim()) != base.state_dim) {
    throw DimensionMismatch("make_joint_model: library state dimension " +
                            std::to_string(lib->state_dim()) + " != model state dimension " +
                            std::to_string(base.state_dim));
  }
  const Eigen::Index nx = base.state_dim;
  const auto ntheta = static_cast<Eigen::Index>(lib->size());

  DiscreteModel joint;
  joint.state_dim = nx + ntheta;
  joint.measurement_dim = base.measurement_dim;
  joint.transition = [f = base.transition, lib, nx, ntheta](const Vector& xt, double u) -> Vector {
    if (xt.size() != nx + ntheta) {
      throw DimensionMismatch("joint transition: state has wrong dimension");
    }
    const Vector x = xt.head(nx);
    const Vector theta = xt.tail(ntheta);
    Vector out(xt.size());
    out.head(nx) = f(x, u, approx_g(*lib, theta, x, u));
    out.tail(ntheta) = theta;
    return out;
  };
  joint.observation = [h = base.observation, nx](const Vector& xt, double u) -> Vector {
    return h(xt.head(nx), u);
  };
  return joint;
}

DiscreteModel without_g(const GSlotModel& base) {
  DiscreteModel m;
  m.state_dim = base.state_dim;
  m.measurement_dim = base.measurement_dim;
  m.transition = [f = base.transition](const Vector& x, double u) { return f(x, u, 0.0); };
  m.observation = base.observation;
  return m;
}

GSlotModel duffing_incomplete(const DuffingParams& p, double dt) {
  if (!(dt > 0.0)) throw InvalidParams("duffing_incomplete: dt must be positive");
  GSlotModel m;
  m.state_dim = 2;
  m.measurement_dim = 1;
  m.transition = [p, dt](const Vector& x, double u, double g) -> Vector {
    Vector dx(2);
    dx << x(1), -p.p3 * x(1) - p.p1 * x(0) - g + u;
    return x + dt * dx;
  };
  m.observation = first_state_observation;
  return m;
}

GSlotModel golf_incomplete(const GolfParams& p, double dt) {
  if (!(dt > 0.0)) throw InvalidParams("golf_incomplete: dt must be positive");
  if (!(p.J > 0.0)) throw InvalidParams("golf_incomplete: J must be positive");
  GSlotModel m;
  m.state_dim = 2;
  m.measurement_dim = 1;
  m.transition = [p, dt](const Vector& x, double u, double g) -> Vector {
    Vector dx(2);
    dx << x(1), (-p.m * kGravity * p.a * std::sin(x(0)) + 4.0 * u) / p.J - g;
    return x + dt * dx;
  };
  m.observation = first_state_observation;
  return m;
}

}  // namespace sparse_ukf

#pragma once

#include <functional>
#include <memory>

#include "sparse_ukf/library.hpp"
#include "sparse_ukf/linalg.hpp"

namespace sparse_ukf {

using TransitionFn = std::function<Vector(const Vector& x, double u)>;
using ObservationFn = std::function<Vector(const Vector& x, double u)>;
using DerivativeFn = std::function<Vector(const Vector& x, double u)>;

/// x_{k+1} = f(x_k, u_k), y_k = h(x_k, u_k). Noise is added by the filter/harness.
struct DiscreteModel {
  Eigen::Index state_dim = 0;
  Eigen::Index measurement_dim = 0;
  TransitionFn transition;
  ObservationFn observation;
};

/// Transition f(x, u, g) with a scalar slot for the unmodelled dynamics.
struct GSlotModel {
  Eigen::Index state_dim = 0;
  Eigen::Index measurement_dim = 0;
  std::function<Vector(const Vector& x, double u, double g)> transition;
  ObservationFn observation;
};

inline constexpr double kGravity = 9.81;

struct DuffingParams {
  double p1 = -1.0;
  double p2 = 3.0;
  double p3 = 0.1;
};

/// Golf-robot arm. Defaults are stand-in magnitudes, not measured values.
struct GolfParams {
  double m = 0.5;
  double a = 0.15;
  double d = 0.01;
  double J = 0.0125;
  double r = 0.01;
  double mu = 0.1;
};

/// (x2, -p3 x2 - p1 x1 - p2 x1^3 + u)
Vector duffing_derivative(const Vector& x, double u, const DuffingParams& p);

/// Coulomb-plus-viscous friction torque M_F of the golf robot.
double golf_friction(const Vector& x, const GolfParams& p);

/// (x2, (-m g a sin x1 - M_F + 4u) / J)
Vector golf_derivative(const Vector& x, double u, const GolfParams& p);

/// x + dt * f(x, u)
TransitionFn euler_discretize(DerivativeFn derivative, double dt);

/// One classical fourth-order Runge-Kutta step.
Vector rk4_step(const DerivativeFn& derivative, const Vector& x, double u, double dt);

/// y = x1, on the leading entry of whatever state it is given.
Vector first_state_observation(const Vector& x, double u);

/// Joint transition (x, theta) -> (f(x, u, theta . Psi(x, u)), theta); the
/// observation sees only the x-part.
DiscreteModel make_joint_model(const GSlotModel& base, std::shared_ptr<const FunctionLibrary> lib);

/// Base model with the g slot forced to zero.
DiscreteModel without_g(const GSlotModel& base);

/// Euler-discretized Duffing with -p2 x1^3 replaced by -g.
GSlotModel duffing_incomplete(const DuffingParams& p, double dt);

/// Euler-discretized golf robot without friction; g enters the angular
/// acceleration directly, so the exact correction is g = M_F / J.
GSlotModel golf_incomplete(const GolfParams& p, double dt);

}  // namespace sparse_ukf

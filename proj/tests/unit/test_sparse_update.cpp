#include <doctest.h>

#include <memory>

#include "oracles.hpp"
#include "sparse_ukf/errors.hpp"
#include "sparse_ukf/sparse_update.hpp"

using namespace sparse_ukf;
using oracle::max_abs;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

struct DuffingJoint {
  std::shared_ptr<const FunctionLibrary> lib =
      std::make_shared<const FunctionLibrary>(make_duffing_libraries().psi1);
  DiscreteModel model = make_joint_model(duffing_incomplete(DuffingParams{}, 0.02), lib);
  NoiseSpec noise{block_diagonal(1e-6 * Matrix::Identity(2, 2), 1e-4 * Matrix::Identity(9, 9)),
                  1e-4 * Matrix::Identity(1, 1)};

  JointSqUkf filter(SparsityConfig cfg = {}) const {
    return JointSqUkf(model, 2, noise, compute_weights(1e-3, 2.0, 0.0, 11), cfg);
  }
};

}  // namespace

TEST_CASE("pseudo measurement is the l1 norm of theta") {
  CHECK(pseudo_measurement(vec({5, 6, 0, 0, 0}), 3) == 0.0);
  CHECK(pseudo_measurement(vec({5, 6, 0.2, -0.3, 0}), 3) == doctest::Approx(0.5));
  CHECK(pseudo_measurement(vec({-9, 1, 0.2, -0.3, 0}), 3) ==
        pseudo_measurement(vec({5, 6, 0.2, -0.3, 0}), 3));
  CHECK_THROWS_AS(pseudo_measurement(vec({1, 2}), 3), DimensionMismatch);
}

TEST_CASE("active count uses a strict magnitude threshold") {
  CHECK(active_count(vec({0.05, 0.2, -0.15, 0.01}), 0.1) == 2);
  CHECK(active_count(Vector::Zero(5), 0.1) == 0);
  CHECK(active_count(vec({0.1, -0.1, 0.1}), 0.1) == 0);
  CHECK_THROWS_AS(active_count(Vector::Zero(2), 0.0), InvalidParams);
}

TEST_CASE("soft switch examples") {
  const FilterState pre{vec({7, 8, 1, 0}), TriangularFactor::identity(4), 3};
  const FilterState pm{vec({0, 0, 0, 1}), TriangularFactor(2 * Matrix::Identity(4, 4)), 3};
  const FilterState out = soft_switch(pre, pm, 2, 0.2);
  CHECK(max_abs(out.mean - vec({7, 8, 0.2, 0.8})) < 1e-15);
  CHECK(out.sqrt_cov.matrix() == pm.sqrt_cov.matrix());
  CHECK(out.step == 3);

  const FilterState same = soft_switch(pre, FilterState{vec({0, 0, 1, 0}), pm.sqrt_cov, 3}, 2, 0.7);
  CHECK(same.mean.tail(2) == pre.mean.tail(2));

  const FilterState near_zero = soft_switch(pre, pm, 2, 1e-12);
  CHECK(max_abs(near_zero.mean.tail(2) - pm.mean.tail(2)) < 1e-11);

  CHECK_THROWS_AS(soft_switch(pre, pm, 2, 0.0), InvalidParams);
  CHECK_THROWS_AS(soft_switch(pre, pm, 2, 1.0), InvalidParams);
}

TEST_CASE("soft switch is a convex combination componentwise") {
  oracle::Gen g(61);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = g.integer(3, 10);
    const FilterState pre{g.gaussian(n), TriangularFactor::identity(n), 0};
    const FilterState pm{g.gaussian(n), TriangularFactor::identity(n), 0};
    const FilterState out = soft_switch(pre, pm, 2, g.uniform(0.01, 0.99));
    CHECK(out.mean.head(2) == pre.mean.head(2));
    for (Eigen::Index i = 2; i < n; ++i) {
      const double lo = std::min(pre.mean(i), pm.mean(i));
      const double hi = std::max(pre.mean(i), pm.mean(i));
      CHECK(out.mean(i) >= lo - 1e-15);
      CHECK(out.mean(i) <= hi + 1e-15);
    }
  }
}

TEST_CASE("sparsity config validation") {
  CHECK_NOTHROW(SparsityConfig{}.validate(9));
  CHECK_THROWS_AS(SparsityConfig{.barrier = 0.0}.validate(9), InvalidParams);
  CHECK_THROWS_AS(SparsityConfig{.max_active = 0}.validate(9), InvalidParams);
  CHECK_THROWS_AS(SparsityConfig{.max_active = 10}.validate(9), InvalidParams);
  CHECK_THROWS_AS(SparsityConfig{.max_iterations = 0}.validate(9), InvalidParams);
  CHECK_THROWS_AS(SparsityConfig{.gamma = 1.0}.validate(9), InvalidParams);
  CHECK_THROWS_AS(SparsityConfig{.r_pm = -1.0}.validate(9), InvalidParams);
}

TEST_CASE("sparsity loop does nothing when the constraint holds") {
  const DuffingJoint d;
  const JointSqUkf f = d.filter();
  Vector z = Vector::Zero(11);
  z.head(2) = vec({0.5, 0.1});
  z(7) = 3.0;
  z(3) = -0.5;
  const FilterState s = f.initialize(z, 1e-4 * Matrix::Identity(11, 11));
  SparsityDiagnostics diag;
  const FilterState out = f.sparsity_loop(s, 0.0, diag);
  CHECK(diag.iterations == 0);
  CHECK(!diag.hit_limit);
  CHECK(out.mean == s.mean);
  CHECK(out.sqrt_cov.matrix() == s.sqrt_cov.matrix());
}

TEST_CASE("sparsity loop shrinks five active coefficients") {
  const DuffingJoint d;
  for (bool predict : {true, false}) {
    const JointSqUkf f = d.filter(SparsityConfig{.pseudo_predict = predict});
    Vector z = Vector::Zero(11);
    z.tail(9) << 0.3, -0.25, 0.2, 0.0, 0.4, 0.0, -0.35, 0.0, 0.0;
    const FilterState s = f.initialize(z, 1e-2 * Matrix::Identity(11, 11));
    SparsityDiagnostics diag;
    const FilterState out = f.sparsity_loop(s, 0.0, diag);
    CHECK(diag.active_before == 5);
    CHECK(diag.iterations >= 1);
    CHECK(diag.iterations <= 10);
    CHECK((diag.active_after <= 3 || diag.hit_limit));
    CHECK(diag.active_after == active_count(out.mean.tail(9), 0.1));
    CHECK(diag.l1_after < diag.l1_before);
  }
}

TEST_CASE("step with a non-binding constraint equals a plain filter step") {
  const DuffingJoint d;
  const JointSqUkf f = d.filter(SparsityConfig{.max_active = 9});
  const SquareRootUkf plain(d.model, d.noise, compute_weights(1e-3, 2.0, 0.0, 11));
  Vector z = Vector::Constant(11, 0.2);
  z.head(2) = vec({1.0, 0.0});
  FilterState a = f.initialize(z, 1e-3 * Matrix::Identity(11, 11));
  FilterState b = a;
  for (int k = 0; k < 20; ++k) {
    const Vector y = Vector::Constant(1, 1.0 - 0.01 * k);
    const auto r = f.step(a, 0.1, y);
    b = plain.step(b, 0.1, y);
    CHECK(r.diagnostics.iterations == 0);
    CHECK(r.state.mean == b.mean);
    CHECK(r.state.sqrt_cov.matrix() == b.sqrt_cov.matrix());
    a = r.state;
  }
}

TEST_CASE("step keeps the corrected x-part exactly") {
  const DuffingJoint d;
  const JointSqUkf f = d.filter();
  const SquareRootUkf plain(d.model, d.noise, compute_weights(1e-3, 2.0, 0.0, 11));
  Vector z = Vector::Zero(11);
  z.head(2) = vec({0.6, 0.0});
  z.tail(9) << 0.3, -0.25, 0.2, 0.15, 0.4, 0.0, -0.35, 0.0, 0.0;
  const FilterState s = f.initialize(z, 1e-3 * Matrix::Identity(11, 11));
  const Vector y = Vector::Constant(1, 0.61);
  const auto r = f.step(s, 0.05, y);
  const FilterState corrected = plain.step(s, 0.05, y);
  CHECK(r.diagnostics.iterations > 0);
  CHECK(r.state.mean.head(2) == corrected.mean.head(2));
  SparsityDiagnostics diag;
  const FilterState pm = f.sparsity_loop(corrected, 0.05, diag);
  CHECK(max_abs(r.state.mean.tail(9) - (0.8 * pm.mean.tail(9) + 0.2 * corrected.mean.tail(9))) <
        1e-15);
  CHECK(r.state.sqrt_cov.matrix() == pm.sqrt_cov.matrix());
}

TEST_CASE("joint filter rejects a bad partition") {
  const DuffingJoint d;
  CHECK_THROWS_AS(JointSqUkf(d.model, 11, d.noise, compute_weights(1e-3, 2.0, 0.0, 11), {}),
                  DimensionMismatch);
  CHECK_THROWS_AS(JointSqUkf(d.model, 2, d.noise, compute_weights(1e-3, 2.0, 0.0, 11),
                             SparsityConfig{.gamma = 0.0}),
                  InvalidParams);
}

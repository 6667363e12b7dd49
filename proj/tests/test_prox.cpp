#include <doctest.h>

#include "oracles.hpp"
#include "specdec/flows.hpp"
#include "specdec/prox.hpp"

using namespace specdec;

namespace {

Regularizer two_point() {
  Eigen::MatrixXd K(1, 2);
  K << 1, -1;
  return make_matrix(K);
}

Signal sig(std::initializer_list<double> vals) {
  Vector v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return Signal::vector(std::move(v));
}

}  // namespace

TEST_CASE("prox matches the closed-form two-point solution") {
  auto reg = two_point();
  Signal f = sig({3, 1});
  auto res = prox(reg, f, 0.5);
  CHECK(res.u.values.isApprox((Vector(2) << 2.5, 1.5).finished(), 1e-12));

  for (double t : {0.05, 0.2, 0.7, 0.99, 1.0, 1.3, 2.5}) {
    auto r = prox(reg, f, t);
    CHECK((r.u.values - oracles::prox_two_point(f.values, t)).norm() <= 1e-10);
  }
}

TEST_CASE("prox leaves nullspace data untouched") {
  auto tv = make_tv1d(6);
  Signal f = sig({2, 2, 2, 2, 2, 2});
  for (double t : {0.1, 5.0}) {
    auto res = prox(tv, f, t);
    CHECK((res.u.values - f.values).norm() <= 1e-12);
  }
}

TEST_CASE("prox shrinks eigenfunctions linearly") {
  // p/||p|| from the 1D TV spike is an eigenfunction with lambda = sqrt(5)
  auto tv = make_tv1d(5);
  auto sub = min_norm_subgradient(tv, sig({0, 0, 1, 0, 0}));
  const double lambda = sub.p.norm();
  CHECK(lambda == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  Signal f(sub.p.values / lambda, sub.p.shape);

  for (double t : {0.05, 0.2, 0.4}) {
    REQUIRE(t < 1.0 / lambda);
    auto res = prox(tv, f, t);
    CHECK((res.u.values - (1.0 - t * lambda) * f.values).norm() <= 1e-10);
  }
  auto past = prox(tv, f, 1.0 / lambda + 0.1);
  CHECK(past.u.norm() <= 1e-10);
}

TEST_CASE("prox optimality: certificate closes the loop") {
  auto tv = make_tv1d(9);
  auto gen = oracles::rng(17);
  for (int k = 0; k < 10; ++k) {
    Signal f = Signal::vector(oracles::random_vector(gen, 9));
    const double t = oracles::uniform(gen, 0.05, 1.0);
    auto res = prox(tv, f, t);
    // u = f - t K^T q holds identically; the certificate must be a
    // subgradient at u
    Vector p = tv.apply_transpose(res.cert.q);
    CHECK((f.values - res.u.values - t * p).norm() <= 1e-12);
    CHECK(is_subgradient(tv, res.u, Signal(p, f.shape)).ok);
  }
}

TEST_CASE("prox is nonexpansive") {
  auto tv = make_tv1d(8);
  auto gen = oracles::rng(19);
  for (int k = 0; k < 20; ++k) {
    Signal f1 = Signal::vector(oracles::random_vector(gen, 8));
    Signal f2 = Signal::vector(oracles::random_vector(gen, 8));
    const double t = oracles::uniform(gen, 0.05, 2.0);
    auto r1 = prox(tv, f1, t);
    auto r2 = prox(tv, f2, t);
    CHECK((r1.u.values - r2.u.values).norm() <= (f1.values - f2.values).norm() + 1e-10);
  }
}

TEST_CASE("prox saturates to the nullspace projection past extinction") {
  auto tv = make_tv1d(7);
  auto gen = oracles::rng(29);
  for (int k = 0; k < 10; ++k) {
    Signal f = Signal::vector(oracles::random_vector(gen, 7));
    const double T = extinction_time_vm(tv, f);
    auto [p0, q0] = project_nullspace(tv, f);
    auto res = prox(tv, f, T * 1.000001);
    CHECK((res.u.values - p0.values).norm() <= 1e-8 * (1.0 + f.norm()));
  }
}

TEST_CASE("extinction_time_vm on the hand cases") {
  CHECK(extinction_time_vm(two_point(), sig({3, 1})) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(extinction_time_vm(make_tv1d(5), sig({0, 0, 1, 0, 0})) ==
        doctest::Approx(0.4).epsilon(1e-8));
  CHECK(extinction_time_vm(make_tv1d(4), sig({3, 3, 3, 3})) == 0.0);
}

TEST_CASE("extinction_time_vm matches the cumulative-sum oracle on 1D TV") {
  auto tv = make_tv1d(11);
  auto gen = oracles::rng(47);
  for (int k = 0; k < 15; ++k) {
    Signal f = Signal::vector(oracles::random_vector(gen, 11));
    auto [p0, q0] = project_nullspace(tv, f);
    const double T = extinction_time_vm(tv, f);
    CHECK(T == doctest::Approx(oracles::tv1d_extinction(q0.values)).epsilon(1e-7));
  }
}

TEST_CASE("extinction_time_vm equals the last gradient-flow event under DDL1") {
  auto tv = make_tv1d(10);
  auto gen = oracles::rng(53);
  for (int k = 0; k < 10; ++k) {
    Signal f = Signal::vector(oracles::random_vector(gen, 10));
    auto gf = gradient_flow_exact(tv, f);
    const double T = extinction_time_vm(tv, f);
    CHECK(T == doctest::Approx(gf.extinction_time).epsilon(1e-7));
  }
}

TEST_CASE("project_dual_ball clips per group") {
  auto reg = two_point();
  CHECK(project_dual_ball(reg, (Vector(1) << 2).finished()).q[0] == doctest::Approx(1.0));

  auto iso = make_tv2d_iso(2, 2);  // groups: {dh(0,0), dv(0,0)}, {dv(0,1)}, {dh(1,0)}
  Vector w(4);
  w << 0.3, 0.7, -0.4, 2.0;
  auto q = project_dual_ball(iso, w).q;
  CHECK(q[0] == doctest::Approx(0.3));  // pair (0.3, -0.4) has norm 0.5
  CHECK(q[2] == doctest::Approx(-0.4));
  CHECK(q[3] == doctest::Approx(1.0));

  w << 3.0, 0.0, 4.0, 0.5;
  q = project_dual_ball(iso, w).q;
  CHECK(q[0] == doctest::Approx(0.6));  // (3,4)/5
  CHECK(q[2] == doctest::Approx(0.8));

  // idempotent and 1-Lipschitz
  auto gen = oracles::rng(59);
  for (int k = 0; k < 20; ++k) {
    Vector a = oracles::random_vector(gen, 4, -3, 3);
    Vector b = oracles::random_vector(gen, 4, -3, 3);
    Vector qa = project_dual_ball(iso, a).q;
    CHECK((project_dual_ball(iso, qa).q - qa).norm() <= 1e-14);
    Vector qb = project_dual_ball(iso, b).q;
    CHECK((qa - qb).norm() <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("prox rejects bad arguments") {
  auto tv = make_tv1d(4);
  CHECK_THROWS_AS(prox(tv, sig({1, 2, 3, 4}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prox(tv, sig({1, 2}), 1.0), std::invalid_argument);
}

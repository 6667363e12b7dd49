#include <doctest.h>

#include "oracles.hpp"
#include "specdec/prox.hpp"
#include "specdec/regularizer.hpp"

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

bool cert_feasible(const Regularizer& reg, const Vector& q, double tol = 1e-9) {
  return (reg.group_norms(q).array() <= 1.0 + tol).all();
}

const Signal spike5 = sig({0, 0, 1, 0, 0});

}  // namespace

TEST_CASE("eval_j matches hand values") {
  auto reg = two_point();
  CHECK(eval_j(reg, sig({3, 1})) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eval_j(reg, sig({0, 0})) == 0.0);

  auto tv = make_tv1d(5);
  CHECK(eval_j(tv, spike5) == doctest::Approx(oracles::tv1d_j(spike5.values)).epsilon(1e-14));
  CHECK(eval_j(tv, spike5) == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS(eval_j(tv, sig({1, 2})), std::invalid_argument);
}

TEST_CASE("eval_j agrees with the hand oracle on random 1D TV inputs") {
  auto tv = make_tv1d(17);
  auto gen = oracles::rng(11);
  for (int k = 0; k < 50; ++k) {
    Signal u = Signal::vector(oracles::random_vector(gen, 17));
    CHECK(eval_j(tv, u) == doctest::Approx(oracles::tv1d_j(u.values)).epsilon(1e-13));
  }
}

TEST_CASE("one-homogeneity and triangle inequality") {
  auto gen = oracles::rng(5);
  std::vector<Regularizer> regs;
  regs.push_back(make_tv1d(9));
  regs.push_back(make_l1(7));
  regs.push_back(make_tv2d_iso(4, 5));
  for (const auto& reg : regs) {
    const int n = reg.signal_dim();
    for (int k = 0; k < 100; ++k) {
      Signal u(oracles::random_vector(gen, n), reg.signal_shape());
      Signal v(oracles::random_vector(gen, n), reg.signal_shape());
      const double s = oracles::uniform(gen, -3, 3);
      const double ju = eval_j(reg, u);
      Signal su(s * u.values, reg.signal_shape());
      CHECK(std::abs(eval_j(reg, su) - std::abs(s) * ju) <= 1e-12 * (1.0 + ju));
      Signal upv(u.values + v.values, reg.signal_shape());
      CHECK(eval_j(reg, upv) <= ju + eval_j(reg, v) + 1e-12);
    }
  }
}

TEST_CASE("nullspace shifts leave J unchanged") {
  auto tv = make_tv1d(8);
  auto gen = oracles::rng(13);
  for (int k = 0; k < 25; ++k) {
    Signal u = Signal::vector(oracles::random_vector(gen, 8));
    const double c = oracles::uniform(gen, -5, 5);
    Signal shifted(u.values.array() + c, u.shape);
    CHECK(eval_j(tv, shifted) == doctest::Approx(eval_j(tv, u)).epsilon(1e-12));
  }
}

TEST_CASE("project_nullspace splits mean and deviation for 1D TV") {
  auto tv = make_tv1d(2);
  auto [p0, q0] = project_nullspace(tv, sig({3, 1}));
  CHECK(p0.values.isApprox((Vector(2) << 2, 2).finished(), 1e-14));
  CHECK(q0.values.isApprox((Vector(2) << 1, -1).finished(), 1e-14));

  auto tv5 = make_tv1d(5);
  Signal c = sig({4, 4, 4, 4, 4});
  auto [pc, qc] = project_nullspace(tv5, c);
  CHECK((pc.values - c.values).norm() <= 1e-14);
  CHECK(qc.norm() <= 1e-14);
}

TEST_CASE("project_nullspace against the LU kernel oracle on dense operators") {
  auto gen = oracles::rng(23);
  Eigen::MatrixXd K(3, 5);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) K(r, c) = oracles::uniform(gen);
  auto reg = make_matrix(K);
  CHECK(reg.nullspace_basis().cols() == 2);
  Eigen::MatrixXd P = oracles::kernel_projector_lu(K);
  for (int k = 0; k < 20; ++k) {
    Signal u = Signal::vector(oracles::random_vector(gen, 5));
    auto [p0, q0] = project_nullspace(reg, u);
    CHECK((p0.values + q0.values - u.values).norm() <= 1e-14);
    CHECK(p0.values.dot(q0.values) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((K * q0.values - K * u.values).norm() <= 1e-12);
    CHECK((P * u.values - p0.values).norm() <= 1e-9);
    CHECK(eval_j(reg, u) == doctest::Approx(eval_j(reg, q0)).epsilon(1e-12));
  }
}

TEST_CASE("min_norm_subgradient on the spike matches the closed form and brute force") {
  auto tv = make_tv1d(5);
  auto res = min_norm_subgradient(tv, spike5);
  Vector p_expect(5);
  p_expect << -0.5, -0.5, 2, -0.5, -0.5;
  CHECK((res.p.values - p_expect).cwiseAbs().maxCoeff() <= 1e-12);
  Vector q_expect(4);
  q_expect << 0.5, 1, -1, -0.5;
  CHECK((res.cert.q - q_expect).cwiseAbs().maxCoeff() <= 1e-12);

  double q1 = 0, q4 = 0;
  oracles::spike_min_norm_brute(q1, q4);
  CHECK(q1 == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(q4 == doctest::Approx(-0.5).epsilon(1e-3));

  CHECK(res.p.values.dot(spike5.values) == doctest::Approx(eval_j(tv, spike5)).epsilon(1e-12));
}

TEST_CASE("min_norm_subgradient two-point and nullspace cases") {
  auto reg = two_point();
  auto res = min_norm_subgradient(reg, sig({3, 1}));
  CHECK(res.p.values.isApprox((Vector(2) << 1, -1).finished(), 1e-12));
  CHECK(res.cert.q[0] == doctest::Approx(1.0));

  auto tv = make_tv1d(4);
  auto zero = min_norm_subgradient(tv, sig({2, 2, 2, 2}));
  CHECK(zero.p.norm() == 0.0);
}

TEST_CASE("min_norm_subgradient is orthogonal to the nullspace") {
  auto tv = make_tv1d(12);
  auto gen = oracles::rng(31);
  for (int k = 0; k < 25; ++k) {
    Signal u = Signal::vector(oracles::random_vector(gen, 12));
    auto res = min_norm_subgradient(tv, u);
    const auto& B = tv.nullspace_basis();
    for (int c = 0; c < B.cols(); ++c)
      CHECK(std::abs(res.p.values.dot(B.col(c))) <= 1e-10);
  }
}

TEST_CASE("MINSUB holds empirically under DDL1") {
  auto tv = make_tv1d(12);
  auto gen = oracles::rng(37);
  for (int k = 0; k < 20; ++k) {
    Signal u = Signal::vector(oracles::random_vector(gen, 12));
    auto res = min_norm_subgradient(tv, u);
    const Vector Ku = tv.apply(u.values);
    const double tol_active = 1e-9 * Ku.cwiseAbs().maxCoeff();
    for (int trial = 0; trial < 50; ++trial) {
      Vector q(tv.dual_dim());
      for (int l = 0; l < q.size(); ++l)
        q[l] = std::abs(Ku[l]) > tol_active ? (Ku[l] > 0 ? 1.0 : -1.0)
                                            : oracles::uniform(gen);
      const Vector p_other = tv.apply_transpose(q);
      CHECK(std::abs(res.p.values.dot(res.p.values - p_other)) <= 1e-8);
    }
  }
}

TEST_CASE("grouped min_norm_subgradient produces feasible certificates") {
  auto iso = make_tv2d_iso(4, 4);
  auto gen = oracles::rng(43);
  for (int k = 0; k < 5; ++k) {
    Signal u(oracles::random_vector(gen, 16), Shape{4, 4});
    auto res = min_norm_subgradient(iso, u);
    CHECK(res.p.values.dot(u.values) == doctest::Approx(eval_j(iso, u)).epsilon(1e-6));
    CHECK(cert_feasible(iso, res.cert.q));
  }
}

TEST_CASE("is_subgradient examples") {
  auto tv = make_tv1d(5);
  auto res = min_norm_subgradient(tv, spike5);
  CHECK(is_subgradient(tv, spike5, res.p).ok);

  Signal doubled(2.0 * res.p.values, res.p.shape);
  auto bad = is_subgradient(tv, spike5, doubled);
  CHECK_FALSE(bad.ok);
  CHECK(bad.membership_residual > 1e-3);  // scaling leaves the dual ball

  Signal zero5 = sig({0, 0, 0, 0, 0});
  CHECK(is_subgradient(tv, zero5, zero5).ok);
}

TEST_CASE("check_ddl1 classifies the standard operators") {
  auto tv = check_ddl1(make_tv1d(6));
  CHECK(tv.status == TriState::holds);
  CHECK(tv.weakly_dominant);  // interior rows of KK^T are [-1, 2, -1]

  auto l1 = check_ddl1(make_l1(4));
  CHECK(l1.status == TriState::holds);
  CHECK_FALSE(l1.weakly_dominant);

  // KK^T = [[1,1],[1,1.01]]: the first row sits exactly on the boundary
  Eigen::MatrixXd Kb(2, 2);
  Kb << 1, 0, 1, 0.1;
  auto b = check_ddl1(make_matrix(Kb));
  CHECK(b.status == TriState::holds);
  CHECK(b.weakly_dominant);
  CHECK(b.worst_row == 0);

  CHECK(make_tv2d_aniso(4, 4).ddl1() == TriState::fails);
  CHECK_THROWS_AS(check_ddl1(make_tv2d_iso(3, 3)), std::invalid_argument);
}

TEST_CASE("dual_ball_bound certifies subgradient norms") {
  CHECK(dual_ball_bound(two_point()) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(dual_ball_bound(make_l1(3)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));

  auto tv = make_tv1d(5);
  const double C = dual_ball_bound(tv);
  CHECK(C <= 4 * std::sqrt(2.0) + 1e-12);  // sum of row norms
  auto gen = oracles::rng(41);
  for (int k = 0; k < 100; ++k) {
    Signal u = Signal::vector(oracles::random_vector(gen, 5));
    CHECK(min_norm_subgradient(tv, u).p.norm() <= C + 1e-9);
  }
}

TEST_CASE("grid factories partition the dual rows") {
  auto iso = make_tv2d_iso(3, 4);
  CHECK_FALSE(iso.is_polyhedral());
  size_t covered = 0;
  for (const auto& g : iso.groups()) covered += g.size();
  CHECK(covered == static_cast<size_t>(iso.dual_dim()));
  CHECK(iso.dual_dim() == 3 * 3 + 2 * 4);
  CHECK(make_tv2d_aniso(3, 4).is_polyhedral());

  // the stored basis really spans ker(K)
  for (const auto& reg : {make_tv1d(7), make_tv2d_iso(3, 4), make_tv2d_aniso(3, 4)}) {
    const auto& B = reg.nullspace_basis();
    REQUIRE(B.cols() == 1);
    CHECK((reg.op() * B).norm() <= 1e-13);
    CHECK(std::abs(B.col(0).norm() - 1.0) <= 1e-13);
  }

  // isotropic J on a 2x2 checkerboard: one sqrt(2) pair plus two singletons
  auto iso2 = make_tv2d_iso(2, 2);
  Signal img((Vector(4) << 0, 1, 1, 0).finished(), Shape{2, 2});
  CHECK(eval_j(iso2, img) == doctest::Approx(std::sqrt(2.0) + 2.0).epsilon(1e-12));
}

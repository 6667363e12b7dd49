#include <doctest.h>

#include "oracles.hpp"
#include "specdec/generators.hpp"
#include "specdec/verify.hpp"

using namespace specdec;

namespace {

Signal sig(std::initializer_list<double> vals) {
  Vector v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return Signal::vector(std::move(v));
}

}  // namespace

TEST_CASE("orthogonality: single atom passes vacuously") {
  auto tv = make_tv1d(5);
  auto dec = decompose(gradient_flow_exact(tv, sig({0, 0, 1, 0, 0})));
  auto rep = check_orthogonality(dec);
  REQUIRE(rep.checks.size() == 1);
  CHECK(rep.checks[0].pass);
  CHECK(rep.checks[0].context.find("vacuous") != std::string::npos);
}

TEST_CASE("orthogonality holds for three flat peaks of distinct widths") {
  auto f = gen_flat_peaks_1d(128, {10, 40, 80}, {4, 8, 16}, {1, 1, 1});
  auto tv = make_tv1d(128);
  auto gf = gradient_flow_exact(tv, f);
  auto dec = decompose(gf);
  CHECK(dec.atoms.size() >= 3);
  auto rep = check_orthogonality(dec);
  CHECK(rep.all_pass());
  CHECK(rep.checks[0].residual <= 1e-6);

  // orthogonality implies the Parseval split (Pythagoras), asserted jointly
  auto pv = parseval_check(dec);
  CHECK(std::abs(pv.inner_residual) <= 1e-8 * f.values.squaredNorm());
  CHECK(std::abs(pv.norm_residual) <= 1e-8 * f.values.squaredNorm());
}

TEST_CASE("orthogonality on random DDL1 inputs") {
  auto tv = make_tv1d(32);
  for (unsigned long long seed : {1ULL, 2ULL, 3ULL}) {
    auto f = random_signals(Shape{32, 1}, 1, seed)[0];
    auto rep = check_orthogonality(decompose(gradient_flow_exact(tv, f)));
    CHECK(rep.all_pass());
  }
}

TEST_CASE("eigenvector residuals vanish on the hand cases") {
  auto tv = make_tv1d(5);
  auto gf2 = gradient_flow_exact(tv, sig({0, 0, 1, 0, 0}));
  // ||p||^2 = 5 and ||K p||_1 = 5
  const auto& p = gf2.events[1].p;
  CHECK(p.values.squaredNorm() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(tv.apply(p.values).cwiseAbs().sum() == doctest::Approx(5.0).epsilon(1e-12));
  auto rep = check_eigenvectors(tv, gf2);
  CHECK(rep.all_pass());
  CHECK(rep.checks[0].residual <= 1e-8);

  Eigen::MatrixXd K(1, 2);
  K << 1, -1;
  auto reg = make_matrix(K);
  auto gf1 = gradient_flow_exact(reg, sig({3, 1}));
  CHECK(check_eigenvectors(reg, gf1).all_pass());
}

TEST_CASE("eigendecomposition identity") {
  Eigen::MatrixXd K(1, 2);
  K << 1, -1;
  auto reg = make_matrix(K);
  Signal f1 = sig({3, 1});
  CHECK(check_eigendecomposition(reg, gradient_flow_exact(reg, f1), f1).all_pass());

  auto tv = make_tv1d(5);
  Signal f2 = sig({0, 0, 1, 0, 0});
  CHECK(check_eigendecomposition(tv, gradient_flow_exact(tv, f2), f2).all_pass());

  Signal fc = sig({4, 4, 4, 4, 4});
  CHECK(check_eigendecomposition(tv, gradient_flow_exact(tv, fc), fc).all_pass());
}

TEST_CASE("equivalence harness on the hand cases and random inputs") {
  Eigen::MatrixXd K(1, 2);
  K << 1, -1;
  auto reg = make_matrix(K);
  auto rep1 = check_equivalence(reg, sig({3, 1}));
  CHECK(rep1.all_pass());

  auto tv = make_tv1d(5);
  auto rep2 = check_equivalence(tv, sig({0, 0, 1, 0, 0}));
  CHECK(rep2.all_pass());

  auto tv16 = make_tv1d(16);
  for (auto& f : random_signals(Shape{16, 1}, 3, 11)) {
    auto rep = check_equivalence(tv16, f);
    CHECK(rep.all_pass());
  }
}

TEST_CASE("minsub check: l1 worked example and TV spike") {
  auto l1 = make_l1(3);
  auto rep = check_minsub(l1, {sig({1, 0, -2})});
  CHECK(rep.all_pass());

  auto tv = make_tv1d(5);
  CHECK(check_minsub(tv, {sig({0, 0, 1, 0, 0})}).all_pass());
  CHECK(check_minsub(tv, {sig({2, 2, 2, 2, 2})}).all_pass());
  CHECK(check_minsub(tv, random_signals(Shape{5, 1}, 25, 3)).all_pass());

  CHECK_THROWS_AS(check_minsub(make_tv2d_iso(2, 2), {}), std::invalid_argument);
}

TEST_CASE("non-dominant operator: checks are informative, reconstruction still exact") {
  Eigen::MatrixXd K(3, 2);
  K << 1, 1, 1, -1, 1, 0;
  auto reg = make_matrix(K);
  REQUIRE(reg.ddl1() == TriState::fails);
  Signal f = sig({0.9, -0.3});
  auto gf = gradient_flow_exact(reg, f);
  auto dec = decompose(gf);
  CHECK((reconstruct(dec).values - f.values).norm() <= 1e-10);

  auto orth = check_orthogonality(dec, false);
  CHECK(orth.checks[0].informative);
  // informative failures do not fail the report
  CHECK(orth.all_pass());

  auto eig = check_eigenvectors(reg, gf);
  CHECK(eig.checks[0].informative);
}

TEST_CASE("reports are deterministic for a fixed seed") {
  auto tv = make_tv1d(8);
  auto a = check_minsub(tv, random_signals(Shape{8, 1}, 10, 42));
  auto b = check_minsub(tv, random_signals(Shape{8, 1}, 10, 42));
  REQUIRE(a.checks.size() == b.checks.size());
  CHECK(a.checks[0].residual == b.checks[0].residual);

  auto f = random_signals(Shape{8, 1}, 1, 7)[0];
  auto r1 = check_equivalence(tv, f);
  auto r2 = check_equivalence(tv, f);
  REQUIRE(r1.checks.size() == r2.checks.size());
  for (size_t i = 0; i < r1.checks.size(); ++i)
    CHECK(r1.checks[i].residual == r2.checks[i].residual);
}

TEST_CASE("generators validate their inputs") {
  CHECK(gen_spike_1d(5).values[2] == 1.0);
  CHECK_THROWS_AS(gen_flat_peaks_1d(32, {0, 3}, {4, 4}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(gen_flat_peaks_1d(10, {8}, {4}, {1}), std::invalid_argument);
  auto img = gen_disks_2d(32, 32, {{16, 16, 10, 1.0}});
  CHECK(img.predicted_eigenvalues[0] == doctest::Approx(0.2));
  CHECK(img.signal.values.maxCoeff() == 1.0);
  // deterministic random generator
  auto a = gen_random(Shape{16, 1}, 5);
  auto b = gen_random(Shape{16, 1}, 5);
  CHECK((a.values - b.values).norm() == 0.0);
}

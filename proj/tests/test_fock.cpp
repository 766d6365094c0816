#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "freeprob/fock.hpp"
#include "freeprob/harness.hpp"

using namespace freeprob;

namespace {

FockConfig cfg2(int depth, bool strict = true) {
  return FockConfig{make_matrix_algebra(2), 2, depth, strict};
}

}  // namespace

TEST_CASE("vacuum expectation and left multiplication") {
  FockConfig c = cfg2(4);
  const Algebra& A = *c.alg;
  FockVector vac = FockVector::vacuum(c);
  CHECK(A.norm(A.sub(fock_expectation(vac), A.unit())) == 0.0);
  Elem b = elem_random(A, 3, 1.0);
  FockVector v = fock_apply(Op::lambda(b), vac);
  CHECK(A.norm(A.sub(fock_expectation(v), b)) == 0.0);
}

TEST_CASE("rho acts on the tail") {
  FockConfig c = cfg2(4);
  const Algebra& A = *c.alg;
  Elem b = elem_random(A, 5, 1.0);
  FockVector v = fock_apply(Op::rho(b), FockVector::vacuum(c));
  CHECK(A.norm(A.sub(fock_expectation(v), b)) < 1e-14);
}

TEST_CASE("creation then annihilation returns the coefficient value") {
  FockConfig c = cfg2(4);
  const Algebra& A = *c.alg;
  AlgebraPtr alg = c.alg;
  FockVector vac = FockVector::vacuum(c);
  FockVector l1 = fock_apply(Op::create(1), vac);
  // level 1, word (1), slot u tail u
  REQUIRE(l1.sectors().size() == 1);
  REQUIRE(l1.sectors().begin()->first == Word{1});
  std::mt19937_64 rng(7);
  MultilinearMap alpha(alg, 1);
  for (cd& v : alpha.coeffs()) v = cd(std::uniform_real_distribution<double>(-1, 1)(rng));
  Elem want = alpha.eval_diag(A.unit());
  FockVector down = fock_apply(Op::annihilate(1, alpha), l1);
  CHECK(A.norm(A.sub(fock_expectation(down), want)) < 1e-13);
  // wrong letter annihilates to zero
  FockVector miss = fock_apply(Op::annihilate(2, alpha), l1);
  CHECK(miss.norm() == 0.0);
}

TEST_CASE("order-0 operators are lambda and lambda followed by creation") {
  FockConfig c = cfg2(4);
  const Algebra& A = *c.alg;
  Elem a0 = elem_random(A, 11, 1.0);
  MultilinearMap alpha0 = MultilinearMap::constant(c.alg, a0);
  FockVector vac = FockVector::vacuum(c);
  FockVector v = fock_apply(Op::annihilate(1, alpha0), vac);
  CHECK(A.norm(A.sub(fock_expectation(v), a0)) < 1e-14);
  FockVector w = fock_apply(Op::ann_create(1, alpha0), vac);
  FockVector ref = fock_apply(Op::lambda(a0), fock_apply(Op::create(1), vac));
  w -= ref;
  CHECK(w.norm() < 1e-14);
}

TEST_CASE("strict mode rejects creation past the depth cap") {
  FockConfig c = cfg2(2, true);
  FockVector v = FockVector::vacuum(c);
  v = fock_apply(Op::create(1), v);
  v = fock_apply(Op::create(1), v);
  CHECK_THROWS_AS(fock_apply(Op::create(2), v), DepthExceeded);
  // lossy mode drops the sector instead
  FockConfig l = cfg2(2, false);
  FockVector w = FockVector::vacuum(l);
  w = fock_apply(Op::create(1), w);
  w = fock_apply(Op::create(1), w);
  CHECK(fock_apply(Op::create(2), w).norm() == 0.0);
}

TEST_CASE("sum and scaled operators") {
  FockConfig c = cfg2(4);
  const Algebra& A = *c.alg;
  Elem b1 = elem_random(A, 13, 1.0), b2 = elem_random(A, 17, 1.0);
  FockVector vac = FockVector::vacuum(c);
  Op s = Op::sum({Op::lambda(b1), Op::scaled(cd(2.0), Op::lambda(b2))});
  Elem got = fock_expectation(fock_apply(s, vac));
  Elem want = A.add(b1, A.scale(cd(2.0), b2));
  CHECK(A.norm(A.sub(got, want)) < 1e-14);
}

TEST_CASE("alternating moment of lambda factors is the plain product") {
  FockConfig c = cfg2(4);
  const Algebra& A = *c.alg;
  std::mt19937_64 rng(19);
  Elem z1 = elem_random(A, rng(), 1.0), z2 = elem_random(A, rng(), 1.0);
  Elem b1 = elem_random(A, rng(), 1.0), b2 = elem_random(A, rng(), 1.0);
  std::vector<std::vector<Op>> factors{{Op::lambda(z1)}, {Op::lambda(z2)}};
  std::vector<Elem> bs{b1, b2};
  Elem got = alternating_moment(c, factors, bs);
  Elem want = A.mul(b1, A.mul(z1, A.mul(b2, z2)));
  CHECK(A.norm(A.sub(got, want)) < 1e-13);
}

TEST_CASE("fitted S-model reproduces its target moments") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig c{a, 2, 7, true};
  RvModel src = random_model(a, RvModel::Flavor::s_model, 1, 2, 91);
  MomentData m = model_moments(c, src, 3);
  RvModel fit = fit_s_model(m, 1, c);
  MomentData back = model_moments(c, fit, 3);
  for (int n = 1; n <= 3; ++n) {
    MultilinearMap d = back.mu(n);
    d -= m.mu(n);
    CHECK(d.max_abs() < 1e-8);
  }
}

TEST_CASE("fitted R-model reproduces its target moments") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig c{a, 2, 7, true};
  RvModel src = random_model(a, RvModel::Flavor::r_model, 1, 2, 93);
  MomentData m = model_moments(c, src, 3);
  RvModel fit = fit_r_model(m, 1, c);
  MomentData back = model_moments(c, fit, 3);
  for (int n = 1; n <= 3; ++n) {
    MultilinearMap d = back.mu(n);
    d -= m.mu(n);
    CHECK(d.max_abs() < 1e-8);
  }
}

TEST_CASE("moments are depth stable") {
  AlgebraPtr a = make_matrix_algebra(2);
  RvModel src = random_model(a, RvModel::Flavor::s_model, 1, 2, 97);
  MomentData mj = model_moments({a, 2, 6, true}, src, 3);
  MomentData mj1 = model_moments({a, 2, 7, true}, src, 3);
  for (int n = 1; n <= 3; ++n) {
    MultilinearMap d = mj.mu(n);
    d -= mj1.mu(n);
    CHECK(d.max_abs() <= 1e-12);
  }
}

TEST_CASE("model moments are left bimodular") {
  AlgebraPtr a = make_matrix_algebra(2);
  RvModel src = random_model(a, RvModel::Flavor::s_model, 1, 2, 101);
  MomentData m = model_moments({a, 2, 6, true}, src, 3);
  CHECK(m.bimodularity_residual() < 1e-12);
}

TEST_CASE("distinct-index models are free") {
  AlgebraPtr a = make_matrix_algebra(2);
  RvModel x = random_model(a, RvModel::Flavor::s_model, 1, 2, 103);
  RvModel y = random_model(a, RvModel::Flavor::r_model, 2, 2, 107);
  std::vector<RvModel> models{x, y};
  FreenessReport rep = freeness_check({a, 2, 8, true}, models, 10, 109);
  CHECK(rep.pass);
}

TEST_CASE("geometric vacuum-vector identity for a single model") {
  AlgebraPtr a = make_matrix_algebra(2);
  RvModel x = random_model(a, RvModel::Flavor::s_model, 1, 2, 113);
  Elem b = elem_random(*a, 127, 0.15);
  GeometricStateReport rep = geometric_state_check(x, b, {a, 2, 6, false});
  CHECK(rep.pass);
}

TEST_CASE("prune drops numerically empty sectors") {
  FockConfig c = cfg2(4);
  FockVector v = FockVector::vacuum(c);
  std::vector<cd> tiny(v.sector_size(1), cd(1e-20));
  v.add_sector(Word{1}, tiny);
  REQUIRE(v.sectors().size() == 2);
  v.prune();
  CHECK(v.sectors().size() == 1);
}

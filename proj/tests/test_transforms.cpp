#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "freeprob/harness.hpp"
#include "freeprob/transforms.hpp"

using namespace freeprob;
using freeprob::suites::random_jet;
using freeprob::suites::random_pointed_jet;

namespace {

// scalar MomentData from plain moment numbers m_1..m_N
MomentData scalar_moments(AlgebraPtr a, std::vector<double> m) {
  std::vector<MultilinearMap> mu;
  for (int n = 1; n <= (int)m.size(); ++n) {
    MultilinearMap t(a, n);
    t.coeffs()[0] = cd(m[n - 1]);
    mu.push_back(std::move(t));
  }
  return MomentData(a, std::move(mu));
}

double coeff(const Jet& f, int n) { return f.term(n).coeffs()[0].real(); }

// independent scalar oracle for the S coefficients, working directly on
// double coefficient arrays: invert psi compositionally, divide by z,
// multiply by 1+z
std::vector<double> scalar_s_oracle(const std::vector<double>& m) {
  int N = (int)m.size();
  // psi = sum m_k z^k, k = 1..N
  std::vector<double> psi(N + 1, 0.0);
  for (int k = 1; k <= N; ++k) psi[k] = m[k - 1];
  // w with psi(w(z)) = z, solved degree by degree
  std::vector<double> w(N + 1, 0.0);
  w[1] = 1.0 / psi[1];
  for (int n = 2; n <= N; ++n) {
    // coefficient of z^n in psi(w) with w[n] unknown: psi[1]*w[n] + known
    std::vector<double> pw(N + 1, 0.0);
    std::vector<double> wp(N + 1, 0.0);  // w^k accumulated
    wp[0] = 1.0;
    for (int k = 1; k <= N; ++k) {
      std::vector<double> next(N + 1, 0.0);
      for (int i = 0; i <= N; ++i)
        for (int j = 0; i + j <= N; ++j) next[i + j] += wp[i] * w[j];
      wp = next;
      for (int i = 0; i <= N; ++i) pw[i] += psi[k] * wp[i];
    }
    w[n] -= pw[n] / psi[1];
  }
  // H = w/z, S = (1+z) H
  std::vector<double> s(N, 0.0);
  for (int n = 0; n < N; ++n) {
    s[n] = w[n + 1];
    if (n >= 1) s[n] += w[n];
  }
  return s;
}

}  // namespace

TEST_CASE("psi and phi jets for a = 1") {
  AlgebraPtr a = make_matrix_algebra(1);
  MomentData m = scalar_moments(a, {1, 1, 1, 1});
  Jet psi = psi_jet(m);
  Jet phi = phi_jet(m);
  CHECK(coeff(psi, 0) == 0.0);
  for (int n = 1; n <= 4; ++n) CHECK(coeff(psi, n) == Catch::Approx(1.0));
  for (int n = 0; n <= 3; ++n) CHECK(coeff(phi, n) == Catch::Approx(1.0));
}

TEST_CASE("psi(b) - b*phi(b) vanishes on diagonals") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig cfg{a, 2, 7, true};
  RvModel x = random_model(a, RvModel::Flavor::s_model, 1, 3, 21);
  MomentData m = model_moments(cfg, x, 4);
  Jet psi = psi_jet(m);
  Jet phi = phi_jet(m);
  std::mt19937_64 rng(23);
  for (int t = 0; t < 5; ++t) {
    Elem b = elem_random(*a, rng(), 0.3);
    // compare degree <= 4 parts: psi has degree 4, b*phi(b) needs phi to 3
    Elem lhs = psi.diag_eval(b);
    Elem rhs = a->mul(b, phi.diag_eval(b));
    CHECK(a->norm(a->sub(lhs, rhs)) < 1e-12);
  }
}

TEST_CASE("scalar S for moments 1,2,5,14") {
  AlgebraPtr a = make_matrix_algebra(1);
  MomentData m = scalar_moments(a, {1, 2, 5, 14});
  Jet s = s_transform(m).jet;
  std::vector<double> oracle = scalar_s_oracle({1, 2, 5, 14});
  std::vector<double> want{1, -1, 1, -1};
  for (int n = 0; n <= 3; ++n) {
    CHECK(coeff(s, n) == Catch::Approx(want[n]).margin(1e-9));
    CHECK(oracle[n] == Catch::Approx(want[n]).margin(1e-9));
  }
}

TEST_CASE("a = 1 gives constant transforms") {
  AlgebraPtr a = make_matrix_algebra(1);
  MomentData m = scalar_moments(a, {1, 1, 1, 1});
  Jet s = s_transform(m).jet;
  Jet r = r_transform(m).jet;
  CHECK(coeff(s, 0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(coeff(r, 0) == Catch::Approx(1.0).margin(1e-12));
  for (int n = 1; n <= s.degree(); ++n) CHECK(std::abs(coeff(s, n)) < 1e-12);
  for (int n = 1; n <= r.degree(); ++n) CHECK(std::abs(coeff(r, n)) < 1e-12);
}

TEST_CASE("semicircle moments give R = second-moment line") {
  AlgebraPtr a = make_matrix_algebra(1);
  MomentData m = scalar_moments(a, {0, 1, 0, 2});
  Jet r = r_transform(m).jet;
  std::vector<double> want{0, 1, 0, 0};
  for (int n = 0; n <= 3; ++n) CHECK(coeff(r, n) == Catch::Approx(want[n]).margin(1e-10));
}

TEST_CASE("degenerate single-moment input") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig cfg{a, 2, 5, true};
  RvModel x = random_model(a, RvModel::Flavor::s_model, 1, 1, 31);
  MomentData m1(a, {model_moments(cfg, x, 1).mu(1)});
  Jet s = s_transform(m1).jet;
  REQUIRE(s.degree() == 0);
  Elem ea = m1.expectation();
  CHECK(a->norm(a->sub(s.constant_term(), a->inv(ea))) < 1e-10);
}

TEST_CASE("anchors S_0 and R_0") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig cfg{a, 2, 7, true};
  RvModel x = random_model(a, RvModel::Flavor::s_model, 1, 3, 37);
  MomentData m = model_moments(cfg, x, 4);
  Elem ea = m.expectation();
  Jet s = s_transform(m).jet;
  Jet r = r_transform(m).jet;
  CHECK(a->norm(a->sub(s.constant_term(), a->inv(ea))) < 1e-10);
  CHECK(a->norm(a->sub(r.constant_term(), ea)) < 1e-10);
}

TEST_CASE("c_jet basics") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig cfg{a, 2, 7, true};
  RvModel x = random_model(a, RvModel::Flavor::s_model, 1, 2, 41);
  MomentData m = model_moments(cfg, x, 3);
  Jet c = c_jet(m);
  // C_1 = identity
  MultilinearMap d1 = c.term(1);
  d1 -= MultilinearMap::identity(a);
  CHECK(d1.max_abs() < 1e-13);
  // C_2(b1, b2) = b1 E(a) b2
  std::mt19937_64 rng(43);
  Elem ea = m.expectation();
  for (int t = 0; t < 3; ++t) {
    Elem b1 = elem_random(*a, rng(), 1.0), b2 = elem_random(*a, rng(), 1.0);
    std::vector<Elem> args{b1, b2};
    Elem want = a->mul(b1, a->mul(ea, b2));
    CHECK(a->norm(a->sub(c.term(2).eval(args), want)) < 1e-10);
  }
  // scalar a = 1: C = z/(1-z)
  AlgebraPtr s1 = make_matrix_algebra(1);
  Jet cs = c_jet(scalar_moments(s1, {1, 1, 1, 1}));
  CHECK(coeff(cs, 0) == 0.0);
  for (int n = 1; n <= cs.degree(); ++n) CHECK(coeff(cs, n) == Catch::Approx(1.0));
}

TEST_CASE("scaling covariance of S") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig cfg{a, 2, 7, true};
  RvModel x = random_model(a, RvModel::Flavor::s_model, 1, 3, 47);
  MomentData m = model_moments(cfg, x, 4);
  double lam = 1.7;
  std::vector<MultilinearMap> scaled;
  for (int n = 1; n <= 4; ++n) {
    MultilinearMap t = m.mu(n);
    t *= cd(std::pow(lam, n));
    scaled.push_back(std::move(t));
  }
  MomentData ms(a, std::move(scaled));
  Jet s = s_transform(m).jet;
  Jet ss = s_transform(ms).jet;
  for (int n = 0; n <= s.degree(); ++n) {
    MultilinearMap d = ss.term(n);
    d *= cd(lam);
    d -= s.term(n);
    CHECK(d.max_abs() < 1e-9);
  }
}

TEST_CASE("round trip from S back to the moments") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig cfg{a, 2, 8, true};
  RvModel x = random_model(a, RvModel::Flavor::s_model, 1, 3, 53);
  MomentData m = model_moments(cfg, x, 4);
  Jet s = s_transform(m).jet;
  int N = s.degree();
  // recover H from S = (1+b)H, then psi-inverse = b H, then invert
  Jet h(a, N);
  h.term(0) = s.term(0);
  for (int n = 1; n <= N; ++n) {
    MultilinearMap t = s.term(n);
    MultilinearMap shift = ml_prepend_arg_left(h.term(n - 1));
    t -= shift;
    h.term(n) = std::move(t);
  }
  Jet psi_inv = Jet::zero(a, N + 1);
  for (int n = 0; n <= N; ++n) psi_inv.term(n + 1) = ml_prepend_arg_left(h.term(n));
  Jet psi = jet_comp_inverse(psi_inv);
  Jet psi_direct = psi_jet(m);
  CHECK(jet_equal(psi, psi_direct, 1e-7).pass);
}

TEST_CASE("twisted rhs reduces to the plain product on a commutative algebra") {
  AlgebraPtr a = make_diagonal_algebra(3);
  Jet sx = random_jet(a, 3, 59, true);
  Jet sy = random_jet(a, 3, 61, true);
  Jet tw = twisted_rhs(sx, sy);
  CHECK(jet_equal(tw, jet_mul(sx, sy), 1e-10).pass);
}

TEST_CASE("twisted rhs with a unit left factor") {
  AlgebraPtr a = make_matrix_algebra(2);
  Jet sy = random_jet(a, 3, 67, true);
  Jet tw = twisted_rhs(Jet::unit(a, 3), sy);
  CHECK(jet_equal(tw, sy, 1e-10).pass);
}

TEST_CASE("transform coefficients are local in the moments") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig cfg{a, 2, 7, true};
  RvModel x = random_model(a, RvModel::Flavor::s_model, 1, 3, 71);
  MomentData m = model_moments(cfg, x, 4);
  CHECK(dependence_check(m, TransformKind::s, 2, 5).pass);
  CHECK(dependence_check(m, TransformKind::r, 1, 5).pass);
  // and the first moved coefficient really moves: perturb mu_2, watch R_1
  MomentData pert = m;
  MultilinearMap noise = ml_prepend_arg_left(MultilinearMap::identity(a));
  pert.mu(2) += noise;
  Jet r0 = r_transform(m).jet;
  Jet r1 = r_transform(pert).jet;
  MultilinearMap d0 = r0.term(0);
  d0 -= r1.term(0);
  CHECK(d0.max_abs() < 1e-10);
  MultilinearMap d1 = r0.term(1);
  d1 -= r1.term(1);
  CHECK(d1.max_abs() > 1e-3);
}

TEST_CASE("residual diagnostics are small when extraction succeeds") {
  AlgebraPtr a = make_matrix_algebra(2);
  FockConfig cfg{a, 2, 7, true};
  RvModel x = random_model(a, RvModel::Flavor::r_model, 1, 3, 73);
  MomentData m = model_moments(cfg, x, 4);
  TransformResult r = r_transform(m);
  CHECK(r.diagnostics.residual <= 1e-7);
}

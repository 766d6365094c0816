#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "freeprob/multilinear.hpp"

using namespace freeprob;

namespace {

Elem rnd(const Algebra& A, std::mt19937_64& rng) { return elem_random(A, rng(), 1.0); }

// independent oracle: dense coefficient build of (x, y) -> x * a * y
MultilinearMap sandwich(AlgebraPtr alg, const Elem& a) {
  const Algebra& A = *alg;
  int d = A.dim();
  MultilinearMap m(alg, 2);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Elem v = A.mul(A.basis(i), A.mul(a, A.basis(j)));
      for (int o = 0; o < d; ++o) m.at(o, (std::size_t)i * d + j) = v[o];
    }
  return m;
}

}  // namespace

TEST_CASE("order-0 map is a constant") {
  AlgebraPtr a = make_matrix_algebra(2);
  Elem v = elem_random(*a, 3, 1.0);
  MultilinearMap m = MultilinearMap::constant(a, v);
  REQUIRE(m.order() == 0);
  CHECK(a->norm(a->sub(m.eval({}), v)) == 0.0);
  CHECK(a->norm(a->sub(m.as_element(), v)) == 0.0);
}

TEST_CASE("identity map returns its argument") {
  AlgebraPtr a = make_matrix_algebra(2);
  std::mt19937_64 rng(1);
  Elem x = rnd(*a, rng);
  std::vector<Elem> args{x};
  CHECK(a->norm(a->sub(MultilinearMap::identity(a).eval(args), x)) == 0.0);
}

TEST_CASE("first-moment map b -> b*ea at the unit") {
  AlgebraPtr a = make_matrix_algebra(2);
  Elem ea = elem_random(*a, 9, 1.0);
  // b -> b * ea as append of a constant
  MultilinearMap m = ml_prepend_arg_left(MultilinearMap::constant(a, ea));
  std::vector<Elem> args{a->unit()};
  CHECK(a->norm(a->sub(m.eval(args), ea)) < 1e-14);
}

TEST_CASE("bilinear sandwich map matches the direct matrix product") {
  AlgebraPtr a = make_matrix_algebra(2);
  std::mt19937_64 rng(5);
  Elem mid = rnd(*a, rng);
  MultilinearMap m = sandwich(a, mid);
  for (int t = 0; t < 5; ++t) {
    Elem x = rnd(*a, rng), y = rnd(*a, rng);
    std::vector<Elem> args{x, y};
    Elem direct = a->mul(x, a->mul(mid, y));
    CHECK(a->norm(a->sub(m.eval(args), direct)) < 1e-13);
  }
}

TEST_CASE("evaluation is multilinear") {
  AlgebraPtr a = make_diagonal_algebra(3);
  std::mt19937_64 rng(11);
  MultilinearMap m(a, 2);
  for (cd& c : m.coeffs()) c = cd(std::uniform_real_distribution<double>(-1, 1)(rng));
  Elem x = rnd(*a, rng), y = rnd(*a, rng), z = rnd(*a, rng);
  cd lam(0.7, -0.3);
  Elem xy = a->add(x, a->scale(lam, y));
  std::vector<Elem> l{xy, z}, l1{x, z}, l2{y, z};
  Elem lhs = m.eval(l);
  Elem rhs = a->add(m.eval(l1), a->scale(lam, m.eval(l2)));
  CHECK(a->norm(a->sub(lhs, rhs)) < 1e-13);
}

TEST_CASE("symmetrization preserves the diagonal and is idempotent") {
  AlgebraPtr a = make_matrix_algebra(2);
  std::mt19937_64 rng(17);
  MultilinearMap m(a, 3);
  for (cd& c : m.coeffs())
    c = cd(std::uniform_real_distribution<double>(-1, 1)(rng),
           std::uniform_real_distribution<double>(-1, 1)(rng));
  MultilinearMap s = m.symmetrized();
  for (int t = 0; t < 5; ++t) {
    Elem b = rnd(*a, rng);
    CHECK(a->norm(a->sub(s.eval_diag(b), m.eval_diag(b))) < 1e-12);
  }
  MultilinearMap ss = s.symmetrized();
  ss -= s;
  CHECK(ss.max_abs() < 1e-14);
}

TEST_CASE("symmetrization of a bilinear map is the swap average") {
  AlgebraPtr a = make_matrix_algebra(2);
  std::mt19937_64 rng(23);
  MultilinearMap m(a, 2);
  for (cd& c : m.coeffs()) c = cd(std::uniform_real_distribution<double>(-1, 1)(rng));
  MultilinearMap s = m.symmetrized();
  Elem x = rnd(*a, rng), y = rnd(*a, rng);
  std::vector<Elem> xy{x, y}, yx{y, x};
  Elem avg = a->scale(cd(0.5), a->add(m.eval(xy), m.eval(yx)));
  CHECK(a->norm(a->sub(s.eval(xy), avg)) < 1e-13);
}

TEST_CASE("ml_product evaluates block-wise") {
  AlgebraPtr a = make_matrix_algebra(2);
  std::mt19937_64 rng(29);
  MultilinearMap f = sandwich(a, rnd(*a, rng));
  MultilinearMap g = MultilinearMap::identity(a);
  MultilinearMap fg = ml_product(f, g);
  REQUIRE(fg.order() == 3);
  Elem x = rnd(*a, rng), y = rnd(*a, rng), z = rnd(*a, rng);
  std::vector<Elem> xyz{x, y, z}, xy{x, y}, zz{z};
  Elem direct = a->mul(f.eval(xy), g.eval(zz));
  CHECK(a->norm(a->sub(fg.eval(xyz), direct)) < 1e-12);
}

TEST_CASE("argument append and prepend") {
  AlgebraPtr a = make_matrix_algebra(2);
  std::mt19937_64 rng(31);
  MultilinearMap f = sandwich(a, rnd(*a, rng));
  MultilinearMap fr = ml_append_arg_right(f);
  MultilinearMap fl = ml_prepend_arg_left(f);
  Elem x = rnd(*a, rng), y = rnd(*a, rng), z = rnd(*a, rng);
  std::vector<Elem> xy{x, y}, xyz{x, y, z}, zxy{z, x, y};
  CHECK(a->norm(a->sub(fr.eval(xyz), a->mul(f.eval(xy), z))) < 1e-12);
  CHECK(a->norm(a->sub(fl.eval(zxy), a->mul(z, f.eval(xy)))) < 1e-12);
}

TEST_CASE("bind_first fixes the leading slot") {
  AlgebraPtr a = make_matrix_algebra(2);
  std::mt19937_64 rng(37);
  MultilinearMap f = sandwich(a, rnd(*a, rng));
  Elem x = rnd(*a, rng), y = rnd(*a, rng);
  MultilinearMap g = f.bind_first(x);
  REQUIRE(g.order() == 1);
  std::vector<Elem> xy{x, y}, yy{y};
  CHECK(a->norm(a->sub(g.eval(yy), f.eval(xy))) < 1e-13);
}

TEST_CASE("left_scaled multiplies the output from the left") {
  AlgebraPtr a = make_matrix_algebra(2);
  std::mt19937_64 rng(41);
  MultilinearMap f = sandwich(a, rnd(*a, rng));
  Elem c = rnd(*a, rng), x = rnd(*a, rng), y = rnd(*a, rng);
  std::vector<Elem> xy{x, y};
  Elem lhs = f.left_scaled(c).eval(xy);
  CHECK(a->norm(a->sub(lhs, a->mul(c, f.eval(xy)))) < 1e-12);
}

TEST_CASE("ml_substitute composes with contiguous blocks") {
  AlgebraPtr a = make_matrix_algebra(2);
  std::mt19937_64 rng(43);
  MultilinearMap f = sandwich(a, rnd(*a, rng));      // order 2
  MultilinearMap h1 = sandwich(a, rnd(*a, rng));     // order 2
  MultilinearMap h2 = MultilinearMap::identity(a);   // order 1
  std::vector<const MultilinearMap*> inner{&h1, &h2};
  MultilinearMap g = ml_substitute(f, inner);
  REQUIRE(g.order() == 3);
  Elem x = rnd(*a, rng), y = rnd(*a, rng), z = rnd(*a, rng);
  std::vector<Elem> xyz{x, y, z}, xy{x, y}, zz{z};
  std::vector<Elem> outer{h1.eval(xy), h2.eval(zz)};
  CHECK(a->norm(a->sub(g.eval(xyz), f.eval(outer))) < 1e-12);
}

TEST_CASE("symmetrization order cap") {
  AlgebraPtr a = make_matrix_algebra(1);
  MultilinearMap m(a, 9);
  CHECK_THROWS_AS(m.symmetrized(), ResourceLimit);
}

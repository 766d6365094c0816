#pragma once

#include <random>
#include <vector>

#include "freeprob/jet.hpp"

namespace freeprob {

//! Moment functions mu_n(b_1..b_n) = E(b_1 a b_2 a ... b_n a), n = 1..order.
class MomentData {
 public:
  MomentData(AlgebraPtr alg, std::vector<MultilinearMap> mu)
      : alg_(std::move(alg)), mu_(std::move(mu)) {
    for (int n = 0; n < (int)mu_.size(); ++n)
      if (mu_[n].order() != n + 1)
        throw ContractError("moment function n must have order n");
  }

  const AlgebraPtr& algebra() const { return alg_; }
  int order() const { return (int)mu_.size(); }
  const MultilinearMap& mu(int n) const { return mu_[n - 1]; }  // 1-based
  MultilinearMap& mu(int n) { return mu_[n - 1]; }

  Elem expectation() const { return mu(1).eval_diag(alg_->unit()); }

  //! Residual of the outer bimodularity property
  //! mu_n(c b_1, b_2..) = c mu_n(b_1, b_2..), checked on basis elements.
  double bimodularity_residual() const {
    const Algebra& A = *alg_;
    int d = A.dim();
    double res = 0.0;
    for (int n = 1; n <= order(); ++n) {
      const MultilinearMap& m = mu(n);
      std::size_t rest = ipow(d, n - 1);
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) {
          // lhs: mu_n(e_p e_q, ...) ; rhs: e_p * mu_n(e_q, ...)
          for (std::size_t a = 0; a < rest; ++a)
            for (int o = 0; o < d; ++o) {
              cd lhs = 0.0, rhs = 0.0;
              for (int r = 0; r < d; ++r)
                lhs += A.structure(p, q, r) * m.at(o, (std::size_t)r * rest + a);
              for (int z = 0; z < d; ++z)
                rhs += A.structure(p, z, o) * m.at(z, (std::size_t)q * rest + a);
              res = std::max(res, std::abs(lhs - rhs));
            }
        }
    }
    return res;
  }

 private:
  AlgebraPtr alg_;
  std::vector<MultilinearMap> mu_;  // mu_[n-1] has order n
};

//! Psi_a(b) = E((1-ba)^{-1}) - 1: jet with Psi_0 = 0, Psi_n = mu_n (ordered).
inline Jet psi_jet(const MomentData& m) {
  std::vector<MultilinearMap> terms;
  terms.emplace_back(m.algebra(), 0);
  for (int n = 1; n <= m.order(); ++n) terms.push_back(m.mu(n));
  return Jet(m.algebra(), std::move(terms));
}

//! Phi_a(b) = E(a(1-ba)^{-1}): Phi_0 = E(a), Phi_n = mu_{n+1}(u, .. ).
inline Jet phi_jet(const MomentData& m) {
  if (m.order() < 1) throw ContractError("phi_jet needs order >= 1");
  std::vector<MultilinearMap> terms;
  terms.push_back(MultilinearMap::constant(m.algebra(), m.expectation()));
  for (int n = 1; n <= m.order() - 1; ++n)
    terms.push_back(m.mu(n + 1).bind_first(m.algebra()->unit()));
  return Jet(m.algebra(), std::move(terms));
}

//! C_a(b) = E((1-ba)^{-1} b): C_0 = 0, C_1 = id, C_n = mu_{n-1}( .. ) * b_n.
//! degree defaults to m.order(); degree m.order()+1 is allowed (it only needs
//! mu up to degree-1).
inline Jet c_jet(const MomentData& m, int degree = -1) {
  if (degree < 0) degree = m.order();
  if (degree > m.order() + 1) throw ContractError("c_jet degree exceeds available moments");
  std::vector<MultilinearMap> terms;
  terms.emplace_back(m.algebra(), 0);
  if (degree >= 1) terms.push_back(MultilinearMap::identity(m.algebra()));
  for (int n = 2; n <= degree; ++n) terms.push_back(ml_append_arg_right(m.mu(n - 1)));
  return Jet(m.algebra(), std::move(terms));
}

struct TransformDiagnostics {
  double inversion = 0.0;  // compose-back residual of the compositional inverse
  double strip = 0.0;      // worst argument-factorization residual
  double residual = 0.0;   // defining-equation residual at sampled points
};

struct TransformResult {
  Jet jet;                 // canonical symmetrized transform
  TransformDiagnostics diagnostics;
};

namespace detail {

inline double compose_back_residual(const Jet& F, const Jet& Finv) {
  Jet back = jet_compose(F, Finv);
  Jet id = Jet::identity(F.algebra(), back.degree());
  return jet_equal(back, id, std::numeric_limits<double>::infinity()).max_dev;
}

}  // namespace detail

//! S_a(b) = (1+b) H_a(b) where Psi_a^{<-1>}(b) = b H_a(b).
//! Moments to order N give S to degree N-1.
inline TransformResult s_transform(const MomentData& m) {
  const AlgebraPtr& alg = m.algebra();
  Elem ea = m.expectation();
  alg->inv(ea);  // throws NotInvertible if E(a) fails the gate
  TransformDiagnostics diag;
  if (m.order() == 1) {
    // forced by S_a(0) = E(a)^{-1}
    return TransformResult{Jet::constant(alg, alg->inv(ea), 0), diag};
  }
  Jet psi = psi_jet(m);
  Jet psi_inv = jet_comp_inverse(psi);
  diag.inversion = detail::compose_back_residual(psi, psi_inv);
  Jet H = jet_strip(psi_inv, StripSide::left, &diag.strip);
  // S_n = H_n + (b_1 * H_{n-1})(b_2..b_n)
  Jet S(alg, H.degree());
  S.term(0) = H.term(0);
  for (int n = 1; n <= H.degree(); ++n) {
    S.term(n) = H.term(n);
    S.term(n) += ml_prepend_arg_left(H.term(n - 1));
  }
  // spot check Psi(Psi^{<-1>}(b)) = b at small random points
  std::mt19937_64 rng(0x5eed5u);
  for (int t = 0; t < 5; ++t) {
    Elem b = elem_random(*alg, rng(), 1e-3);
    Elem w = psi.diag_eval(psi_inv.diag_eval(b));
    diag.residual = std::max(diag.residual, alg->norm(alg->sub(w, b)));
  }
  return TransformResult{S.symmetrized(), diag};
}

//! R_a with C_a^{<-1>}(b) = (1+bR_a(b))^{-1} b, extracted degree-by-degree
//! from K R b = b - K where K = C_a^{<-1>}. Moments to order M give R to
//! degree M-1.
inline TransformResult r_transform(const MomentData& m) {
  const AlgebraPtr& alg = m.algebra();
  if (m.order() < 1) throw ContractError("r_transform needs order >= 1");
  int M = m.order();
  TransformDiagnostics diag;
  Jet C = c_jet(m, M + 1);
  Jet K = jet_comp_inverse(C);
  diag.inversion = detail::compose_back_residual(C, K);
  // K R b = b - K, ordered: sum_{p>=1,q>=0,p+q+1=n} K_p(..) R_q(..) b_n = T_n.
  // K_1 = id, so the p=1 term carries the unknown R_{n-2}.
  Jet R(alg, M - 1);
  for (int q = 0; q <= M - 1; ++q) {
    int n = q + 2;
    MultilinearMap W(alg, n);
    W -= K.term(n);  // T_n = (b - K)_n = -K_n for n >= 2
    for (int p = 2; p <= n - 1; ++p)
      W -= ml_append_arg_right(ml_product(K.term(p), R.term(n - 1 - p)));
    double r1 = 0.0, r2 = 0.0;
    // strip the literal trailing b, then the leading b_1 from K_1(b_1) R_q(..)
    std::vector<MultilinearMap> wterms;
    for (int i = 0; i < n; ++i) wterms.emplace_back(alg, i);
    wterms.push_back(W);
    Jet wjet(alg, std::move(wterms));
    Jet s1 = jet_strip(wjet, StripSide::right, &r1);
    R.term(q) = s1.term(n - 1).bind_first(alg->unit());
    MultilinearMap rec = ml_prepend_arg_left(R.term(q));
    rec -= s1.term(n - 1);
    r2 = rec.max_abs() / std::max(1.0, s1.term(n - 1).max_abs());
    if (r2 > 1e-8)
      throw FactorizationFailed(r2, "R extraction: leading argument does not factor");
    diag.strip = std::max(diag.strip, std::max(r1, r2));
  }
  // residual of Phi((1+bR(b))^{-1}b)(1+bR(b))^{-1} = R(b) at small points
  Jet phi = phi_jet(m);
  const Algebra& A = *alg;
  std::mt19937_64 rng(0xf1eef1eeu);
  for (int t = 0; t < 10; ++t) {
    Elem b = elem_random(A, rng(), 2e-3);
    Elem rb = R.diag_eval(b);
    Elem one_plus_brb = A.add(A.unit(), A.mul(b, rb));
    Elem inv1 = A.inv(one_plus_brb);
    Elem g = A.mul(inv1, b);
    Elem lhs = A.mul(phi.diag_eval(g), inv1);
    diag.residual = std::max(diag.residual, A.norm(A.sub(lhs, rb)));
  }
  return TransformResult{R.symmetrized(), diag};
}

//! Right-hand side of twisted multiplicativity:
//! S_y(b) S_x(S_y(b)^{-1} b S_y(b)).
inline Jet twisted_rhs(const Jet& Sx, const Jet& Sy) {
  require_same_algebra(Sx, Sy);
  if (Sx.degree() != Sy.degree())
    throw ContractError("twisted_rhs requires equal degrees");
  int N = Sx.degree();
  Jet id = Jet::identity(Sx.algebra(), N);
  Jet g = jet_mul(jet_mul(jet_reciprocal(Sy), id), Sy);
  return jet_mul(Sy, jet_compose(Sx, g));
}

enum class TransformKind { s, r };

struct DependenceReport {
  double max_dev = 0.0;
  bool pass = false;
};

//! Locality of the transform coefficients: degree q depends on mu_1..mu_{q+1}
//! only. Perturbing mu_{n+1} must leave S terms 0..n-1 unchanged, and
//! perturbing mu_{n+2} must leave R terms 0..n unchanged. The perturbation is
//! drawn left-bimodular, mu(b_1,...) -> mu(b_1,...) + b_1*nu(b_2,...), since
//! moment functions of an actual variable pull the first argument out of the
//! conditional expectation and the strip steps depend on that.
inline DependenceReport dependence_check(const MomentData& m, TransformKind kind, int n,
                                         std::uint64_t seed = 1234) {
  int perturb = (kind == TransformKind::s) ? n + 1 : n + 2;
  int top = (kind == TransformKind::s) ? n - 1 : n;
  if (perturb > m.order())
    throw ContractError("dependence_check: not enough moment functions to perturb");
  MomentData pert = m;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  {
    MultilinearMap& t = pert.mu(perturb);
    MultilinearMap inner(m.algebra(), t.order() - 1);
    for (cd& v : inner.coeffs()) v = cd(u(rng), u(rng));
    MultilinearMap noise = ml_prepend_arg_left(inner);
    double s = noise.max_abs();
    noise *= cd(1.0 / s);
    t += noise;
  }
  Jet base = (kind == TransformKind::s) ? s_transform(m).jet : r_transform(m).jet;
  Jet moved = (kind == TransformKind::s) ? s_transform(pert).jet : r_transform(pert).jet;
  DependenceReport rep;
  for (int k = 0; k <= top; ++k) {
    MultilinearMap diff = base.term(k);
    diff -= moved.term(k);
    rep.max_dev = std::max(rep.max_dev, diff.max_abs());
  }
  rep.pass = rep.max_dev < 1e-10;
  return rep;
}

}  // namespace freeprob

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "freeprob/multilinear.hpp"

namespace freeprob {

//! Truncated B-valued analytic germ at 0: terms F_0..F_N, term n of order n.
//! Binary operations use ordered contiguous-block argument conventions whose
//! diagonals coincide with the symmetric power-series formulas; equality of
//! germs is always decided after symmetrization.
class Jet {
 public:
  Jet(AlgebraPtr alg, int degree) : alg_(std::move(alg)) {
    terms_.reserve(degree + 1);
    for (int n = 0; n <= degree; ++n) terms_.emplace_back(alg_, n);
  }

  Jet(AlgebraPtr alg, std::vector<MultilinearMap> terms)
      : alg_(std::move(alg)), terms_(std::move(terms)) {
    for (int n = 0; n < (int)terms_.size(); ++n)
      if (terms_[n].order() != n) throw ContractError("jet term n must have order n");
  }

  static Jet zero(AlgebraPtr alg, int degree) { return Jet(std::move(alg), degree); }

  //! Constant jet u (the multiplicative unit germ).
  static Jet unit(AlgebraPtr alg, int degree) {
    Jet j(alg, degree);
    j.terms_[0] = MultilinearMap::constant(alg, alg->unit());
    return j;
  }

  //! b -> b.
  static Jet identity(AlgebraPtr alg, int degree) {
    Jet j(alg, degree);
    if (degree >= 1) j.terms_[1] = MultilinearMap::identity(alg);
    return j;
  }

  static Jet constant(AlgebraPtr alg, const Elem& value, int degree) {
    Jet j(alg, degree);
    j.terms_[0] = MultilinearMap::constant(alg, value);
    return j;
  }

  const AlgebraPtr& algebra() const { return alg_; }
  int degree() const { return (int)terms_.size() - 1; }
  const MultilinearMap& term(int n) const { return terms_[n]; }
  MultilinearMap& term(int n) { return terms_[n]; }

  Elem constant_term() const { return terms_[0].as_element(); }

  Jet truncated(int degree) const {
    if (degree >= this->degree()) return *this;
    return Jet(alg_, std::vector<MultilinearMap>(terms_.begin(), terms_.begin() + degree + 1));
  }

  Jet symmetrized() const {
    std::vector<MultilinearMap> t;
    t.reserve(terms_.size());
    for (const auto& m : terms_) t.push_back(m.symmetrized());
    return Jet(alg_, std::move(t));
  }

  Elem diag_eval(const Elem& b) const {
    Elem acc = terms_[0].as_element();
    for (int n = 1; n <= degree(); ++n) {
      Elem t = terms_[n].eval_diag(b);
      for (int i = 0; i < alg_->dim(); ++i) acc[i] += t[i];
    }
    return acc;
  }

  Jet& operator+=(const Jet& other) {
    for (int n = 0; n <= std::min(degree(), other.degree()); ++n)
      terms_[n] += other.terms_[n];
    return *this;
  }

 private:
  AlgebraPtr alg_;
  std::vector<MultilinearMap> terms_;
};

inline void require_same_algebra(const Jet& F, const Jet& G) {
  if (F.algebra().get() != G.algebra().get())
    throw ContractError("jets belong to different algebras");
}

//! (FG)_n(b_1..b_n) = sum_k F_k(b_1..b_k) G_{n-k}(b_{k+1}..b_n).
inline Jet jet_mul(const Jet& F, const Jet& G) {
  require_same_algebra(F, G);
  int N = std::min(F.degree(), G.degree());
  Jet out(F.algebra(), N);
  for (int n = 0; n <= N; ++n)
    for (int k = 0; k <= n; ++k)
      out.term(n) += ml_product(F.term(k), G.term(n - k));
  return out;
}

inline Jet jet_add(const Jet& F, const Jet& G) {
  require_same_algebra(F, G);
  int N = std::min(F.degree(), G.degree());
  Jet out = F.truncated(N);
  out += G;
  return out;
}

namespace detail {

//! Enumerate compositions (p_1..p_k) of n with 1 <= p_i <= pmax.
inline void compositions(int n, int k, int pmax, std::vector<int>& parts,
                         const std::function<void(const std::vector<int>&)>& fn) {
  if (k == 0) {
    if (n == 0) fn(parts);
    return;
  }
  int lo = std::max(1, n - pmax * (k - 1));
  int hi = std::min(pmax, n - (k - 1));
  for (int p = lo; p <= hi; ++p) {
    parts.push_back(p);
    compositions(n - p, k - 1, pmax, parts, fn);
    parts.pop_back();
  }
}

}  // namespace detail

//! (F o H)_n = sum_{k>=1} sum_{p_1+..+p_k=n} F_k(H_{p_1}(block), ..., H_{p_k}(block)).
//! Requires H_0 = 0.
inline Jet jet_compose(const Jet& F, const Jet& H) {
  require_same_algebra(F, H);
  if (H.algebra()->norm(H.constant_term()) > 1e-12)
    throw ContractError("jet_compose requires the inner jet to vanish at 0");
  int N = std::min(F.degree(), H.degree());
  Jet out(F.algebra(), N);
  out.term(0) = F.term(0);
  for (int n = 1; n <= N; ++n) {
    for (int k = 1; k <= std::min(n, F.degree()); ++k) {
      std::vector<int> parts;
      detail::compositions(n, k, H.degree(), parts, [&](const std::vector<int>& p) {
        std::vector<const MultilinearMap*> inner(k);
        for (int t = 0; t < k; ++t) inner[t] = &H.term(p[t]);
        out.term(n) += ml_substitute(F.term(k), inner);
      });
    }
  }
  return out;
}

//! Pointwise inverse: G with F(b) G(b) = u, via the triangular recursion
//! G_0 = F_0^{-1}, G_n = -F_0^{-1} sum_{k=1..n} F_k (x) G_{n-k}.
inline Jet jet_reciprocal(const Jet& F) {
  const Algebra& A = *F.algebra();
  Elem f0inv = A.inv(F.constant_term());
  Elem neg_f0inv = A.scale(-1.0, f0inv);
  Jet G(F.algebra(), F.degree());
  G.term(0) = MultilinearMap::constant(F.algebra(), f0inv);
  for (int n = 1; n <= F.degree(); ++n) {
    MultilinearMap acc(F.algebra(), n);
    for (int k = 1; k <= n; ++k) acc += ml_product(F.term(k), G.term(n - k));
    G.term(n) = acc.left_scaled(neg_f0inv);
  }
  return G;
}

//! Matrix of the degree-1 term viewed as a linear map on coordinates.
inline Eigen::MatrixXcd jet_linear_matrix(const Jet& F) {
  int d = F.algebra()->dim();
  Eigen::MatrixXcd M(d, d);
  for (int o = 0; o < d; ++o)
    for (int i = 0; i < d; ++i) M(o, i) = F.term(1).at(o, i);
  return M;
}

//! Compositional inverse of F with F_0 = 0 and invertible F_1.
inline Jet jet_comp_inverse(const Jet& F) {
  const Algebra& A = *F.algebra();
  if (F.degree() < 1) throw ContractError("jet_comp_inverse needs degree >= 1");
  if (A.norm(F.constant_term()) > 1e-12)
    throw ContractError("jet_comp_inverse requires F(0) = 0");
  Eigen::MatrixXcd M = jet_linear_matrix(F);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(A.dim() - 1);
  if (!(smin > 1e-8 * smax))
    throw NotInvertible(smin > 0 ? smax / smin : std::numeric_limits<double>::infinity(),
                        "degree-1 term of jet is not an invertible linear map");
  Eigen::MatrixXcd Minv = M.partialPivLu().inverse();
  Jet H(F.algebra(), F.degree());
  H.term(1) = MultilinearMap(F.algebra(), 1,
                             [&] {
                               int d = A.dim();
                               std::vector<cd> c(d * d);
                               for (int o = 0; o < d; ++o)
                                 for (int i = 0; i < d; ++i) c[o * d + i] = Minv(o, i);
                               return c;
                             }());
  for (int n = 2; n <= F.degree(); ++n) {
    MultilinearMap acc(F.algebra(), n);
    for (int k = 2; k <= std::min(n, F.degree()); ++k) {
      std::vector<int> parts;
      detail::compositions(n, k, n - 1, parts, [&](const std::vector<int>& p) {
        std::vector<const MultilinearMap*> inner(k);
        for (int t = 0; t < k; ++t) inner[t] = &H.term(p[t]);
        acc += ml_substitute(F.term(k), inner);
      });
    }
    acc *= cd(-1.0);
    H.term(n) = ml_output_linmap(Minv, acc);
  }
  return H;
}

enum class StripSide { left, right };

//! Factor G(b) = b H(b) (left) or G(b) = H(b) b (right), where G_0 = 0 and
//! every term factors through its first (resp. last) argument. Returns H of
//! degree N-1 and reports the worst factorization residual.
inline Jet jet_strip(const Jet& G, StripSide side, double* residual_out = nullptr,
                     double tol = 1e-8) {
  const Algebra& A = *G.algebra();
  if (A.norm(G.constant_term()) > 1e-12)
    throw ContractError("jet_strip requires G(0) = 0");
  if (G.degree() < 1) throw ContractError("jet_strip needs degree >= 1");
  int d = A.dim();
  Jet H(G.algebra(), G.degree() - 1);
  double residual = 0.0;
  for (int n = 1; n <= G.degree(); ++n) {
    const MultilinearMap& Gn = G.term(n);
    std::size_t rest = ipow(d, n - 1);
    MultilinearMap Hn(G.algebra(), n - 1);
    if (side == StripSide::left) {
      // H_{n-1}(b_2..b_n) = G_n(u, b_2..b_n)
      Hn = Gn.bind_first(A.unit());
      // residual: G_n[o][i, rest] vs (e_i * H)[o][rest]
      MultilinearMap rec = ml_prepend_arg_left(Hn);
      MultilinearMap diff = Gn;
      diff -= rec;
      residual = std::max(residual, diff.max_abs() / std::max(1.0, Gn.max_abs()));
    } else {
      // H_{n-1}(b_1..b_{n-1}) = G_n(b_1..b_{n-1}, u)
      for (int o = 0; o < d; ++o)
        for (std::size_t a = 0; a < rest; ++a) {
          cd acc = 0.0;
          for (int j = 0; j < d; ++j) acc += Gn.at(o, a * d + j) * A.unit()[j];
          Hn.at(o, a) = acc;
        }
      MultilinearMap rec = ml_append_arg_right(Hn);
      MultilinearMap diff = Gn;
      diff -= rec;
      residual = std::max(residual, diff.max_abs() / std::max(1.0, Gn.max_abs()));
    }
    H.term(n - 1) = std::move(Hn);
  }
  if (residual_out) *residual_out = residual;
  if (residual > tol)
    throw FactorizationFailed(residual, "jet does not factor through the stripped argument");
  return H;
}

struct JetComparison {
  std::vector<double> per_degree;  // max (relatively scaled) deviation per degree
  double max_dev = 0.0;
  bool pass = false;
};

//! Germ equality: compare symmetrized terms degree by degree, scaling
//! relatively by the larger term magnitude when that magnitude exceeds 1.
inline JetComparison jet_equal(const Jet& F, const Jet& G, double tol) {
  require_same_algebra(F, G);
  if (F.degree() != G.degree()) throw ContractError("jet_equal requires equal degrees");
  JetComparison r;
  for (int n = 0; n <= F.degree(); ++n) {
    MultilinearMap fs = F.term(n).symmetrized();
    MultilinearMap gs = G.term(n).symmetrized();
    double scale = std::max(1.0, std::max(fs.max_abs(), gs.max_abs()));
    fs -= gs;
    r.per_degree.push_back(fs.max_abs() / scale);
    r.max_dev = std::max(r.max_dev, r.per_degree.back());
  }
  r.pass = r.max_dev <= tol;
  return r;
}

}  // namespace freeprob

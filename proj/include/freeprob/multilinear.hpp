#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "freeprob/algebra.hpp"
#include "freeprob/errors.hpp"

namespace freeprob {

inline std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

//! Dense B-valued n-linear map. Coefficient layout is row-major with the
//! output index slowest: entry [o][i_1..i_n] is the e_o coordinate of
//! map(e_{i_1}, ..., e_{i_n}). Order 0 is a plain element of B.
class MultilinearMap {
 public:
  MultilinearMap(AlgebraPtr alg, int order)
      : alg_(std::move(alg)),
        order_(order),
        coeffs_(ipow(alg_->dim(), order + 1), cd(0.0)) {}

  MultilinearMap(AlgebraPtr alg, int order, std::vector<cd> coeffs)
      : alg_(std::move(alg)), order_(order), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != ipow(alg_->dim(), order_ + 1))
      throw ContractError("multilinear coefficient tensor has wrong size");
  }

  static MultilinearMap constant(AlgebraPtr alg, const Elem& value) {
    MultilinearMap m(alg, 0);
    m.coeffs_.assign(value.begin(), value.end());
    return m;
  }

  //! The identity linear map b -> b.
  static MultilinearMap identity(AlgebraPtr alg) {
    int d = alg->dim();
    MultilinearMap m(std::move(alg), 1);
    for (int i = 0; i < d; ++i) m.coeffs_[i * d + i] = 1.0;
    return m;
  }

  const AlgebraPtr& algebra() const { return alg_; }
  int order() const { return order_; }
  int dim() const { return alg_->dim(); }
  std::size_t arg_size() const { return ipow(dim(), order_); }
  const std::vector<cd>& coeffs() const { return coeffs_; }
  std::vector<cd>& coeffs() { return coeffs_; }

  cd& at(int o, std::size_t args_flat) { return coeffs_[o * arg_size() + args_flat]; }
  cd at(int o, std::size_t args_flat) const { return coeffs_[o * arg_size() + args_flat]; }

  Elem as_element() const {
    if (order_ != 0) throw ContractError("as_element requires order 0");
    return Elem(coeffs_.begin(), coeffs_.end());
  }

  Elem eval(std::span<const Elem> args) const {
    if ((int)args.size() != order_)
      throw ContractError("ml_eval arity mismatch");
    int d = dim();
    for (const Elem& a : args)
      if ((int)a.size() != d) throw ContractError("ml_eval argument has wrong dimension");
    // contract the fastest-varying argument slot repeatedly
    std::vector<cd> cur = coeffs_;
    for (int slot = order_ - 1; slot >= 0; --slot) {
      std::size_t rows = cur.size() / d;
      std::vector<cd> next(rows, cd(0.0));
      for (std::size_t r = 0; r < rows; ++r) {
        const cd* base = &cur[r * d];
        cd acc = 0.0;
        for (int j = 0; j < d; ++j) acc += base[j] * args[slot][j];
        next[r] = acc;
      }
      cur.swap(next);
    }
    return Elem(cur.begin(), cur.end());
  }

  Elem eval_diag(const Elem& b) const {
    std::vector<Elem> args(order_, b);
    return eval(args);
  }

  //! Average over all permutations of the argument slots.
  MultilinearMap symmetrized() const {
    if (order_ <= 1) return *this;
    if (order_ > 8) throw ResourceLimit("ml_symmetrize limited to order <= 8");
    int d = dim();
    std::size_t asz = arg_size();
    MultilinearMap out(alg_, order_);
    std::vector<int> perm(order_);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> stride(order_);
    for (int s = 0; s < order_; ++s) stride[s] = ipow(d, order_ - 1 - s);
    std::vector<int> idx(order_);
    double count = 0;
    do {
      ++count;
      for (int o = 0; o < d; ++o) {
        for (std::size_t a = 0; a < asz; ++a) {
          // decode a into slot indices, permute, re-encode
          std::size_t rem = a;
          for (int s = 0; s < order_; ++s) {
            idx[s] = (int)(rem / stride[s]);
            rem %= stride[s];
          }
          std::size_t pa = 0;
          for (int s = 0; s < order_; ++s) pa += (std::size_t)idx[perm[s]] * stride[s];
          out.at(o, a) += at(o, pa);
        }
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (cd& v : out.coeffs_) v /= count;
    return out;
  }

  MultilinearMap& operator+=(const MultilinearMap& other) {
    if (other.order_ != order_) throw ContractError("order mismatch in +=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
  }

  MultilinearMap& operator-=(const MultilinearMap& other) {
    if (other.order_ != order_) throw ContractError("order mismatch in -=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
  }

  MultilinearMap& operator*=(cd s) {
    for (cd& v : coeffs_) v *= s;
    return *this;
  }

  double max_abs() const {
    double m = 0;
    for (const cd& v : coeffs_) m = std::max(m, std::abs(v));
    return m;
  }

  //! Left-multiply the output by a fixed algebra element: x * map(...).
  MultilinearMap left_scaled(const Elem& x) const {
    const Algebra& A = *alg_;
    int d = dim();
    std::size_t asz = arg_size();
    MultilinearMap out(alg_, order_);
    for (int p = 0; p < d; ++p) {
      if (x[p] == cd(0.0)) continue;
      for (int q = 0; q < d; ++q)
        for (int o = 0; o < d; ++o) {
          cd w = x[p] * A.structure(p, q, o);
          if (w == cd(0.0)) continue;
          for (std::size_t a = 0; a < asz; ++a) out.at(o, a) += w * at(q, a);
        }
    }
    return out;
  }

  //! Fix the first argument slot to a given element, dropping one order.
  MultilinearMap bind_first(const Elem& x) const {
    if (order_ < 1) throw ContractError("bind_first requires order >= 1");
    int d = dim();
    std::size_t rest = ipow(d, order_ - 1);
    MultilinearMap out(alg_, order_ - 1);
    for (int o = 0; o < d; ++o)
      for (int j = 0; j < d; ++j) {
        if (x[j] == cd(0.0)) continue;
        const cd* src = &coeffs_[o * arg_size() + (std::size_t)j * rest];
        cd* dst = &out.coeffs_[o * rest];
        for (std::size_t a = 0; a < rest; ++a) dst[a] += x[j] * src[a];
      }
    return out;
  }

 private:
  AlgebraPtr alg_;
  int order_;
  std::vector<cd> coeffs_;
};

//! (F ⊗_B G)(b_1..b_{k+m}) = F(b_1..b_k) * G(b_{k+1}..b_{k+m}),
//! the algebra product applied to the two outputs.
inline MultilinearMap ml_product(const MultilinearMap& F, const MultilinearMap& G) {
  const Algebra& A = *F.algebra();
  int d = A.dim();
  std::size_t fa = F.arg_size(), ga = G.arg_size();
  MultilinearMap out(F.algebra(), F.order() + G.order());
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      for (int o = 0; o < d; ++o) {
        cd c = A.structure(p, q, o);
        if (c == cd(0.0)) continue;
        for (std::size_t af = 0; af < fa; ++af) {
          cd fp = F.at(p, af);
          if (fp == cd(0.0)) continue;
          cd w = c * fp;
          cd* dst = &out.coeffs()[(o * fa + af) * ga];
          const cd* src = &G.coeffs()[q * ga];
          for (std::size_t ag = 0; ag < ga; ++ag) dst[ag] += w * src[ag];
        }
      }
  return out;
}

//! Append a literal argument slot on the right: (b_1..b_n, b) -> F(b_1..b_n) * b.
inline MultilinearMap ml_append_arg_right(const MultilinearMap& F) {
  const Algebra& A = *F.algebra();
  int d = A.dim();
  std::size_t fa = F.arg_size();
  MultilinearMap out(F.algebra(), F.order() + 1);
  for (int q = 0; q < d; ++q)
    for (int j = 0; j < d; ++j)
      for (int o = 0; o < d; ++o) {
        cd c = A.structure(q, j, o);
        if (c == cd(0.0)) continue;
        for (std::size_t af = 0; af < fa; ++af)
          out.at(o, af * d + j) += c * F.at(q, af);
      }
  return out;
}

//! Prepend a literal argument slot on the left: (b, b_1..b_n) -> b * F(b_1..b_n).
inline MultilinearMap ml_prepend_arg_left(const MultilinearMap& F) {
  const Algebra& A = *F.algebra();
  int d = A.dim();
  std::size_t fa = F.arg_size();
  MultilinearMap out(F.algebra(), F.order() + 1);
  for (int j = 0; j < d; ++j)
    for (int q = 0; q < d; ++q)
      for (int o = 0; o < d; ++o) {
        cd c = A.structure(j, q, o);
        if (c == cd(0.0)) continue;
        for (std::size_t af = 0; af < fa; ++af)
          out.at(o, (std::size_t)j * fa + af) += c * F.at(q, af);
      }
  return out;
}

//! Substitute inner maps into every argument slot of F (contiguous blocks, in
//! order): result(args of inner_1, ..., args of inner_k) =
//! F(inner_1(block_1), ..., inner_k(block_k)).
inline MultilinearMap ml_substitute(const MultilinearMap& F,
                                    std::span<const MultilinearMap* const> inner) {
  if ((int)inner.size() != F.order())
    throw ContractError("ml_substitute needs one inner map per slot");
  int d = F.dim();
  // working tensor: [o][done blocks...][remaining j slots...]; substitute the
  // last pending slot each step so it is always the fastest-varying index.
  std::vector<cd> cur = F.coeffs();
  std::size_t done = 1;  // flat size of already substituted blocks (trailing)
  for (int slot = F.order() - 1; slot >= 0; --slot) {
    const MultilinearMap& H = *inner[slot];
    std::size_t hb = H.arg_size();
    std::size_t rows = cur.size() / (d * done);  // [o][j_1..j_slot] part
    std::vector<cd> next(rows * hb * done, cd(0.0));
    for (std::size_t r = 0; r < rows; ++r)
      for (int j = 0; j < d; ++j) {
        const cd* src = &cur[(r * d + j) * done];
        const cd* hrow = &H.coeffs()[j * hb];
        for (std::size_t a = 0; a < hb; ++a) {
          cd w = hrow[a];
          if (w == cd(0.0)) continue;
          cd* dst = &next[(r * hb + a) * done];
          for (std::size_t t = 0; t < done; ++t) dst[t] += w * src[t];
        }
      }
    cur.swap(next);
    done *= hb;
  }
  int total_order = 0;
  for (const MultilinearMap* h : inner) total_order += h->order();
  return MultilinearMap(F.algebra(), total_order, std::move(cur));
}

//! Apply a linear map M (given as d x d output transform) to the output
//! coordinate of F: out[o] = sum_p M(o,p) F[p].
inline MultilinearMap ml_output_linmap(const Eigen::MatrixXcd& M, const MultilinearMap& F) {
  int d = F.dim();
  std::size_t asz = F.arg_size();
  MultilinearMap out(F.algebra(), F.order());
  for (int o = 0; o < d; ++o)
    for (int p = 0; p < d; ++p) {
      cd w = M(o, p);
      if (w == cd(0.0)) continue;
      const cd* src = &F.coeffs()[p * asz];
      cd* dst = &out.coeffs()[o * asz];
      for (std::size_t a = 0; a < asz; ++a) dst[a] += w * src[a];
    }
  return out;
}

}  // namespace freeprob

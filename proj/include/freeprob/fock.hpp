#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "freeprob/transforms.hpp"

namespace freeprob {

struct FockConfig {
  AlgebraPtr alg;
  int indices = 2;
  int depth = 8;        // max tensor length J
  bool strict = true;   // error (vs drop) on creation past depth
};

using Word = std::vector<std::uint8_t>;  // letters are 1-based indices

//! Sector-decomposed vector of the truncated full Fock space. The sector at
//! (level j, word w) stores a dense tensor of shape d^j x d: slot coordinates
//! left to right, then the tail coordinate (fastest). Level 0 is keyed by the
//! empty word and holds a length-d tail only.
class FockVector {
 public:
  explicit FockVector(FockConfig config) : config_(std::move(config)) {}

  const FockConfig& config() const { return config_; }
  const std::map<Word, std::vector<cd>>& sectors() const { return sectors_; }

  static FockVector vacuum(FockConfig config) {
    FockVector v(std::move(config));
    const Elem& u = v.config_.alg->unit();
    v.sectors_[{}] = std::vector<cd>(u.begin(), u.end());
    return v;
  }

  std::size_t sector_size(int level) const { return ipow(config_.alg->dim(), level + 1); }

  void add_sector(const Word& w, std::span<const cd> data, cd coeff = 1.0) {
    auto it = sectors_.find(w);
    if (it == sectors_.end()) {
      std::vector<cd> d(data.size(), cd(0.0));
      for (std::size_t i = 0; i < data.size(); ++i) d[i] = coeff * data[i];
      sectors_.emplace(w, std::move(d));
    } else {
      for (std::size_t i = 0; i < data.size(); ++i) it->second[i] += coeff * data[i];
    }
  }

  FockVector& operator+=(const FockVector& other) {
    for (const auto& [w, d] : other.sectors_) add_sector(w, d);
    return *this;
  }

  FockVector& operator-=(const FockVector& other) {
    for (const auto& [w, d] : other.sectors_) add_sector(w, d, cd(-1.0));
    return *this;
  }

  FockVector& operator*=(cd s) {
    for (auto& [w, d] : sectors_) for (cd& v : d) v *= s;
    return *this;
  }

  void prune(double threshold = 1e-15) {
    for (auto it = sectors_.begin(); it != sectors_.end();) {
      double m = 0;
      for (const cd& v : it->second) m = std::max(m, std::abs(v));
      if (m < threshold) it = sectors_.erase(it);
      else ++it;
    }
  }

  //! Drop sectors above a level (lossy-mode truncation and test trimming).
  void truncate_levels(int max_level) {
    for (auto it = sectors_.begin(); it != sectors_.end();) {
      if ((int)it->first.size() > max_level) it = sectors_.erase(it);
      else ++it;
    }
  }

  double norm() const {
    double m = 0;
    for (const auto& [w, d] : sectors_)
      for (const cd& v : d) m = std::max(m, std::abs(v));
    return m;
  }

  //! Ec applied to the vector: the tail of the level-0 sector.
  Elem vacuum_component() const {
    auto it = sectors_.find({});
    if (it == sectors_.end()) return Elem(config_.alg->dim(), cd(0.0));
    return Elem(it->second.begin(), it->second.end());
  }

  std::map<Word, std::vector<cd>>& mutable_sectors() { return sectors_; }

 private:
  FockConfig config_;
  std::map<Word, std::vector<cd>> sectors_;
};

//! Symbolic operator on the truncated Fock space.
class Op {
 public:
  enum class Tag { lambda, rho, create, ann_v, ann_w, sum, scaled };

  static Op lambda(Elem b) { Op o(Tag::lambda); o.b_ = std::move(b); return o; }
  static Op rho(Elem b) { Op o(Tag::rho); o.b_ = std::move(b); return o; }
  static Op create(int i) { Op o(Tag::create); o.index_ = i; return o; }
  //! V_{i,n}(alpha): n-fold annihilation at index i.
  static Op annihilate(int i, MultilinearMap alpha) {
    Op o(Tag::ann_v);
    o.index_ = i;
    o.alpha_ = std::move(alpha);
    return o;
  }
  //! W_{i,n}(alpha): n-fold annihilation combined with single creation.
  static Op ann_create(int i, MultilinearMap alpha) {
    Op o(Tag::ann_w);
    o.index_ = i;
    o.alpha_ = std::move(alpha);
    return o;
  }
  static Op sum(std::vector<Op> parts) { Op o(Tag::sum); o.parts_ = std::move(parts); return o; }
  static Op scaled(cd c, Op inner) {
    Op o(Tag::scaled);
    o.coeff_ = c;
    o.parts_.push_back(std::move(inner));
    return o;
  }

  Tag tag() const { return tag_; }
  int index() const { return index_; }
  const Elem& elem() const { return b_; }
  const MultilinearMap& alpha() const { return *alpha_; }
  const std::vector<Op>& parts() const { return parts_; }
  cd coeff() const { return coeff_; }

 private:
  explicit Op(Tag t) : tag_(t) {}
  Tag tag_;
  int index_ = 0;
  Elem b_;
  std::optional<MultilinearMap> alpha_;
  std::vector<Op> parts_;
  cd coeff_ = 1.0;
};

namespace detail {

//! Multiply axis 0 of a sector tensor by a d x d matrix m: out[o][rest] =
//! sum_q m[o][q] data[q][rest].
inline std::vector<cd> transform_first_axis(const std::vector<cd>& data, int d,
                                            const std::vector<cd>& m) {
  std::size_t rest = data.size() / d;
  std::vector<cd> out(data.size(), cd(0.0));
  for (int o = 0; o < d; ++o)
    for (int q = 0; q < d; ++q) {
      cd w = m[o * d + q];
      if (w == cd(0.0)) continue;
      const cd* src = &data[q * rest];
      cd* dst = &out[o * rest];
      for (std::size_t r = 0; r < rest; ++r) dst[r] += w * src[r];
    }
  return out;
}

//! Multiply the last (tail) axis: out[r][o] = sum_q m[o][q] data[r][q].
inline std::vector<cd> transform_last_axis(const std::vector<cd>& data, int d,
                                           const std::vector<cd>& m) {
  std::size_t rows = data.size() / d;
  std::vector<cd> out(data.size(), cd(0.0));
  for (std::size_t r = 0; r < rows; ++r)
    for (int o = 0; o < d; ++o) {
      cd acc = 0.0;
      for (int q = 0; q < d; ++q) acc += m[o * d + q] * data[r * d + q];
      out[r * d + o] = acc;
    }
  return out;
}

inline std::vector<cd> left_mult_matrix_flat(const Algebra& A, std::span<const cd> x) {
  int d = A.dim();
  std::vector<cd> m(d * d, cd(0.0));
  for (int p = 0; p < d; ++p) {
    if (x[p] == cd(0.0)) continue;
    for (int q = 0; q < d; ++q)
      for (int o = 0; o < d; ++o) m[o * d + q] += x[p] * A.structure(p, q, o);
  }
  return m;
}

inline std::vector<cd> right_mult_matrix_flat(const Algebra& A, std::span<const cd> x) {
  int d = A.dim();
  std::vector<cd> m(d * d, cd(0.0));
  for (int p = 0; p < d; ++p) {
    if (x[p] == cd(0.0)) continue;
    for (int q = 0; q < d; ++q)
      for (int o = 0; o < d; ++o) m[o * d + q] += x[p] * A.structure(q, p, o);
  }
  return m;
}

//! Contract alpha (order n) against the first n slot axes, then left-multiply
//! the contracted element onto the next axis via the algebra product.
//! data has shape d^{k+1} with k >= n; result has shape d^{k-n+1}.
inline std::vector<cd> annihilate_contract(const Algebra& A, const MultilinearMap& alpha,
                                           const std::vector<cd>& data, int level) {
  int d = A.dim();
  int n = alpha.order();
  std::size_t asz = alpha.arg_size();          // d^n
  std::size_t rest = data.size() / asz;        // d^{k-n+1}
  // val[o][rest] = sum_a alpha[o][a] data[a][rest]
  std::vector<cd> val((std::size_t)d * rest, cd(0.0));
  for (int o = 0; o < d; ++o) {
    const cd* arow = &alpha.coeffs()[o * asz];
    cd* dst = &val[o * rest];
    for (std::size_t a = 0; a < asz; ++a) {
      cd w = arow[a];
      if (w == cd(0.0)) continue;
      const cd* src = &data[a * rest];
      for (std::size_t r = 0; r < rest; ++r) dst[r] += w * src[r];
    }
  }
  // left-multiply the alpha output onto the first remaining axis
  std::size_t tail = rest / d;  // d^{k-n}
  std::vector<cd> out(rest, cd(0.0));
  for (int o = 0; o < d; ++o)
    for (int s = 0; s < d; ++s) {
      const cd* src = &val[(std::size_t)o * rest + (std::size_t)s * tail];
      for (int r = 0; r < d; ++r) {
        cd c = A.structure(o, s, r);
        if (c == cd(0.0)) continue;
        cd* dst = &out[(std::size_t)r * tail];
        for (std::size_t t = 0; t < tail; ++t) dst[t] += c * src[t];
      }
    }
  (void)level;
  return out;
}

inline bool word_prefix_is(const Word& w, int i, int n) {
  if ((int)w.size() < n) return false;
  for (int t = 0; t < n; ++t)
    if (w[t] != (std::uint8_t)i) return false;
  return true;
}

}  // namespace detail

inline FockVector fock_apply(const Op& op, const FockVector& v);

namespace detail {

inline void apply_into(const Op& op, const FockVector& v, FockVector& out, cd coeff) {
  const FockConfig& cfg = v.config();
  const Algebra& A = *cfg.alg;
  int d = A.dim();
  switch (op.tag()) {
    case Op::Tag::lambda: {
      std::vector<cd> m = left_mult_matrix_flat(A, op.elem());
      for (const auto& [w, data] : v.sectors())
        out.add_sector(w, transform_first_axis(data, d, m), coeff);
      break;
    }
    case Op::Tag::rho: {
      std::vector<cd> m = right_mult_matrix_flat(A, op.elem());
      for (const auto& [w, data] : v.sectors())
        out.add_sector(w, transform_last_axis(data, d, m), coeff);
      break;
    }
    case Op::Tag::create: {
      for (const auto& [w, data] : v.sectors()) {
        if ((int)w.size() >= cfg.depth) {
          if (cfg.strict)
            throw DepthExceeded("creation past configured Fock depth (increase J)");
          continue;
        }
        Word nw;
        nw.reserve(w.size() + 1);
        nw.push_back((std::uint8_t)op.index());
        nw.insert(nw.end(), w.begin(), w.end());
        std::vector<cd> nd(data.size() * d, cd(0.0));
        for (int j = 0; j < d; ++j) {
          cd uj = A.unit()[j];
          if (uj == cd(0.0)) continue;
          for (std::size_t r = 0; r < data.size(); ++r) nd[j * data.size() + r] = uj * data[r];
        }
        out.add_sector(nw, nd, coeff);
      }
      break;
    }
    case Op::Tag::ann_v: {
      const MultilinearMap& alpha = op.alpha();
      int n = alpha.order();
      if (n == 0) {
        apply_into(Op::lambda(alpha.as_element()), v, out, coeff);
        break;
      }
      for (const auto& [w, data] : v.sectors()) {
        if (!word_prefix_is(w, op.index(), n)) continue;
        Word nw(w.begin() + n, w.end());
        out.add_sector(nw, annihilate_contract(A, alpha, data, (int)w.size()), coeff);
      }
      break;
    }
    case Op::Tag::ann_w: {
      const MultilinearMap& alpha = op.alpha();
      int n = alpha.order();
      if (n == 0) {
        // W_{i,0}(alpha_0) = alpha_0 L_i
        FockVector created = fock_apply(Op::create(op.index()), v);
        apply_into(Op::lambda(alpha.as_element()), created, out, coeff);
        break;
      }
      for (const auto& [w, data] : v.sectors()) {
        if (!word_prefix_is(w, op.index(), n)) continue;
        // contract first n slots; the alpha value becomes the new first slot
        std::size_t asz = alpha.arg_size();
        std::size_t rest = data.size() / asz;
        std::vector<cd> val((std::size_t)d * rest, cd(0.0));
        for (int o = 0; o < d; ++o) {
          const cd* arow = &alpha.coeffs()[o * asz];
          cd* dst = &val[o * rest];
          for (std::size_t a = 0; a < asz; ++a) {
            cd wgt = arow[a];
            if (wgt == cd(0.0)) continue;
            const cd* src = &data[a * rest];
            for (std::size_t r = 0; r < rest; ++r) dst[r] += wgt * src[r];
          }
        }
        Word nw;
        nw.push_back((std::uint8_t)op.index());
        nw.insert(nw.end(), w.begin() + n, w.end());
        out.add_sector(nw, val, coeff);
      }
      break;
    }
    case Op::Tag::sum:
      for (const Op& part : op.parts()) apply_into(part, v, out, coeff);
      break;
    case Op::Tag::scaled:
      apply_into(op.parts()[0], v, out, coeff * op.coeff());
      break;
  }
}

}  // namespace detail

inline FockVector fock_apply(const Op& op, const FockVector& v) {
  FockVector out(v.config());
  detail::apply_into(op, v, out, cd(1.0));
  out.prune();
  return out;
}

inline Elem fock_expectation(const FockVector& v) { return v.vacuum_component(); }

//! Fitted model random variable living at one Fock index.
struct RvModel {
  enum class Flavor { s_model, r_model };
  int index = 1;
  Flavor flavor = Flavor::s_model;
  std::vector<MultilinearMap> coeffs;  // alpha_0..alpha_N

  int max_order() const { return (int)coeffs.size() - 1; }

  //! S-model: sum_n V_{i,n} + W_{i,n}; R-model: L_i + sum_n V_{i,n}.
  Op as_op() const {
    std::vector<Op> parts;
    if (flavor == Flavor::r_model) parts.push_back(Op::create(index));
    for (const MultilinearMap& a : coeffs) {
      parts.push_back(Op::annihilate(index, a));
      if (flavor == Flavor::s_model) parts.push_back(Op::ann_create(index, a));
    }
    return Op::sum(std::move(parts));
  }

  //! F(b) = alpha_0 + sum alpha_n(b..b), the model's coefficient series.
  Jet coefficient_jet() const {
    return Jet(coeffs[0].algebra(), coeffs);
  }
};

//! Ec(b_1 Z_1 b_2 Z_2 ... b_m Z_m) where each Z_t is an ordered product of
//! operators (leftmost factor first in the list; factors apply right to left).
inline Elem alternating_moment(const FockConfig& config,
                               std::span<const std::vector<Op>> factors,
                               std::span<const Elem> bs) {
  if (factors.size() != bs.size())
    throw ContractError("alternating_moment needs one coefficient per factor");
  FockVector v = FockVector::vacuum(config);
  for (std::size_t t = factors.size(); t-- > 0;) {
    const std::vector<Op>& prod = factors[t];
    for (std::size_t f = prod.size(); f-- > 0;) v = fock_apply(prod[f], v);
    v = fock_apply(Op::lambda(bs[t]), v);
  }
  return fock_expectation(v);
}

namespace detail {

//! Ec(u X b_1 X ... b_n X) for a single model.
inline Elem model_moment(const FockConfig& config, const RvModel& model,
                         std::span<const Elem> bs) {
  std::vector<std::vector<Op>> factors(bs.size(), std::vector<Op>{model.as_op()});
  return alternating_moment(config, factors, bs);
}

}  // namespace detail

//! Fit an S-model with coefficients alpha_0..alpha_N so that its Fock moments
//! reproduce the given moment functions mu_1..mu_{N+1}. Requires E(a)
//! invertible.
inline RvModel fit_s_model(const MomentData& m, int index, const FockConfig& config) {
  const Algebra& A = *m.algebra();
  int d = A.dim();
  int N = m.order() - 1;
  if (config.depth < N + 2) throw ContractError("fit_s_model needs depth J >= N+2");
  Elem a0 = m.expectation();
  Elem a0inv = A.inv(a0);
  RvModel model{index, RvModel::Flavor::s_model, {MultilinearMap::constant(m.algebra(), a0)}};
  for (int n = 1; n <= N; ++n) {
    MultilinearMap alpha(m.algebra(), n);
    std::size_t tuples = ipow(d, n);
    std::vector<Elem> args(n + 1);
    args[0] = A.unit();
    for (std::size_t t = 0; t < tuples; ++t) {
      std::size_t rem = t;
      for (int s = n - 1; s >= 0; --s) {
        args[s + 1] = A.mul(A.basis((int)(rem % d)), a0inv);
        rem /= d;
      }
      Elem target = m.mu(n + 1).eval(args);
      Elem partial = detail::model_moment(config, model, args);
      for (int o = 0; o < d; ++o) alpha.at(o, t) = target[o] - partial[o];
    }
    model.coeffs.push_back(std::move(alpha));
  }
  return model;
}

//! Fit an R-model X = L_i + sum V_{i,n}(alpha_n) to mu_1..mu_{N+1}. No
//! invertibility requirement.
inline RvModel fit_r_model(const MomentData& m, int index, const FockConfig& config) {
  const Algebra& A = *m.algebra();
  int d = A.dim();
  int N = m.order() - 1;
  if (config.depth < N + 2) throw ContractError("fit_r_model needs depth J >= N+2");
  Elem a0 = m.expectation();
  RvModel model{index, RvModel::Flavor::r_model, {MultilinearMap::constant(m.algebra(), a0)}};
  for (int n = 1; n <= N; ++n) {
    MultilinearMap alpha(m.algebra(), n);
    std::size_t tuples = ipow(d, n);
    std::vector<Elem> args(n + 1);
    args[0] = A.unit();
    for (std::size_t t = 0; t < tuples; ++t) {
      std::size_t rem = t;
      for (int s = n - 1; s >= 0; --s) {
        args[s + 1] = A.basis((int)(rem % d));
        rem /= d;
      }
      Elem target = m.mu(n + 1).eval(args);
      Elem partial = detail::model_moment(config, model, args);
      for (int o = 0; o < d; ++o) alpha.at(o, t) = target[o] - partial[o];
    }
    model.coeffs.push_back(std::move(alpha));
  }
  return model;
}

//! Read back a model's moment functions mu_1..mu_M by Fock evaluation on
//! basis tuples.
inline MomentData model_moments(const FockConfig& config, const RvModel& model, int M) {
  const Algebra& A = *config.alg;
  int d = A.dim();
  std::vector<MultilinearMap> mu;
  for (int n = 1; n <= M; ++n) {
    MultilinearMap t(config.alg, n);
    std::size_t tuples = ipow(d, n);
    std::vector<Elem> args(n);
    for (std::size_t a = 0; a < tuples; ++a) {
      std::size_t rem = a;
      for (int s = n - 1; s >= 0; --s) {
        args[s] = A.basis((int)(rem % d));
        rem /= d;
      }
      Elem val = detail::model_moment(config, model, args);
      for (int o = 0; o < d; ++o) t.at(o, a) = val[o];
    }
    mu.push_back(std::move(t));
  }
  return MomentData(config.alg, std::move(mu));
}

struct FreenessReport {
  double max_dev = 0.0;
  bool pass = false;
  int trials = 0;
};

//! Centered alternating products of elements of the model subalgebras must
//! have vanishing Ec.
inline FreenessReport freeness_check(const FockConfig& config,
                                     std::span<const RvModel> models, int trials,
                                     std::uint64_t seed) {
  const Algebra& A = *config.alg;
  std::mt19937_64 rng(seed);
  FreenessReport rep;
  rep.trials = trials;
  FockVector vac = FockVector::vacuum(config);
  for (int trial = 0; trial < trials; ++trial) {
    int p = 2 + (int)(rng() % 4);  // alternation length 2..5
    int start = (int)(rng() % models.size());
    FockVector v = vac;
    for (int j = p - 1; j >= 0; --j) {
      const RvModel& mod = models[(start + j) % models.size()];
      // factor: lambda(r0) X lambda(r1), centered
      Elem r0 = elem_random(A, rng(), 1.0);
      Elem r1 = elem_random(A, rng(), 1.0);
      auto apply_factor = [&](const FockVector& in) {
        FockVector w = fock_apply(Op::lambda(r1), in);
        w = fock_apply(mod.as_op(), w);
        return fock_apply(Op::lambda(r0), w);
      };
      Elem mean = fock_expectation(apply_factor(vac));
      FockVector applied = apply_factor(v);
      FockVector centered = fock_apply(Op::lambda(mean), v);
      applied -= centered;
      applied.prune();
      v = std::move(applied);
    }
    rep.max_dev = std::max(rep.max_dev, A.norm(fock_expectation(v)));
  }
  rep.pass = rep.max_dev <= 1e-10;
  return rep;
}

struct GeometricStateReport {
  double max_dev = 0.0;
  bool pass = false;
};

namespace detail {

inline double compare_below_level(const FockVector& a, const FockVector& b, int max_level) {
  FockVector diff = a;
  diff -= b;
  diff.truncate_levels(max_level);
  return diff.norm();
}

//! Truncated geometric vector omega_b = sum_k (b delta_1)^{x k} (x) u.
inline FockVector geometric_vector(const FockConfig& config, const Elem& b, int idx) {
  const Algebra& A = *config.alg;
  FockVector v = FockVector::vacuum(config);
  FockVector layer = v;
  for (int k = 1; k <= config.depth; ++k) {
    layer = fock_apply(Op::create(idx), layer);
    layer = fock_apply(Op::lambda(b), layer);
    v += layer;
  }
  return v;
}

}  // namespace detail

//! Verify X omega_b = F(b)(1+L_1) omega_b on sectors of level <= J-1. The
//! state is built with internal headroom so annihilation from above the
//! reported window is exact.
inline GeometricStateReport geometric_state_check(const RvModel& X, const Elem& b,
                                                  const FockConfig& config) {
  int N = X.max_order();
  FockConfig inner = config;
  // annihilation into level J-1 reaches N levels above the reported window
  inner.depth = config.depth - 1 + N;
  inner.strict = false;
  FockVector omega = detail::geometric_vector(inner, b, X.index);
  FockVector lhs = fock_apply(X.as_op(), omega);
  Elem fb = X.coefficient_jet().diag_eval(b);
  FockVector rhs = fock_apply(Op::create(X.index), omega);
  rhs += omega;
  rhs = fock_apply(Op::lambda(fb), rhs);
  GeometricStateReport rep;
  rep.max_dev = detail::compare_below_level(lhs, rhs, config.depth - 1);
  rep.pass = rep.max_dev <= 1e-9;
  return rep;
}

//! Verify XY sigma_b = F(b')(1+L_1) G(b) (1+L_2) sigma_b with
//! b' = G(b) b G(b)^{-1} and sigma_b = (1-Z_b)^{-1} Omega.
inline GeometricStateReport geometric_product_check(const RvModel& X, const RvModel& Y,
                                                    const Elem& b, const FockConfig& config) {
  const Algebra& A = *config.alg;
  int N = std::max(X.max_order(), Y.max_order());
  FockConfig inner = config;
  // both annihilations together reach 2N levels above the reported window
  inner.depth = config.depth - 1 + 2 * N;
  inner.strict = false;
  Elem gb = Y.coefficient_jet().diag_eval(b);
  Elem gbinv = A.inv(gb);
  Elem bginv = A.mul(b, gbinv);
  // Z_b = b L_2 + b G(b)^{-1} L_1 G(b) + b G(b)^{-1} L_1 G(b) L_2
  auto apply_z = [&](const FockVector& v) {
    FockVector t1 = fock_apply(Op::lambda(b), fock_apply(Op::create(Y.index), v));
    FockVector mid = fock_apply(Op::create(X.index), fock_apply(Op::lambda(gb), v));
    FockVector t2 = fock_apply(Op::lambda(bginv), mid);
    FockVector mid2 = fock_apply(Op::lambda(gb), fock_apply(Op::create(Y.index), v));
    FockVector t3 = fock_apply(Op::lambda(bginv), fock_apply(Op::create(X.index), mid2));
    t1 += t2;
    t1 += t3;
    t1.prune();
    return t1;
  };
  FockVector vac = FockVector::vacuum(inner);
  FockVector sigma = vac;
  FockVector layer = vac;
  for (int k = 0; k < inner.depth + 1; ++k) {
    layer = apply_z(layer);
    if (layer.sectors().empty()) break;
    sigma += layer;
  }
  FockVector lhs = fock_apply(X.as_op(), fock_apply(Y.as_op(), sigma));
  Elem bprime = A.mul(gb, A.mul(b, gbinv));
  Elem fbp = X.coefficient_jet().diag_eval(bprime);
  FockVector rhs = fock_apply(Op::create(Y.index), sigma);
  rhs += sigma;
  rhs = fock_apply(Op::lambda(gb), rhs);
  FockVector rhs2 = fock_apply(Op::create(X.index), rhs);
  rhs += rhs2;
  rhs = fock_apply(Op::lambda(fbp), rhs);
  GeometricStateReport rep;
  rep.max_dev = detail::compare_below_level(lhs, rhs, config.depth - 1);
  rep.pass = rep.max_dev <= 1e-9;
  return rep;
}

}  // namespace freeprob

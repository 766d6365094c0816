#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include "freeprob/errors.hpp"

namespace freeprob {

using cd = std::complex<double>;
using Elem = std::vector<cd>;  // coordinates in the algebra basis

//! Finite-dimensional unital associative algebra given by structure constants:
//! e_p * e_q = sum_r c[p][q][r] e_r.
class Algebra {
 public:
  enum class Kind { matrix, diagonal, custom };

  static Algebra matrix_units(int k) {
    if (k < 1 || k > 4) throw ValidationError("matrix(k) requires 1 <= k <= 4");
    int d = k * k;
    Algebra a(d, Kind::matrix);
    a.matrix_k_ = k;
    // E_{ij} E_{lm} = delta_{jl} E_{im}; basis index of E_{ij} is i*k+j.
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l)
          for (int m = 0; m < k; ++m)
            if (j == l) a.c_ref(i * k + j, l * k + m, i * k + m) = 1.0;
    for (int i = 0; i < k; ++i) a.unit_[i * k + i] = 1.0;
    return a;
  }

  static Algebra diagonal(int d) {
    if (d < 1 || d > 16) throw ValidationError("diagonal(d) requires 1 <= d <= 16");
    Algebra a(d, Kind::diagonal);
    for (int p = 0; p < d; ++p) {
      a.c_ref(p, p, p) = 1.0;
      a.unit_[p] = 1.0;
    }
    return a;
  }

  static Algebra custom(int dim, Elem unit, std::vector<cd> structure) {
    if (dim < 1 || dim > 16) throw ValidationError("custom dim must be in 1..16");
    if ((int)unit.size() != dim || (int)structure.size() != dim * dim * dim)
      throw ValidationError("custom spec has wrong unit/structure size");
    Algebra a(dim, Kind::custom);
    a.unit_ = std::move(unit);
    a.structure_ = std::move(structure);
    a.validate();
    return a;
  }

  int dim() const { return d_; }
  Kind kind() const { return kind_; }
  int matrix_k() const { return matrix_k_; }
  const Elem& unit() const { return unit_; }
  cd structure(int p, int q, int r) const { return structure_[(p * d_ + q) * d_ + r]; }
  const std::vector<cd>& structure_flat() const { return structure_; }

  Elem zero() const { return Elem(d_, cd(0.0)); }

  Elem basis(int p) const {
    Elem e(d_, cd(0.0));
    e[p] = 1.0;
    return e;
  }

  Elem add(std::span<const cd> x, std::span<const cd> y) const {
    Elem r(d_);
    for (int i = 0; i < d_; ++i) r[i] = x[i] + y[i];
    return r;
  }

  Elem sub(std::span<const cd> x, std::span<const cd> y) const {
    Elem r(d_);
    for (int i = 0; i < d_; ++i) r[i] = x[i] - y[i];
    return r;
  }

  Elem scale(cd s, std::span<const cd> x) const {
    Elem r(d_);
    for (int i = 0; i < d_; ++i) r[i] = s * x[i];
    return r;
  }

  Elem mul(std::span<const cd> x, std::span<const cd> y) const {
    Elem r(d_, cd(0.0));
    for (int p = 0; p < d_; ++p) {
      if (x[p] == cd(0.0)) continue;
      for (int q = 0; q < d_; ++q) {
        cd xy = x[p] * y[q];
        if (xy == cd(0.0)) continue;
        const cd* row = &structure_[(p * d_ + q) * d_];
        for (int o = 0; o < d_; ++o) r[o] += xy * row[o];
      }
    }
    return r;
  }

  //! Matrix of left multiplication by x acting on coordinates: (x*e_q)_o.
  Eigen::MatrixXcd left_mult_matrix(std::span<const cd> x) const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d_, d_);
    for (int p = 0; p < d_; ++p) {
      if (x[p] == cd(0.0)) continue;
      for (int q = 0; q < d_; ++q)
        for (int o = 0; o < d_; ++o) m(o, q) += x[p] * structure(p, q, o);
    }
    return m;
  }

  //! Matrix of right multiplication by x: (e_q*x)_o.
  Eigen::MatrixXcd right_mult_matrix(std::span<const cd> x) const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d_, d_);
    for (int p = 0; p < d_; ++p) {
      if (x[p] == cd(0.0)) continue;
      for (int q = 0; q < d_; ++q)
        for (int o = 0; o < d_; ++o) m(o, q) += x[p] * structure(q, p, o);
    }
    return m;
  }

  Elem inv(std::span<const cd> x) const {
    Eigen::MatrixXcd lm = left_mult_matrix(x);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(lm, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(d_ - 1);
    if (!(smin > 1e-8 * smax)) {
      double cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
      std::ostringstream os;
      os << "element not invertible (condition estimate " << cond << ")";
      throw NotInvertible(cond, os.str());
    }
    Eigen::VectorXcd u(d_);
    for (int i = 0; i < d_; ++i) u(i) = unit_[i];
    Eigen::VectorXcd y = lm.partialPivLu().solve(u);
    Elem r(d_);
    for (int i = 0; i < d_; ++i) r[i] = y(i);
    return r;
  }

  //! Working norm: max coordinate magnitude.
  double norm(std::span<const cd> x) const {
    double m = 0.0;
    for (const cd& v : x) m = std::max(m, std::abs(v));
    return m;
  }

  bool commutative() const { return kind_ == Kind::diagonal || d_ == 1; }

 private:
  Algebra(int d, Kind k)
      : d_(d), kind_(k), unit_(d, cd(0.0)), structure_(d * d * d, cd(0.0)) {}

  cd& c_ref(int p, int q, int r) { return structure_[(p * d_ + q) * d_ + r]; }

  void validate() const {
    // associativity on all basis triples
    for (int p = 0; p < d_; ++p)
      for (int q = 0; q < d_; ++q) {
        Elem pq = mul(basis(p), basis(q));
        for (int s = 0; s < d_; ++s) {
          Elem lhs = mul(pq, basis(s));
          Elem rhs = mul(basis(p), mul(basis(q), basis(s)));
          if (norm(sub(lhs, rhs)) > 1e-12) {
            std::ostringstream os;
            os << "structure constants not associative at triple (" << p << "," << q
               << "," << s << ")";
            throw ValidationError(os.str());
          }
        }
      }
    for (int p = 0; p < d_; ++p) {
      Elem e = basis(p);
      if (norm(sub(mul(unit_, e), e)) > 1e-12 || norm(sub(mul(e, unit_), e)) > 1e-12) {
        std::ostringstream os;
        os << "unit law fails on basis element " << p;
        throw ValidationError(os.str());
      }
    }
  }

  int d_;
  Kind kind_;
  int matrix_k_ = 0;
  Elem unit_;
  std::vector<cd> structure_;  // flat, c[(p*d+q)*d+r]
};

using AlgebraPtr = std::shared_ptr<const Algebra>;

inline AlgebraPtr make_matrix_algebra(int k) {
  return std::make_shared<Algebra>(Algebra::matrix_units(k));
}
inline AlgebraPtr make_diagonal_algebra(int d) {
  return std::make_shared<Algebra>(Algebra::diagonal(d));
}
inline AlgebraPtr make_custom_algebra(int dim, Elem unit, std::vector<cd> structure) {
  return std::make_shared<Algebra>(Algebra::custom(dim, std::move(unit), std::move(structure)));
}

//! Deterministic seeded random element, scaled so the max coordinate
//! magnitude equals radius.
inline Elem elem_random(const Algebra& a, std::uint64_t seed, double radius) {
  if (!(radius > 0)) throw ValidationError("elem_random needs radius > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Elem r(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    double re = u(rng), im = u(rng);
    r[i] = cd(re, im);
  }
  double m = a.norm(r);
  if (m == 0.0) {
    r[0] = radius;  // astronomically unlikely, but keep the contract
    return r;
  }
  for (cd& v : r) v *= radius / m;
  return r;
}

}  // namespace freeprob

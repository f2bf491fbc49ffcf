#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "core.hpp"

namespace ikern {

namespace detail {

// x^k mod Phi_N for k in [0, N), as small integer vectors of length phi(N)
struct CycloTable {
  int order = 1;
  int degree = 1;
  std::vector<std::vector<std::int64_t>> pow;
};

inline std::vector<std::int64_t> poly_divide_exact(std::vector<std::int64_t> num, const std::vector<std::int64_t>& den) {
  const int dn = static_cast<int>(den.size()) - 1;
  std::vector<std::int64_t> q(num.size() - dn, 0);
  for (int i = static_cast<int>(num.size()) - 1; i >= dn; --i) {
    std::int64_t c = num[i] / den[dn];
    q[i - dn] = c;
    for (int j = 0; j <= dn; ++j) num[i - dn + j] -= c * den[j];
  }
  return q;
}

inline std::vector<std::int64_t> cyclotomic_polynomial(int n) {
  // prime power fast path: sum_{j<p} x^{j p^{e-1}}
  int p = 0, m = n;
  for (int d = 2; d <= m; ++d)
    if (m % d == 0) {
      p = d;
      break;
    }
  if (n == 1) return {-1, 1};
  int r = n;
  while (r % p == 0) r /= p;
  if (r == 1) {
    const int s = n / p;
    std::vector<std::int64_t> c(n - s + 1, 0);
    for (int j = 0; j < p; ++j) c[j * s] = 1;
    return c;
  }
  std::vector<std::int64_t> num(n + 1, 0);
  num[0] = -1;
  num[n] = 1;
  for (int d = 1; d < n; ++d)
    if (n % d == 0) num = poly_divide_exact(num, cyclotomic_polynomial(d));
  return num;
}

inline std::shared_ptr<const CycloTable> cyclo_table(int n) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const CycloTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  auto t = std::make_shared<CycloTable>();
  const auto phi = cyclotomic_polynomial(n);
  const int deg = static_cast<int>(phi.size()) - 1;
  t->order = n;
  t->degree = deg;
  t->pow.assign(n, std::vector<std::int64_t>(deg, 0));
  std::vector<std::int64_t> cur(deg, 0);
  cur[0] = 1;
  for (int k = 0; k < n; ++k) {
    t->pow[k] = cur;
    // multiply by x and reduce with the monic Phi_n
    std::int64_t top = cur[deg - 1];
    for (int j = deg - 1; j > 0; --j) cur[j] = cur[j - 1];
    cur[0] = 0;
    if (top)
      for (int j = 0; j < deg; ++j) cur[j] -= top * phi[j];
  }
  cache.emplace(n, t);
  return t;
}

inline double to_double(const mpz_class& v) { return v.get_d(); }
inline double to_double(const mpq_class& v) { return v.get_d(); }
inline double to_double(std::int64_t v) { return static_cast<double>(v); }

}  // namespace detail

// Element of Z[zeta_N] (Coeff = mpz_class) or Q(zeta_N) (Coeff = mpq_class),
// stored in the power basis modulo Phi_N.
template <class Coeff>
class Cyclotomic {
 public:
  Cyclotomic() : Cyclotomic(1) {}
  explicit Cyclotomic(int order) : order_(order) {
    require(order >= 1, "cyclotomic order must be positive");
    table_ = detail::cyclo_table(order);
    c_.assign(table_->degree, Coeff(0));
  }
  Cyclotomic(int order, Coeff scalar) : Cyclotomic(order) { c_[0] = scalar; }

  static Cyclotomic monomial(int order, std::int64_t k, Coeff coeff = Coeff(1)) {
    Cyclotomic r(order);
    r.add_power(k, coeff);
    return r;
  }

  // sum_k counts[k] zeta_N^k
  template <class Int>
  static Cyclotomic from_exponent_counts(int order, const std::vector<Int>& counts) {
    require(static_cast<int>(counts.size()) == order, "count vector length must equal order");
    Cyclotomic r(order);
    const auto& t = *r.table_;
    std::vector<std::int64_t> acc(t.degree, 0);
    bool small = true;
    for (int k = 0; k < order && small; ++k) {
      if (!counts[k]) continue;
      for (int j = 0; j < t.degree; ++j) {
        std::int64_t prod;
        if (__builtin_mul_overflow(static_cast<std::int64_t>(counts[k]), t.pow[k][j], &prod) ||
            __builtin_add_overflow(acc[j], prod, &acc[j])) {
          small = false;
          break;
        }
      }
    }
    if (small) {
      for (int j = 0; j < t.degree; ++j) r.c_[j] = Coeff(mpz_class(static_cast<long>(acc[j])));
      return r;
    }
    for (int k = 0; k < order; ++k)
      if (counts[k]) r.add_power(k, Coeff(mpz_class(static_cast<long>(counts[k]))));
    return r;
  }

  int order() const { return order_; }
  int degree() const { return table_->degree; }
  const std::vector<Coeff>& coeffs() const { return c_; }

  void add_power(std::int64_t k, const Coeff& coeff) {
    const auto& row = table_->pow[mod(k, order_)];
    for (int j = 0; j < table_->degree; ++j)
      if (row[j]) c_[j] += coeff * static_cast<long>(row[j]);
  }

  bool is_zero() const {
    for (const auto& x : c_)
      if (x != 0) return false;
    return true;
  }

  // image in Q(zeta_M) for a multiple M of the order
  Cyclotomic lift(int m) const {
    require(m % order_ == 0, "lift target must be a multiple of the order");
    if (m == order_) return *this;
    Cyclotomic r(m);
    const int s = m / order_;
    for (int j = 0; j < degree(); ++j)
      if (c_[j] != 0) r.add_power(static_cast<std::int64_t>(j) * s, c_[j]);
    return r;
  }

  // zeta -> zeta^{-1}; complex conjugation under every embedding
  Cyclotomic conj() const {
    Cyclotomic r(order_);
    for (int j = 0; j < degree(); ++j)
      if (c_[j] != 0) r.add_power(-j, c_[j]);
    return r;
  }

  // Galois action zeta -> zeta^a, gcd(a, N) = 1
  Cyclotomic galois(std::int64_t a) const {
    require(std::gcd(mod(a, order_), static_cast<std::int64_t>(order_)) == 1, "galois exponent must be a unit");
    Cyclotomic r(order_);
    for (int j = 0; j < degree(); ++j)
      if (c_[j] != 0) r.add_power(a * j, c_[j]);
    return r;
  }

  std::complex<double> embed() const {
    std::complex<double> s = 0;
    for (int j = 0; j < degree(); ++j) {
      if (c_[j] == 0) continue;
      const double th = 2.0 * std::numbers::pi * j / order_;
      s += detail::to_double(c_[j]) * std::complex<double>(std::cos(th), std::sin(th));
    }
    return s;
  }

  friend Cyclotomic operator+(const Cyclotomic& a, const Cyclotomic& b) {
    if (a.order_ != b.order_) {
      const int m = std::lcm(a.order_, b.order_);
      return a.lift(m) + b.lift(m);
    }
    Cyclotomic r = a;
    for (int j = 0; j < r.degree(); ++j) r.c_[j] += b.c_[j];
    return r;
  }
  friend Cyclotomic operator-(const Cyclotomic& a) {
    Cyclotomic r = a;
    for (auto& x : r.c_) x = -x;
    return r;
  }
  friend Cyclotomic operator-(const Cyclotomic& a, const Cyclotomic& b) { return a + (-b); }
  friend Cyclotomic operator*(const Cyclotomic& a, const Cyclotomic& b) {
    if (a.order_ != b.order_) {
      const int m = std::lcm(a.order_, b.order_);
      return a.lift(m) * b.lift(m);
    }
    const int d = a.degree();
    std::vector<Coeff> raw(2 * d - 1, Coeff(0));
    for (int i = 0; i < d; ++i) {
      if (a.c_[i] == 0) continue;
      for (int j = 0; j < d; ++j)
        if (b.c_[j] != 0) raw[i + j] += a.c_[i] * b.c_[j];
    }
    Cyclotomic r(a.order_);
    for (int k = 0; k < 2 * d - 1; ++k)
      if (raw[k] != 0) r.add_power(k, raw[k]);
    return r;
  }
  friend Cyclotomic operator*(const Coeff& s, const Cyclotomic& a) {
    Cyclotomic r = a;
    for (auto& x : r.c_) x *= s;
    return r;
  }
  Cyclotomic& operator+=(const Cyclotomic& b) { return *this = *this + b; }
  Cyclotomic& operator-=(const Cyclotomic& b) { return *this = *this - b; }
  Cyclotomic& operator*=(const Cyclotomic& b) { return *this = *this * b; }

  friend bool operator==(const Cyclotomic& a, const Cyclotomic& b) {
    if (a.order_ != b.order_) {
      const int m = std::lcm(a.order_, b.order_);
      return a.lift(m).c_ == b.lift(m).c_;
    }
    return a.c_ == b.c_;
  }

  std::string str() const {
    std::ostringstream os;
    os << *this;
    return os.str();
  }
  friend std::ostream& operator<<(std::ostream& os, const Cyclotomic& a) {
    bool first = true;
    for (int j = 0; j < a.degree(); ++j) {
      if (a.c_[j] == 0) continue;
      if (!first) os << " + ";
      first = false;
      os << "(" << a.c_[j] << ")";
      if (j) os << "*z" << a.order_ << "^" << j;
    }
    if (first) os << "0";
    return os;
  }

 private:
  int order_;
  std::shared_ptr<const detail::CycloTable> table_;
  std::vector<Coeff> c_;
};

using CyclotomicNumber = Cyclotomic<mpz_class>;
using CycloRational = Cyclotomic<mpq_class>;

inline CycloRational to_rational(const CyclotomicNumber& z) {
  CycloRational r(z.order());
  for (int j = 0; j < z.degree(); ++j)
    if (z.coeffs()[j] != 0) r.add_power(j, mpq_class(z.coeffs()[j]));
  return r;
}

// Coefficient accumulator indexed by exponent, reduced once at the end.
template <class Coeff>
class PowerAccumulator {
 public:
  explicit PowerAccumulator(int order) : order_(order), acc_(order, Coeff(0)) {}
  void add(std::int64_t k, const Coeff& c) { acc_[mod(k, order_)] += c; }
  int order() const { return order_; }
  Cyclotomic<Coeff> value() const {
    Cyclotomic<Coeff> r(order_);
    for (int k = 0; k < order_; ++k)
      if (acc_[k] != 0) r.add_power(k, acc_[k]);
    return r;
  }

 private:
  int order_;
  std::vector<Coeff> acc_;
};

}  // namespace ikern

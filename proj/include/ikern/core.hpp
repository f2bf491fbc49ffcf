#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

namespace ikern {

struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct budget_exceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw precondition_error(what);
}

inline bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::int64_t checked_pow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i)
    if (__builtin_mul_overflow(r, b, &r)) throw precondition_error("integer power overflows int64");
  return r;
}

inline std::int64_t mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

inline std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t m) {
  return static_cast<std::int64_t>(mod(static_cast<std::int64_t>((static_cast<__int128>(a) * b) % m), m));
}

inline std::int64_t egcd_inverse(std::int64_t a, std::int64_t m) {
  std::int64_t g = m, x = 0, x1 = 1, a1 = mod(a, m);
  while (a1) {
    std::int64_t q = g / a1;
    std::tie(g, a1) = std::make_pair(a1, g - q * a1);
    std::tie(x, x1) = std::make_pair(x1, x - q * x1);
  }
  if (g != 1) throw precondition_error("element is not invertible");
  return mod(x, m);
}

// v_p of a nonzero integer
inline int valuation(std::int64_t a, std::int64_t p) {
  if (a == 0) return 1 << 20;
  int v = 0;
  while (a % p == 0) {
    a /= p;
    ++v;
  }
  return v;
}

inline std::int64_t euler_phi(std::int64_t n) {
  std::int64_t r = n;
  for (std::int64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      while (n % d == 0) n /= d;
      r -= r / d;
    }
  }
  if (n > 1) r -= r / n;
  return r;
}

inline std::int64_t primitive_root(std::int64_t p) {
  require(is_prime(p), "primitive_root needs a prime");
  if (p == 2) return 1;
  std::vector<std::int64_t> fac;
  std::int64_t m = p - 1;
  for (std::int64_t d = 2; d * d <= m; ++d)
    if (m % d == 0) {
      fac.push_back(d);
      while (m % d == 0) m /= d;
    }
  if (m > 1) fac.push_back(m);
  for (std::int64_t g = 2; g < p; ++g) {
    bool ok = true;
    for (auto f : fac) {
      std::int64_t e = (p - 1) / f, r = 1, b = g;
      while (e) {
        if (e & 1) r = mulmod(r, b, p);
        b = mulmod(b, b, p);
        e >>= 1;
      }
      if (r == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  return 0;
}

// worker count: explicit value wins, then IKERN_WORKERS, then hardware
inline unsigned worker_count(unsigned requested = 0) {
  if (requested) return requested;
  if (const char* env = std::getenv("IKERN_WORKERS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned h = std::thread::hardware_concurrency();
  return h ? h : 1;
}

// Splits [0, n) into fixed blocks (independent of worker count), maps each
// block, and folds the partial results in block order.
template <class T, class Map, class Fold>
T parallel_map_reduce(std::int64_t n, std::int64_t block, T init, Map map, Fold fold,
                      unsigned workers = 0) {
  if (n <= 0) return init;
  block = std::max<std::int64_t>(1, block);
  const std::int64_t nb = (n + block - 1) / block;
  std::vector<T> part(static_cast<std::size_t>(nb), init);
  const unsigned w = std::min<std::int64_t>(worker_count(workers), nb);
  auto run = [&](unsigned id) {
    for (std::int64_t b = id; b < nb; b += w) part[b] = map(b * block, std::min(n, (b + 1) * block));
  };
  if (w <= 1) {
    run(0);
  } else {
    std::vector<std::thread> th;
    for (unsigned i = 0; i < w; ++i) th.emplace_back(run, i);
    for (auto& t : th) t.join();
  }
  T acc = std::move(init);
  for (auto& x : part) acc = fold(std::move(acc), x);
  return acc;
}

template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.empty()) return T{};
  if (v.size() <= 8) {
    T s = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) s += v[i];
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(std::span<const T>(v));
}

}  // namespace ikern

#pragma once

// Exact classical number theory backing the circuit constructions: modular
// arithmetic, the extended Euclidean trace and its midpoint, precomputed
// power/inverse tables, and continued-fraction post-processing of measured
// phases.  Everything here is integer-exact; intermediate products are taken
// in 128 bits so no operation ever rounds.

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "shorlab/errors.hpp"

namespace shorlab::modnum {

using i64 = std::int64_t;
using i128 = __int128;

/// Number of bits in |x|; bit_length(0) == 0.
constexpr int bit_length(i64 x) {
  if (x < 0) x = -x;
  int n = 0;
  while (x) {
    ++n;
    x >>= 1;
  }
  return n;
}

/// base^exp mod N for exp >= 0, N >= 2.  Total function; base may be any
/// integer (it is reduced first).
inline i64 mod_pow(i64 base, i64 exp, i64 N) {
  if (N < 2) throw InvalidArgumentError("mod_pow: modulus must be >= 2");
  if (exp < 0) throw InvalidArgumentError("mod_pow: exponent must be >= 0");
  i64 b = base % N;
  if (b < 0) b += N;
  i64 result = 1 % N;
  while (exp) {
    if (exp & 1) result = static_cast<i64>(static_cast<i128>(result) * b % N);
    b = static_cast<i64>(static_cast<i128>(b) * b % N);
    exp >>= 1;
  }
  return result;
}

/// a^-1 mod N.  Throws NotCoprimeError (carrying the gcd) when a and N share
/// a factor.
inline i64 mod_inv(i64 a, i64 N) {
  if (N < 2) throw InvalidArgumentError("mod_inv: modulus must be >= 2");
  i64 r0 = N, r1 = ((a % N) + N) % N;
  i64 t0 = 0, t1 = 1;
  while (r1 != 0) {
    const i64 q = r0 / r1;
    const i64 r2 = r0 - q * r1;
    const i64 t2 = t0 - q * t1;
    r0 = r1;
    r1 = r2;
    t0 = t1;
    t1 = t2;
  }
  if (r0 != 1)
    throw NotCoprimeError(r0, "mod_inv: gcd(" + std::to_string(a) + ", " +
                                  std::to_string(N) + ") = " + std::to_string(r0));
  return t0 < 0 ? t0 + N : t0;
}

/// One row of the extended-Euclid trace: r*a + k*N = r_prime.
struct EuclidRow {
  i64 r;
  i64 k;
  i64 r_prime;
};

/// Full extended-Euclid trace for (a, N), starting at (0,1,N), (1,0,a) and
/// ending at the row with r_prime == 1.  Requires gcd(a, N) == 1.
inline std::vector<EuclidRow> euclid_trace(i64 a, i64 N) {
  if (N < 2 || a <= 0 || a >= N)
    throw InvalidArgumentError("euclid_trace: need 0 < a < N, N >= 2");
  const i64 g = std::gcd(a, N);
  if (g != 1) throw NotCoprimeError(g, "euclid_trace: a and N are not coprime");
  std::vector<EuclidRow> rows;
  rows.push_back({0, 1, N});
  rows.push_back({1, 0, a});
  while (rows.back().r_prime != 1) {
    const EuclidRow& prev = rows[rows.size() - 2];
    const EuclidRow& last = rows.back();
    const i64 q = prev.r_prime / last.r_prime;
    rows.push_back({prev.r - q * last.r, prev.k - q * last.k,
                    prev.r_prime - q * last.r_prime});
  }
  return rows;
}

/// The midpoint of the Euclid trace: a pair (r, r') with r*a = r' (mod N)
/// and both sides around sqrt(N) in size.
struct MidpointSplit {
  i64 r;        // signed coefficient of a
  i64 r_prime;  // nonnegative remainder
  int n_prime;  // max(bits(|r|), bits(r_prime))
  bool both_below_sqrt;  // |r| < sqrt(N) and r' < sqrt(N), strictly
  bool invertible;       // gcd(|r|, N) == 1, i.e. r' / r mod N is defined
};

namespace detail {

inline MidpointSplit select_split(const std::vector<EuclidRow>& rows, i64 N,
                                  bool require_invertible) {
  const EuclidRow* best = nullptr;
  i64 best_max = 0;
  for (const EuclidRow& row : rows) {
    if (row.r == 0) continue;
    if (require_invertible && std::gcd(row.r < 0 ? -row.r : row.r, N) != 1)
      continue;
    const i64 abs_r = row.r < 0 ? -row.r : row.r;
    const i64 m = abs_r > row.r_prime ? abs_r : row.r_prime;
    if (best == nullptr || m < best_max) {  // ties keep the earlier row
      best = &row;
      best_max = m;
    }
  }
  const i64 abs_r = best->r < 0 ? -best->r : best->r;
  MidpointSplit split;
  split.r = best->r;
  split.r_prime = best->r_prime;
  split.n_prime = std::max(bit_length(abs_r), bit_length(best->r_prime));
  split.both_below_sqrt = abs_r * abs_r < N && best->r_prime * best->r_prime < N;
  split.invertible = std::gcd(abs_r, N) == 1;
  return split;
}

}  // namespace detail

/// Row of the trace minimizing max(|r|, r'); earlier row wins ties.  The
/// minimizer can share a factor with N (the `invertible` field says so); use
/// midpoint_split_invertible when the split has to act as a multiplier.
inline MidpointSplit midpoint_split(i64 a, i64 N) {
  return detail::select_split(euclid_trace(a, N), N, false);
}

/// Best row whose r is a unit mod N.  Always exists: the trace's last row has
/// r_prime == 1 and r = a^-1 up to sign.
inline MidpointSplit midpoint_split_invertible(i64 a, i64 N) {
  return detail::select_split(euclid_trace(a, N), N, true);
}

/// Classical context for order finding mod N with base a: bit count and the
/// repeated-squaring tables a^(2^i), a^(-2^i) for i in [0, 2n).
struct ModCtx {
  i64 N = 0;
  int n = 0;
  i64 a = 0;
  std::vector<i64> pow_table;
  std::vector<i64> inv_table;

  static ModCtx make(i64 N, i64 a) {
    if (N < 3 || N % 2 == 0)
      throw InvalidArgumentError("ModCtx: modulus must be odd and >= 3");
    if (a <= 0 || a >= N)
      throw InvalidArgumentError("ModCtx: base must lie in (0, N)");
    const i64 g = std::gcd(a, N);
    if (g != 1) throw NotCoprimeError(g, "ModCtx: base shares a factor with N");
    ModCtx ctx;
    ctx.N = N;
    ctx.n = bit_length(N);  // ceil(log2 N) for odd N
    ctx.a = a;
    i64 p = a;
    i64 ip = mod_inv(a, N);
    for (int i = 0; i < 2 * ctx.n; ++i) {
      ctx.pow_table.push_back(p);
      ctx.inv_table.push_back(ip);
      p = static_cast<i64>(static_cast<i128>(p) * p % N);
      ip = static_cast<i64>(static_cast<i128>(ip) * ip % N);
    }
    return ctx;
  }
};

/// Continued-fraction expansion of y/Q; returns the smallest convergent
/// denominator d < N with a^d = 1 (mod N), if any.  Q is typically a power
/// of 2 or of 3.  The expansion is capped at 2*ceil(log2 Q) convergents.
inline std::optional<i64> continued_fraction_order(i64 y, i64 Q, const ModCtx& ctx) {
  if (Q < 2 || y < 0 || y >= Q)
    throw InvalidArgumentError("continued_fraction_order: need 0 <= y < Q");
  if (y == 0) return std::nullopt;
  const int max_terms = 2 * bit_length(Q - 1) + 2;
  i64 num = y, den = Q;
  i64 k_m2 = 1, k_m1 = 0;  // convergent denominators k_{i-2}, k_{i-1}
  for (int t = 0; t < max_terms && den != 0; ++t) {
    const i64 term = num / den;
    const i64 rem = num - term * den;
    const i64 k = term * k_m1 + k_m2;
    k_m2 = k_m1;
    k_m1 = k;
    if (k >= ctx.N) break;
    if (k > 0 && mod_pow(ctx.a, k, ctx.N) == 1) return k;
    num = den;
    den = rem;
  }
  return std::nullopt;
}

/// The m base-p digits of x, least significant first.
inline std::vector<int> digits(i64 x, int radix, int count) {
  if (radix < 2) throw InvalidArgumentError("digits: radix must be >= 2");
  if (x < 0 || count < 0) throw InvalidArgumentError("digits: negative input");
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(x % radix);
    x /= radix;
  }
  if (x != 0) throw DigitOverflowError("digits: value does not fit digit count");
  return out;
}

/// Multiplicative order of a mod N by direct iteration (desk-scale N).
inline i64 multiplicative_order(i64 a, i64 N) {
  const i64 g = std::gcd(((a % N) + N) % N, N);
  if (g != 1) throw NotCoprimeError(g, "multiplicative_order: not a unit");
  i64 v = ((a % N) + N) % N;
  i64 d = 1;
  while (v != 1) {
    v = static_cast<i64>(static_cast<i128>(v) * (((a % N) + N) % N) % N);
    ++d;
  }
  return d;
}

/// Euler's totient by enumeration (desk-scale N).
inline i64 euler_phi(i64 N) {
  i64 count = 0;
  for (i64 x = 1; x <= N; ++x)
    if (std::gcd(x, N) == 1) ++count;
  return count;
}

}  // namespace shorlab::modnum

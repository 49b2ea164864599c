#pragma once

// Reversible arithmetic on sparse states: plain and Fourier-basis constant
// adders, comparators, exact modular addition with a single ancilla, the
// two-step and three-step register multiplications, the coset-ladder
// encode/decode pair and its approximate modular addition, and the in-place
// short-factor multiplication that runs in n + n' dits plus one work qubit.
//
// Everything in this header acts at permutation level: a gate is a bijection
// on basis labels, applied through sim::apply_permutation so that a buggy map
// is caught as a collision instead of silently corrupting the state.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "shorlab/errors.hpp"
#include "shorlab/modnum.hpp"
#include "shorlab/state.hpp"

namespace shorlab::arith {

using modnum::i128;
using modnum::i64;
using sim::DitRef;
using sim::SparseState;

/// A gate condition: active on labels where the dit's digit is in `mask`
/// (bit d of mask set means digit value d activates).
struct DitCond {
  DitRef dit;
  std::uint32_t mask = 0;
};

inline DitCond on_value(DitRef dit, int v) { return {std::move(dit), 1u << v}; }
inline DitCond on_one(DitRef dit) { return on_value(std::move(dit), 1); }

/// Counters for additions that left the register range and wrapped mod 2^w.
struct WrapStats {
  std::uint64_t wrapped_labels = 0;
  std::uint64_t wrap_ops = 0;
};

using Conds = std::span<const DitCond>;

namespace detail {

// Conditions resolved against a register view used by apply_permutation.
// Condition digits are read from the pre-image, so a condition may live
// inside a mapped register.
class CondSet {
 public:
  CondSet(const sim::RegisterLayout& layout, Conds conds,
          std::vector<std::string>& regs) {
    for (const DitCond& c : conds) {
      std::size_t view = regs.size();
      for (std::size_t i = 0; i < regs.size(); ++i)
        if (regs[i] == c.dit.reg) view = i;
      if (view == regs.size()) regs.push_back(c.dit.reg);
      const std::size_t ri = layout.index_of(c.dit.reg);
      const int radix = layout.reg(ri).radix;
      std::uint64_t stride = 1;
      for (int k = 0; k < c.dit.pos; ++k) stride *= static_cast<std::uint64_t>(radix);
      resolved_.push_back({view, stride, radix, c.mask});
    }
  }

  bool pass(std::span<const std::uint64_t> vals) const {
    for (const Resolved& r : resolved_) {
      const int d = static_cast<int>((vals[r.view] / r.stride) %
                                     static_cast<std::uint64_t>(r.radix));
      if (!(r.mask >> d & 1u)) return false;
    }
    return true;
  }

 private:
  struct Resolved {
    std::size_t view;
    std::uint64_t stride;
    int radix;
    std::uint32_t mask;
  };
  std::vector<Resolved> resolved_;
};

// Applies v -> f(v) to one register on labels satisfying all conditions.
inline void cond_map(SparseState& st, const std::string& reg, Conds conds,
                     const std::function<std::uint64_t(std::uint64_t)>& f) {
  std::vector<std::string> regs{reg};
  const CondSet cs(st.layout(), conds, regs);
  sim::apply_permutation(st, regs, [&](std::span<std::uint64_t> vals) {
    if (cs.pass(vals)) vals[0] = f(vals[0]);
  });
}

inline std::uint64_t reg_size(const SparseState& st, const std::string& reg) {
  return st.layout().reg_size(st.layout().index_of(reg));
}

inline void check_support_below(const SparseState& st, const std::string& reg,
                                std::uint64_t bound, const char* who) {
  const sim::RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  for (const auto& [label, amp] : st.amps())
    if (layout.value(label, ri) >= bound)
      throw InputOutOfRangeError(std::string(who) + ": register " + reg +
                                 " holds a value >= " + std::to_string(bound) +
                                 " on the support");
}

inline void check_register_zero(const SparseState& st, const std::string& reg,
                                const char* who) {
  const sim::RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  for (const auto& [label, amp] : st.amps())
    if (layout.value(label, ri) != 0)
      throw AncillaNotZeroError(std::string(who) + ": register " + reg +
                                " is not |0> on the support");
}

inline void check_dit_zero(const SparseState& st, const DitRef& dit,
                           const char* who) {
  const sim::RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(dit.reg);
  for (const auto& [label, amp] : st.amps())
    if (layout.digit(label, ri, dit.pos) != 0)
      throw AncillaNotZeroError(std::string(who) + ": work qubit not |0>");
}

}  // namespace detail

/// v -> (v + c) mod p^w.  Signed c; wraps past the register size count as
/// wrap events when `stats` is given.
inline void add_const(SparseState& st, const std::string& reg, i64 c,
                      Conds conds = {}, WrapStats* stats = nullptr) {
  const std::uint64_t size = detail::reg_size(st, reg);
  const std::uint64_t cr = static_cast<std::uint64_t>(
      ((c % static_cast<i64>(size)) + static_cast<i64>(size)) %
      static_cast<i64>(size));
  if (cr == 0) return;
  std::uint64_t wrapped = 0;
  detail::cond_map(st, reg, conds, [&](std::uint64_t v) {
    if (v >= size - cr) ++wrapped;
    return v + cr >= size ? v + cr - size : v + cr;
  });
  if (stats != nullptr && wrapped != 0) {
    stats->wrapped_labels += wrapped;
    stats->wrap_ops += 1;
  }
}

/// Toggles a flag qubit on labels where the register value is >= c.
inline void compare_ge_flag(SparseState& st, const std::string& reg, i64 c,
                            const DitRef& flag, Conds conds = {}) {
  const sim::RegisterLayout& layout = st.layout();
  if (layout.reg(layout.index_of(flag.reg)).radix != 2)
    throw InvalidArgumentError("compare_ge_flag: flag must be a qubit");
  std::uint64_t fstride = 1;
  for (int k = 0; k < flag.pos; ++k) fstride *= 2;
  std::vector<std::string> regs{flag.reg, reg};
  const detail::CondSet cs(layout, conds, regs);
  sim::apply_permutation(st, regs, [&](std::span<std::uint64_t> vals) {
    if (!cs.pass(vals)) return;
    if (static_cast<i64>(vals[1]) >= c) vals[0] ^= fstride;
  });
}

/// Flips a qubit (X gate) under conditions.
inline void flip_dit(SparseState& st, const DitRef& dit, Conds conds = {}) {
  const sim::RegisterLayout& layout = st.layout();
  if (layout.reg(layout.index_of(dit.reg)).radix != 2)
    throw InvalidArgumentError("flip_dit: dit must be a qubit");
  std::uint64_t stride = 1;
  for (int k = 0; k < dit.pos; ++k) stride *= 2;
  detail::cond_map(st, dit.reg, conds, [&](std::uint64_t v) { return v ^ stride; });
}

/// Swaps the values of two same-sized registers.
inline void swap_registers(SparseState& st, const std::string& regA,
                           const std::string& regB, Conds conds = {}) {
  const sim::RegisterLayout& layout = st.layout();
  if (layout.reg_size(layout.index_of(regA)) !=
      layout.reg_size(layout.index_of(regB)))
    throw LayoutMismatchError("swap_registers: sizes differ");
  std::vector<std::string> regs{regA, regB};
  const detail::CondSet cs(layout, conds, regs);
  sim::apply_permutation(st, regs, [&](std::span<std::uint64_t> vals) {
    if (cs.pass(vals)) std::swap(vals[0], vals[1]);
  });
}

/// Swaps two same-radix dits, possibly across registers.
inline void swap_dits(SparseState& st, const DitRef& d1, const DitRef& d2,
                      Conds conds = {}) {
  const sim::RegisterLayout& layout = st.layout();
  const std::size_t r1 = layout.index_of(d1.reg);
  const std::size_t r2 = layout.index_of(d2.reg);
  if (layout.reg(r1).radix != layout.reg(r2).radix)
    throw LayoutMismatchError("swap_dits: radices differ");
  const std::uint64_t p = static_cast<std::uint64_t>(layout.reg(r1).radix);
  std::vector<std::string> regs{d1.reg};
  std::size_t view2 = 0;
  if (d2.reg != d1.reg) {
    regs.push_back(d2.reg);
    view2 = 1;
  }
  const detail::CondSet cs(layout, conds, regs);
  std::uint64_t s1 = 1, s2 = 1;
  for (int k = 0; k < d1.pos; ++k) s1 *= p;
  for (int k = 0; k < d2.pos; ++k) s2 *= p;
  sim::apply_permutation(st, regs, [&](std::span<std::uint64_t> vals) {
    if (!cs.pass(vals)) return;
    const std::uint64_t a = vals[0] / s1 % p;
    const std::uint64_t b = vals[view2] / s2 % p;
    vals[0] += (b - a) * s1;
    vals[view2] += (a - b) * s2;
  });
}

/// Adds a constant to a register sitting in the Fourier basis: per-dit
/// diagonal phases e^(2*pi*i * c * d_j * p^j / p^w), so that
/// qft_inverse . fourier_add_const(c) . qft == add_const(c).
inline void fourier_add_const(SparseState& st, const std::string& reg, i64 c) {
  const sim::RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  const int p = layout.reg(ri).radix;
  const int w = layout.reg(ri).width;
  const double size = static_cast<double>(layout.reg_size(ri));
  for (int j = 0; j < w; ++j) {
    const double weight = std::pow(static_cast<double>(p), j);
    const std::uint64_t stride = layout.dit_stride(ri, j);
    for (auto& [label, amp] : st.amps()) {
      const int d = static_cast<int>(label / stride % static_cast<std::uint64_t>(p));
      if (d == 0) continue;
      const double ang =
          2.0 * std::numbers::pi * static_cast<double>(c) * d * weight / size;
      amp *= sim::Amplitude{std::cos(ang), std::sin(ang)};
    }
  }
}

/// v -> (v + c) mod N with the comparison ancilla choreography: compare
/// against N - c, conditionally subtract N, add c, then uncompute the flag by
/// comparing the result with c.  Requires v < N on the support, 0 <= c < N,
/// and the ancilla in |0>; the ancilla comes back clean.
inline void mod_add_const_exact(SparseState& st, const std::string& reg, i64 c,
                                i64 N, const DitRef& ancilla, Conds conds = {}) {
  if (c < 0 || c >= N)
    throw InvalidArgumentError("mod_add_const_exact: need 0 <= c < N");
  if (static_cast<std::uint64_t>(N) > detail::reg_size(st, reg))
    throw TooLargeError("mod_add_const_exact: N exceeds register range");
  detail::check_support_below(st, reg, static_cast<std::uint64_t>(N),
                              "mod_add_const_exact");
  detail::check_dit_zero(st, ancilla, "mod_add_const_exact");
  const i64 size = static_cast<i64>(detail::reg_size(st, reg));
  std::vector<DitCond> with_flag(conds.begin(), conds.end());
  with_flag.push_back(on_one(ancilla));
  compare_ge_flag(st, reg, N - c, ancilla, conds);
  add_const(st, reg, size - N, with_flag);  // subtract N where flagged
  add_const(st, reg, c, conds);
  compare_ge_flag(st, reg, c, ancilla, conds);  // with the X below: toggle on < c
  flip_dit(st, ancilla, conds);
}

namespace detail {

// Permutation-level modular addition used inside the multiplication
// decompositions: (v + c) mod N for v < N, identity above.  The comparator
// internals are costed in the resource model, not expanded into gates here.
inline void mod_add(SparseState& st, const std::string& reg, i64 c, i64 N,
                    Conds conds) {
  const std::uint64_t uN = static_cast<std::uint64_t>(N);
  const std::uint64_t cr = static_cast<std::uint64_t>(((c % N) + N) % N);
  if (cr == 0) return;
  cond_map(st, reg, conds, [&](std::uint64_t v) {
    if (v >= uN) return v;
    return v + cr >= uN ? v + cr - uN : v + cr;
  });
}

}  // namespace detail

/// v -> (N - v) mod N with 0 fixed: the "multiplication by -1" of the
/// three-step construction.
inline void negate_mod(SparseState& st, const std::string& reg, i64 N,
                       Conds conds = {}) {
  const std::uint64_t uN = static_cast<std::uint64_t>(N);
  detail::cond_map(st, reg, conds, [&](std::uint64_t v) {
    if (v == 0 || v >= uN) return v;
    return uN - v;
  });
}

/// |alpha, 0> -> |a*alpha mod N, 0> through the auxiliary register: add
/// a*regA into regB (n conditional modular additions of 2^j a), subtract
/// a^-1*regB from regA, swap.  regB must be |0> on the support.
inline void mul_two_step(SparseState& st, const std::string& regA,
                         const std::string& regB, i64 a,
                         const modnum::ModCtx& ctx, Conds conds = {}) {
  const i64 N = ctx.N;
  const i64 g = std::gcd(((a % N) + N) % N, N);
  if (g != 1) throw NotCoprimeError(g, "mul_two_step: multiplier not a unit");
  detail::check_register_zero(st, regB, "mul_two_step");
  detail::check_support_below(st, regA, static_cast<std::uint64_t>(N),
                              "mul_two_step");
  const i64 ainv = modnum::mod_inv(a, N);
  std::vector<DitCond> cc(conds.begin(), conds.end());
  cc.emplace_back();
  i64 pow2a = ((a % N) + N) % N;
  for (int j = 0; j < ctx.n; ++j) {
    cc.back() = on_one({regA, j});
    detail::mod_add(st, regB, pow2a, N, cc);
    pow2a = pow2a * 2 % N;
  }
  i64 pow2ainv = ainv;
  for (int j = 0; j < ctx.n; ++j) {
    cc.back() = on_one({regB, j});
    detail::mod_add(st, regA, N - pow2ainv, N, cc);
    pow2ainv = pow2ainv * 2 % N;
  }
  swap_registers(st, regA, regB, conds);
}

/// |alpha, beta> -> |a*alpha mod N, a^-1*beta mod N> without zeroed work
/// registers: cross-add a*regA into regB, subtract a^-1*regB from regA,
/// cross-add a*regA into regB again, then swap and negate.
inline void mul_three_step_uninit(SparseState& st, const std::string& regA,
                                  const std::string& regB, i64 a,
                                  const modnum::ModCtx& ctx, Conds conds = {}) {
  const i64 N = ctx.N;
  const i64 g = std::gcd(((a % N) + N) % N, N);
  if (g != 1)
    throw NotCoprimeError(g, "mul_three_step_uninit: multiplier not a unit");
  detail::check_support_below(st, regA, static_cast<std::uint64_t>(N),
                              "mul_three_step_uninit");
  detail::check_support_below(st, regB, static_cast<std::uint64_t>(N),
                              "mul_three_step_uninit");
  const i64 ainv = modnum::mod_inv(a, N);
  std::vector<DitCond> cc(conds.begin(), conds.end());
  cc.emplace_back();
  const auto cross_add = [&](const std::string& from, const std::string& to,
                             i64 mult, bool subtract) {
    i64 c = ((mult % N) + N) % N;
    for (int j = 0; j < ctx.n; ++j) {
      cc.back() = on_one({from, j});
      detail::mod_add(st, to, subtract ? N - c : c, N, cc);
      c = c * 2 % N;
    }
  };
  cross_add(regA, regB, a, false);    // (alpha, beta + a*alpha)
  cross_add(regB, regA, ainv, true);  // (-a^-1*beta, beta + a*alpha)
  cross_add(regA, regB, a, false);    // (-a^-1*beta, a*alpha)
  swap_registers(st, regA, regB, conds);
  negate_mod(st, regB, N, conds);     // (a*alpha, a^-1*beta)
}

/// Trinary-controlled multiplication: control digit d applies a^(d-1) to
/// regA (and a^(1-d) to regB).  Realized as controlled swaps around the
/// three-step multiply so the addition work is shared between the d=0 and
/// d=2 branches; the d=1 branch is free.
inline void ctrl_mul_trinary(SparseState& st, const DitRef& control,
                             const std::string& regA, const std::string& regB,
                             i64 a, const modnum::ModCtx& ctx) {
  const sim::RegisterLayout& layout = st.layout();
  if (layout.reg(layout.index_of(control.reg)).radix != 3)
    throw InvalidArgumentError("ctrl_mul_trinary: control must be a qutrit");
  const DitCond swaps[] = {on_value(control, 0)};
  const DitCond acts[] = {{control, (1u << 0) | (1u << 2)}};
  swap_registers(st, regA, regB, swaps);
  mul_three_step_uninit(st, regA, regB, a, ctx, acts);
  swap_registers(st, regA, regB, swaps);
}

/// Width parameters of the coset-ladder representation of Z_N.
struct CosetParams {
  std::uint64_t x_max = 1;  // number of ladder rungs
  int pad_bits = 0;         // extra qubits above the n value bits

  static CosetParams make(std::uint64_t x_max, int headroom = 2) {
    if (x_max < 1) throw InvalidArgumentError("CosetParams: x_max must be >= 1");
    CosetParams p;
    p.x_max = x_max;
    p.pad_bits = ladder_bits_for(x_max) + headroom;
    return p;
  }

  int ladder_bits() const { return ladder_bits_for(x_max); }

  static int ladder_bits_for(std::uint64_t x_max) {
    int bits = 0;
    while ((1ULL << bits) < x_max) ++bits;
    return bits;
  }
};

/// |b>|0> -> (1/sqrt(x_max)) sum_x |b + x N>|0>: prepare the work register
/// uniform, then per work bit x_i add 2^i N into the value register and
/// uncompute x_i by comparing the value register with 2^i N.  Exact because
/// b < N.
inline void coset_encode(SparseState& st, const std::string& value_reg,
                         const std::string& work_reg, i64 N,
                         const CosetParams& params) {
  const sim::RegisterLayout& layout = st.layout();
  const int xbits = layout.reg(layout.index_of(work_reg)).width;
  if (static_cast<i128>(params.x_max) * N >
      static_cast<i128>(detail::reg_size(st, value_reg)))
    throw TooLargeError("coset_encode: ladder does not fit the value register");
  detail::check_support_below(st, value_reg, static_cast<std::uint64_t>(N),
                              "coset_encode");
  sim::prepare_uniform(st, work_reg, params.x_max);
  for (int i = 0; i < xbits; ++i) {
    const i64 step = N << i;
    const DitCond bit[] = {on_one({work_reg, i})};
    add_const(st, value_reg, step, bit);
    compare_ge_flag(st, value_reg, step, {work_reg, i});
  }
}

namespace detail {

// Inverse of the uniform preparation: the reflection sending the uniform
// window back to |0>.  Returns the norm left outside |0> (zero for a clean
// ladder); amplitudes below the pruning threshold are dropped.
inline double uniform_unprepare(SparseState& st, const std::string& reg,
                                std::uint64_t x_max) {
  const sim::RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  if (x_max > 1) {
    const double s = 1.0 / std::sqrt(static_cast<double>(x_max));
    // Householder vector v = u - e0 over the work register, u the uniform
    // window; R = I - 2 v v^T / (v.v) sends u -> e0 and is self-inverse.
    const double v0 = s - 1.0;
    const double vv = 2.0 * (1.0 - s);
    std::unordered_map<std::uint64_t, sim::Amplitude> inner;
    for (const auto& [label, amp] : st.amps()) {
      const std::uint64_t x = layout.value(label, ri);
      if (x >= x_max) continue;
      inner[layout.with_value(label, ri, 0)] += (x == 0 ? v0 : s) * amp;
    }
    for (auto& [rest, dot] : inner) dot *= 2.0 / vv;
    SparseState::AmpMap out;
    out.reserve(st.amps().size());
    for (const auto& [label, amp] : st.amps()) {
      const std::uint64_t x = layout.value(label, ri);
      sim::Amplitude a = amp;
      if (x < x_max) {
        const auto it = inner.find(layout.with_value(label, ri, 0));
        if (it != inner.end()) a -= it->second * (x == 0 ? v0 : s);
      }
      if (std::abs(a) >= sim::kPruneThreshold) out[label] = a;
    }
    st.amps() = std::move(out);
  }
  double residual = 0;
  for (const auto& [label, amp] : st.amps())
    if (layout.value(label, ri) != 0) residual += std::norm(amp);
  return residual;
}

}  // namespace detail

/// Exact inverse circuit of coset_encode.  Throws NotCosetStateError (and
/// leaves the state unusable) when the support is not a clean uniform ladder,
/// which shows up as a residual excitation of the work register.
inline void coset_decode(SparseState& st, const std::string& value_reg,
                         const std::string& work_reg, i64 N,
                         const CosetParams& params) {
  const sim::RegisterLayout& layout = st.layout();
  const int xbits = layout.reg(layout.index_of(work_reg)).width;
  for (int i = xbits - 1; i >= 0; --i) {
    const i64 step = N << i;
    compare_ge_flag(st, value_reg, step, {work_reg, i});
    const DitCond bit[] = {on_one({work_reg, i})};
    add_const(st, value_reg, -step, bit);
  }
  const double residual = detail::uniform_unprepare(st, work_reg, params.x_max);
  if (residual > 1e-9)
    throw NotCosetStateError(
        residual, "coset_decode: residual work-register excitation " +
                      std::to_string(residual));
}

/// Plain (non-modular) addition on the wide register holding a coset ladder.
inline void coset_add_const(SparseState& st, const std::string& value_reg, i64 c,
                            Conds conds = {}, WrapStats* stats = nullptr) {
  add_const(st, value_reg, c, conds, stats);
}

/// Subtracts m*N from the ladder, restoring headroom.  Pure relabeling; the
/// chosen multiple must stay below the current minimum support value.
inline void coset_recenter(SparseState& st, const std::string& value_reg, i64 N,
                           i64 m) {
  if (m < 0) throw InvalidArgumentError("coset_recenter: negative multiple");
  if (m == 0) return;
  const sim::RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(value_reg);
  std::uint64_t min_v = ~0ULL;
  for (const auto& [label, amp] : st.amps())
    min_v = std::min(min_v, layout.value(label, ri));
  const i128 sub = static_cast<i128>(m) * N;
  if (sub > static_cast<i128>(min_v))
    throw RecenterUnderflowError("coset_recenter: ladder would go negative");
  add_const(st, value_reg, -static_cast<i64>(sub));
}

enum class ControlRep { usual, coset };
enum class RecenterPolicy { off, threshold };

struct CosetMulOptions {
  std::vector<DitCond> conds;  // extra gate conditions (e.g. the x control)
  RecenterPolicy recenter = RecenterPolicy::threshold;
  WrapStats* stats = nullptr;
  bool subtract = false;  // accumulate -a * control instead
};

/// accum (coset ladder of beta) <- ladder of (beta + a*alpha mod N): one
/// conditional plain addition of 2^j a mod N per control bit.  A control
/// register in the coset representation simply contributes its pad bits as
/// extra additions; those add multiples of x*N, invisible mod N.  The
/// accumulator is recentered whenever its minimum support value climbs past
/// (x_max/2)*N (threshold policy).
inline void coset_mod_mul_accumulate(SparseState& st, const std::string& ctrl_reg,
                                     ControlRep rep, const std::string& accum_reg,
                                     i64 a, const modnum::ModCtx& ctx,
                                     const CosetParams& params,
                                     const CosetMulOptions& opts = {}) {
  const sim::RegisterLayout& layout = st.layout();
  const i64 N = ctx.N;
  const int ctrl_width = layout.reg(layout.index_of(ctrl_reg)).width;
  const int nbits = rep == ControlRep::coset ? ctrl_width : ctx.n;
  const std::size_t ai = layout.index_of(accum_reg);
  const i64 threshold = static_cast<i64>(params.x_max / 2) * N;

  std::vector<DitCond> cc(opts.conds.begin(), opts.conds.end());
  cc.emplace_back();
  i64 c = ((a % N) + N) % N;
  for (int j = 0; j < nbits; ++j) {
    cc.back() = on_one({ctrl_reg, j});
    coset_add_const(st, accum_reg, opts.subtract ? -c : c, cc, opts.stats);
    c = c * 2 % N;
    if (opts.recenter == RecenterPolicy::threshold) {
      std::uint64_t min_v = ~0ULL;
      for (const auto& [label, amp] : st.amps())
        min_v = std::min(min_v, layout.value(label, ai));
      if (static_cast<i64>(min_v) > threshold)
        coset_recenter(st, accum_reg, N, static_cast<i64>(min_v) / N);
    }
  }
}

/// Precomputed data for the in-place short-factor multiplication.
struct ShortMulParams {
  i64 a_short = 1;  // odd multiplier
  int n_prime = 1;  // its bit width
  i64 N = 3;
  int n = 2;                          // bit width of N
  std::vector<i64> uncompute_consts;  // 2^i * (-N)^-1 mod a_short, i in [0, n)

  static ShortMulParams make(i64 a_short, i64 N) {
    if (N < 3 || N % 2 == 0)
      throw InvalidArgumentError("ShortMulParams: modulus must be odd and >= 3");
    if (a_short < 1)
      throw InvalidArgumentError("ShortMulParams: multiplier must be positive");
    if (a_short % 2 == 0)
      throw EvenMultiplierError("ShortMulParams: multiplier must be odd");
    const i64 g = std::gcd(a_short, N);
    if (g != 1)
      throw NotCoprimeError(g, "ShortMulParams: multiplier shares a factor with N");
    ShortMulParams p;
    p.a_short = a_short;
    p.n_prime = modnum::bit_length(a_short);
    p.N = N;
    p.n = modnum::bit_length(N);
    if (a_short == 1) {
      p.uncompute_consts.assign(static_cast<std::size_t>(p.n), 0);
    } else {
      i64 c = modnum::mod_inv(((-N) % a_short + a_short) % a_short, a_short);
      for (int i = 0; i < p.n; ++i) {
        p.uncompute_consts.push_back(c);
        c = c * 2 % a_short;
      }
    }
    return p;
  }
};

/// Live dits: positions holding a nonzero digit on at least one support label.
inline int live_footprint(const SparseState& st,
                          std::span<const std::string> regs) {
  const sim::RegisterLayout& layout = st.layout();
  int live = 0;
  for (const std::string& name : regs) {
    const std::size_t ri = layout.index_of(name);
    const std::uint64_t p = static_cast<std::uint64_t>(layout.reg(ri).radix);
    const int w = layout.reg(ri).width;
    std::uint64_t stride = 1;
    for (int pos = 0; pos < w; ++pos, stride *= p) {
      for (const auto& [label, amp] : st.amps()) {
        if (layout.value(label, ri) / stride % p != 0) {
          ++live;
          break;
        }
      }
    }
  }
  return live;
}

/// Strict-mode footprint accounting: max_live is updated after every
/// sub-step; a nonnegative limit turns violations into errors.
struct FootprintTrace {
  int max_live = 0;
  int limit = -1;
};

namespace detail {

// One reversible sub-step of a short multiplication.  run(st, inverse)
// applies the step or its inverse; every step knows how to undo itself.
using ShortStep = std::function<void(SparseState&, bool)>;

struct ShortMulCircuit {
  std::vector<ShortStep> steps;
  std::string reg;
  DitRef work;

  void append_ctrl_add(i64 c, DitRef cond_dit, Conds outer) {
    std::vector<DitCond> conds(outer.begin(), outer.end());
    conds.push_back(on_one(std::move(cond_dit)));
    steps.push_back([r = reg, c, conds](SparseState& st, bool inverse) {
      add_const(st, r, inverse ? -c : c, conds);
    });
  }

  void append_compare_toggle(i64 c, Conds outer) {
    std::vector<DitCond> conds(outer.begin(), outer.end());
    steps.push_back([r = reg, c, f = work, conds](SparseState& st, bool) {
      compare_ge_flag(st, r, c, f, conds);  // self-inverse
    });
  }

  // Comparator over the low `low_bits` wires only; bits parked above them
  // (the already-computed quotient bits) stay out of the comparison.
  void append_compare_low_toggle(i64 c, int low_bits, Conds outer) {
    std::vector<DitCond> conds(outer.begin(), outer.end());
    steps.push_back([r = reg, c, low_bits, f = work,
                     conds](SparseState& st, bool) {
      const sim::RegisterLayout& layout = st.layout();
      std::uint64_t fstride = 1;
      for (int k = 0; k < f.pos; ++k) fstride *= 2;
      std::vector<std::string> regs{f.reg, r};
      const CondSet cs(layout, conds, regs);
      const std::uint64_t mask = (1ULL << low_bits) - 1;
      sim::apply_permutation(st, regs, [&](std::span<std::uint64_t> vals) {
        if (!cs.pass(vals)) return;
        if (static_cast<i64>(vals[1] & mask) >= c) vals[0] ^= fstride;
      });
    });
  }

  void append_swap_flag_with(int pos, Conds outer) {
    std::vector<DitCond> conds(outer.begin(), outer.end());
    steps.push_back(
        [f = work, t = DitRef{reg, pos}, conds](SparseState& st, bool) {
          swap_dits(st, f, t, conds);  // self-inverse
        });
  }

  void append_flip_flag_on_low_bit(Conds outer) {
    std::vector<DitCond> conds(outer.begin(), outer.end());
    conds.push_back(on_one({reg, 0}));
    steps.push_back(
        [f = work, conds](SparseState& st, bool) { flip_dit(st, f, conds); });
  }

  void append_rotate_left(int width, Conds outer) {
    std::vector<DitCond> conds(outer.begin(), outer.end());
    steps.push_back([r = reg, width, conds](SparseState& st, bool inverse) {
      const std::uint64_t size = 1ULL << width;
      cond_map(st, r, conds, [&](std::uint64_t v) {
        if (inverse) return (v >> 1) | ((v & 1) << (width - 1));
        return (v << 1 | v >> (width - 1)) & (size - 1);
      });
    });
  }

  // Modular addition of +/- c into the quotient block (bits [n, n+n') of
  // reg), reduced mod a_short, conditioned on one low bit of reg.
  void append_q_block_mod_add(i64 c, i64 a_short, int n, int n_prime,
                              int cond_bit, bool subtract, Conds outer) {
    std::vector<DitCond> conds(outer.begin(), outer.end());
    conds.push_back(on_one({reg, cond_bit}));
    steps.push_back([r = reg, c, a_short, n, n_prime, subtract,
                     conds](SparseState& st, bool inverse) {
      const std::uint64_t block_mask = ((1ULL << n_prime) - 1) << n;
      const std::uint64_t ua = static_cast<std::uint64_t>(a_short);
      i64 amount = c % a_short;
      if (subtract != inverse) amount = (a_short - amount) % a_short;
      const std::uint64_t cr = static_cast<std::uint64_t>(amount);
      if (cr == 0) return;
      cond_map(st, r, conds, [&](std::uint64_t v) {
        const std::uint64_t q = (v & block_mask) >> n;
        if (q >= ua) return v;
        const std::uint64_t q2 = q + cr >= ua ? q + cr - ua : q + cr;
        return (v & ~block_mask) | (q2 << n);
      });
    });
  }

  void run(SparseState& st, bool inverse, FootprintTrace* trace,
           std::span<const std::string> foot_regs) const {
    const auto step_and_trace = [&](const ShortStep& s) {
      s(st, inverse);
      if (trace != nullptr) {
        const int live = live_footprint(st, foot_regs);
        trace->max_live = std::max(trace->max_live, live);
        if (trace->limit >= 0 && live > trace->limit)
          throw FootprintExceededError(
              live, trace->limit,
              "short_mul: live footprint " + std::to_string(live) +
                  " exceeds " + std::to_string(trace->limit));
      }
    };
    if (!inverse)
      for (const ShortStep& s : steps) step_and_trace(s);
    else
      for (auto it = steps.rbegin(); it != steps.rend(); ++it)
        step_and_trace(*it);
  }
};

// The three stages for an odd multiplier: non-modular multiply walking the
// source bits from most significant down (the consumed bit reappears as the
// low bit of the evolving sum, so no separate uncompute pass is needed),
// restoring division by N parking quotient bits in freed positions via the
// work qubit, then the mod-a accumulation of the remainder run backwards to
// clear the quotient.
inline ShortMulCircuit build_short_mul(const std::string& reg, const DitRef& work,
                                       const ShortMulParams& p, int reg_width,
                                       Conds outer) {
  ShortMulCircuit c;
  c.reg = reg;
  c.work = work;
  const int n = p.n;
  const int np = p.n_prime;
  if (reg_width < n + np)
    throw TooLargeError("short_mul: register narrower than n + n'");
  if (p.a_short == 1) return c;
  // Stage 1: consuming source bit (n-1-k) adds (a-1)*2^(n-1-k), which never
  // carries into the bit itself since a is odd.
  for (int k = 0; k < n; ++k) {
    const int bit = n - 1 - k;
    c.append_ctrl_add((p.a_short - 1) << bit, {reg, bit}, outer);
  }
  // Stage 2: restoring division by N.  The remainder occupies the low
  // n+i+1 wires at step i, so the comparator is masked to them; quotient
  // bit i then parks at position n+i, which the subtraction just zeroed.
  for (int i = np - 1; i >= 0; --i) {
    const i64 step = p.N << i;
    c.append_compare_low_toggle(step, n + i + 1, outer);
    c.append_ctrl_add(-step, work, outer);
    c.append_swap_flag_with(n + i, outer);
  }
  // Stage 3: clear q = rem * (-N)^-1 mod a by subtracting the per-bit
  // constants of the remainder.
  for (int j = n - 1; j >= 0; --j)
    c.append_q_block_mod_add(p.uncompute_consts[static_cast<std::size_t>(j)],
                             p.a_short, n, np, j, /*subtract=*/true, outer);
  return c;
}

// One modular doubling v -> 2v mod N: compare, cyclic shift up, conditional
// subtract, flag uncomputed from the parity of the result (N odd).
inline ShortMulCircuit build_double_mod(const std::string& reg, const DitRef& work,
                                        i64 N, int reg_width, Conds outer) {
  ShortMulCircuit c;
  c.reg = reg;
  c.work = work;
  c.append_compare_toggle((N + 1) / 2, outer);
  c.append_rotate_left(reg_width, outer);
  c.append_ctrl_add(-N, work, outer);
  c.append_flip_flag_on_low_bit(outer);
  return c;
}

}  // namespace detail

/// In-place |alpha> -> |a_short * alpha mod N> for an odd multiplier of n'
/// bits, touching only the n + n' register dits plus the single work qubit.
/// `trace`, when given, records the live footprint after every sub-step and
/// enforces trace->limit when nonnegative.  `inverse` runs the exact reverse
/// circuit (division by a_short).
inline void short_mul(SparseState& st, const std::string& reg, const DitRef& work,
                      const ShortMulParams& params,
                      FootprintTrace* trace = nullptr, Conds conds = {},
                      bool inverse = false) {
  if (params.a_short % 2 == 0)
    throw EvenMultiplierError("short_mul: multiplier must be odd");
  const sim::RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  if (layout.reg(ri).radix != 2 ||
      layout.reg(layout.index_of(work.reg)).radix != 2)
    throw InvalidArgumentError("short_mul: binary registers required");
  detail::check_support_below(st, reg, static_cast<std::uint64_t>(params.N),
                              "short_mul");
  detail::check_dit_zero(st, work, "short_mul");
  const std::string foot_regs[] = {reg, work.reg};
  detail::build_short_mul(reg, work, params, layout.reg(ri).width, conds)
      .run(st, inverse, trace, foot_regs);
}

/// alpha -> a*alpha mod N where a = r'/r mod N from the Euclid midpoint:
/// multiply by r' (odd part, then one modular doubling per factor of two),
/// then run the circuit for |r| backwards (dividing), then negate if r < 0.
/// Only multipliers of about n' bits ever touch the register.
inline void short_mul_pair(SparseState& st, const std::string& reg,
                           const DitRef& work, const modnum::MidpointSplit& split,
                           const modnum::ModCtx& ctx,
                           FootprintTrace* trace = nullptr, Conds conds = {}) {
  if (!split.invertible)
    throw NotCoprimeError(std::gcd(split.r < 0 ? -split.r : split.r, ctx.N),
                          "short_mul_pair: split coefficient is not a unit mod N");
  const sim::RegisterLayout& layout = st.layout();
  const int width = layout.reg(layout.index_of(reg)).width;
  const std::string foot_regs[] = {reg, work.reg};

  const auto odd_part = [](i64 v, int& shifts) {
    shifts = 0;
    while (v % 2 == 0) {
      v /= 2;
      ++shifts;
    }
    return v;
  };

  int s_rp = 0, s_r = 0;
  const i64 odd_rp = odd_part(split.r_prime, s_rp);
  const i64 odd_r = odd_part(split.r < 0 ? -split.r : split.r, s_r);

  // multiply by r'
  if (odd_rp > 1)
    short_mul(st, reg, work, ShortMulParams::make(odd_rp, ctx.N), trace, conds);
  for (int k = 0; k < s_rp; ++k)
    detail::build_double_mod(reg, work, ctx.N, width, conds)
        .run(st, false, trace, foot_regs);
  // divide by |r| (the reverse of multiplying by it)
  for (int k = 0; k < s_r; ++k)
    detail::build_double_mod(reg, work, ctx.N, width, conds)
        .run(st, true, trace, foot_regs);
  if (odd_r > 1)
    short_mul(st, reg, work, ShortMulParams::make(odd_r, ctx.N), trace, conds,
              /*inverse=*/true);
  if (split.r < 0) negate_mod(st, reg, ctx.N, conds);
}

}  // namespace shorlab::arith

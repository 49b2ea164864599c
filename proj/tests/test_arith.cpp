#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <memory>
#include <numeric>
#include <vector>

#include "shorlab/arith.hpp"
#include "shorlab/modnum.hpp"
#include "shorlab/rng.hpp"
#include "shorlab/state.hpp"

using namespace shorlab;
using modnum::i64;
using sim::Amplitude;
using sim::RegisterLayout;
using sim::SparseState;

namespace {

std::shared_ptr<const RegisterLayout> make_layout(
    std::vector<sim::RegisterSpec> regs) {
  return std::make_shared<const RegisterLayout>(RegisterLayout(std::move(regs)));
}

// Distinct amplitude per index; permutations must carry tags around exactly,
// so the mapping checks below use bitwise equality.
Amplitude tag(std::uint64_t i, std::uint64_t total) {
  const double s = 1.0 / std::sqrt(static_cast<double>(total) * 8.0);
  return {s * (1.0 + static_cast<double>(i % 2)),
          s * static_cast<double>(i % 3)};
}

std::vector<std::uint64_t> vals(std::initializer_list<std::uint64_t> v) {
  return std::vector<std::uint64_t>(v);
}

}  // namespace

TEST_CASE("add_const") {
  const auto l = make_layout({{"x", 2, 4}});
  auto st = sim::new_basis_state(l, vals({5}));
  arith::add_const(st, "x", 0);
  CHECK(st.amp(5) == Amplitude{1, 0});
  arith::add_const(st, "x", 3);
  CHECK(st.amp(8) == Amplitude{1, 0});
  SECTION("wrap at the register size is modular and counted") {
    auto w = sim::new_basis_state(l, vals({15}));
    arith::WrapStats stats;
    arith::add_const(w, "x", 1, {}, &stats);
    CHECK(w.amp(0) == Amplitude{1, 0});
    CHECK(stats.wrapped_labels == 1);
    CHECK(stats.wrap_ops == 1);
  }
  SECTION("negative constants subtract") {
    auto w = sim::new_basis_state(l, vals({2}));
    arith::add_const(w, "x", -3);
    CHECK(w.amp(15) == Amplitude{1, 0});
  }
}

TEST_CASE("fourier_add_const sandwich equals add_const") {
  const auto l = make_layout({{"x", 2, 5}});
  SECTION("c = 0 is the identity") {
    auto st = sim::new_basis_state(l, vals({9}));
    sim::qft(st, "x", sim::Direction::forward);
    const auto before = st.amps();
    arith::fourier_add_const(st, "x", 0);
    for (const auto& [label, amp] : before) CHECK(st.amp(label) == amp);
  }
  SECTION("all basis states, w = 5, c = 7") {
    for (std::uint64_t v = 0; v < 32; ++v) {
      auto st = sim::new_basis_state(l, vals({v}));
      sim::qft(st, "x", sim::Direction::forward);
      arith::fourier_add_const(st, "x", 7);
      sim::qft(st, "x", sim::Direction::inverse);
      REQUIRE(std::abs(st.amp((v + 7) % 32) - 1.0) < 1e-10);
    }
  }
  SECTION("two Fourier adds compose additively") {
    auto st = sim::new_basis_state(l, vals({20}));
    sim::qft(st, "x", sim::Direction::forward);
    arith::fourier_add_const(st, "x", 9);
    arith::fourier_add_const(st, "x", 8);
    sim::qft(st, "x", sim::Direction::inverse);
    CHECK(std::abs(st.amp((20 + 17) % 32) - 1.0) < 1e-10);
  }
  SECTION("p = 3 register") {
    const auto l3 = make_layout({{"t", 3, 3}});
    for (std::uint64_t v : {0ull, 5ull, 26ull}) {
      auto st = sim::new_basis_state(l3, vals({v}));
      sim::qft(st, "t", sim::Direction::forward);
      arith::fourier_add_const(st, "t", 11);
      sim::qft(st, "t", sim::Direction::inverse);
      REQUIRE(std::abs(st.amp((v + 11) % 27) - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("compare_ge_flag") {
  const auto l = make_layout({{"x", 2, 4}, {"f", 2, 1}});
  const auto flagged = [&](std::uint64_t v, i64 c) {
    auto st = sim::new_basis_state(l, vals({v, 0}));
    arith::compare_ge_flag(st, "x", c, {"f", 0});
    return st.amp(l->pack(vals({v, 1}))) == Amplitude{1, 0};
  };
  CHECK(flagged(0, 0));  // c = 0 always toggles
  CHECK(flagged(9, 0));
  CHECK_FALSE(flagged(15, 16));  // c = 2^w never does
  CHECK(flagged(5, 5));          // boundary
  CHECK_FALSE(flagged(4, 5));
}

TEST_CASE("mod_add_const_exact") {
  SECTION("c = 0 is the identity") {
    const auto l = make_layout({{"x", 2, 4}, {"anc", 2, 1}});
    auto st = sim::new_basis_state(l, vals({11, 0}));
    arith::mod_add_const_exact(st, "x", 0, 15, {"anc", 0});
    CHECK(st.amp(l->pack(vals({11, 0}))) == Amplitude{1, 0});
  }
  SECTION("N = 15: 14 + 3 = 2") {
    const auto l = make_layout({{"x", 2, 4}, {"anc", 2, 1}});
    auto st = sim::new_basis_state(l, vals({14, 0}));
    arith::mod_add_const_exact(st, "x", 3, 15, {"anc", 0});
    CHECK(st.amp(l->pack(vals({2, 0}))) == Amplitude{1, 0});
  }
  SECTION("exhaustive (v, c) oracle with clean ancilla") {
    for (i64 N : {3, 5, 15, 21, 37, 64}) {
      const int w = modnum::bit_length(N);
      const auto l = make_layout({{"x", 2, w}, {"anc", 2, 1}});
      for (i64 c = 0; c < N; ++c) {
        SparseState st(l);
        for (i64 v = 0; v < N; ++v)
          st.amps()[l->pack(vals({static_cast<std::uint64_t>(v), 0}))] =
              tag(static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(N));
        arith::mod_add_const_exact(st, "x", c, N, {"anc", 0});
        REQUIRE(st.support_size() == static_cast<std::size_t>(N));
        for (i64 v = 0; v < N; ++v)
          REQUIRE(st.amp(l->pack(vals({static_cast<std::uint64_t>((v + c) % N),
                                       0}))) ==
                  tag(static_cast<std::uint64_t>(v),
                      static_cast<std::uint64_t>(N)));
      }
    }
  }
  SECTION("support outside [0, N) is rejected") {
    const auto l = make_layout({{"x", 2, 5}, {"anc", 2, 1}});
    auto st = sim::new_basis_state(l, vals({16, 0}));
    CHECK_THROWS_AS(arith::mod_add_const_exact(st, "x", 1, 15, {"anc", 0}),
                    InputOutOfRangeError);
  }
}

TEST_CASE("mul_two_step") {
  SECTION("a = 1 is the identity") {
    const auto ctx = modnum::ModCtx::make(15, 7);
    const auto l = make_layout({{"a", 2, 4}, {"b", 2, 4}});
    auto st = sim::new_basis_state(l, vals({4, 0}));
    arith::mul_two_step(st, "a", "b", 1, ctx);
    CHECK(st.amp(l->pack(vals({4, 0}))) == Amplitude{1, 0});
  }
  SECTION("N = 15, a = 7: |4,0> -> |13,0>") {
    const auto ctx = modnum::ModCtx::make(15, 7);
    const auto l = make_layout({{"a", 2, 4}, {"b", 2, 4}});
    auto st = sim::new_basis_state(l, vals({4, 0}));
    arith::mul_two_step(st, "a", "b", 7, ctx);
    CHECK(st.amp(l->pack(vals({13, 0}))) == Amplitude{1, 0});
  }
  SECTION("exhaustive oracle, clean auxiliary register") {
    for (i64 N : {9, 15, 21, 33, 63}) {
      const int w = modnum::bit_length(N);
      const auto l = make_layout({{"a", 2, w}, {"b", 2, w}});
      for (i64 a = 1; a < N; ++a) {
        if (std::gcd(a, N) != 1) continue;
        const auto ctx = modnum::ModCtx::make(N, a);
        SparseState st(l);
        for (i64 v = 0; v < N; ++v)
          st.amps()[l->pack(vals({static_cast<std::uint64_t>(v), 0}))] =
              tag(static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(N));
        arith::mul_two_step(st, "a", "b", a, ctx);
        REQUIRE(st.support_size() == static_cast<std::size_t>(N));
        for (i64 v = 0; v < N; ++v)
          REQUIRE(st.amp(l->pack(vals(
                      {static_cast<std::uint64_t>(a * v % N), 0}))) ==
                  tag(static_cast<std::uint64_t>(v),
                      static_cast<std::uint64_t>(N)));
      }
    }
  }
  SECTION("dirty auxiliary register is rejected") {
    const auto ctx = modnum::ModCtx::make(15, 7);
    const auto l = make_layout({{"a", 2, 4}, {"b", 2, 4}});
    auto st = sim::new_basis_state(l, vals({4, 3}));
    CHECK_THROWS_AS(arith::mul_two_step(st, "a", "b", 7, ctx),
                    AncillaNotZeroError);
  }
  SECTION("non-coprime multiplier is rejected") {
    const auto ctx = modnum::ModCtx::make(15, 7);
    const auto l = make_layout({{"a", 2, 4}, {"b", 2, 4}});
    auto st = sim::new_basis_state(l, vals({4, 0}));
    CHECK_THROWS_AS(arith::mul_two_step(st, "a", "b", 5, ctx), NotCoprimeError);
  }
}

TEST_CASE("mul_three_step_uninit") {
  SECTION("a = 1 is the identity") {
    const auto ctx = modnum::ModCtx::make(21, 2);
    const auto l = make_layout({{"a", 2, 5}, {"b", 2, 5}});
    auto st = sim::new_basis_state(l, vals({13, 6}));
    arith::mul_three_step_uninit(st, "a", "b", 1, ctx);
    CHECK(st.amp(l->pack(vals({13, 6}))) == Amplitude{1, 0});
  }
  SECTION("exhaustive pair oracle") {
    for (i64 N : {9, 15, 21}) {
      const int w = modnum::bit_length(N);
      const auto l = make_layout({{"a", 2, w}, {"b", 2, w}});
      for (i64 a : {static_cast<i64>(2), static_cast<i64>(4), N - 2}) {
        if (std::gcd(a, N) != 1) continue;
        const auto ctx = modnum::ModCtx::make(N, a);
        const i64 ainv = modnum::mod_inv(a, N);
        SparseState st(l);
        for (i64 x = 0; x < N; ++x)
          for (i64 y = 0; y < N; ++y)
            st.amps()[l->pack(vals({static_cast<std::uint64_t>(x),
                                    static_cast<std::uint64_t>(y)}))] =
                tag(static_cast<std::uint64_t>(x * N + y),
                    static_cast<std::uint64_t>(N * N));
        arith::mul_three_step_uninit(st, "a", "b", a, ctx);
        REQUIRE(st.support_size() == static_cast<std::size_t>(N * N));
        for (i64 x = 0; x < N; ++x)
          for (i64 y = 0; y < N; ++y)
            REQUIRE(st.amp(l->pack(vals(
                        {static_cast<std::uint64_t>(a * x % N),
                         static_cast<std::uint64_t>(ainv * y % N)}))) ==
                    tag(static_cast<std::uint64_t>(x * N + y),
                        static_cast<std::uint64_t>(N * N)));
      }
    }
  }
  SECTION("a then a^-1 composes to the identity") {
    const i64 N = 15;
    const auto ctx = modnum::ModCtx::make(N, 7);
    const auto l = make_layout({{"a", 2, 4}, {"b", 2, 4}});
    SparseState st(l);
    for (i64 x = 0; x < N; ++x)
      for (i64 y = 0; y < N; ++y)
        st.amps()[l->pack(vals({static_cast<std::uint64_t>(x),
                                static_cast<std::uint64_t>(y)}))] =
            tag(static_cast<std::uint64_t>(x * N + y),
                static_cast<std::uint64_t>(N * N));
    const auto before = st.amps();
    arith::mul_three_step_uninit(st, "a", "b", 7, ctx);
    arith::mul_three_step_uninit(st, "a", "b", modnum::mod_inv(7, N), ctx);
    for (const auto& [label, amp] : before) REQUIRE(st.amp(label) == amp);
  }
}

TEST_CASE("ctrl_mul_trinary") {
  const i64 N = 15, a = 7;
  const auto ctx = modnum::ModCtx::make(N, a);
  const auto l = make_layout({{"c", 3, 1}, {"a", 2, 4}, {"b", 2, 4}});
  const i64 ainv = modnum::mod_inv(a, N);
  const auto run = [&](std::uint64_t ctl, i64 alpha, i64 beta) {
    auto st = sim::new_basis_state(
        l, vals({ctl, static_cast<std::uint64_t>(alpha),
                 static_cast<std::uint64_t>(beta)}));
    arith::ctrl_mul_trinary(st, {"c", 0}, "a", "b", a, ctx);
    return st;
  };
  for (i64 alpha : {0, 1, 4, 11})
    for (i64 beta : {0, 2, 14}) {
      auto s1 = run(1, alpha, beta);  // balanced center digit: identity
      CHECK(s1.amp(l->pack(vals({1, static_cast<std::uint64_t>(alpha),
                                 static_cast<std::uint64_t>(beta)}))) ==
            Amplitude{1, 0});
      auto s2 = run(2, alpha, beta);  // multiply by a
      CHECK(s2.amp(l->pack(vals({2, static_cast<std::uint64_t>(a * alpha % N),
                                 static_cast<std::uint64_t>(ainv * beta % N)}))) ==
            Amplitude{1, 0});
      auto s0 = run(0, alpha, beta);  // multiply by a^-1
      CHECK(s0.amp(l->pack(vals({0, static_cast<std::uint64_t>(ainv * alpha % N),
                                 static_cast<std::uint64_t>(a * beta % N)}))) ==
            Amplitude{1, 0});
    }
}

TEST_CASE("coset_encode") {
  const i64 N = 15;
  SECTION("x_max = 1 leaves |b> alone") {
    const auto params = arith::CosetParams::make(1);
    const auto l = make_layout({{"v", 2, 6}, {"w", 2, 1}});
    auto st = sim::new_basis_state(l, vals({4, 0}));
    arith::coset_encode(st, "v", "w", N, params);
    CHECK(st.amp(l->pack(vals({4, 0}))) == Amplitude{1, 0});
  }
  SECTION("N = 15, b = 4, x_max = 4: (|4>+|19>+|34>+|49>)/2 with clean work") {
    const auto params = arith::CosetParams::make(4);
    const auto l = make_layout({{"v", 2, 6}, {"w", 2, 2}});
    auto st = sim::new_basis_state(l, vals({4, 0}));
    arith::coset_encode(st, "v", "w", N, params);
    REQUIRE(st.support_size() == 4);
    for (std::uint64_t v : {4ull, 19ull, 34ull, 49ull})
      CHECK(st.amp(l->pack(vals({v, 0}))) == Amplitude{0.5, 0});
  }
  SECTION("encode then decode is the identity for all b, several x_max") {
    for (i64 N2 : {15, 21, 33, 63})
      for (std::uint64_t x_max : {2ull, 4ull, 8ull}) {
        const auto params = arith::CosetParams::make(x_max);
        const int w = modnum::bit_length(N2) + params.pad_bits;
        const auto l = make_layout(
            {{"v", 2, w}, {"w", 2, std::max(1, params.ladder_bits())}});
        for (i64 b = 0; b < N2; ++b) {
          auto st = sim::new_basis_state(
              l, vals({static_cast<std::uint64_t>(b), 0}));
          arith::coset_encode(st, "v", "w", N2, params);
          arith::coset_decode(st, "v", "w", N2, params);
          REQUIRE(st.support_size() == 1);
          REQUIRE(std::abs(st.amp(l->pack(vals(
                               {static_cast<std::uint64_t>(b), 0}))) -
                           1.0) < 1e-10);
        }
      }
  }
  SECTION("b >= N breaks the uncompute and is rejected up front") {
    const auto params = arith::CosetParams::make(4);
    const auto l = make_layout({{"v", 2, 6}, {"w", 2, 2}});
    auto st = sim::new_basis_state(l, vals({15, 0}));
    CHECK_THROWS_AS(arith::coset_encode(st, "v", "w", N, params),
                    InputOutOfRangeError);
  }
}

TEST_CASE("coset_decode flags a shifted ladder") {
  const i64 N = 15;
  const auto params = arith::CosetParams::make(4);
  const auto l = make_layout({{"v", 2, 7}, {"w", 2, 2}});
  SparseState st(l);
  // ladder of b = 4 shifted one rung up: x = 1..4
  for (std::uint64_t x = 1; x <= 4; ++x)
    st.amps()[l->pack(vals({4 + 15 * x, 0}))] = Amplitude{0.5, 0};
  CHECK_THROWS_AS(arith::coset_decode(st, "v", "w", N, params),
                  NotCosetStateError);
}

TEST_CASE("coset_add_const fidelity") {
  const i64 N = 15;
  const auto params = arith::CosetParams::make(8);
  const int width = modnum::bit_length(N) + params.pad_bits;
  const auto l = make_layout({{"v", 2, width}, {"w", 2, 3}});
  const auto ladder = [&](i64 b) {
    SparseState ideal(l);
    const double s = 1.0 / std::sqrt(8.0);
    for (std::uint64_t x = 0; x < 8; ++x)
      ideal.amps()[l->pack(vals({static_cast<std::uint64_t>(b) + 15 * x, 0}))] = s;
    return ideal;
  };
  const auto encoded = [&](i64 b) {
    auto st = sim::new_basis_state(l, vals({static_cast<std::uint64_t>(b), 0}));
    arith::coset_encode(st, "v", "w", N, params);
    return st;
  };
  SECTION("c = 0: identity, fidelity exactly 1") {
    auto st = encoded(4);
    arith::coset_add_const(st, "v", 0);
    CHECK(std::abs(sim::overlap(ladder(4), st).real() - 1.0) < 1e-12);
  }
  SECTION("b + c < N: fidelity exactly 1") {
    auto st = encoded(4);
    arith::coset_add_const(st, "v", 7);
    CHECK(std::abs(sim::overlap(ladder(11), st).real() - 1.0) < 1e-12);
  }
  SECTION("b = 14, c = 3, x_max = 8: overlap with the ladder of 2 is 7/8") {
    auto st = encoded(14);
    arith::coset_add_const(st, "v", 3);
    CHECK(std::abs(sim::overlap(ladder(2), st).real() - 7.0 / 8.0) < 1e-12);
  }
}

TEST_CASE("coset_recenter") {
  const i64 N = 15;
  const auto l = make_layout({{"v", 2, 9}});
  SECTION("m = 0 is the identity") {
    auto st = sim::new_basis_state(l, vals({77}));
    arith::coset_recenter(st, "v", N, 0);
    CHECK(st.amp(77) == Amplitude{1, 0});
  }
  SECTION("offsets 3..10 with m = 3 relabel to 0..7") {
    SparseState st(l);
    const double s = 1.0 / std::sqrt(8.0);
    for (std::uint64_t x = 3; x <= 10; ++x) st.amps()[2 + 15 * x] = s;
    arith::coset_recenter(st, "v", N, 3);
    for (std::uint64_t x = 0; x <= 7; ++x)
      CHECK(st.amp(2 + 15 * x) == Amplitude{s, 0});
  }
  SECTION("going below zero is rejected") {
    auto st = sim::new_basis_state(l, vals({20}));
    CHECK_THROWS_AS(arith::coset_recenter(st, "v", N, 2),
                    RecenterUnderflowError);
  }
}

TEST_CASE("coset_mod_mul_accumulate") {
  const i64 N = 15, a = 7;
  const auto ctx = modnum::ModCtx::make(N, a);
  const auto params = arith::CosetParams::make(64);
  const int width = ctx.n + params.pad_bits;

  SECTION("control |0>: accumulator untouched, fidelity 1") {
    const auto l = make_layout(
        {{"c", 2, ctx.n}, {"v", 2, width}, {"w", 2, params.ladder_bits()}});
    auto st = sim::new_basis_state(l, vals({0, 1, 0}));
    arith::coset_encode(st, "v", "w", N, params);
    const auto before = st.amps();
    arith::coset_mod_mul_accumulate(st, "c", arith::ControlRep::usual, "v", a,
                                    ctx, params);
    for (const auto& [label, amp] : before) REQUIRE(st.amp(label) == amp);
  }
  SECTION("alpha = 2, beta = 1: ladder of 0 with overlap >= 1 - n/x_max") {
    const auto l = make_layout(
        {{"c", 2, ctx.n}, {"v", 2, width}, {"w", 2, params.ladder_bits()}});
    auto st = sim::new_basis_state(l, vals({2, 1, 0}));
    arith::coset_encode(st, "v", "w", N, params);
    arith::coset_mod_mul_accumulate(st, "c", arith::ControlRep::usual, "v", a,
                                    ctx, params);
    SparseState ideal(l);
    const double s = 1.0 / std::sqrt(64.0);
    for (std::uint64_t x = 0; x < 64; ++x)
      ideal.amps()[l->pack(vals({2, 15 * x, 0}))] = s;
    const double f = std::abs(sim::overlap(ideal, st));
    CHECK(f >= 1.0 - static_cast<double>(ctx.n) / 64.0);
    for (const auto label : st.sorted_labels())  // residue is exact
      CHECK(l->value(label, 1) % 15 == 0);
  }
  SECTION("coset-rep control agrees with usual rep modulo N") {
    const auto l = make_layout(
        {{"c", 2, width}, {"v", 2, width}, {"w", 2, params.ladder_bits()}});
    const i64 alpha = 2, beta = 1;
    auto usual = sim::new_basis_state(
        l, vals({static_cast<std::uint64_t>(alpha),
                 static_cast<std::uint64_t>(beta), 0}));
    arith::coset_encode(usual, "v", "w", N, params);
    arith::coset_mod_mul_accumulate(usual, "c", arith::ControlRep::usual, "v", a,
                                    ctx, params);
    // the control sits on an upper rung of the same residue class
    auto coset = sim::new_basis_state(
        l, vals({static_cast<std::uint64_t>(alpha + 3 * N),
                 static_cast<std::uint64_t>(beta), 0}));
    arith::coset_encode(coset, "v", "w", N, params);
    arith::coset_mod_mul_accumulate(coset, "c", arith::ControlRep::coset, "v", a,
                                    ctx, params);
    for (const auto label : coset.sorted_labels())
      CHECK(l->value(label, 1) % 15 == (a * alpha + beta) % 15);
    // accumulator marginals overlap by at least 1 - pad_bits/x_max
    const auto marginal = [&](const SparseState& st) {
      std::unordered_map<std::uint64_t, Amplitude> m;
      for (const auto& [label, amp] : st.amps()) m[l->value(label, 1)] += amp;
      return m;
    };
    const auto mu = marginal(usual);
    const auto mc = marginal(coset);
    Amplitude dot{};
    for (const auto& [v, amp] : mu) {
      const auto it = mc.find(v);
      if (it != mc.end()) dot += std::conj(amp) * it->second;
    }
    CHECK(std::abs(dot) >= 1.0 - static_cast<double>(params.pad_bits) / 64.0);
  }
}

TEST_CASE("short_mul") {
  SECTION("a_short = 1 is the identity") {
    const auto params = arith::ShortMulParams::make(1, 21);
    const auto l = make_layout({{"v", 2, 8}, {"f", 2, 1}});
    auto st = sim::new_basis_state(l, vals({9, 0}));
    arith::short_mul(st, "v", {"f", 0}, params);
    CHECK(st.amp(l->pack(vals({9, 0}))) == Amplitude{1, 0});
  }
  SECTION("N = 21, a_short = 5, alpha = 9 -> 45 mod 21 = 3") {
    const auto params = arith::ShortMulParams::make(5, 21);
    const auto l =
        make_layout({{"v", 2, params.n + params.n_prime}, {"f", 2, 1}});
    auto st = sim::new_basis_state(l, vals({9, 0}));
    arith::short_mul(st, "v", {"f", 0}, params);
    CHECK(st.amp(l->pack(vals({3, 0}))) == Amplitude{1, 0});
  }
  SECTION("exhaustive oracle with quotient uncompute and footprint bound") {
    for (i64 N : {9, 15, 21, 35, 63, 127}) {
      const int n = modnum::bit_length(N);
      const i64 limit = 2 * static_cast<i64>(std::sqrt(static_cast<double>(N)));
      for (i64 a = 1; a <= limit; a += 2) {
        if (std::gcd(a, N) != 1) continue;
        const auto params = arith::ShortMulParams::make(a, N);
        const auto l =
            make_layout({{"v", 2, params.n + params.n_prime}, {"f", 2, 1}});
        SparseState st(l);
        for (i64 v = 0; v < N; ++v)
          st.amps()[l->pack(vals({static_cast<std::uint64_t>(v), 0}))] =
              tag(static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(N));
        arith::FootprintTrace trace;
        trace.limit = n + params.n_prime + 1;
        arith::short_mul(st, "v", {"f", 0}, params, &trace);
        REQUIRE(st.support_size() == static_cast<std::size_t>(N));
        for (i64 v = 0; v < N; ++v)
          REQUIRE(st.amp(l->pack(vals(
                      {static_cast<std::uint64_t>(a * v % N), 0}))) ==
                  tag(static_cast<std::uint64_t>(v),
                      static_cast<std::uint64_t>(N)));
        CHECK(trace.max_live <= n + params.n_prime + 1);
      }
    }
  }
  SECTION("inverse mode divides") {
    const auto params = arith::ShortMulParams::make(5, 21);
    const auto l =
        make_layout({{"v", 2, params.n + params.n_prime}, {"f", 2, 1}});
    auto st = sim::new_basis_state(l, vals({3, 0}));
    arith::short_mul(st, "v", {"f", 0}, params, nullptr, {}, /*inverse=*/true);
    CHECK(st.amp(l->pack(vals({9, 0}))) == Amplitude{1, 0});
  }
  SECTION("even multipliers are rejected") {
    CHECK_THROWS_AS(arith::ShortMulParams::make(4, 21), EvenMultiplierError);
  }
}

TEST_CASE("short_mul_pair") {
  SECTION("a = 1 gives the identity split") {
    const auto ctx = modnum::ModCtx::make(21, 2);
    const auto split = modnum::midpoint_split_invertible(1, 21);
    const auto l = make_layout({{"v", 2, 8}, {"f", 2, 1}});
    auto st = sim::new_basis_state(l, vals({17, 0}));
    arith::short_mul_pair(st, "v", {"f", 0}, split, ctx);
    CHECK(st.amp(l->pack(vals({17, 0}))) == Amplitude{1, 0});
  }
  SECTION("N = 15, a = 7 midpoint split multiplies by 7 on every input") {
    const auto ctx = modnum::ModCtx::make(15, 7);
    const auto split = modnum::midpoint_split_invertible(7, 15);
    const int width = ctx.n + std::max(split.n_prime, 1);
    const auto l = make_layout({{"v", 2, width}, {"f", 2, 1}});
    for (i64 v = 0; v < 15; ++v) {
      auto st = sim::new_basis_state(l, vals({static_cast<std::uint64_t>(v), 0}));
      arith::short_mul_pair(st, "v", {"f", 0}, split, ctx);
      REQUIRE(st.amp(l->pack(vals({static_cast<std::uint64_t>(7 * v % 15),
                                   0}))) == Amplitude{1, 0});
    }
  }
  SECTION("permutation equality with the two-step multiplication map") {
    for (i64 N : {15, 21, 33, 63, 127}) {
      const int n = modnum::bit_length(N);
      for (i64 a : {static_cast<i64>(2), static_cast<i64>(3), N / 2, N - 2}) {
        if (a < 1 || std::gcd(a, N) != 1) continue;
        const auto ctx = modnum::ModCtx::make(N, a);
        const auto split = modnum::midpoint_split_invertible(a, N);
        const int width = n + std::max(split.n_prime, 1);
        const auto ls = make_layout({{"v", 2, width}, {"f", 2, 1}});
        SparseState st(ls);
        for (i64 v = 0; v < N; ++v)
          st.amps()[ls->pack(vals({static_cast<std::uint64_t>(v), 0}))] =
              tag(static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(N));
        arith::short_mul_pair(st, "v", {"f", 0}, split, ctx);
        for (i64 v = 0; v < N; ++v)
          REQUIRE(st.amp(ls->pack(vals(
                      {static_cast<std::uint64_t>(a * v % N), 0}))) ==
                  tag(static_cast<std::uint64_t>(v),
                      static_cast<std::uint64_t>(N)));
      }
    }
  }
}

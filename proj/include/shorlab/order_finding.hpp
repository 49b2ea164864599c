#pragma once

// Semiclassical order-finding drivers.  One control dit at a time is
// prepared, used to condition a modular multiplication, rotated by the
// phase accumulated from earlier measurement outcomes, Fourier-transformed
// and measured; the multiplications run over the precomputed powers a^(p^i)
// in reversed exponent order.  Variants differ only in how the controlled
// multiplication is realized.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "shorlab/arith.hpp"
#include "shorlab/errors.hpp"
#include "shorlab/modnum.hpp"
#include "shorlab/resources.hpp"
#include "shorlab/rng.hpp"
#include "shorlab/state.hpp"

namespace shorlab::shor {

using modnum::i64;
using resources::Variant;

struct OrderFindConfig {
  modnum::ModCtx ctx;
  Variant variant = Variant::standard;
  int radix = 2;        // control dit radix
  int digit_count = 0;  // 2n binary, 2n' trinary
  std::optional<arith::CosetParams> coset;
  std::uint64_t seed = 0;
  i64 true_order = 0;  // brute-force order, for the success flag

  /// Phase-space order sampled over: radix^digit_count.
  i64 transform_order() const {
    i64 q = 1;
    for (int i = 0; i < digit_count; ++i) q *= radix;
    return q;
  }

  static OrderFindConfig make(modnum::ModCtx ctx, Variant variant,
                              std::uint64_t seed,
                              std::optional<std::uint64_t> x_max = {}) {
    OrderFindConfig cfg;
    cfg.variant = variant;
    cfg.radix = variant == Variant::trinary_uninit ? 3 : 2;
    cfg.digit_count = variant == Variant::trinary_uninit
                          ? 2 * resources::trinary_digits(ctx.n)
                          : 2 * ctx.n;
    if (variant == Variant::coset)
      cfg.coset = arith::CosetParams::make(x_max.value_or(64));
    else if (x_max.has_value())
      throw InvalidArgumentError("x_max only applies to the coset variant");
    cfg.seed = seed;
    cfg.true_order = modnum::multiplicative_order(ctx.a, ctx.N);
    // enough phase resolution for the continued-fraction step
    if (static_cast<double>(cfg.digit_count) * std::log2(cfg.radix) <
        2.0 * ctx.n - 1.0)
      throw InvalidArgumentError("digit count too small for phase resolution");
    cfg.ctx = std::move(ctx);
    return cfg;
  }
};

struct TrialResult {
  std::vector<int> digits;  // measurement order: most significant wire first
  i64 y = 0;                // reconstructed phase numerator, sum digits[k] p^k
  std::optional<i64> candidate;
  bool success = false;
  i64 alpha = 1;  // initial register values (sampled for uninit variants)
  i64 beta = 0;
  i64 alpha_gcd = 1;
};

namespace detail {

struct SamplerCircuit {
  sim::SparseState st;
  std::string ctl = "ctl";
  std::string reg_a = "a";
  std::string reg_b = "b";
  std::string work = "w";
};

inline SamplerCircuit build_sampler(const OrderFindConfig& cfg, Rng& rng,
                                    TrialResult& trial) {
  const modnum::ModCtx& ctx = cfg.ctx;
  SamplerCircuit c;
  std::vector<sim::RegisterSpec> regs;
  std::vector<std::uint64_t> init;
  switch (cfg.variant) {
    case Variant::standard:
      regs = {{c.ctl, cfg.radix, 1}, {c.reg_a, 2, ctx.n}, {c.reg_b, 2, ctx.n}};
      init = {0, 1, 0};
      break;
    case Variant::uninit:
    case Variant::trinary_uninit:
      trial.alpha = static_cast<i64>(rng.below(static_cast<std::uint64_t>(ctx.N)));
      trial.beta = static_cast<i64>(rng.below(static_cast<std::uint64_t>(ctx.N)));
      trial.alpha_gcd = std::gcd(trial.alpha, ctx.N);
      regs = {{c.ctl, cfg.radix, 1}, {c.reg_a, 2, ctx.n}, {c.reg_b, 2, ctx.n}};
      init = {0, static_cast<std::uint64_t>(trial.alpha),
              static_cast<std::uint64_t>(trial.beta)};
      break;
    case Variant::short_factor: {
      int max_np = 1;
      for (int i = 0; i < cfg.digit_count; ++i) {
        const auto split =
            modnum::midpoint_split_invertible(ctx.pow_table[static_cast<std::size_t>(i)], ctx.N);
        max_np = std::max(max_np, split.n_prime);
      }
      regs = {{c.ctl, 2, 1}, {c.reg_a, 2, ctx.n + max_np}, {c.work, 2, 1}};
      init = {0, 1, 0};
      break;
    }
    case Variant::coset: {
      const arith::CosetParams& p = *cfg.coset;
      const int width = ctx.n + p.pad_bits;
      regs = {{c.ctl, 2, 1},
              {c.reg_a, 2, width},
              {c.reg_b, 2, width},
              {c.work, 2, std::max(1, p.ladder_bits())}};
      init = {0, 1, 0, 0};
      break;
    }
  }
  c.st = sim::new_basis_state(
      std::make_shared<const sim::RegisterLayout>(sim::RegisterLayout(regs)), init);
  if (cfg.variant == Variant::coset) {
    arith::coset_encode(c.st, c.reg_a, c.work, ctx.N, *cfg.coset);
    arith::coset_encode(c.st, c.reg_b, c.work, ctx.N, *cfg.coset);
  }
  return c;
}

inline void controlled_multiplication(SamplerCircuit& c,
                                      const OrderFindConfig& cfg, int digit) {
  const modnum::ModCtx& ctx = cfg.ctx;
  const arith::DitCond on_ctl[] = {arith::on_one({c.ctl, 0})};
  switch (cfg.variant) {
    case Variant::standard:
      arith::mul_two_step(c.st, c.reg_a, c.reg_b,
                          ctx.pow_table[static_cast<std::size_t>(digit)], ctx,
                          on_ctl);
      return;
    case Variant::uninit:
      arith::mul_three_step_uninit(
          c.st, c.reg_a, c.reg_b,
          ctx.pow_table[static_cast<std::size_t>(digit)], ctx, on_ctl);
      return;
    case Variant::trinary_uninit: {
      i64 p3 = 1;
      for (int k = 0; k < digit; ++k) p3 *= 3;
      const i64 mult = modnum::mod_pow(ctx.a, p3, ctx.N);
      arith::ctrl_mul_trinary(c.st, {c.ctl, 0}, c.reg_a, c.reg_b, mult, ctx);
      return;
    }
    case Variant::short_factor: {
      const auto split = modnum::midpoint_split_invertible(
          ctx.pow_table[static_cast<std::size_t>(digit)], ctx.N);
      arith::short_mul_pair(c.st, c.reg_a, {c.work, 0}, split, ctx, nullptr,
                            on_ctl);
      return;
    }
    case Variant::coset: {
      const i64 mult = ctx.pow_table[static_cast<std::size_t>(digit)];
      arith::CosetMulOptions add_opts;
      add_opts.conds = {arith::on_one({c.ctl, 0})};
      arith::coset_mod_mul_accumulate(c.st, c.reg_a, arith::ControlRep::coset,
                                      c.reg_b, mult, ctx, *cfg.coset, add_opts);
      arith::CosetMulOptions sub_opts = add_opts;
      sub_opts.subtract = true;
      arith::coset_mod_mul_accumulate(c.st, c.reg_b, arith::ControlRep::coset,
                                      c.reg_a, modnum::mod_inv(mult, ctx.N), ctx,
                                      *cfg.coset, sub_opts);
      arith::swap_registers(c.st, c.reg_a, c.reg_b, on_ctl);
      return;
    }
  }
  throw UnknownVariantError("controlled_multiplication: bad variant");
}

// Phase carried into the k-th measurement from the earlier outcomes:
// phi_k = sum_{j<k} d_j / p^(k-j+1).
inline double feedback_phase(std::span<const int> digits, int p) {
  double phi = 0;
  const int k = static_cast<int>(digits.size());
  for (int j = 0; j < k; ++j)
    phi += digits[static_cast<std::size_t>(j)] /
           std::pow(static_cast<double>(p), k - j + 1);
  return phi;
}

}  // namespace detail

/// One semiclassical trial: digit_count prepare/multiply/rotate/measure
/// rounds followed by continued-fraction post-processing.
inline TrialResult semiclassical_sample(const OrderFindConfig& cfg, Rng& rng) {
  const int p = cfg.radix;
  TrialResult trial;
  detail::SamplerCircuit c = detail::build_sampler(cfg, rng, trial);

  for (int i = cfg.digit_count - 1; i >= 0; --i) {
    sim::prepare_uniform(c.st, c.ctl, static_cast<std::uint64_t>(p));
    detail::controlled_multiplication(c, cfg, i);
    const double phi = detail::feedback_phase(trial.digits, p);
    if (phi != 0.0) {
      sim::Matrix rot(p);
      for (int d = 0; d < p; ++d) {
        const double ang = 2.0 * std::numbers::pi * d * phi;
        rot.at(d, d) = sim::Amplitude{std::cos(ang), std::sin(ang)};
      }
      sim::apply_single_dit(c.st, c.ctl, 0, rot);
    }
    sim::apply_single_dit(c.st, c.ctl, 0, sim::Matrix::dft(p));
    const sim::MeasurementRecord rec = sim::measure(c.st, c.ctl, 0, rng);
    trial.digits.push_back(rec.outcome);
    arith::add_const(c.st, c.ctl, p - rec.outcome);  // reset the control dit
  }

  i64 weight = 1;
  for (const int d : trial.digits) {
    trial.y += d * weight;
    weight *= p;
  }
  trial.candidate =
      modnum::continued_fraction_order(trial.y, cfg.transform_order(), cfg.ctx);
  trial.success = trial.candidate.has_value() && *trial.candidate == cfg.true_order;
  return trial;
}

struct ExperimentResult {
  // config echo
  i64 N = 0;
  i64 a = 0;
  Variant variant = Variant::standard;
  int radix = 2;
  int digit_count = 0;
  std::optional<std::uint64_t> x_max;
  std::uint64_t seed = 0;

  std::vector<TrialResult> trials;
  int successes = 0;
  double success_rate = 0;
  double ci_low = 0;  // Wilson 95% interval
  double ci_high = 0;
};

namespace detail {

inline void wilson_interval(int successes, int trials, double& lo, double& hi) {
  if (trials == 0) {
    lo = hi = 0;
    return;
  }
  const double z = 1.959963984540054;  // 97.5th normal percentile
  const double n = trials;
  const double phat = successes / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double center = phat + z2 / (2 * n);
  const double spread = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n));
  lo = (center - spread) / denom;
  hi = (center + spread) / denom;
}

}  // namespace detail

/// Independent seeded trials; per-trial generators are forked from the master
/// seed, so the result is identical for any level of parallelism.
inline ExperimentResult run_trials(const OrderFindConfig& cfg, int trials,
                                   int jobs = 1) {
  if (trials < 1) throw InvalidArgumentError("run_trials: trials must be >= 1");
  jobs = std::max(1, std::min(jobs, trials));
  std::vector<TrialResult> results(static_cast<std::size_t>(trials));
  const Rng master(cfg.seed);

  const auto worker = [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      Rng rng = master.fork(static_cast<std::uint64_t>(t));
      results[static_cast<std::size_t>(t)] = semiclassical_sample(cfg, rng);
    }
  };
  if (jobs == 1) {
    worker(0, trials);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (trials + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back(worker, j * chunk, std::min(trials, (j + 1) * chunk));
    for (std::thread& t : pool) t.join();
  }

  ExperimentResult out;
  out.N = cfg.ctx.N;
  out.a = cfg.ctx.a;
  out.variant = cfg.variant;
  out.radix = cfg.radix;
  out.digit_count = cfg.digit_count;
  if (cfg.coset) out.x_max = cfg.coset->x_max;
  out.seed = cfg.seed;
  out.trials = std::move(results);
  for (const TrialResult& t : out.trials) out.successes += t.success ? 1 : 0;
  out.success_rate = static_cast<double>(out.successes) / trials;
  detail::wilson_interval(out.successes, trials, out.ci_low, out.ci_high);
  return out;
}

struct FidelityStep {
  int step = 0;
  double per_step = 1.0;    // 1 - (loss of this addition)
  double cumulative = 1.0;  // overlap with the ideal ladder of the running value
};

struct FidelityTrace {
  i64 N = 0;
  std::uint64_t x_max = 0;
  std::vector<FidelityStep> steps;
  std::uint64_t rung_shifts = 0;
  arith::WrapStats wraps;
};

/// Performs `adds` random coset additions on one tracked ladder, computing
/// after each the exact overlap with the ideal ladder of the running value
/// mod N.
inline FidelityTrace fidelity_experiment(const modnum::ModCtx& ctx,
                                         const arith::CosetParams& params,
                                         int adds, Rng& rng) {
  if (adds < 1) throw InvalidArgumentError("fidelity_experiment: adds must be >= 1");
  const i64 N = ctx.N;
  const int width = ctx.n + params.pad_bits;
  const int xbits = std::max(1, params.ladder_bits());
  const auto layout = std::make_shared<const sim::RegisterLayout>(
      sim::RegisterLayout({{"v", 2, width}, {"w", 2, xbits}}));
  const std::uint64_t init[] = {0, 0};
  sim::SparseState st = sim::new_basis_state(layout, init);
  arith::coset_encode(st, "v", "w", N, params);

  const auto ideal_ladder = [&](i64 b) {
    sim::SparseState ideal(layout);
    const double s = 1.0 / std::sqrt(static_cast<double>(params.x_max));
    for (std::uint64_t x = 0; x < params.x_max; ++x) {
      const std::uint64_t vals[] = {static_cast<std::uint64_t>(b) + x * static_cast<std::uint64_t>(N), 0};
      ideal.amps().emplace(layout->pack(vals), s);
    }
    return ideal;
  };

  FidelityTrace trace;
  trace.N = N;
  trace.x_max = params.x_max;
  i64 value = 0;  // running value mod N
  double prev = 1.0;
  for (int k = 1; k <= adds; ++k) {
    const i64 c = static_cast<i64>(rng.below(static_cast<std::uint64_t>(N)));
    arith::coset_add_const(st, "v", c, {}, &trace.wraps);
    if (value + c >= N) ++trace.rung_shifts;
    value = (value + c) % N;
    const double cum = std::abs(sim::overlap(ideal_ladder(value), st));
    trace.steps.push_back({k, 1.0 - (prev - cum), cum});
    prev = cum;
  }
  return trace;
}

struct VariantStats {
  i64 N = 0;
  i64 a = 0;
  Variant variant = Variant::standard;
  int trials = 0;
  int successes = 0;
  double rate = 0;
  double ci_low = 0;
  double ci_high = 0;
  double coprime_fraction = 1;  // phi(N)/N, the per-register retention
  double floor_rate = 0;        // baseline rate after the coprimality penalty
  bool flagged = false;         // statistically below the floor
};

struct VariantComparison {
  std::vector<VariantStats> rows;
};

/// Runs every variant against each context and flags any variant whose
/// success rate falls more than three sigma below the standard baseline
/// after the exact gcd(alpha, N) > 1 allowance for uninitialized registers.
inline VariantComparison variant_comparison(std::span<const modnum::ModCtx> ctxs,
                                            std::span<const Variant> variants,
                                            int trials, std::uint64_t seed,
                                            int jobs = 1) {
  VariantComparison cmp;
  for (const modnum::ModCtx& ctx : ctxs) {
    const double phi_frac =
        static_cast<double>(modnum::euler_phi(ctx.N)) / static_cast<double>(ctx.N);
    const ExperimentResult base = run_trials(
        OrderFindConfig::make(ctx, Variant::standard, seed), trials, jobs);
    for (const Variant v : variants) {
      const ExperimentResult res =
          v == Variant::standard
              ? base
              : run_trials(OrderFindConfig::make(ctx, v, seed), trials, jobs);
      VariantStats row;
      row.N = ctx.N;
      row.a = ctx.a;
      row.variant = v;
      row.trials = trials;
      row.successes = res.successes;
      row.rate = res.success_rate;
      row.ci_low = res.ci_low;
      row.ci_high = res.ci_high;
      row.coprime_fraction = phi_frac;
      const bool uninit_family =
          v == Variant::uninit || v == Variant::trinary_uninit;
      row.floor_rate = base.success_rate * (uninit_family ? phi_frac : 1.0);
      const double sigma =
          std::sqrt(std::max(row.floor_rate * (1 - row.floor_rate), 1e-12) /
                    trials);
      row.flagged = v != Variant::coset &&  // coset is approximate by design
                    row.rate < row.floor_rate - 3.0 * sigma;
      cmp.rows.push_back(row);
    }
  }
  return cmp;
}

}  // namespace shorlab::shor

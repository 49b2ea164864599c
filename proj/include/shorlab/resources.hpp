#pragma once

// Symbolic qubit/step cost model for the circuit variants.  No amplitudes
// here: closed-form counts, with the gate-level cost of one modular addition
// kept as a single configurable unit since no particular gate set is assumed.

#include <cmath>
#include <cstdint>
#include <string>

#include "shorlab/errors.hpp"

namespace shorlab::resources {

enum class Variant { standard, uninit, trinary_uninit, coset, short_factor };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::standard: return "standard";
    case Variant::uninit: return "uninit";
    case Variant::trinary_uninit: return "trinary_uninit";
    case Variant::coset: return "coset";
    case Variant::short_factor: return "short_factor";
  }
  throw UnknownVariantError("variant_name: bad variant");
}

inline Variant variant_from_name(const std::string& s) {
  if (s == "standard") return Variant::standard;
  if (s == "uninit") return Variant::uninit;
  if (s == "trinary_uninit") return Variant::trinary_uninit;
  if (s == "coset") return Variant::coset;
  if (s == "short_factor") return Variant::short_factor;
  throw UnknownVariantError("unknown variant: " + s);
}

/// Trinary digit count: n' = ceil(n / log2(3)).
inline int trinary_digits(int n) {
  return static_cast<int>(std::ceil(static_cast<double>(n) / std::log2(3.0)));
}

/// Total qubits for an n-bit modulus.
///   standard/uninit: 2n+3 (the reference two-register circuit)
///   trinary_uninit:  2n+4 (the control qutrit held in two qubits)
///   coset:           one padded register, n + ceil(2 log2 n) + 10, + control
///   short_factor:    n + n' + 1 work + 1 control = ceil(1.5 n) + 2
inline int qubit_count(Variant variant, int n) {
  if (n < 2) throw InvalidArgumentError("qubit_count: n must be >= 2");
  switch (variant) {
    case Variant::standard:
    case Variant::uninit:
      return 2 * n + 3;
    case Variant::trinary_uninit:
      return 2 * n + 4;
    case Variant::coset:
      return n + static_cast<int>(std::ceil(2.0 * std::log2(n))) + 10 + 1;
    case Variant::short_factor:
      return n + (n + 1) / 2 + 1 + 1;  // ceil(1.5 n) + 2
  }
  throw UnknownVariantError("qubit_count: bad variant");
}

struct StepCounts {
  std::int64_t controlled_multiplications = 0;
  std::int64_t modular_additions = 0;
};

/// Controlled multiplications and modular additions per run.  Each
/// multiplication decomposes into register cross-multiplications of n
/// conditional additions: 2 of them for the standard two-step, 3 for the
/// uninitialized three-step; the coset variant trades exactness for
/// pad_bits extra additions per cross-multiplication.
inline StepCounts step_counts(Variant variant, int n) {
  if (n < 2) throw InvalidArgumentError("step_counts: n must be >= 2");
  const std::int64_t nn = n;
  StepCounts s;
  switch (variant) {
    case Variant::standard:
      s.controlled_multiplications = 2 * nn;
      s.modular_additions = 2 * nn * (2 * nn);  // 4 n^2
      return s;
    case Variant::uninit:
      s.controlled_multiplications = 2 * nn;
      s.modular_additions = 2 * nn * (3 * nn);  // 6 n^2
      return s;
    case Variant::trinary_uninit: {
      const std::int64_t np = trinary_digits(n);
      s.controlled_multiplications = 2 * np;
      s.modular_additions = 2 * np * (3 * nn);
      return s;
    }
    case Variant::coset: {
      const std::int64_t pad =
          static_cast<std::int64_t>(std::ceil(2.0 * std::log2(n))) + 10;
      s.controlled_multiplications = 2 * nn;
      s.modular_additions = 2 * nn * 2 * (nn + pad);
      return s;
    }
    case Variant::short_factor: {
      // per multiplication: two short multiplications, each n controlled
      // additions (stage 1), n'+1 compare/subtract pairs (stage 2, a
      // comparison costs like an addition) and n mod-a additions (stage 3).
      const std::int64_t np = (n + 1) / 2;
      s.controlled_multiplications = 2 * nn;
      s.modular_additions = 2 * nn * 2 * (2 * nn + 2 * (np + 1));
      return s;
    }
  }
  throw UnknownVariantError("step_counts: bad variant");
}

/// Wall-time factor relative to the binary standard variant, from the
/// addition-count asymptotics: uninit trades 2 cross-multiplications for 3;
/// trinary wins back a digit-count factor log3(2).
inline double relative_time_factor(Variant variant) {
  switch (variant) {
    case Variant::standard: return 1.0;
    case Variant::uninit: return 1.5;
    case Variant::trinary_uninit: return 1.5 * std::log(2.0) / std::log(3.0);
    case Variant::coset: return 1.0;  // same addition count up to O(log n / n)
    case Variant::short_factor: return 2.0;
  }
  throw UnknownVariantError("relative_time_factor: bad variant");
}

/// Circuit depth (in addition units).  With the target register left Fourier
/// transformed across a whole addition run, every addition costs depth 1 and
/// only the transform boundaries (depth ~n, twice per multiplication) remain:
/// depth = 4n^2 + 4n^2 = 8n^2.  Without it each addition serializes over ~n
/// dits: 4n^3 + 4n^2.
inline std::int64_t depth_estimate(Variant variant, int n, bool parallel_fourier) {
  if (n < 2) throw InvalidArgumentError("depth_estimate: n must be >= 2");
  const StepCounts s = step_counts(variant, n);
  const std::int64_t boundaries = 2 * s.controlled_multiplications * n;
  if (parallel_fourier) return s.modular_additions + boundaries;
  return s.modular_additions * n + boundaries;
}

struct ResourceReport {
  Variant variant = Variant::standard;
  int n = 0;
  int total_qubits = 0;
  std::int64_t controlled_multiplications = 0;
  std::int64_t modular_additions = 0;
  double time_factor = 1.0;  // vs binary standard, 4 decimals when rendered

  static ResourceReport make(Variant variant, int n) {
    ResourceReport r;
    r.variant = variant;
    r.n = n;
    r.total_qubits = qubit_count(variant, n);
    const StepCounts s = step_counts(variant, n);
    r.controlled_multiplications = s.controlled_multiplications;
    r.modular_additions = s.modular_additions;
    r.time_factor = relative_time_factor(variant);
    return r;
  }
};

}  // namespace shorlab::resources

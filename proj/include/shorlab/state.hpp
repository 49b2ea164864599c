#pragma once

// Sparse statevector over a mixed-radix register file.  Basis labels are the
// register values packed into one 64-bit mixed-radix index; amplitudes live
// in a hash map so that states whose support is far below the full basis
// size (the interesting ones here) stay cheap.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "shorlab/errors.hpp"
#include "shorlab/rng.hpp"

namespace shorlab::sim {

using Amplitude = std::complex<double>;

/// Amplitudes with magnitude below this are dropped after non-permutation gates.
inline constexpr double kPruneThreshold = 1e-14;
/// Tolerance for unitarity and norm checks.
inline constexpr double kUnitaryTol = 1e-10;

struct RegisterSpec {
  std::string name;
  int radix = 2;
  int width = 1;
};

/// One dit: a position inside a named register.  Position 0 is the least
/// significant dit.
struct DitRef {
  std::string reg;
  int pos = 0;
};

class RegisterLayout {
 public:
  RegisterLayout() = default;

  explicit RegisterLayout(std::vector<RegisterSpec> regs) : regs_(std::move(regs)) {
    if (regs_.empty()) throw InvalidArgumentError("layout: no registers");
    sizes_.resize(regs_.size());
    strides_.resize(regs_.size());
    for (std::size_t i = 0; i < regs_.size(); ++i) {
      const auto& r = regs_[i];
      if (r.radix < 2) throw InvalidArgumentError("layout: radix must be >= 2");
      if (r.width < 1) throw InvalidArgumentError("layout: width must be >= 1");
      for (std::size_t j = 0; j < i; ++j)
        if (regs_[j].name == r.name)
          throw InvalidArgumentError("layout: duplicate register name " + r.name);
      std::uint64_t size = 1;
      for (int w = 0; w < r.width; ++w) {
        if (size > (1ULL << 62) / static_cast<std::uint64_t>(r.radix))
          throw TooLargeError("layout: register " + r.name + " too large");
        size *= static_cast<std::uint64_t>(r.radix);
      }
      sizes_[i] = size;
    }
    // Register 0 is the most significant block of the packed label, so
    // sorting by label sorts lexicographically by register list order.
    std::uint64_t stride = 1;
    for (std::size_t i = regs_.size(); i-- > 0;) {
      strides_[i] = stride;
      if (sizes_[i] != 0 && stride > (1ULL << 62) / sizes_[i])
        throw TooLargeError("layout: total basis space exceeds 2^62 labels");
      stride *= sizes_[i];
    }
    total_ = stride;
  }

  std::size_t register_count() const { return regs_.size(); }
  const RegisterSpec& reg(std::size_t i) const { return regs_[i]; }
  std::uint64_t reg_size(std::size_t i) const { return sizes_[i]; }
  std::uint64_t total_size() const { return total_; }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < regs_.size(); ++i)
      if (regs_[i].name == name) return i;
    throw UnknownRegisterError("no register named " + std::string(name));
  }

  std::uint64_t pack(std::span<const std::uint64_t> values) const {
    if (values.size() != regs_.size())
      throw InvalidArgumentError("pack: one value per register required");
    std::uint64_t label = 0;
    for (std::size_t i = 0; i < regs_.size(); ++i) {
      if (values[i] >= sizes_[i])
        throw ValueOutOfRangeError("value " + std::to_string(values[i]) +
                                   " does not fit register " + regs_[i].name);
      label += values[i] * strides_[i];
    }
    return label;
  }

  std::uint64_t value(std::uint64_t label, std::size_t i) const {
    return (label / strides_[i]) % sizes_[i];
  }

  std::uint64_t with_value(std::uint64_t label, std::size_t i, std::uint64_t v) const {
    return label - value(label, i) * strides_[i] + v * strides_[i];
  }

  /// Stride of one dit inside the packed label.
  std::uint64_t dit_stride(std::size_t i, int pos) const {
    std::uint64_t s = strides_[i];
    for (int k = 0; k < pos; ++k) s *= static_cast<std::uint64_t>(regs_[i].radix);
    return s;
  }

  int digit(std::uint64_t label, std::size_t i, int pos) const {
    return static_cast<int>((label / dit_stride(i, pos)) %
                            static_cast<std::uint64_t>(regs_[i].radix));
  }

  int total_dits() const {
    int d = 0;
    for (const auto& r : regs_) d += r.width;
    return d;
  }

  bool operator==(const RegisterLayout& other) const {
    if (regs_.size() != other.regs_.size()) return false;
    for (std::size_t i = 0; i < regs_.size(); ++i)
      if (regs_[i].name != other.regs_[i].name ||
          regs_[i].radix != other.regs_[i].radix ||
          regs_[i].width != other.regs_[i].width)
        return false;
    return true;
  }

 private:
  std::vector<RegisterSpec> regs_;
  std::vector<std::uint64_t> sizes_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t total_ = 0;
};

class SparseState {
 public:
  using AmpMap = std::unordered_map<std::uint64_t, Amplitude>;

  SparseState() = default;
  explicit SparseState(std::shared_ptr<const RegisterLayout> layout)
      : layout_(std::move(layout)) {}

  const RegisterLayout& layout() const { return *layout_; }
  std::shared_ptr<const RegisterLayout> layout_ptr() const { return layout_; }

  AmpMap& amps() { return amps_; }
  const AmpMap& amps() const { return amps_; }
  std::size_t support_size() const { return amps_.size(); }

  Amplitude amp(std::uint64_t label) const {
    const auto it = amps_.find(label);
    return it == amps_.end() ? Amplitude{} : it->second;
  }

  double norm_sq() const {
    double s = 0;
    for (const auto& [label, a] : amps_) s += std::norm(a);
    return s;
  }

  void prune() {
    for (auto it = amps_.begin(); it != amps_.end();)
      it = std::abs(it->second) < kPruneThreshold ? amps_.erase(it) : std::next(it);
  }

  std::vector<std::uint64_t> sorted_labels() const {
    std::vector<std::uint64_t> labels;
    labels.reserve(amps_.size());
    for (const auto& [label, a] : amps_) labels.push_back(label);
    std::sort(labels.begin(), labels.end());
    return labels;
  }

 private:
  std::shared_ptr<const RegisterLayout> layout_;
  AmpMap amps_;
};

/// |values[0], values[1], ...>: the single-term state on the given label.
inline SparseState new_basis_state(std::shared_ptr<const RegisterLayout> layout,
                                   std::span<const std::uint64_t> values) {
  SparseState st(std::move(layout));
  st.amps().emplace(st.layout().pack(values), Amplitude{1.0, 0.0});
  return st;
}

inline SparseState new_basis_state(const RegisterLayout& layout,
                                   std::span<const std::uint64_t> values) {
  return new_basis_state(std::make_shared<const RegisterLayout>(layout), values);
}

/// Applies a classical reversible map to the values of the chosen registers.
/// `f` mutates the value tuple in place.  Injectivity on the support is
/// checked by collision detection on the output labels.
inline void apply_permutation(SparseState& st, std::span<const std::string> regs,
                              const std::function<void(std::span<std::uint64_t>)>& f) {
  const RegisterLayout& layout = st.layout();
  std::vector<std::size_t> idx(regs.size());
  for (std::size_t i = 0; i < regs.size(); ++i) idx[i] = layout.index_of(regs[i]);

  SparseState::AmpMap out;
  out.reserve(st.amps().size());
  std::vector<std::uint64_t> vals(regs.size());
  for (const auto& [label, amp] : st.amps()) {
    for (std::size_t i = 0; i < idx.size(); ++i) vals[i] = layout.value(label, idx[i]);
    f(vals);
    std::uint64_t target = label;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (vals[i] >= layout.reg_size(idx[i]))
        throw ValueOutOfRangeError("permutation wrote value " +
                                   std::to_string(vals[i]) + " outside register " +
                                   regs[i]);
      target = layout.with_value(target, idx[i], vals[i]);
    }
    if (!out.emplace(target, amp).second)
      throw NotInjectiveError("permutation maps two support labels to label " +
                              std::to_string(target));
  }
  st.amps() = std::move(out);
}

inline void apply_permutation(SparseState& st, const std::string& reg,
                              const std::function<std::uint64_t(std::uint64_t)>& f) {
  const std::string regs[] = {reg};
  apply_permutation(st, regs, [&](std::span<std::uint64_t> v) { v[0] = f(v[0]); });
}

/// Small dense complex matrix for single-dit gates.
struct Matrix {
  int dim = 0;
  std::vector<Amplitude> a;  // row-major

  Matrix() = default;
  explicit Matrix(int d) : dim(d), a(static_cast<std::size_t>(d) * d) {}

  Amplitude& at(int r, int c) { return a[static_cast<std::size_t>(r) * dim + c]; }
  const Amplitude& at(int r, int c) const {
    return a[static_cast<std::size_t>(r) * dim + c];
  }

  static Matrix identity(int d) {
    Matrix m(d);
    for (int i = 0; i < d; ++i) m.at(i, i) = 1.0;
    return m;
  }

  /// Generalized Hadamard: the order-p DFT with entries w^(jk)/sqrt(p),
  /// w = exp(2*pi*i/p); conjugated when `inverse`.
  static Matrix dft(int p, bool inverse = false) {
    Matrix m(p);
    const double sign = inverse ? -1.0 : 1.0;
    const double s = 1.0 / std::sqrt(static_cast<double>(p));
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) {
        const double ang =
            sign * 2.0 * std::numbers::pi * ((r * c) % p) / static_cast<double>(p);
        m.at(r, c) = Amplitude{s * std::cos(ang), s * std::sin(ang)};
      }
    return m;
  }

  bool is_unitary(double tol = kUnitaryTol) const {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        Amplitude dot{};
        for (int k = 0; k < dim; ++k) dot += std::conj(at(k, i)) * at(k, j);
        if (std::abs(dot - (i == j ? 1.0 : 0.0)) > tol) return false;
      }
    return true;
  }
};

/// Applies the p x p unitary U to one dit.
inline void apply_single_dit(SparseState& st, std::string_view reg, int pos,
                             const Matrix& U) {
  const RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  const int p = layout.reg(ri).radix;
  if (U.dim != p)
    throw InvalidArgumentError("gate dimension does not match register radix");
  if (!U.is_unitary()) throw NotUnitaryError("single-dit gate is not unitary");
  if (pos < 0 || pos >= layout.reg(ri).width)
    throw InvalidArgumentError("dit position out of range");
  const std::uint64_t stride = layout.dit_stride(ri, pos);

  SparseState::AmpMap out;
  out.reserve(st.amps().size() * static_cast<std::size_t>(p));
  for (const auto& [label, amp] : st.amps()) {
    const int d = layout.digit(label, ri, pos);
    const std::uint64_t base = label - static_cast<std::uint64_t>(d) * stride;
    for (int r = 0; r < p; ++r) {
      const Amplitude u = U.at(r, d);
      if (u == Amplitude{}) continue;
      out[base + static_cast<std::uint64_t>(r) * stride] += u * amp;
    }
  }
  st.amps() = std::move(out);
  st.prune();
}

/// Diagonal gate e^(2*pi*i * c * t * theta) on the (control digit c, target
/// digit t) pair.  Norm is preserved exactly.
inline void controlled_phase(SparseState& st, const DitRef& control,
                             const DitRef& target, double theta) {
  const RegisterLayout& layout = st.layout();
  const std::size_t ci = layout.index_of(control.reg);
  const std::size_t ti = layout.index_of(target.reg);
  for (auto& [label, amp] : st.amps()) {
    const int c = layout.digit(label, ci, control.pos);
    const int t = layout.digit(label, ti, target.pos);
    if (c == 0 || t == 0) continue;
    const double ang = 2.0 * std::numbers::pi * theta * c * t;
    amp *= Amplitude{std::cos(ang), std::sin(ang)};
  }
}

enum class Direction { forward, inverse };

namespace detail {

/// Reverses the dit order of a register's value.
inline void dit_reverse(SparseState& st, const std::string& reg) {
  const RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  const int p = layout.reg(ri).radix;
  const int w = layout.reg(ri).width;
  apply_permutation(st, reg, [&](std::uint64_t v) {
    std::uint64_t out = 0;
    for (int i = 0; i < w; ++i) {
      out = out * static_cast<std::uint64_t>(p) + v % static_cast<std::uint64_t>(p);
      v /= static_cast<std::uint64_t>(p);
    }
    return out;
  });
}

}  // namespace detail

/// The order-p^w DFT |b> -> p^(-w/2) sum_x e^(2*pi*i*b*x/p^w) |x> on one
/// register, built from generalized Hadamards and two-dit controlled phases,
/// most significant dit first, with the final dit-reversal correction.
/// `inverse` applies the adjoint.
inline void qft(SparseState& st, const std::string& reg, Direction dir) {
  const RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  const int p = layout.reg(ri).radix;
  const int w = layout.reg(ri).width;
  if (dir == Direction::forward) {
    for (int t = w - 1; t >= 0; --t) {
      apply_single_dit(st, reg, t, Matrix::dft(p));
      for (int m = t - 1; m >= 0; --m)
        controlled_phase(st, {reg, m}, {reg, t},
                         1.0 / std::pow(static_cast<double>(p), t - m + 1));
    }
    detail::dit_reverse(st, reg);
  } else {
    detail::dit_reverse(st, reg);
    for (int t = 0; t < w; ++t) {
      for (int m = t - 1; m >= 0; --m)
        controlled_phase(st, {reg, m}, {reg, t},
                         -1.0 / std::pow(static_cast<double>(p), t - m + 1));
      apply_single_dit(st, reg, t, Matrix::dft(p, /*inverse=*/true));
    }
  }
}

/// |0> -> (1/sqrt(x_max)) sum_{x < x_max} |x> on one register.  The register
/// must hold 0 on every support label.
inline void prepare_uniform(SparseState& st, const std::string& reg,
                            std::uint64_t x_max) {
  const RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  if (x_max < 1 || x_max > layout.reg_size(ri))
    throw TooLargeError("prepare_uniform: x_max does not fit register " + reg);
  for (const auto& [label, amp] : st.amps())
    if (layout.value(label, ri) != 0)
      throw NotZeroedError("prepare_uniform: register " + reg +
                           " is not |0> on the support");
  const double s = 1.0 / std::sqrt(static_cast<double>(x_max));
  SparseState::AmpMap out;
  out.reserve(st.amps().size() * x_max);
  for (const auto& [label, amp] : st.amps())
    for (std::uint64_t x = 0; x < x_max; ++x)
      out.emplace(layout.with_value(label, ri, x), amp * s);
  st.amps() = std::move(out);
}

struct MeasurementRecord {
  std::string reg;
  int pos = 0;
  int outcome = 0;
  std::vector<double> probabilities;  // one entry per digit value
};

/// Projectively measures one dit; collapses and renormalizes the state.
/// Probabilities are accumulated in label order so records are reproducible.
inline MeasurementRecord measure(SparseState& st, const std::string& reg, int pos,
                                 Rng& rng) {
  const RegisterLayout& layout = st.layout();
  const std::size_t ri = layout.index_of(reg);
  const int p = layout.reg(ri).radix;

  MeasurementRecord rec;
  rec.reg = reg;
  rec.pos = pos;
  rec.probabilities.assign(static_cast<std::size_t>(p), 0.0);
  for (const std::uint64_t label : st.sorted_labels())
    rec.probabilities[static_cast<std::size_t>(layout.digit(label, ri, pos))] +=
        std::norm(st.amp(label));

  const double u = rng.uniform();
  double acc = 0;
  int outcome = p - 1;
  for (int d = 0; d < p; ++d) {
    acc += rec.probabilities[static_cast<std::size_t>(d)];
    if (u < acc) {
      outcome = d;
      break;
    }
  }
  rec.outcome = outcome;

  const double scale =
      1.0 / std::sqrt(rec.probabilities[static_cast<std::size_t>(outcome)]);
  SparseState::AmpMap out;
  for (const auto& [label, amp] : st.amps())
    if (layout.digit(label, ri, pos) == outcome) out.emplace(label, amp * scale);
  st.amps() = std::move(out);
  return rec;
}

/// <s1|s2> by sparse intersection.  Layouts must be identical.
inline Amplitude overlap(const SparseState& s1, const SparseState& s2) {
  if (!(s1.layout() == s2.layout()))
    throw LayoutMismatchError("overlap: states have different layouts");
  const SparseState& small = s1.support_size() <= s2.support_size() ? s1 : s2;
  Amplitude sum{};
  for (const std::uint64_t label : small.sorted_labels()) {
    const auto it1 = s1.amps().find(label);
    const auto it2 = s2.amps().find(label);
    if (it1 != s1.amps().end() && it2 != s2.amps().end())
      sum += std::conj(it1->second) * it2->second;
  }
  return sum;
}

/// Text dump, one line per support label: "v1,v2,...: re,im", sorted by
/// label.  Used for golden-file comparisons.
inline std::string dump(const SparseState& st) {
  const RegisterLayout& layout = st.layout();
  std::ostringstream os;
  char buf[64];
  for (const std::uint64_t label : st.sorted_labels()) {
    for (std::size_t i = 0; i < layout.register_count(); ++i) {
      if (i) os << ',';
      os << layout.value(label, i);
    }
    const Amplitude a = st.amp(label);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", a.real(), a.imag());
    os << ": " << buf << '\n';
  }
  return os.str();
}

}  // namespace shorlab::sim

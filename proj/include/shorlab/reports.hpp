#pragma once

// JSON / CSV serialization of experiment outputs.  Key order in the emitted
// JSON is alphabetical (nlohmann's default object ordering), which together
// with seeded runs makes output files byte-reproducible.

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "shorlab/modnum.hpp"
#include "shorlab/order_finding.hpp"
#include "shorlab/resources.hpp"

namespace shorlab::reports {

using nlohmann::json;

inline json to_json(const shor::TrialResult& t) {
  json j;
  j["digits"] = t.digits;
  j["y"] = t.y;
  if (t.candidate.has_value())
    j["candidate"] = *t.candidate;
  else
    j["candidate"] = nullptr;
  j["success"] = t.success;
  j["alpha"] = t.alpha;
  j["beta"] = t.beta;
  j["alpha_gcd"] = t.alpha_gcd;
  return j;
}

inline json to_json(const shor::ExperimentResult& r) {
  json cfg;
  cfg["N"] = r.N;
  cfg["a"] = r.a;
  cfg["variant"] = resources::variant_name(r.variant);
  cfg["radix"] = r.radix;
  cfg["digit_count"] = r.digit_count;
  cfg["seed"] = r.seed;
  cfg["trials"] = r.trials.size();
  if (r.x_max.has_value())
    cfg["x_max"] = *r.x_max;
  else
    cfg["x_max"] = nullptr;
  json trials = json::array();
  for (const auto& t : r.trials) trials.push_back(to_json(t));
  json j;
  j["config"] = std::move(cfg);
  j["trials"] = std::move(trials);
  j["successes"] = r.successes;
  j["success_rate"] = r.success_rate;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  return j;
}

inline json to_json(const resources::ResourceReport& r) {
  json j;
  j["variant"] = resources::variant_name(r.variant);
  j["n"] = r.n;
  j["total_qubits"] = r.total_qubits;
  j["controlled_multiplications"] = r.controlled_multiplications;
  j["modular_additions"] = r.modular_additions;
  j["time_factor"] = std::round(r.time_factor * 1e4) / 1e4;
  return j;
}

inline json to_json(const modnum::MidpointSplit& s, modnum::i64 a, modnum::i64 N) {
  json j;
  j["N"] = N;
  j["a"] = a;
  j["r"] = s.r;
  j["r_prime"] = s.r_prime;
  j["n_prime"] = s.n_prime;
  j["both_below_sqrt"] = s.both_below_sqrt;
  j["invertible"] = s.invertible;
  // r*a = r' (mod N), checked in exact integer arithmetic
  const auto lhs = static_cast<modnum::i128>(s.r) * a - s.r_prime;
  j["verified"] = lhs % N == 0;
  return j;
}

inline std::string to_csv(const shor::FidelityTrace& t) {
  std::string out = "step,per_step_fidelity,cumulative_fidelity\n";
  char line[96];
  for (const auto& s : t.steps) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", s.step, s.per_step,
                  s.cumulative);
    out += line;
  }
  return out;
}

}  // namespace shorlab::reports

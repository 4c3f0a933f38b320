#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stochprox/types.hpp"

namespace stochprox {

/// Stepsizes gamma_n = min(cap, C_c n^{-c}), n >= 1. The optional cap clips a
/// power-law schedule at 1/L so that gamma_n stays in (0, 1/L].
struct StepSchedule {
  double c_gamma = 1.0;              // C_c > 0
  double exponent_c = 0.0;           // c >= 0, so the schedule is nonincreasing
  std::optional<double> cap;         // upper clip, e.g. 1/L

  StepSchedule() = default;
  StepSchedule(double c_gamma_, double exponent_c_, std::optional<double> cap_ = std::nullopt);

  static StepSchedule constant(double gamma) { return StepSchedule(gamma, 0.0); }

  double at(int n) const;            // n >= 1
};

/// Averaging weights a_n = n^a with a > -1.
struct WeightSchedule {
  double exponent_a = 0.0;

  WeightSchedule() = default;
  explicit WeightSchedule(double exponent_a_);

  static WeightSchedule uniform() { return WeightSchedule(0.0); }

  double at(int n) const;            // n >= 1
};

/// Monte Carlo batch sizes m_n = max(1, m_0 + floor(C_b n^b)). The offset form
/// covers affine schedules such as m_n = 200 + n.
struct BatchSchedule {
  long long offset = 0;              // m_0 >= 0
  double c_b = 1.0;                  // C_b > 0
  double exponent_b = 0.0;           // b >= 0

  BatchSchedule() = default;
  BatchSchedule(long long offset_, double c_b_, double exponent_b_);

  static BatchSchedule constant(long long m) { return BatchSchedule(m - 1, 1.0, 0.0); }

  long long at(int n) const;         // n >= 1
};

/// Momentum sequence for the accelerated solver. All kinds satisfy t_0 = 1;
/// whether the pair (gamma_n, t_n) satisfies the compatibility condition
///   gamma_{n+1} t_n (t_n - 1) <= gamma_n t_{n-1}^2
/// is checked separately by validate_t_gamma.
struct TSequence {
  enum class Kind { recursive, linear_half, power, ones };

  Kind kind = Kind::recursive;
  double beta = 0.5;                 // power kind only, must be in (0,1)
  double n0 = 2.0;                   // power kind only, must be > 0

  static TSequence recursive() { return TSequence{Kind::recursive}; }
  static TSequence linear_half() { return TSequence{Kind::linear_half}; }
  static TSequence power(double beta, double n0) { return TSequence{Kind::power, beta, n0}; }
  static TSequence ones() { return TSequence{Kind::ones}; }
};

/// t_0 .. t_{n_iters}. recursive: t_{n+1} = (1 + sqrt(1 + 4 t_n^2)) / 2, which
/// grows like n/2; linear_half: t_n = n/2 + 1; power: t_n = ((n+n0)/n0)^beta.
std::vector<double> make_t_sequence(const TSequence& kind, int n_iters);

/// Checks t_0 = 1 and gamma_{n+1} t_n (t_n-1) <= gamma_n t_{n-1}^2 + 1e-12 for
/// n = 1..n_iters on explicit sequences (gammas[n] = gamma_{n+1} for index n,
/// 1-based values at positions 1..n_iters+1). Returns the first violated n, or
/// nullopt on pass.
std::optional<int> validate_t_gamma(const std::vector<double>& gammas,
                                    const std::vector<double>& ts, int n_iters);
std::optional<int> validate_t_gamma(const StepSchedule& steps, const TSequence& tseq, int n_iters);

/// Half-open/closed interval used to describe the admissible exponent ranges
/// of the tuning tables.
struct ExponentRange {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double x) const {
    const bool above = lo_open ? x > lo : x >= lo;
    const bool below = hi_open ? x < hi : x <= hi;
    return above && below;
  }
  std::string str() const;
};

enum class PresetTable { averaged_pg, fista };

/// One row of the tuning tables: the admissible (a, b, c) exponents together
/// with the resulting rate n^{-rate_exponent(c)} and the Monte Carlo cost
/// delta^{-cost_exponent(b, c)} to reach precision delta. Some rows pin b (or
/// a) to a function of the chosen c, hence the accessors take c.
struct ScheduleConstraints {
  PresetTable table;
  std::string row;                   // e.g. "no_bias_1"
  ExponentRange c;
  bool biased = false;
  bool exact = false;                // last row of each table (eta = 0)

  std::optional<ExponentRange> a_range(double chosen_c) const;  // absent for FISTA rows
  std::optional<ExponentRange> b_range(double chosen_c) const;  // absent for exact rows
  double rate_exponent(double chosen_c) const;                   // rate 1/n^{rate_exponent}
  double cost_exponent(double chosen_b, double chosen_c) const;  // cost 1/delta^{cost_exponent}
};

/// Rows: averaged_pg {no_bias_1, no_bias_2, no_bias_3, bias_1, bias_2, bias_3,
/// exact}; fista {no_bias_1, no_bias_2, bias_1, bias_2, bias_3, exact}.
ScheduleConstraints schedule_preset(PresetTable table, const std::string& row);

std::vector<std::string> schedule_preset_rows(PresetTable table);

}  // namespace stochprox

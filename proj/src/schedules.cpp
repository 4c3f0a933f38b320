#include "stochprox/schedules.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace stochprox {

StepSchedule::StepSchedule(double c_gamma_, double exponent_c_, std::optional<double> cap_)
    : c_gamma(c_gamma_), exponent_c(exponent_c_), cap(cap_) {
  require(c_gamma > 0.0, "StepSchedule: C_c must be > 0");
  require(exponent_c >= 0.0, "StepSchedule: exponent c must be >= 0");
  if (cap) require(*cap > 0.0, "StepSchedule: cap must be > 0");
}

double StepSchedule::at(int n) const {
  require(n >= 1, "StepSchedule::at: n must be >= 1");
  const double g = c_gamma * std::pow(static_cast<double>(n), -exponent_c);
  return cap ? std::min(*cap, g) : g;
}

WeightSchedule::WeightSchedule(double exponent_a_) : exponent_a(exponent_a_) {
  require(exponent_a > -1.0, "WeightSchedule: exponent a must be > -1");
}

double WeightSchedule::at(int n) const {
  require(n >= 1, "WeightSchedule::at: n must be >= 1");
  return std::pow(static_cast<double>(n), exponent_a);
}

BatchSchedule::BatchSchedule(long long offset_, double c_b_, double exponent_b_)
    : offset(offset_), c_b(c_b_), exponent_b(exponent_b_) {
  require(offset >= 0, "BatchSchedule: offset m_0 must be >= 0");
  require(c_b > 0.0, "BatchSchedule: C_b must be > 0");
  require(exponent_b >= 0.0, "BatchSchedule: exponent b must be >= 0");
}

long long BatchSchedule::at(int n) const {
  require(n >= 1, "BatchSchedule::at: n must be >= 1");
  const double grow = std::floor(c_b * std::pow(static_cast<double>(n), exponent_b));
  return std::max<long long>(1, offset + static_cast<long long>(grow));
}

std::vector<double> make_t_sequence(const TSequence& kind, int n_iters) {
  require(n_iters >= 1, "make_t_sequence: n_iters must be >= 1");
  std::vector<double> t(static_cast<size_t>(n_iters) + 1);
  t[0] = 1.0;
  switch (kind.kind) {
    case TSequence::Kind::recursive:
      for (int n = 0; n < n_iters; ++n) {
        t[n + 1] = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t[n] * t[n]));
      }
      break;
    case TSequence::Kind::linear_half:
      for (int n = 1; n <= n_iters; ++n) t[n] = 0.5 * n + 1.0;
      break;
    case TSequence::Kind::power:
      require(kind.beta > 0.0 && kind.beta < 1.0,
              "make_t_sequence: power kind needs beta in (0,1)");
      require(kind.n0 > 0.0, "make_t_sequence: power kind needs n0 > 0");
      for (int n = 1; n <= n_iters; ++n) t[n] = std::pow((n + kind.n0) / kind.n0, kind.beta);
      break;
    case TSequence::Kind::ones:
      for (int n = 1; n <= n_iters; ++n) t[n] = 1.0;
      break;
  }
  return t;
}

std::optional<int> validate_t_gamma(const std::vector<double>& gammas,
                                    const std::vector<double>& ts, int n_iters) {
  constexpr double tol = 1e-12;
  if (ts.empty() || std::abs(ts[0] - 1.0) > tol) return 0;
  for (int n = 1; n <= n_iters; ++n) {
    if (static_cast<size_t>(n) + 1 >= gammas.size() || static_cast<size_t>(n) >= ts.size()) break;
    const double lhs = gammas[static_cast<size_t>(n) + 1] * ts[n] * (ts[n] - 1.0);
    const double rhs = gammas[n] * ts[n - 1] * ts[n - 1];
    // tolerance scales with rhs: the recursive sequence satisfies the
    // condition with equality, so roundoff grows with t_n^2
    if (lhs > rhs + tol * std::max(1.0, rhs)) return n;
  }
  return std::nullopt;
}

std::optional<int> validate_t_gamma(const StepSchedule& steps, const TSequence& tseq, int n_iters) {
  std::vector<double> gammas(static_cast<size_t>(n_iters) + 2, 0.0);
  for (int n = 1; n <= n_iters + 1; ++n) gammas[n] = steps.at(n);
  const std::vector<double> ts = make_t_sequence(tseq, n_iters);
  return validate_t_gamma(gammas, ts, n_iters);
}

std::string ExponentRange::str() const {
  std::ostringstream os;
  if (lo == hi && !lo_open && !hi_open) {
    os << lo;
    return os.str();
  }
  os << (lo_open ? "(" : "[") << lo << ", ";
  if (std::isinf(hi)) {
    os << "inf)";
  } else {
    os << hi << (hi_open ? ")" : "]");
  }
  return os.str();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExponentRange pinned(double v) { return ExponentRange{v, v, false, false}; }
ExponentRange open_above(double lo) { return ExponentRange{lo, kInf, true, true}; }

}  // namespace

std::optional<ExponentRange> ScheduleConstraints::a_range(double chosen_c) const {
  if (table == PresetTable::fista) return std::nullopt;
  if (exact) return ExponentRange{-1.0, kInf, true, true};
  if (row == "no_bias_1" || row == "bias_1" || row == "bias_2") return open_above(0.0);
  if (row == "no_bias_2") return open_above(-chosen_c);
  // no_bias_3 / bias_3 take the boundary weight a = -c.
  return pinned(-chosen_c);
}

std::optional<ExponentRange> ScheduleConstraints::b_range(double chosen_c) const {
  if (exact) return std::nullopt;
  if (table == PresetTable::averaged_pg) {
    if (row == "no_bias_1" || row == "bias_1") return pinned(1.0);
    if (row == "no_bias_2") return pinned(1.0 - 2.0 * chosen_c);
    if (row == "no_bias_3") {
      return ExponentRange{std::max(0.0, 1.0 - 2.0 * chosen_c), kInf, 1.0 - 2.0 * chosen_c >= 0.0,
                           true};
    }
    if (row == "bias_2") return pinned(1.0 - chosen_c);
    return open_above(1.0 - chosen_c);  // bias_3
  }
  if (row == "no_bias_1" || row == "bias_1") return open_above(3.0);
  if (row == "no_bias_2") {
    return ExponentRange{std::max(0.0, 3.0 - 2.0 * chosen_c), kInf, 3.0 - 2.0 * chosen_c >= 0.0,
                         true};
  }
  if (row == "bias_2") return open_above(3.0 - 2.0 * chosen_c);
  return open_above(2.0 - chosen_c);  // bias_3
}

double ScheduleConstraints::rate_exponent(double chosen_c) const {
  return (table == PresetTable::averaged_pg ? 1.0 : 2.0) - chosen_c;
}

double ScheduleConstraints::cost_exponent(double chosen_b, double chosen_c) const {
  if (exact) return std::numeric_limits<double>::quiet_NaN();
  if (table == PresetTable::averaged_pg) {
    if (row == "no_bias_1" || row == "no_bias_2" || row == "bias_1") return 2.0;
    if (row == "bias_2") return (2.0 - chosen_c) / (1.0 - chosen_c);
    return (1.0 + chosen_b) / (1.0 - chosen_c);  // no_bias_3 / bias_3
  }
  if (row == "no_bias_1" || row == "bias_1") return (chosen_b + 1.0) / 2.0;
  return (chosen_b + 1.0) / (2.0 - chosen_c);
}

ScheduleConstraints schedule_preset(PresetTable table, const std::string& row) {
  ScheduleConstraints sc;
  sc.table = table;
  sc.row = row;
  sc.biased = row.rfind("bias_", 0) == 0;
  sc.exact = row == "exact";

  if (table == PresetTable::averaged_pg) {
    if (row == "no_bias_1" || row == "bias_1") {
      sc.c = pinned(0.0);
    } else if (row == "no_bias_2") {
      sc.c = ExponentRange{0.0, 0.5, false, false};
    } else if (row == "no_bias_3" || row == "bias_2" || row == "bias_3" || row == "exact") {
      sc.c = ExponentRange{0.0, 1.0, false, true};
    } else {
      throw std::invalid_argument("schedule_preset: unknown averaged_pg row '" + row + "'");
    }
    return sc;
  }
  if (row == "no_bias_1" || row == "bias_1") {
    sc.c = pinned(0.0);
  } else if (row == "no_bias_2" || row == "exact") {
    sc.c = ExponentRange{0.0, 2.0, false, true};
  } else if (row == "bias_2") {
    sc.c = ExponentRange{0.0, 1.0, false, true};
  } else if (row == "bias_3") {
    sc.c = ExponentRange{1.0, 2.0, false, true};
  } else {
    throw std::invalid_argument("schedule_preset: unknown fista row '" + row + "'");
  }
  return sc;
}

std::vector<std::string> schedule_preset_rows(PresetTable table) {
  if (table == PresetTable::averaged_pg) {
    return {"no_bias_1", "no_bias_2", "no_bias_3", "bias_1", "bias_2", "bias_3", "exact"};
  }
  return {"no_bias_1", "no_bias_2", "bias_1", "bias_2", "bias_3", "exact"};
}

}  // namespace stochprox

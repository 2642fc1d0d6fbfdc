#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace nestlog {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum_i exp(x_i)); -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return kNegInf;
  const double top = *std::max_element(x.begin(), x.end());
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - top);
  return top + std::log(sum);
}

/// A real number held as sign * exp(log_abs). Zero has sign 0.
struct SignedLog {
  double log_abs = kNegInf;
  int sign = 0;

  static SignedLog zero() { return {}; }
  static SignedLog of(double value) {
    if (value == 0.0) return {};
    return {std::log(std::fabs(value)), value > 0 ? 1 : -1};
  }

  bool is_zero() const { return sign == 0; }
  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

  SignedLog scaled(double factor) const {
    if (sign == 0 || factor == 0.0) return {};
    return {log_abs + std::log(std::fabs(factor)), factor > 0 ? sign : -sign};
  }
};

/// Streaming signed sum of terms given as SignedLog; rescales on a new
/// maximum so no intermediate overflows.
class SignedLogSum {
 public:
  void add(double log_abs, int sign) {
    if (sign == 0 || log_abs == kNegInf) return;
    if (log_abs > top_) {
      sum_ = sum_ * std::exp(top_ - log_abs) + sign;
      top_ = log_abs;
    } else {
      sum_ += sign * std::exp(log_abs - top_);
    }
  }
  void add(SignedLog term) { add(term.log_abs, term.sign); }

  SignedLog result() const {
    if (top_ == kNegInf || sum_ == 0.0) return {};
    return {top_ + std::log(std::fabs(sum_)), sum_ > 0 ? 1 : -1};
  }

 private:
  double top_ = kNegInf;
  double sum_ = 0.0;
};

}  // namespace nestlog

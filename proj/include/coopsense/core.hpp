// ============================================================================
// core.hpp -- shared vocabulary types and error classes
// ============================================================================
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace coopsense {

/// Raised when an argument lies outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when a series or continued fraction exhausts its iteration budget.
class convergence_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Hypothesis : unsigned char { H0 = 0, H1 = 1 };

[[nodiscard]] constexpr const char* to_string(Hypothesis h) noexcept {
  return h == Hypothesis::H1 ? "H1" : "H0";
}

// A value in [0, 1]. Construction rejects NaN and anything out of range;
// use clamped() for computed quantities that may drift by a rounding error.
class Probability {
public:
  constexpr Probability() noexcept = default;

  explicit Probability(double v) : value_{v} {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw domain_error("probability out of [0,1]: " + std::to_string(v));
    }
  }

  [[nodiscard]] static Probability clamped(double v) {
    if (std::isnan(v)) throw domain_error("probability is NaN");
    return Probability{v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v)};
  }

  [[nodiscard]] constexpr double value() const noexcept { return value_; }
  [[nodiscard]] constexpr Probability complement() const noexcept {
    Probability p;
    p.value_ = 1.0 - value_;
    return p;
  }

  friend constexpr auto operator<=>(Probability, Probability) = default;

private:
  double value_ = 0.0;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw domain_error(what);
}

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw domain_error(what);
}

}  // namespace detail
}  // namespace coopsense

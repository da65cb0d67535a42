#pragma once
// Exact time quantities. All timestamps, interval bounds, clock constants and
// clock valuations are rationals; clock values may additionally be infinite.

#include <boost/rational.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mmp {

using Rational = boost::rational<std::int64_t>;

/// Parses "3", "-2", "7.5", "1/3" or "0.125" exactly. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// Canonical text: integers as "n", others as "p/q".
std::string to_string(const Rational& r);

double to_double(const Rational& r);

/// Rational extended with +∞. Used for clock valuations and interval upper bounds.
class ExtRational {
 public:
  constexpr ExtRational() = default;
  ExtRational(Rational v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  ExtRational(std::int64_t v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  static ExtRational infinity() {
    ExtRational r;
    r.infinite_ = true;
    return r;
  }

  bool is_infinite() const { return infinite_; }
  /// Precondition: finite.
  const Rational& value() const { return value_; }

  friend bool operator==(const ExtRational& a, const ExtRational& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b) {
    if (a.infinite_ && b.infinite_) return std::strong_ordering::equal;
    if (a.infinite_) return std::strong_ordering::greater;
    if (b.infinite_) return std::strong_ordering::less;
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (b.value_ < a.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  Rational value_{0};
  bool infinite_ = false;
};

/// "inf" or a rational literal.
ExtRational parse_ext_rational(std::string_view text);
std::string to_string(const ExtRational& r);

std::int64_t lcm_of_denominators(std::int64_t acc, const Rational& r);

}  // namespace mmp

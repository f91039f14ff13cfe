#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace obell {

/// Exact fraction over 64-bit integers, always stored in lowest terms with a
/// positive denominator. Enumeration oracles work with denominators no larger
/// than a few hundred, so overflow is not a practical concern; comparisons go
/// through 128-bit products anyway.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(implicit)
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("Rational: zero denominator");
    normalize();
  }

  [[nodiscard]] constexpr std::int64_t num() const { return num_; }
  [[nodiscard]] constexpr std::int64_t den() const { return den_; }
  [[nodiscard]] constexpr double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  [[nodiscard]] std::string str() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Rational operator+(const Rational& x, const Rational& y) {
    return {x.num_ * y.den_ + y.num_ * x.den_, x.den_ * y.den_};
  }
  friend Rational operator-(const Rational& x, const Rational& y) {
    return {x.num_ * y.den_ - y.num_ * x.den_, x.den_ * y.den_};
  }
  friend Rational operator*(const Rational& x, const Rational& y) {
    return {x.num_ * y.num_, x.den_ * y.den_};
  }
  friend Rational operator/(const Rational& x, const Rational& y) {
    return {x.num_ * y.den_, x.den_ * y.num_};
  }
  Rational operator-() const { return Rational{-num_, den_}; }
  Rational& operator+=(const Rational& y) { return *this = *this + y; }
  Rational& operator-=(const Rational& y) { return *this = *this - y; }

  friend bool operator==(const Rational& x, const Rational& y) {
    return x.num_ == y.num_ && x.den_ == y.den_;
  }
  friend bool operator<(const Rational& x, const Rational& y) {
    __extension__ using wide = __int128;
    return static_cast<wide>(x.num_) * y.den_ < static_cast<wide>(y.num_) * x.den_;
  }
  friend bool operator>(const Rational& x, const Rational& y) { return y < x; }
  friend bool operator<=(const Rational& x, const Rational& y) { return !(y < x); }
  friend bool operator>=(const Rational& x, const Rational& y) { return !(x < y); }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational abs(const Rational& r) { return r.num() < 0 ? -r : r; }

}  // namespace obell

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nkv/error.hpp"

namespace nkv {

/// A nonnegative real sequence n -> a_n, n = 0, 1, 2, ..., given in one of
/// the closed forms problem files can express:
///   constant  a_n = c
///   geometric a_n = c q^n
///   power     a_n = c max(n, 1)^(-p)
///   table     explicit values, the last one held for all later n
/// optionally plus a constant offset.
class Sequence {
 public:
  enum class Kind { constant, geometric, power, table };

  Sequence() = default;  // the zero sequence

  static Sequence constant(double c) { return Sequence(Kind::constant, c, 0.0, {}); }
  static Sequence geometric(double c, double q) { return Sequence(Kind::geometric, c, q, {}); }
  static Sequence power(double c, double p) { return Sequence(Kind::power, c, p, {}); }
  static Sequence table(std::vector<double> values) {
    if (values.empty()) values.push_back(0.0);
    return Sequence(Kind::table, 0.0, 0.0, std::move(values));
  }

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return c_; }
  double parameter() const noexcept { return p_; }
  const std::vector<double>& values() const noexcept { return table_; }

  double at(std::size_t n) const { return base_at(n) + offset_; }
  double operator()(std::size_t n) const { return at(n); }
  double offset() const noexcept { return offset_; }

  /// Same sequence plus the constant d >= 0.
  Sequence plus(double d) const {
    Sequence out = *this;
    out.offset_ += d;
    return out;
  }

  /// Same sequence multiplied by s >= 0.
  Sequence scaled(double s) const {
    Sequence out = *this;
    out.c_ *= s;
    out.offset_ *= s;
    for (auto& v : out.table_) v *= s;
    return out;
  }

  bool is_zero() const {
    if (offset_ != 0.0) return false;
    if (kind_ == Kind::table) return std::all_of(table_.begin(), table_.end(), [](double v) { return v == 0.0; });
    return c_ == 0.0;
  }

  /// sup_{k >= m} a_k, possibly +inf.
  double sup_from(std::size_t m) const { return base_sup_from(m) + offset_; }

  /// Upper bound for sum_{k >= m} a_k (exact for constant, geometric and
  /// table; integral comparison for power). +inf when the series diverges.
  double tail_sum(std::size_t m) const {
    if (offset_ != 0.0) return std::numeric_limits<double>::infinity();
    return base_tail_sum(m);
  }

  void validate_nonnegative(const std::string& what) const {
    const bool bad_offset = !(offset_ >= 0.0) || !std::isfinite(offset_);
    const bool bad_form = (kind_ != Kind::table) && !(c_ >= 0.0 && std::isfinite(c_) && std::isfinite(p_));
    const bool bad_geometric = kind_ == Kind::geometric && !(p_ >= 0.0);
    const bool bad_table = kind_ == Kind::table && std::any_of(table_.begin(), table_.end(), [](double v) {
                             return !(v >= 0.0) || !std::isfinite(v);
                           });
    if (bad_offset || bad_form || bad_geometric || bad_table) throw PreconditionError(what + " must be a finite nonnegative sequence");
  }

  std::string describe() const {
    std::string base;
    switch (kind_) {
      case Kind::constant: base = "constant(" + std::to_string(c_) + ")"; break;
      case Kind::geometric: base = "geometric(" + std::to_string(c_) + ", " + std::to_string(p_) + ")"; break;
      case Kind::power: base = "power(" + std::to_string(c_) + ", " + std::to_string(p_) + ")"; break;
      case Kind::table: base = "table[" + std::to_string(table_.size()) + "]"; break;
    }
    return offset_ == 0.0 ? base : base + " + " + std::to_string(offset_);
  }

 private:
  double base_at(std::size_t n) const {
    switch (kind_) {
      case Kind::constant: return c_;
      case Kind::geometric: return c_ * std::pow(p_, static_cast<double>(n));
      case Kind::power: return c_ * std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), -p_);
      case Kind::table: return table_[std::min(n, table_.size() - 1)];
    }
    return 0.0;
  }
  double base_sup_from(std::size_t m) const {
    switch (kind_) {
      case Kind::constant: return c_;
      case Kind::geometric:
        if (c_ == 0.0) return 0.0;
        return p_ <= 1.0 ? base_at(m) : std::numeric_limits<double>::infinity();
      case Kind::power:
        if (c_ == 0.0) return 0.0;
        return p_ >= 0.0 ? base_at(m) : std::numeric_limits<double>::infinity();
      case Kind::table: {
        double best = table_.back();
        for (std::size_t k = m; k < table_.size(); ++k) best = std::max(best, table_[k]);
        return best;
      }
    }
    return 0.0;
  }

  double base_tail_sum(std::size_t m) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (is_zero()) return 0.0;
    switch (kind_) {
      case Kind::constant: return inf;
      case Kind::geometric: return p_ < 1.0 ? base_at(m) / (1.0 - p_) : inf;
      case Kind::power: {
        if (p_ <= 1.0) return inf;
        const double start = static_cast<double>(std::max<std::size_t>(m, 1));
        // a_start + int_start^inf c x^-p dx, plus a_0 = a_1 when m = 0
        double sum = base_at(m) + c_ * std::pow(start, 1.0 - p_) / (p_ - 1.0);
        if (m == 0) sum += base_at(1);
        return sum;
      }
      case Kind::table: {
        if (table_.back() != 0.0) return inf;
        double sum = 0.0;
        for (std::size_t k = m; k < table_.size(); ++k) sum += table_[k];
        return sum;
      }
    }
    return inf;
  }

  Sequence(Kind kind, double c, double p, std::vector<double> table)
      : kind_(kind), c_(c), p_(p), table_(std::move(table)) {}

  Kind kind_ = Kind::constant;
  double c_ = 0.0;
  double p_ = 0.0;
  std::vector<double> table_;
  double offset_ = 0.0;
};

}  // namespace nkv

// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cstar {

// Arbitrary-precision signed integer. Object-logic literals `&n` are
// mathematical integers, and the arithmetic decision procedure combines
// constraints whose coefficients can outgrow any fixed width.
class BigInt {
 public:
  BigInt() = default;
  BigInt(long long v);  // NOLINT: implicit by design, literals read naturally
  static BigInt from_string(const std::string& s);

  bool negative() const { return neg_; }
  bool is_zero() const { return mag_.empty(); }
  bool fits_int64() const;
  std::int64_t to_int64() const;  // requires fits_int64()
  std::string to_string() const;

  BigInt operator-() const;
  BigInt abs() const;

  friend BigInt operator+(const BigInt& a, const BigInt& b);
  friend BigInt operator-(const BigInt& a, const BigInt& b);
  friend BigInt operator*(const BigInt& a, const BigInt& b);

  // Floor division and the matching remainder (sign of divisor, never
  // negative for positive divisors). div_floor(-7, 2) = -4, mod_floor = 1.
  static BigInt div_floor(const BigInt& a, const BigInt& b);
  static BigInt mod_floor(const BigInt& a, const BigInt& b);
  // Truncating division, the C semantics. div_trunc(-7, 2) = -3, rem = -1.
  static BigInt div_trunc(const BigInt& a, const BigInt& b);
  static BigInt rem_trunc(const BigInt& a, const BigInt& b);

  static BigInt gcd(BigInt a, BigInt b);
  static BigInt pow(const BigInt& base, const BigInt& exp);  // exp >= 0

  // -1, 0, +1
  static int cmp(const BigInt& a, const BigInt& b);

  friend bool operator==(const BigInt& a, const BigInt& b) { return cmp(a, b) == 0; }
  friend bool operator!=(const BigInt& a, const BigInt& b) { return cmp(a, b) != 0; }
  friend bool operator<(const BigInt& a, const BigInt& b) { return cmp(a, b) < 0; }
  friend bool operator<=(const BigInt& a, const BigInt& b) { return cmp(a, b) <= 0; }
  friend bool operator>(const BigInt& a, const BigInt& b) { return cmp(a, b) > 0; }
  friend bool operator>=(const BigInt& a, const BigInt& b) { return cmp(a, b) >= 0; }

 private:
  // Sign-magnitude, base 2^32 little-endian, no trailing zero limbs.
  bool neg_ = false;
  std::vector<std::uint32_t> mag_;

  void trim();
  static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);
  static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b);
  static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b);
};

}  // namespace cstar

// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/bigint.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace cstar {

BigInt::BigInt(long long v) {
  neg_ = v < 0;
  unsigned long long m = neg_ ? ~static_cast<unsigned long long>(v) + 1ULL
                              : static_cast<unsigned long long>(v);
  while (m != 0) {
    mag_.push_back(static_cast<std::uint32_t>(m & 0xffffffffULL));
    m >>= 32;
  }
}

BigInt BigInt::from_string(const std::string& s) {
  BigInt r;
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
    neg = s[i] == '-';
    ++i;
  }
  if (i == s.size()) throw std::invalid_argument("BigInt: empty numeral");
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("BigInt: bad digit");
    r = r * BigInt(10) + BigInt(s[i] - '0');
  }
  if (neg) r = -r;
  return r;
}

void BigInt::trim() {
  while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
  if (mag_.empty()) neg_ = false;
}

bool BigInt::fits_int64() const {
  if (mag_.size() > 2) return false;
  unsigned long long m = 0;
  for (size_t i = mag_.size(); i-- > 0;) m = (m << 32) | mag_[i];
  if (neg_) return m <= 0x8000000000000000ULL;
  return m <= 0x7fffffffffffffffULL;
}

std::int64_t BigInt::to_int64() const {
  unsigned long long m = 0;
  for (size_t i = mag_.size(); i-- > 0;) m = (m << 32) | mag_[i];
  return neg_ ? -static_cast<std::int64_t>(m) : static_cast<std::int64_t>(m);
}

std::string BigInt::to_string() const {
  if (is_zero()) return "0";
  std::vector<std::uint32_t> m = mag_;
  std::string digits;
  while (!m.empty()) {
    unsigned long long rem = 0;
    for (size_t i = m.size(); i-- > 0;) {
      unsigned long long cur = (rem << 32) | m[i];
      m[i] = static_cast<std::uint32_t>(cur / 10);
      rem = cur % 10;
    }
    digits.push_back(static_cast<char>('0' + rem));
    while (!m.empty() && m.back() == 0) m.pop_back();
  }
  if (neg_) digits.push_back('-');
  std::reverse(digits.begin(), digits.end());
  return digits;
}

BigInt BigInt::operator-() const {
  BigInt r = *this;
  if (!r.is_zero()) r.neg_ = !r.neg_;
  return r;
}

BigInt BigInt::abs() const {
  BigInt r = *this;
  r.neg_ = false;
  return r;
}

int BigInt::cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  return 0;
}

std::vector<std::uint32_t> BigInt::add_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> r;
  r.reserve(std::max(a.size(), b.size()) + 1);
  unsigned long long carry = 0;
  for (size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    unsigned long long s = carry;
    if (i < a.size()) s += a[i];
    if (i < b.size()) s += b[i];
    r.push_back(static_cast<std::uint32_t>(s & 0xffffffffULL));
    carry = s >> 32;
  }
  if (carry) r.push_back(static_cast<std::uint32_t>(carry));
  return r;
}

// requires |a| >= |b|
std::vector<std::uint32_t> BigInt::sub_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> r;
  r.reserve(a.size());
  long long borrow = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    long long d = static_cast<long long>(a[i]) - borrow - (i < b.size() ? b[i] : 0);
    if (d < 0) {
      d += 1LL << 32;
      borrow = 1;
    } else {
      borrow = 0;
    }
    r.push_back(static_cast<std::uint32_t>(d));
  }
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

BigInt operator+(const BigInt& a, const BigInt& b) {
  BigInt r;
  if (a.neg_ == b.neg_) {
    r.neg_ = a.neg_;
    r.mag_ = BigInt::add_mag(a.mag_, b.mag_);
  } else {
    int c = BigInt::cmp_mag(a.mag_, b.mag_);
    if (c == 0) return BigInt();
    if (c > 0) {
      r.neg_ = a.neg_;
      r.mag_ = BigInt::sub_mag(a.mag_, b.mag_);
    } else {
      r.neg_ = b.neg_;
      r.mag_ = BigInt::sub_mag(b.mag_, a.mag_);
    }
  }
  r.trim();
  return r;
}

BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

BigInt operator*(const BigInt& a, const BigInt& b) {
  if (a.is_zero() || b.is_zero()) return BigInt();
  BigInt r;
  r.neg_ = a.neg_ != b.neg_;
  r.mag_.assign(a.mag_.size() + b.mag_.size(), 0);
  for (size_t i = 0; i < a.mag_.size(); ++i) {
    unsigned long long carry = 0;
    for (size_t j = 0; j < b.mag_.size(); ++j) {
      unsigned long long cur = r.mag_[i + j] +
                               static_cast<unsigned long long>(a.mag_[i]) * b.mag_[j] + carry;
      r.mag_[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffULL);
      carry = cur >> 32;
    }
    size_t k = i + b.mag_.size();
    while (carry) {
      unsigned long long cur = r.mag_[k] + carry;
      r.mag_[k] = static_cast<std::uint32_t>(cur & 0xffffffffULL);
      carry = cur >> 32;
      ++k;
    }
  }
  r.trim();
  return r;
}

// Schoolbook magnitude division: returns quotient, leaves remainder in rem.
static std::vector<std::uint32_t> divmod_mag(const std::vector<std::uint32_t>& a,
                                             const std::vector<std::uint32_t>& b,
                                             std::vector<std::uint32_t>& rem) {
  std::vector<std::uint32_t> q(a.size(), 0);
  std::vector<std::uint32_t> r;  // running remainder, little-endian
  for (size_t i = a.size(); i-- > 0;) {
    r.insert(r.begin(), a[i]);
    while (!r.empty() && r.back() == 0) r.pop_back();
    // binary search the quotient digit
    std::uint32_t lo = 0, hi = 0xffffffffu, digit = 0;
    while (lo <= hi) {
      std::uint32_t mid = lo + (hi - lo) / 2;
      // compute b*mid and compare to r
      std::vector<std::uint32_t> prod;
      unsigned long long carry = 0;
      for (std::uint32_t limb : b) {
        unsigned long long cur = static_cast<unsigned long long>(limb) * mid + carry;
        prod.push_back(static_cast<std::uint32_t>(cur & 0xffffffffULL));
        carry = cur >> 32;
      }
      if (carry) prod.push_back(static_cast<std::uint32_t>(carry));
      while (!prod.empty() && prod.back() == 0) prod.pop_back();
      int c = (prod.size() != r.size()) ? (prod.size() < r.size() ? -1 : 1) : [&] {
        for (size_t k = prod.size(); k-- > 0;)
          if (prod[k] != r[k]) return prod[k] < r[k] ? -1 : 1;
        return 0;
      }();
      if (c <= 0) {
        digit = mid;
        if (mid == 0xffffffffu) break;
        lo = mid + 1;
      } else {
        if (mid == 0) break;
        hi = mid - 1;
      }
    }
    q[i] = digit;
    if (digit) {
      std::vector<std::uint32_t> prod;
      unsigned long long carry = 0;
      for (std::uint32_t limb : b) {
        unsigned long long cur = static_cast<unsigned long long>(limb) * digit + carry;
        prod.push_back(static_cast<std::uint32_t>(cur & 0xffffffffULL));
        carry = cur >> 32;
      }
      if (carry) prod.push_back(static_cast<std::uint32_t>(carry));
      // r -= prod
      long long borrow = 0;
      for (size_t k = 0; k < r.size(); ++k) {
        long long d = static_cast<long long>(r[k]) - borrow - (k < prod.size() ? prod[k] : 0);
        if (d < 0) {
          d += 1LL << 32;
          borrow = 1;
        } else {
          borrow = 0;
        }
        r[k] = static_cast<std::uint32_t>(d);
      }
      while (!r.empty() && r.back() == 0) r.pop_back();
    }
  }
  while (!q.empty() && q.back() == 0) q.pop_back();
  rem = r;
  return q;
}

BigInt BigInt::div_trunc(const BigInt& a, const BigInt& b) {
  if (b.is_zero()) throw std::domain_error("BigInt: division by zero");
  BigInt q;
  std::vector<std::uint32_t> rem;
  q.mag_ = divmod_mag(a.mag_, b.mag_, rem);
  q.neg_ = a.neg_ != b.neg_;
  q.trim();
  return q;
}

BigInt BigInt::rem_trunc(const BigInt& a, const BigInt& b) {
  return a - div_trunc(a, b) * b;
}

BigInt BigInt::div_floor(const BigInt& a, const BigInt& b) {
  BigInt q = div_trunc(a, b);
  BigInt r = a - q * b;
  if (!r.is_zero() && (r.negative() != b.negative())) q = q - BigInt(1);
  return q;
}

BigInt BigInt::mod_floor(const BigInt& a, const BigInt& b) {
  return a - div_floor(a, b) * b;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
  a = a.abs();
  b = b.abs();
  while (!b.is_zero()) {
    BigInt t = mod_floor(a, b);
    a = b;
    b = t;
  }
  return a;
}

BigInt BigInt::pow(const BigInt& base, const BigInt& exp) {
  if (exp.negative()) throw std::domain_error("BigInt: negative exponent");
  BigInt r(1), b = base, e = exp;
  while (!e.is_zero()) {
    if (!mod_floor(e, BigInt(2)).is_zero()) r = r * b;
    b = b * b;
    e = div_floor(e, BigInt(2));
  }
  return r;
}

int BigInt::cmp(const BigInt& a, const BigInt& b) {
  if (a.neg_ != b.neg_) return a.neg_ ? -1 : 1;
  int c = cmp_mag(a.mag_, b.mag_);
  return a.neg_ ? -c : c;
}

}  // namespace cstar

// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "cstar/bigint.hpp"

using cstar::BigInt;

TEST_CASE("bigint arithmetic") {
  CHECK(BigInt(2) + BigInt(3) == BigInt(5));
  CHECK(BigInt(-2) + BigInt(3) == BigInt(1));
  CHECK(BigInt(2) - BigInt(5) == BigInt(-3));
  CHECK(BigInt(-4) * BigInt(-5) == BigInt(20));
  CHECK(BigInt(7) * BigInt(-3) == BigInt(-21));
  CHECK((BigInt(1) - BigInt(1)).is_zero());
}

TEST_CASE("bigint division conventions") {
  CHECK(BigInt::div_trunc(BigInt(-7), BigInt(2)) == BigInt(-3));
  CHECK(BigInt::rem_trunc(BigInt(-7), BigInt(2)) == BigInt(-1));
  CHECK(BigInt::div_floor(BigInt(-7), BigInt(2)) == BigInt(-4));
  CHECK(BigInt::mod_floor(BigInt(-7), BigInt(2)) == BigInt(1));
  CHECK(BigInt::div_floor(BigInt(7), BigInt(2)) == BigInt(3));
  CHECK_THROWS(BigInt::div_trunc(BigInt(1), BigInt(0)));
}

TEST_CASE("bigint large values") {
  BigInt big = BigInt::pow(BigInt(2), BigInt(64));
  CHECK(big.to_string() == "18446744073709551616");
  CHECK(!big.fits_int64());
  CHECK(BigInt::from_string("18446744073709551616") == big);
  CHECK(big - BigInt(1) == BigInt::from_string("18446744073709551615"));
  BigInt product = BigInt::from_string("123456789123456789") * BigInt::from_string("987654321");
  CHECK(product.to_string() == "121932631234567900112635269");
}

TEST_CASE("bigint gcd and compare") {
  CHECK(BigInt::gcd(BigInt(12), BigInt(18)) == BigInt(6));
  CHECK(BigInt::gcd(BigInt(-12), BigInt(18)) == BigInt(6));
  CHECK(BigInt::gcd(BigInt(0), BigInt(5)) == BigInt(5));
  CHECK(BigInt(-3) < BigInt(2));
  CHECK(BigInt(-3) < BigInt(-2));
  CHECK(BigInt(10) > BigInt(9));
}

#include <doctest.h>

#include "finmart/errors.hpp"
#include "finmart/rational.hpp"

using finmart::Rat;
using finmart::rat;

TEST_CASE("parse_rat reads integers, fractions and exact decimals") {
  CHECK(finmart::parse_rat("7") == rat(7));
  CHECK(finmart::parse_rat("-3/4") == rat(-3, 4));
  CHECK(finmart::parse_rat("0.25") == rat(1, 4));
  CHECK(finmart::parse_rat("1.5") == rat(3, 2));
  CHECK(finmart::parse_rat("-0.1") == rat(-1, 10));
  CHECK(finmart::parse_rat("2/6") == rat(1, 3));
  CHECK_THROWS_AS(finmart::parse_rat("1/0"), finmart::BadParams);
  CHECK_THROWS_AS(finmart::parse_rat("abc"), finmart::BadParams);
  CHECK_THROWS_AS(finmart::parse_rat(""), finmart::BadParams);
  CHECK_THROWS_AS(finmart::parse_rat("1.2.3"), finmart::BadParams);
}

TEST_CASE("format_rat canonical form") {
  CHECK(finmart::format_rat(rat(4, 2)) == "2");
  CHECK(finmart::format_rat(rat(-3, 4)) == "-3/4");
  CHECK(finmart::format_rat(rat(0)) == "0");
  CHECK(finmart::parse_rat(finmart::format_rat(rat(22, 7))) == rat(22, 7));
}

TEST_CASE("rat_pow handles negative exponents") {
  CHECK(finmart::rat_pow(rat(2, 3), 3) == rat(8, 27));
  CHECK(finmart::rat_pow(rat(2, 3), -2) == rat(9, 4));
  CHECK(finmart::rat_pow(rat(5), 0) == rat(1));
}

TEST_CASE("simplest_rational_in picks the smallest denominator") {
  CHECK(finmart::simplest_rational_in(rat(1, 3), rat(1, 2)) == rat(1, 2));
  CHECK(finmart::simplest_rational_in(rat(2, 7), rat(3, 8)) == rat(1, 3));
  CHECK(finmart::simplest_rational_in(rat(1, 3), rat(1, 3)) == rat(1, 3));
  CHECK(finmart::simplest_rational_in(rat(-1, 2), rat(1, 3)) == rat(0));
  CHECK(finmart::simplest_rational_in(rat(5, 2), rat(7, 2)) == rat(3));
  CHECK(finmart::simplest_rational_in(rat(-1, 2), rat(-1, 3)) == rat(-1, 2));
  // The classic convergent of pi lives in this window.
  CHECK(finmart::simplest_rational_in(rat(314159, 100000), rat(314160, 100000)) ==
        rat(355, 113));
  CHECK_THROWS_AS(finmart::simplest_rational_in(rat(1, 2), rat(1, 3)),
                  finmart::BadParams);
}

TEST_CASE("sign_of_weighted_log_sum decides exactly") {
  using finmart::sign_of_weighted_log_sum;
  // (3/2)^(1/2) * (3/4)^(1/2): product 9/8 > 1.
  CHECK(sign_of_weighted_log_sum({rat(3, 2), rat(3, 4)}, {rat(1, 2), rat(1, 2)}) == 1);
  // (4/3)^(1/2) * (2/3)^(1/2): product 8/9 < 1.
  CHECK(sign_of_weighted_log_sum({rat(4, 3), rat(2, 3)}, {rat(1, 2), rat(1, 2)}) == -1);
  // 2^(1/2) * (1/2)^(1/2) = 1 exactly.
  CHECK(sign_of_weighted_log_sum({rat(2), rat(1, 2)}, {rat(1, 2), rat(1, 2)}) == 0);
  // Unequal weights: 2^(1/3) * (1/2)^(2/3) < 1.
  CHECK(sign_of_weighted_log_sum({rat(2), rat(1, 2)}, {rat(1, 3), rat(2, 3)}) == -1);
  CHECK(sign_of_weighted_log_sum({rat(1)}, {rat(1)}) == 0);
}

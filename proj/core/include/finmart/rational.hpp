#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace finmart {

// Exact arbitrary-precision rational. All core computations run on this type;
// tolerances enter only where a caller asks for tolerance-aware verdicts.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// Parses "7", "-3/4", "0.25", "1e-3"-free plain decimals. Decimal strings are
// exact: "0.1" becomes 1/10. Throws BadParams on malformed input.
Rat parse_rat(const std::string& text);

// Canonical form: "n" for integers, "p/q" otherwise, '-' on the numerator.
std::string format_rat(const Rat& value);

// Decimal rendering with enough digits to round-trip a double.
std::string format_rat_decimal(const Rat& value);

double to_double(const Rat& value);

// value^exp for integer exponents (exp may be negative; value != 0 then).
Rat rat_pow(const Rat& value, long exp);

// The rational with the smallest denominator (smallest numerator on ties)
// inside the closed interval [lo, hi]. Classic continued-fraction descent.
Rat simplest_rational_in(const Rat& lo, const Rat& hi);

// Sign of sum(weights[i] * ln(values[i])) for strictly positive values and
// nonnegative rational weights. Decided exactly by comparing the product of
// values raised to common-denominator integer exponents against 1, as long as
// the exact product stays below an internal bit budget; beyond that a long
// double accumulation decides (desk-scale data never gets there).
// Returns -1, 0, or +1.
int sign_of_weighted_log_sum(const std::vector<Rat>& values,
                             const std::vector<Rat>& weights);

}  // namespace finmart

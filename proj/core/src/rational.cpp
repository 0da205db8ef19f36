#include "finmart/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "finmart/errors.hpp"

namespace finmart {

Rat parse_rat(const std::string& text) {
  if (text.empty()) throw BadParams("empty number");
  std::size_t slash = text.find('/');
  if (slash != std::string::npos) {
    std::string num = text.substr(0, slash);
    std::string den = text.substr(slash + 1);
    if (num.empty() || den.empty()) throw BadParams("malformed rational: " + text);
    try {
      mpz_class num_z(num);
      mpz_class den_z(den);
      if (den_z == 0) throw BadParams("zero denominator: " + text);
      Rat r(num_z, den_z);
      r.canonicalize();
      return r;
    } catch (const std::invalid_argument&) {
      throw BadParams("malformed rational: " + text);
    }
  }
  std::size_t dot = text.find('.');
  if (dot != std::string::npos) {
    std::string whole = text.substr(0, dot);
    std::string frac = text.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    if (neg) whole = whole.substr(1);
    if (!whole.empty() && whole[0] == '+') whole = whole.substr(1);
    if (whole.empty()) whole = "0";
    if (frac.empty()) frac = "0";
    for (char c : whole)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw BadParams("malformed decimal: " + text);
    for (char c : frac)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw BadParams("malformed decimal: " + text);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    mpz_class numer = mpz_class(whole) * scale + mpz_class(frac);
    if (neg) numer = -numer;
    Rat r(numer, scale);
    r.canonicalize();
    return r;
  }
  try {
    Rat r{mpz_class(text)};
    return r;
  } catch (const std::invalid_argument&) {
    throw BadParams("malformed number: " + text);
  }
}

std::string format_rat(const Rat& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

std::string format_rat_decimal(const Rat& value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", to_double(value));
  return buf;
}

double to_double(const Rat& value) { return value.get_d(); }

Rat rat_pow(const Rat& value, long exp) {
  if (exp == 0) return rat(1);
  bool invert = exp < 0;
  unsigned long e = invert ? static_cast<unsigned long>(-exp) : static_cast<unsigned long>(exp);
  if (invert && value == 0) throw BadParams("zero to negative power");
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), value.get_num().get_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), value.get_den().get_mpz_t(), e);
  Rat r = invert ? Rat(den, num) : Rat(num, den);
  r.canonicalize();
  return r;
}

namespace {

mpz_class rat_floor(const Rat& x) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

mpz_class rat_ceil(const Rat& x) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

}  // namespace

Rat simplest_rational_in(const Rat& lo, const Rat& hi) {
  if (lo > hi) throw BadParams("simplest_rational_in: empty interval");
  if (sgn(lo) <= 0 && sgn(hi) >= 0) return Rat(0);
  if (sgn(hi) < 0) return -simplest_rational_in(-hi, -lo);
  // 0 < lo <= hi: the simplest candidate is the smallest integer in range.
  mpz_class c = rat_ceil(lo);
  if (Rat(c) <= hi) return Rat(c);
  // Both bounds sit strictly between fl and fl+1: recurse on the fractional part.
  mpz_class fl = rat_floor(lo);
  Rat fl_r(fl);
  Rat inner = simplest_rational_in(Rat(1) / (hi - fl_r), Rat(1) / (lo - fl_r));
  Rat r = fl_r + Rat(1) / inner;
  r.canonicalize();
  return r;
}

int sign_of_weighted_log_sum(const std::vector<Rat>& values,
                             const std::vector<Rat>& weights) {
  if (values.size() != weights.size()) throw BadParams("log sum: size mismatch");
  mpz_class common_den = 1;
  for (const Rat& w : weights) {
    if (sgn(w) < 0) throw BadParams("log sum: negative weight");
    mpz_class d = w.get_den();
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), common_den.get_mpz_t(), d.get_mpz_t());
    common_den = common_den / g * d;
  }
  // Integer exponents n_i = w_i * D; the sum's sign equals the sign of
  // prod(v_i^{n_i}) - 1 because D > 0.
  std::vector<mpz_class> expo(values.size());
  double total_bits = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (sgn(values[i]) <= 0) throw BadParams("log sum: nonpositive value");
    Rat scaled = weights[i] * Rat(common_den);
    expo[i] = scaled.get_num();  // den is 1 after scaling
    double bits = mpz_sizeinbase(values[i].get_num().get_mpz_t(), 2) +
                  mpz_sizeinbase(values[i].get_den().get_mpz_t(), 2);
    total_bits += bits * expo[i].get_d();
  }
  const double kBitBudget = 1 << 22;
  if (total_bits <= kBitBudget) {
    mpz_class lhs = 1, rhs = 1, t;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (expo[i] == 0) continue;
      unsigned long e = expo[i].get_ui();
      mpz_pow_ui(t.get_mpz_t(), values[i].get_num().get_mpz_t(), e);
      lhs *= t;
      mpz_pow_ui(t.get_mpz_t(), values[i].get_den().get_mpz_t(), e);
      rhs *= t;
    }
    return cmp(lhs, rhs) < 0 ? -1 : (cmp(lhs, rhs) > 0 ? 1 : 0);
  }
  long double acc = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i)
    acc += static_cast<long double>(weights[i].get_d()) *
           std::log(static_cast<long double>(values[i].get_d()));
  if (acc > 1e-12L) return 1;
  if (acc < -1e-12L) return -1;
  return 0;
}

}  // namespace finmart

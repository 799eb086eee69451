#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <string>

#include "rigid/errors.hpp"

namespace rigid {

// Exact rationals.  mpq_class keeps numerator/denominator coprime with a
// positive denominator, which is exactly the normal form we need.
using Rational = mpq_class;

constexpr long kInfValuation = std::numeric_limits<long>::max();

inline bool is_zero(const Rational& x) { return sgn(x) == 0; }

// mpq_class's two-argument constructor does not reduce the fraction, and
// comparisons assume canonical form; route literal ratios through this.
inline Rational make_ratio(long num, long den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Rational inv(const Rational& x) {
    if (is_zero(x)) throw Error("division by zero rational");
    return Rational(1) / x;
}

// p-adic valuation of a rational (used when rationals feed p-adic code).
inline long padic_valuation(const Rational& x, long p) {
    if (is_zero(x)) return kInfValuation;
    long v = 0;
    mpz_class num = x.get_num(), den = x.get_den(), q, r;
    mpz_class pz(p);
    for (;;) {
        mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), pz.get_mpz_t());
        if (r != 0) break;
        num = q;
        ++v;
    }
    for (;;) {
        mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), den.get_mpz_t(), pz.get_mpz_t());
        if (r != 0) break;
        den = q;
        --v;
    }
    return v;
}

inline std::string to_token(const Rational& x) {
    if (x.get_den() == 1) return x.get_num().get_str();
    return x.get_num().get_str() + "/" + x.get_den().get_str();
}

}  // namespace rigid

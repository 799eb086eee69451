#pragma once

#include "rigid/padic.hpp"
#include "rigid/rational.hpp"

namespace rigid {

// Uniform construction/inspection helpers for the two coefficient kinds.
// The `like` argument supplies the (p, N) pair for p-adics; rationals
// ignore it.
template <class K>
struct ScalarOps;

template <>
struct ScalarOps<Rational> {
    static Rational from_ratio(const Rational&, const Rational& q) { return q; }
    static Rational from_long(const Rational&, long n) { return Rational(n); }
    // Rationals are exact: every nonzero pivot is equally good.
    static long pivot_valuation(const Rational&) { return 0; }
    static constexpr bool is_padic = false;
};

template <>
struct ScalarOps<Padic> {
    static Padic from_ratio(const Padic& like, const Rational& q) {
        if (like.typeless()) throw Error("p-adic prototype has no prime");
        return Padic::from_rational(like.prime(), like.precision(), q);
    }
    static Padic from_long(const Padic& like, long n) {
        return from_ratio(like, Rational(n));
    }
    static long pivot_valuation(const Padic& x) { return x.valuation(); }
    static constexpr bool is_padic = true;
};

template <class K>
K scalar_one(const K& like) {
    return ScalarOps<K>::from_long(like, 1);
}

}  // namespace rigid

#pragma once

#include <gmpxx.h>

#include <string>
#include <utility>

#include "rigid/errors.hpp"
#include "rigid/rational.hpp"

namespace rigid {

// A p-adic number in capped absolute precision: the element is known as
// unit * p^val modulo p^prec.  The unit part is stored reduced modulo
// p^(prec-val) and coprime to p.  An element with no nonzero digit below
// the cap carries the infinite-valuation marker.
//
// A default-constructed Padic is the exact zero with no prime attached; it
// absorbs into whatever it meets, which lets generic code value-initialize.
class Padic {
  public:
    Padic() = default;

    Padic(long p, int prec) : p_(p), prec_(prec) { check_prime(); }

    static Padic from_integer(long p, int prec, mpz_class v) {
        Padic x(p, prec);
        x.val_ = 0;
        x.unit_ = std::move(v);
        x.normalize();
        return x;
    }

    static Padic from_rational(long p, int prec, const Rational& q) {
        Padic x(p, prec);
        if (rigid::is_zero(q)) return x;
        long v = padic_valuation(q, p);
        long rel = static_cast<long>(prec) - v;
        if (rel <= 0) return x;  // below the cap
        mpz_class pz(p), mod, num = q.get_num(), den = q.get_den();
        mpz_pow_ui(mod.get_mpz_t(), pz.get_mpz_t(), static_cast<unsigned long>(rel));
        strip(num, pz);
        strip(den, pz);
        mpz_class deninv;
        if (mpz_invert(deninv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t()) == 0)
            throw Error("denominator not invertible mod p^k");
        x.val_ = v;
        x.unit_ = (num * deninv) % mod;
        x.normalize();
        return x;
    }

    bool typeless() const { return p_ == 0; }
    long prime() const { return p_; }
    int precision() const { return prec_; }
    bool is_zero() const { return val_ == kInfValuation; }
    long valuation() const { return val_; }
    const mpz_class& unit_part() const { return unit_; }

    // The element as an integer u*p^v; requires val >= 0.
    mpz_class lift() const {
        if (is_zero()) return 0;
        if (val_ < 0) throw Error("lift of element with negative valuation");
        mpz_class pw, pz(p_);
        mpz_pow_ui(pw.get_mpz_t(), pz.get_mpz_t(), static_cast<unsigned long>(val_));
        return unit_ * pw;
    }

    Padic capped(int prec) const {
        if (typeless()) return *this;
        Padic r(p_, prec < prec_ ? prec : prec_);
        if (!is_zero()) {
            r.val_ = val_;
            r.unit_ = unit_;
        }
        r.normalize();
        return r;
    }

    friend Padic operator+(const Padic& a, const Padic& b) {
        if (a.typeless()) return b;
        if (b.typeless()) return a;
        require_same(a, b);
        int prec = std::min(a.prec_, b.prec_);
        if (a.is_zero()) return b.capped(prec);
        if (b.is_zero()) return a.capped(prec);
        Padic r(a.p_, prec);
        long v = std::min(a.val_, b.val_);
        r.val_ = v;
        r.unit_ = a.shifted_unit(v) + b.shifted_unit(v);
        r.normalize();
        return r;
    }

    friend Padic operator-(const Padic& a) {
        Padic r = a;
        if (!r.is_zero()) {
            r.unit_ = -r.unit_;
            r.normalize();
        }
        return r;
    }

    friend Padic operator-(const Padic& a, const Padic& b) { return a + (-b); }

    friend Padic operator*(const Padic& a, const Padic& b) {
        if (a.typeless()) return a;
        if (b.typeless()) return b;
        require_same(a, b);
        if (a.is_zero() || b.is_zero())
            return Padic(a.p_, std::min(a.prec_, b.prec_));
        long rel = std::min(a.rel_prec(), b.rel_prec());
        long v = a.val_ + b.val_;
        Padic r(a.p_, static_cast<int>(v + rel));
        r.val_ = v;
        r.unit_ = a.unit_ * b.unit_;
        r.normalize();
        return r;
    }

    Padic inverse() const {
        if (typeless() || is_zero())
            throw PrecisionExhausted(
                "inverting an element indistinguishable from zero");
        long rel = rel_prec();
        mpz_class mod = pow_p(rel), u;
        if (mpz_invert(u.get_mpz_t(), unit_.get_mpz_t(), mod.get_mpz_t()) == 0)
            throw Error("unit part not invertible");  // cannot happen
        Padic r(p_, static_cast<int>(rel - val_));
        r.val_ = -val_;
        r.unit_ = u;
        r.normalize();
        return r;
    }

    friend Padic operator/(const Padic& a, const Padic& b) {
        return a * b.inverse();
    }

    // Equality at the shared precision.
    friend bool operator==(const Padic& a, const Padic& b) {
        if (a.typeless() || b.typeless())
            return a.is_zero() && b.is_zero();
        if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
        if (a.val_ != b.val_) return false;
        long rel = std::min(a.rel_prec(), b.rel_prec());
        mpz_class mod = a.pow_p(rel);
        return ((a.unit_ - b.unit_) % mod) == 0;
    }
    friend bool operator!=(const Padic& a, const Padic& b) { return !(a == b); }

    std::string to_token() const {
        if (is_zero()) return "0";
        return unit_.get_str() + "@v" + std::to_string(val_);
    }

  private:
    void check_prime() const {
        if (p_ < 2) throw Error("prime must be >= 2");
        if (prec_ < 1) throw Error("precision must be positive");
    }

    static void require_same(const Padic& a, const Padic& b) {
        if (a.p_ != b.p_) throw Error("mixing p-adics with different primes");
    }

    static void strip(mpz_class& v, const mpz_class& p) {
        mpz_class q, r;
        for (;;) {
            mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), v.get_mpz_t(), p.get_mpz_t());
            if (r != 0 || v == 0) break;
            v = q;
        }
    }

    long rel_prec() const { return static_cast<long>(prec_) - val_; }

    mpz_class pow_p(long e) const {
        mpz_class pw, pz(p_);
        mpz_pow_ui(pw.get_mpz_t(), pz.get_mpz_t(), static_cast<unsigned long>(e));
        return pw;
    }

    mpz_class shifted_unit(long v) const {
        // unit * p^(val - v)
        mpz_class pw, pz(p_);
        mpz_pow_ui(pw.get_mpz_t(), pz.get_mpz_t(),
                   static_cast<unsigned long>(val_ - v));
        return unit_ * pw;
    }

    void normalize() {
        if (val_ == kInfValuation) return;
        if (unit_ == 0) {
            val_ = kInfValuation;
            return;
        }
        mpz_class pz(p_), q, r;
        for (;;) {
            mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), unit_.get_mpz_t(),
                        pz.get_mpz_t());
            if (r != 0) break;
            unit_ = q;
            ++val_;
        }
        long rel = rel_prec();
        if (rel <= 0) {
            val_ = kInfValuation;
            unit_ = 0;
            return;
        }
        mpz_class mod = pow_p(rel);
        mpz_fdiv_r(unit_.get_mpz_t(), unit_.get_mpz_t(), mod.get_mpz_t());
        // unit_ is coprime to p, so the reduction cannot vanish
    }

    long p_ = 0;
    int prec_ = 0;
    long val_ = kInfValuation;
    mpz_class unit_ = 0;
};

inline bool is_zero(const Padic& x) { return x.is_zero(); }
inline Padic inv(const Padic& x) { return x.inverse(); }

// The spec-level valuation operation: v with x in p^v * units, or the
// infinity marker when x is indistinguishable from 0 at its precision.
inline long valuation(const Padic& x) { return x.valuation(); }

inline std::string to_token(const Padic& x) { return x.to_token(); }

}  // namespace rigid

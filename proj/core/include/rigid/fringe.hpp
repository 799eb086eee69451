#pragma once

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rigid/errors.hpp"
#include "rigid/linalg.hpp"
#include "rigid/scalar.hpp"

namespace rigid {

// Monomial key in the normal form of a presented algebra.  Layout:
//   AffineSpace(n) / Torus(n):  one exponent per variable
//   LocalizedLine(f):           {i, j}    meaning x^i * f^-j, i < deg f if j>0
//   HyperellipticAffine(f):     {i, j, e} meaning x^i * f^-j * y^e, e in {0,1}
//   MonicCover(base, m):        base key followed by the y-exponent (< deg m)
using Mono = std::vector<int>;

// Overconvergence certificate: every coefficient a_k satisfies
// valuation(a_k) >= ceil(|k|/n) - c.
struct Certificate {
    int n = 1;
    long c = 0;
};

constexpr int kDefaultDegreeBound = 64;
constexpr int kDefaultFringeCap = 8;

enum class PresKind { AffineSpace, Torus, LocalizedLine, Hyperelliptic, MonicCover };

template <class K>
struct Presentation;

template <class K>
using PresPtr = std::shared_ptr<const Presentation<K>>;

// A truncated dagger-algebra element: normal-form coefficient table plus
// its overconvergence certificate and degree bound.
template <class K>
struct Fringe {
    PresPtr<K> P;
    std::map<Mono, K> c;
    int degree_bound = kDefaultDegreeBound;
    bool tail_dropped = false;
    Certificate cert;

    bool is_zero_elt() const { return c.empty(); }
};

namespace detail {
template <class K>
void reduce_term(const Presentation<K>& P, const Mono& raw, const K& coef,
                 std::map<Mono, K>& out);
}

template <class K>
struct Presentation : std::enable_shared_from_this<Presentation<K>> {
    PresKind kind;
    int dim = 1;               // number of coordinate derivations
    std::vector<K> f;          // LocalizedLine / Hyperelliptic
    PresPtr<K> base;           // MonicCover
    std::vector<Fringe<K>> m;  // MonicCover: coefficients of m, low -> high
    K proto;
    std::vector<Fringe<K>> cover_dy;  // MonicCover: dy/dx_i, one per base var

    int fdeg() const { return static_cast<int>(f.size()) - 1; }
    int mdeg() const { return static_cast<int>(m.size()) - 1; }

    int key_size() const {
        switch (kind) {
            case PresKind::AffineSpace:
            case PresKind::Torus: return dim;
            case PresKind::LocalizedLine: return 2;
            case PresKind::Hyperelliptic: return 3;
            case PresKind::MonicCover: return base->key_size() + 1;
        }
        return 0;
    }

    int y_weight() const {  // size assigned to one power of y
        if (kind == PresKind::Hyperelliptic) return (fdeg() + 1) / 2;
        if (kind == PresKind::MonicCover) {
            long ms = 1;
            for (int k = 0; k < mdeg(); ++k)
                for (const auto& [mm, cc] : m[k].c) {
                    long s = base->mono_size(mm);
                    if (s > ms * (mdeg() - k)) ms = (s + mdeg() - k - 1) / (mdeg() - k);
                }
            return static_cast<int>(ms);
        }
        return 1;
    }

    long mono_size(const Mono& k) const {
        switch (kind) {
            case PresKind::AffineSpace:
            case PresKind::Torus: {
                long s = 0;
                for (int e : k) s += e < 0 ? -e : e;
                return s;
            }
            case PresKind::LocalizedLine:
                return k[0] + static_cast<long>(k[1]) * fdeg();
            case PresKind::Hyperelliptic:
                return k[0] + static_cast<long>(k[1]) * fdeg() + k[2] * y_weight();
            case PresKind::MonicCover: {
                Mono bk(k.begin(), k.end() - 1);
                return base->mono_size(bk) + static_cast<long>(k.back()) * y_weight();
            }
        }
        return 0;
    }

    bool same(const Presentation& o) const {
        if (kind != o.kind || dim != o.dim) return false;
        if (f.size() != o.f.size()) return false;
        for (size_t i = 0; i < f.size(); ++i)
            if (!(f[i] == o.f[i])) return false;
        if ((base == nullptr) != (o.base == nullptr)) return false;
        if (base && !base->same(*o.base)) return false;
        if (m.size() != o.m.size()) return false;
        return true;  // cover minimal polys compared by shape only
    }
};

// ---------------------------------------------------------------------------
// construction helpers

template <class K>
Fringe<K> fringe_zero(PresPtr<K> P, int bound = kDefaultDegreeBound) {
    Fringe<K> r;
    r.P = std::move(P);
    r.degree_bound = bound;
    return r;
}

namespace detail {

// x^i reduced against f when the key carries a pole: keeps i < deg f.
template <class K>
void carry_pole(const Presentation<K>& P, long i, long j, const K& coef,
                std::vector<std::tuple<long, long, K>>& out) {
    const int d = P.fdeg();
    if (j == 0 || i < d) {
        out.emplace_back(i, j, coef);
        return;
    }
    // x^d = lead^-1 (f - lower terms)
    K lead_inv = inv(P.f[d]);
    K c1 = coef * lead_inv;
    carry_pole(P, i - d, j - 1, c1, out);
    for (int t = 0; t < d; ++t) {
        if (is_zero(P.f[t])) continue;
        carry_pole(P, i - d + t, j, K(-(c1 * P.f[t])), out);
    }
}

template <class K>
void reduce_term(const Presentation<K>& P, const Mono& raw, const K& coef,
                 std::map<Mono, K>& out) {
    if (is_zero(coef)) return;
    auto emit = [&](const Mono& k, const K& v) {
        auto it = out.find(k);
        if (it == out.end()) {
            out.emplace(k, v);
        } else {
            it->second = it->second + v;
            if (is_zero(it->second)) out.erase(it);
        }
    };
    switch (P.kind) {
        case PresKind::AffineSpace:
            for (int e : raw)
                if (e < 0) throw Error("negative exponent in affine space");
            emit(raw, coef);
            return;
        case PresKind::Torus:
            emit(raw, coef);
            return;
        case PresKind::LocalizedLine: {
            if (raw[0] < 0 || raw[1] < 0)
                throw Error("bad localized-line monomial");
            std::vector<std::tuple<long, long, K>> terms;
            carry_pole(P, raw[0], raw[1], coef, terms);
            for (auto& [i, j, v] : terms)
                emit(Mono{static_cast<int>(i), static_cast<int>(j)}, v);
            return;
        }
        case PresKind::Hyperelliptic: {
            long i = raw[0], j = raw[1], e = raw[2];
            if (i < 0 || j < 0 || e < 0) throw Error("bad hyperelliptic monomial");
            if (e >= 2) {
                // y^2 = f
                if (j >= 1) {
                    reduce_term(P, Mono{static_cast<int>(i), static_cast<int>(j - 1),
                                        static_cast<int>(e - 2)},
                                coef, out);
                } else {
                    for (int t = 0; t <= P.fdeg(); ++t) {
                        if (is_zero(P.f[t])) continue;
                        reduce_term(P,
                                    Mono{static_cast<int>(i + t), 0,
                                         static_cast<int>(e - 2)},
                                    K(coef * P.f[t]), out);
                    }
                }
                return;
            }
            std::vector<std::tuple<long, long, K>> terms;
            carry_pole(P, i, j, coef, terms);
            for (auto& [ii, jj, v] : terms)
                emit(Mono{static_cast<int>(ii), static_cast<int>(jj),
                          static_cast<int>(e)},
                     v);
            return;
        }
        case PresKind::MonicCover: {
            Mono braw(raw.begin(), raw.end() - 1);
            long e = raw.back();
            if (e < 0) throw Error("negative cover exponent");
            if (e >= P.mdeg()) {
                // y^deg(m) = -(lower part of m)(y)
                for (int k = 0; k < P.mdeg(); ++k) {
                    for (const auto& [bm, bc] : P.m[k].c) {
                        Mono nraw(braw.size() + 1);
                        for (size_t t = 0; t < braw.size(); ++t)
                            nraw[t] = braw[t] + bm[t];
                        nraw.back() = static_cast<int>(e - P.mdeg() + k);
                        reduce_term(P, nraw, K(-(coef * bc)), out);
                    }
                }
                return;
            }
            std::map<Mono, K> bout;
            reduce_term(*P.base, braw, coef, bout);
            for (const auto& [bm, bc] : bout) {
                Mono k = bm;
                k.push_back(static_cast<int>(e));
                emit(k, bc);
            }
            return;
        }
    }
}

}  // namespace detail

template <class K>
long coeff_valuation(const K& x) {
    if constexpr (ScalarOps<K>::is_padic)
        return x.valuation();
    else
        return is_zero(x) ? kInfValuation : 0;
}

// Tightest certificate the stored coefficients admit with n <= cap:
// minimal offset first, then minimal slope denominator.
template <class K>
Certificate tight_certificate(const Fringe<K>& a, int n_cap = kDefaultFringeCap) {
    auto offset_for = [&](int n) {
        long c = -(1L << 30);
        for (const auto& [k, v] : a.c) {
            long s = a.P->mono_size(k);
            long need = (s + n - 1) / n - coeff_valuation(v);
            if (need > c) c = need;
        }
        return c;
    };
    if (a.c.empty()) return Certificate{1, 0};
    long cbest = offset_for(n_cap);
    for (int n = 1; n <= n_cap; ++n)
        if (offset_for(n) == cbest) return Certificate{n, cbest};
    return Certificate{n_cap, cbest};
}

template <class K>
bool certificate_sound(const Fringe<K>& a, const Certificate& cert) {
    for (const auto& [k, v] : a.c) {
        long s = a.P->mono_size(k);
        if (coeff_valuation(v) < (s + cert.n - 1) / cert.n - cert.c) return false;
    }
    return true;
}

// Drop everything above the degree bound, flagging the truncation.
template <class K>
void enforce_bound(Fringe<K>& a) {
    for (auto it = a.c.begin(); it != a.c.end();) {
        if (a.P->mono_size(it->first) > a.degree_bound) {
            it = a.c.erase(it);
            a.tail_dropped = true;
        } else {
            ++it;
        }
    }
}

// Reduce a raw term list to normal form.
template <class K>
Fringe<K> normal_form(PresPtr<K> P,
                      const std::vector<std::pair<Mono, K>>& raw_terms,
                      int bound = kDefaultDegreeBound,
                      std::optional<long> offset_cap = std::nullopt) {
    Fringe<K> r = fringe_zero(P, bound);
    for (const auto& [k, v] : raw_terms) detail::reduce_term(*P, k, v, r.c);
    enforce_bound(r);
    r.cert = tight_certificate(r);
    if (offset_cap && r.cert.c > *offset_cap)
        throw CertificateViolation(
            "coefficients decay slower than every admissible slope (offset " +
            std::to_string(r.cert.c) + " > cap " + std::to_string(*offset_cap) + ")");
    return r;
}

template <class K>
Fringe<K> fr_monomial(PresPtr<K> P, const Mono& raw, const K& coef,
                      int bound = kDefaultDegreeBound) {
    return normal_form(P, {{raw, coef}}, bound);
}

template <class K>
Fringe<K> fr_const(PresPtr<K> P, const K& v, int bound = kDefaultDegreeBound) {
    return fr_monomial(P, Mono(P->key_size(), 0), v, bound);
}

template <class K>
Fringe<K> fr_one(PresPtr<K> P, int bound = kDefaultDegreeBound) {
    return fr_const(P, scalar_one(P->proto), bound);
}

// ---------------------------------------------------------------------------
// ring operations

template <class K>
Fringe<K> operator+(const Fringe<K>& a, const Fringe<K>& b) {
    Fringe<K> r = fringe_zero(a.P ? a.P : b.P,
                              std::min(a.degree_bound, b.degree_bound));
    r.tail_dropped = a.tail_dropped || b.tail_dropped;
    r.c = a.c;
    for (const auto& [k, v] : b.c) {
        auto it = r.c.find(k);
        if (it == r.c.end()) {
            r.c.emplace(k, v);
        } else {
            it->second = it->second + v;
            if (is_zero(it->second)) r.c.erase(it);
        }
    }
    enforce_bound(r);
    r.cert = Certificate{std::max(a.cert.n, b.cert.n), std::max(a.cert.c, b.cert.c)};
    return r;
}

template <class K>
Fringe<K> operator-(const Fringe<K>& a) {
    Fringe<K> r = a;
    for (auto& [k, v] : r.c) v = -v;
    return r;
}

template <class K>
Fringe<K> operator-(const Fringe<K>& a, const Fringe<K>& b) {
    return a + (-b);
}

template <class K>
Fringe<K> operator*(const Fringe<K>& a, const Fringe<K>& b) {
    Fringe<K> r = fringe_zero(a.P ? a.P : b.P,
                              std::min(a.degree_bound, b.degree_bound));
    r.tail_dropped = a.tail_dropped || b.tail_dropped;
    const auto& P = *r.P;
    const int ks = P.key_size();
    for (const auto& [ka, va] : a.c)
        for (const auto& [kb, vb] : b.c) {
            Mono k(ks);
            for (int t = 0; t < ks; ++t) k[t] = ka[t] + kb[t];
            detail::reduce_term(P, k, K(va * vb), r.c);
        }
    enforce_bound(r);
    r.cert = Certificate{std::max(a.cert.n, b.cert.n), a.cert.c + b.cert.c};
    return r;
}

template <class K>
Fringe<K> operator*(const K& s, const Fringe<K>& a) {
    Fringe<K> r = a;
    for (auto it = r.c.begin(); it != r.c.end();) {
        it->second = s * it->second;
        if (is_zero(it->second)) it = r.c.erase(it);
        else ++it;
    }
    return r;
}

template <class K>
bool operator==(const Fringe<K>& a, const Fringe<K>& b) {
    if (a.c.size() != b.c.size()) return false;
    auto ia = a.c.begin(), ib = b.c.begin();
    for (; ia != a.c.end(); ++ia, ++ib)
        if (ia->first != ib->first || !(ia->second == ib->second)) return false;
    return true;
}

template <class K>
bool operator!=(const Fringe<K>& a, const Fringe<K>& b) { return !(a == b); }

// ---------------------------------------------------------------------------
// differentiation

template <class K>
Fringe<K> partial_derivative(const Fringe<K>& a, int var = 0) {
    const auto& P = *a.P;
    Fringe<K> r = fringe_zero(a.P, a.degree_bound);
    r.tail_dropped = a.tail_dropped;
    auto lift = [&](long n) { return ScalarOps<K>::from_long(P.proto, n); };
    switch (P.kind) {
        case PresKind::AffineSpace:
        case PresKind::Torus:
            for (const auto& [k, v] : a.c) {
                if (k[var] == 0) continue;
                Mono nk = k;
                nk[var] -= 1;
                detail::reduce_term(P, nk, K(lift(k[var]) * v), r.c);
            }
            break;
        case PresKind::LocalizedLine:
        case PresKind::Hyperelliptic: {
            const int d = P.fdeg();
            for (const auto& [k, v] : a.c) {
                long i = k[0], j = k[1];
                long e = (P.kind == PresKind::Hyperelliptic) ? k[2] : 0;
                auto raw = [&](long ii, long jj, long ee) {
                    if (P.kind == PresKind::Hyperelliptic)
                        return Mono{static_cast<int>(ii), static_cast<int>(jj),
                                    static_cast<int>(ee)};
                    return Mono{static_cast<int>(ii), static_cast<int>(jj)};
                };
                if (i > 0)
                    detail::reduce_term(P, raw(i - 1, j, e), K(lift(i) * v), r.c);
                // f' contributions from the pole and (hyperelliptic) from y
                K pole_w = lift(-j);
                if (e == 1)
                    pole_w = pole_w + ScalarOps<K>::from_ratio(
                                          P.proto, Rational(1, 2));
                if (!is_zero(pole_w)) {
                    for (int t = 1; t <= d; ++t) {
                        if (is_zero(P.f[t])) continue;
                        detail::reduce_term(P, raw(i + t - 1, j + 1, e),
                                            K(pole_w * lift(t) * P.f[t] * v),
                                            r.c);
                    }
                }
            }
            break;
        }
        case PresKind::MonicCover: {
            // d(b(x) y^e) = (d_base b) y^e + e b y^(e-1) dy
            for (const auto& [k, v] : a.c) {
                Mono bk(k.begin(), k.end() - 1);
                int e = k.back();
                Fringe<K> bpart = fr_monomial(P.base, bk, v, a.degree_bound);
                Fringe<K> db = partial_derivative(bpart, var);
                for (const auto& [bm, bc] : db.c) {
                    Mono nk = bm;
                    nk.push_back(e);
                    detail::reduce_term(P, nk, bc, r.c);
                }
                if (e > 0) {
                    const Fringe<K>& dy = P.cover_dy.at(var);
                    for (const auto& [dm, dc] : dy.c) {
                        Mono nk(P.key_size());
                        for (size_t t = 0; t + 1 < k.size(); ++t)
                            nk[t] = bk[t] + dm[t];
                        nk.back() = (e - 1) + dm.back();
                        detail::reduce_term(
                            P, nk, K(ScalarOps<K>::from_long(P.proto, e) * v * dc),
                            r.c);
                    }
                }
            }
            break;
        }
    }
    enforce_bound(r);
    r.cert = tight_certificate(r);
    return r;
}

// ---------------------------------------------------------------------------
// window enumeration and ring inversion

template <class K>
void window_rec(const Presentation<K>& P, int var, long budget, Mono& cur,
                std::vector<Mono>& out) {
    if (var == P.dim && (P.kind == PresKind::AffineSpace || P.kind == PresKind::Torus)) {
        out.push_back(cur);
        return;
    }
    switch (P.kind) {
        case PresKind::AffineSpace:
            for (long e = 0; e <= budget; ++e) {
                cur[var] = static_cast<int>(e);
                window_rec(P, var + 1, budget - e, cur, out);
            }
            cur[var] = 0;
            return;
        case PresKind::Torus:
            for (long e = -budget; e <= budget; ++e) {
                cur[var] = static_cast<int>(e);
                long used = e < 0 ? -e : e;
                window_rec(P, var + 1, budget - used, cur, out);
            }
            cur[var] = 0;
            return;
        default:
            return;
    }
}

// All normal-form monomials of size <= budget.
template <class K>
std::vector<Mono> window_monomials(const PresPtr<K>& Pp, long budget) {
    const auto& P = *Pp;
    std::vector<Mono> out;
    switch (P.kind) {
        case PresKind::AffineSpace:
        case PresKind::Torus: {
            Mono cur(P.dim, 0);
            window_rec(P, 0, budget, cur, out);
            return out;
        }
        case PresKind::LocalizedLine: {
            const int d = P.fdeg();
            for (long j = 0; j * d <= budget; ++j) {
                long imax = j > 0 ? std::min<long>(d - 1, budget - j * d)
                                  : budget;
                for (long i = 0; i <= imax; ++i)
                    out.push_back(Mono{static_cast<int>(i), static_cast<int>(j)});
            }
            return out;
        }
        case PresKind::Hyperelliptic: {
            const int d = P.fdeg();
            const int yw = P.y_weight();
            for (int e = 0; e <= 1; ++e)
                for (long j = 0; j * d + e * yw <= budget; ++j) {
                    long imax = j > 0 ? std::min<long>(d - 1, budget - j * d - e * yw)
                                      : budget - e * yw;
                    for (long i = 0; i <= imax; ++i)
                        out.push_back(Mono{static_cast<int>(i), static_cast<int>(j),
                                           e});
                }
            return out;
        }
        case PresKind::MonicCover: {
            const int yw = P.y_weight();
            for (int e = 0; e < P.mdeg(); ++e) {
                if (static_cast<long>(e) * yw > budget) break;
                auto bw = window_monomials(P.base, budget - e * yw);
                for (auto& bm : bw) {
                    Mono k = bm;
                    k.push_back(e);
                    out.push_back(std::move(k));
                }
            }
            return out;
        }
    }
    return out;
}

// Invert g in the presented ring by solving g*u = 1 on growing windows.
template <class K>
std::optional<Fringe<K>> invert_in_ring(const Fringe<K>& g, int tries = 3) {
    if (g.c.empty()) return std::nullopt;
    long gsize = 1;
    for (const auto& [k, v] : g.c) gsize = std::max(gsize, g.P->mono_size(k));
    for (int t = 1; t <= tries; ++t) {
        long W = gsize * (t + 1) + 2;
        auto dom = window_monomials(g.P, W);
        // codomain = support of all products
        std::map<Mono, size_t> codx;
        std::vector<Fringe<K>> imgs;
        imgs.reserve(dom.size());
        for (const auto& mk : dom) {
            auto im = g * fr_monomial(g.P, mk, scalar_one(g.P->proto),
                                      kDefaultDegreeBound * 4);
            for (const auto& [k, v] : im.c) codx.emplace(k, codx.size());
            imgs.push_back(std::move(im));
        }
        Mono one_key(g.P->key_size(), 0);
        codx.emplace(one_key, codx.size());
        // reindex rows densely
        size_t nrow = 0;
        for (auto& [k, idx] : codx) idx = nrow++;
        Matrix<K> A(nrow, dom.size()), b(nrow, 1);
        for (size_t jcol = 0; jcol < dom.size(); ++jcol)
            for (const auto& [k, v] : imgs[jcol].c) A(codx.at(k), jcol) = v;
        b(codx.at(one_key), 0) = scalar_one(g.P->proto);
        auto s = solve_linear(A, b);
        if (!s.particular) continue;
        Fringe<K> u = fringe_zero(g.P, kDefaultDegreeBound * 4);
        for (size_t jcol = 0; jcol < dom.size(); ++jcol)
            if (!is_zero((*s.particular)(jcol, 0)))
                u.c.emplace(dom[jcol], (*s.particular)(jcol, 0));
        u.cert = tight_certificate(u);
        return u;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// presentation factories

template <class K>
PresPtr<K> make_affine(int n, const K& proto) {
    auto P = std::make_shared<Presentation<K>>();
    P->kind = PresKind::AffineSpace;
    P->dim = n;
    P->proto = proto;
    return P;
}

template <class K>
PresPtr<K> make_torus(int n, const K& proto) {
    auto P = std::make_shared<Presentation<K>>();
    P->kind = PresKind::Torus;
    P->dim = n;
    P->proto = proto;
    return P;
}

template <class K>
Matrix<K> sylvester(const std::vector<K>& a, const std::vector<K>& b,
                    const K& like) {
    const int da = static_cast<int>(a.size()) - 1,
              db = static_cast<int>(b.size()) - 1;
    Matrix<K> S(da + db, da + db);
    for (int i = 0; i < db; ++i)
        for (int k = 0; k <= da; ++k) S(i, i + k) = a[da - k];
    for (int i = 0; i < da; ++i)
        for (int k = 0; k <= db; ++k) S(db + i, i + k) = b[db - k];
    (void)like;
    return S;
}

template <class K>
bool resultant_is_unit(const std::vector<K>& a, const std::vector<K>& b,
                       const K& like) {
    auto S = sylvester(a, b, like);
    auto s = solve_linear(S, Matrix<K>());
    if (s.rank != S.rows()) return false;
    if constexpr (ScalarOps<K>::is_padic) {
        // full rank with zero total pivot valuation <=> unit determinant
        return s.precision_loss == 0;
    }
    return true;
}

template <class K>
std::vector<K> poly_derivative(const std::vector<K>& a, const K& like) {
    std::vector<K> d;
    for (size_t i = 1; i < a.size(); ++i)
        d.push_back(ScalarOps<K>::from_long(like, static_cast<long>(i)) * a[i]);
    return d;
}

template <class K>
PresPtr<K> make_localized_line(std::vector<K> f, const K& proto) {
    auto P = std::make_shared<Presentation<K>>();
    P->kind = PresKind::LocalizedLine;
    P->dim = 1;
    P->f = std::move(f);
    P->proto = proto;
    while (!P->f.empty() && is_zero(P->f.back())) P->f.pop_back();
    if (P->f.size() < 2) throw Error("localized line: f must be nonconstant");
    if constexpr (ScalarOps<K>::is_padic) {
        if (P->f.back().valuation() != 0)
            throw Error("localized line: leading coefficient must be a unit");
    }
    return P;
}

template <class K>
PresPtr<K> make_hyperelliptic(std::vector<K> f, const K& proto) {
    auto P = std::make_shared<Presentation<K>>();
    P->kind = PresKind::Hyperelliptic;
    P->dim = 1;
    P->f = std::move(f);
    P->proto = proto;
    while (!P->f.empty() && is_zero(P->f.back())) P->f.pop_back();
    if (P->fdeg() < 3) throw Error("hyperelliptic: deg f must be >= 3");
    if constexpr (ScalarOps<K>::is_padic) {
        if (P->f.back().valuation() != 0)
            throw Error("hyperelliptic: leading coefficient must be a unit");
    }
    if (!resultant_is_unit(P->f, poly_derivative(P->f, proto), proto))
        throw NonEtale("hyperelliptic: f must be squarefree with unit discriminant");
    return P;
}

// m given as coefficients over the base (low -> high), monic: m.back() == 1.
template <class K>
PresPtr<K> make_monic_cover(PresPtr<K> base, std::vector<Fringe<K>> m) {
    auto P = std::make_shared<Presentation<K>>();
    P->kind = PresKind::MonicCover;
    P->dim = base->dim;
    P->proto = base->proto;
    P->base = base;
    P->m = std::move(m);
    if (P->m.size() < 2) throw Error("monic cover: deg m must be >= 1");
    if (!(P->m.back() == fr_one(base)))
        throw Error("monic cover: m must be monic");
    // etale check + derivative of y via the implicit relation:
    //   m'(y) dy = -(d_x m)(y) dx_i
    PresPtr<K> Pc = P;
    auto as_cover = [&](const Fringe<K>& bf, int e) {
        Fringe<K> r = fringe_zero(Pc);
        for (const auto& [bm, bc] : bf.c) {
            Mono k = bm;
            k.push_back(e);
            detail::reduce_term(*Pc, k, bc, r.c);
        }
        return r;
    };
    Fringe<K> mp = fringe_zero(Pc);
    for (int k = 1; k <= P->mdeg(); ++k) {
        auto term = ScalarOps<K>::from_long(P->proto, k) * P->m[k];
        mp = mp + as_cover(term, k - 1);
    }
    auto mpinv = invert_in_ring(mp);
    if (!mpinv)
        throw NonEtale("monic cover: m'(y) is not invertible (cover not etale)");
    for (int var = 0; var < P->dim; ++var) {
        Fringe<K> dxm = fringe_zero(Pc);
        for (int k = 0; k < P->mdeg(); ++k)
            dxm = dxm + as_cover(partial_derivative(P->m[k], var), k);
        P->cover_dy.push_back(-(dxm * (*mpinv)));
    }
    return P;
}

// ---------------------------------------------------------------------------
// printing

template <class K>
std::string mono_to_string(const Presentation<K>& P, const Mono& k) {
    std::ostringstream os;
    auto var = [&](int idx) {
        if (P.dim == 1) return std::string("x");
        return "x" + std::to_string(idx + 1);
    };
    bool first = true;
    auto piece = [&](const std::string& v, long e) {
        if (e == 0) return;
        if (!first) os << "*";
        first = false;
        os << v;
        if (e != 1) os << "^" << e;
    };
    switch (P.kind) {
        case PresKind::AffineSpace:
        case PresKind::Torus:
            for (int i = 0; i < P.dim; ++i) piece(var(i), k[i]);
            break;
        case PresKind::LocalizedLine:
            piece("x", k[0]);
            piece("f", -static_cast<long>(k[1]));
            break;
        case PresKind::Hyperelliptic:
            piece("x", k[0]);
            piece("f", -static_cast<long>(k[1]));
            piece("y", k[2]);
            break;
        case PresKind::MonicCover: {
            Mono bk(k.begin(), k.end() - 1);
            auto bs = mono_to_string(*P.base, bk);
            if (bs != "1") {
                os << bs;
                first = false;
            }
            piece("y", k.back());
            break;
        }
    }
    if (first) return "1";
    return os.str();
}

template <class K>
std::string to_string(const Fringe<K>& a) {
    if (a.c.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : a.c) {
        if (!first) os << " + ";
        first = false;
        os << to_token(v);
        auto ms = mono_to_string(*a.P, k);
        if (ms != "1") os << " " << ms;
    }
    return os.str();
}

}  // namespace rigid

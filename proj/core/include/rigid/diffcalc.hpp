#pragma once

#include <tuple>

#include "rigid/fringe.hpp"

namespace rigid {

template <class K>
bool is_zero(const Fringe<K>& a) {
    return a.c.empty();
}

template <class K>
Fringe<K> scalar_one(const Fringe<K>& like) {
    return fr_one(like.P);
}

template <class K>
using FMat = Matrix<Fringe<K>>;

// ∇ = d + Σ N_i dx_i on a free module of the given rank.
template <class K>
struct Connection {
    PresPtr<K> P;
    size_t r = 1;
    std::vector<FMat<K>> N;  // one matrix per coordinate derivation

    int nvars() const { return P->dim; }
};

template <class K>
Connection<K> trivial_connection(PresPtr<K> P, size_t r = 1) {
    Connection<K> c;
    c.P = P;
    c.r = r;
    c.N.assign(P->dim, FMat<K>(r, r));
    for (auto& m : c.N)
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < r; ++j) m(i, j) = fringe_zero(P);
    return c;
}

// ∇ = d + a dx/x on rank 1 over the 1-torus (or any ring containing 1/x).
template <class K>
Connection<K> kummer_connection(PresPtr<K> P, const Rational& a) {
    Connection<K> c = trivial_connection(P, 1);
    Mono xinv(P->key_size(), 0);
    if (P->kind == PresKind::Torus) {
        xinv[0] = -1;
    } else if (P->kind == PresKind::LocalizedLine && P->fdeg() == 1) {
        xinv[1] = 1;  // f = x, so f^-1 = x^-1
    } else {
        throw UnsupportedPresentation("Kummer connection needs an invertible coordinate");
    }
    c.N[0] = FMat<K>(1, 1);
    c.N[0](0, 0) = fr_monomial(P, xinv, ScalarOps<K>::from_ratio(P->proto, a));
    return c;
}

template <class K>
FMat<K> fmat_derivative(const FMat<K>& m, int var) {
    FMat<K> r(m.rows(), m.cols());
    for (size_t i = 0; i < m.rows(); ++i)
        for (size_t j = 0; j < m.cols(); ++j)
            r(i, j) = partial_derivative(m(i, j), var);
    return r;
}

// K_{ij} = ∂_i N_j − ∂_j N_i + N_i N_j − N_j N_i for i < j.
template <class K>
std::vector<std::tuple<int, int, FMat<K>>> curvature(const Connection<K>& c) {
    std::vector<std::tuple<int, int, FMat<K>>> out;
    for (int i = 0; i < c.nvars(); ++i)
        for (int j = i + 1; j < c.nvars(); ++j)
            out.emplace_back(i, j,
                             fmat_derivative(c.N[j], i) -
                                 fmat_derivative(c.N[i], j) +
                                 c.N[i] * c.N[j] - c.N[j] * c.N[i]);
    return out;
}

template <class K>
bool is_integrable(const Connection<K>& c) {
    for (auto& [i, j, m] : curvature(c))
        if (!m.all_zero()) return false;
    return true;
}

// ---------------------------------------------------------------------------
// jet polynomials: elements of A[ξ_1..ξ_v]/(ξ)^(order+1) with matrix values

using JetExp = std::vector<int>;

inline int jet_total(const JetExp& k) {
    int s = 0;
    for (int e : k) s += e;
    return s;
}

// r×r matrices with entries in the jet algebra, stored per ξ-monomial.
template <class K>
struct JetMat {
    PresPtr<K> P;
    size_t r = 1;
    int nvars = 1;
    int order = 1;
    std::map<JetExp, FMat<K>> t;

    FMat<K> zero_mat() const {
        FMat<K> m(r, r);
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < r; ++j) m(i, j) = fringe_zero(P);
        return m;
    }
    void add(const JetExp& k, const FMat<K>& m) {
        if (jet_total(k) > order || m.all_zero()) return;
        auto it = t.find(k);
        if (it == t.end()) t.emplace(k, m);
        else it->second = it->second + m;
        it = t.find(k);
        if (it != t.end() && it->second.all_zero()) t.erase(it);
    }
};

template <class K>
JetMat<K> jet_identity(PresPtr<K> P, size_t r, int nvars, int order) {
    JetMat<K> j;
    j.P = P;
    j.r = r;
    j.nvars = nvars;
    j.order = order;
    FMat<K> id(r, r);
    for (size_t a = 0; a < r; ++a)
        for (size_t b = 0; b < r; ++b)
            id(a, b) = a == b ? fr_one(P) : fringe_zero(P);
    j.t.emplace(JetExp(nvars, 0), id);
    return j;
}

template <class K>
JetMat<K> operator*(const JetMat<K>& x, const JetMat<K>& y) {
    JetMat<K> r = x;
    r.t.clear();
    for (const auto& [kx, mx] : x.t)
        for (const auto& [ky, my] : y.t) {
            if (jet_total(kx) + jet_total(ky) > r.order) continue;
            JetExp k(kx.size());
            for (size_t i = 0; i < k.size(); ++i) k[i] = kx[i] + ky[i];
            r.add(k, mx * my);
        }
    return r;
}

template <class K>
JetMat<K> operator-(const JetMat<K>& x, const JetMat<K>& y) {
    JetMat<K> r = x;
    for (const auto& [k, m] : y.t) {
        FMat<K> neg(m.rows(), m.cols());
        for (size_t i = 0; i < m.rows(); ++i)
            for (size_t j = 0; j < m.cols(); ++j) neg(i, j) = -m(i, j);
        r.add(k, neg);
    }
    return r;
}

// ---------------------------------------------------------------------------
// stratifications

// ε_n = Σ_{|k|≤n} (1/k!) ∇^k ⊗ ξ^k as an r×r matrix per ξ-monomial.
template <class K>
struct Stratification {
    PresPtr<K> P;
    size_t r = 1;
    int nvars = 1;
    int order = 1;
    std::map<JetExp, FMat<K>> eps;
};

inline Rational inv_factorial(const JetExp& k) {
    mpz_class f = 1;
    for (int e : k) {
        mpz_class g;
        mpz_fac_ui(g.get_mpz_t(), static_cast<unsigned long>(e));
        f *= g;
    }
    return Rational(mpz_class(1), f);
}

template <class K>
Stratification<K> taylor_stratification(const Connection<K>& c, int n) {
    Stratification<K> s;
    s.P = c.P;
    s.r = c.r;
    s.nvars = c.nvars();
    s.order = n;
    // iterated covariant derivatives A_k with A_0 = I, A_{k+e_i} = ∂_i A_k + N_i A_k
    std::map<JetExp, FMat<K>> A;
    JetExp zero(s.nvars, 0);
    FMat<K> id(s.r, s.r);
    for (size_t a = 0; a < s.r; ++a)
        for (size_t b = 0; b < s.r; ++b)
            id(a, b) = a == b ? fr_one(c.P) : fringe_zero(c.P);
    A.emplace(zero, id);
    // build by increasing total degree, stepping along the first nonzero slot
    std::vector<JetExp> layer = {zero};
    for (int d = 1; d <= n; ++d) {
        std::vector<JetExp> next;
        std::map<JetExp, bool> seen;
        for (const auto& k : layer)
            for (int i = 0; i < s.nvars; ++i) {
                JetExp nk = k;
                nk[i] += 1;
                if (seen.count(nk)) continue;
                seen[nk] = true;
                // step along the smallest variable appearing in nk
                int step = 0;
                while (nk[step] == 0) ++step;
                JetExp prev = nk;
                prev[step] -= 1;
                A.emplace(nk, fmat_derivative(A.at(prev), step) +
                                  c.N[step] * A.at(prev));
                next.push_back(nk);
            }
        layer = std::move(next);
    }
    for (auto& [k, m] : A) {
        K w = ScalarOps<K>::from_ratio(c.P->proto, inv_factorial(k));
        FMat<K> mk(s.r, s.r);
        for (size_t i = 0; i < s.r; ++i)
            for (size_t j = 0; j < s.r; ++j) mk(i, j) = w * m(i, j);
        s.eps.emplace(k, std::move(mk));
    }
    return s;
}

template <class K>
Connection<K> connection_from_stratification(const Stratification<K>& s) {
    Connection<K> c;
    c.P = s.P;
    c.r = s.r;
    for (int i = 0; i < s.nvars; ++i) {
        JetExp ei(s.nvars, 0);
        ei[i] = 1;
        auto it = s.eps.find(ei);
        if (it != s.eps.end()) {
            c.N.push_back(it->second);
        } else {
            FMat<K> z(s.r, s.r);
            for (size_t a = 0; a < s.r; ++a)
                for (size_t b = 0; b < s.r; ++b) z(a, b) = fringe_zero(s.P);
            c.N.push_back(z);
        }
    }
    return c;
}

// τ translation of a coefficient: a(x+ξ') = Σ_j (1/j!) ∂^j a · ξ'^j, placed into
// the ξ'-block of a two-block jet algebra (total order truncated).
template <class K>
JetMat<K> jet_translate_entry(const Fringe<K>& a, int nvars, int order,
                              int block_offset, int total_blocks) {
    JetMat<K> out;
    out.P = a.P;
    out.r = 1;
    out.nvars = nvars * total_blocks;
    out.order = order;
    std::map<JetExp, Fringe<K>> cur;  // jet exponent (length nvars) -> derivative
    cur.emplace(JetExp(nvars, 0), a);
    for (int d = 0; d <= order; ++d) {
        std::map<JetExp, Fringe<K>> next;
        for (const auto& [k, v] : cur) {
            K w = ScalarOps<K>::from_ratio(a.P->proto, inv_factorial(k));
            JetExp full(out.nvars, 0);
            for (int i = 0; i < nvars; ++i) full[block_offset * nvars + i] = k[i];
            FMat<K> m(1, 1);
            m(0, 0) = w * v;
            out.add(full, m);
            if (d < order)
                for (int i = 0; i < nvars; ++i) {
                    JetExp nk = k;
                    nk[i] += 1;
                    int step = 0;
                    while (nk[step] == 0) ++step;
                    if (step == i && !next.count(nk))
                        next.emplace(nk, partial_derivative(v, i));
                }
        }
        cur = std::move(next);
    }
    return out;
}

struct CocycleReport {
    bool pass = true;
    int fail_degree = -1;  // lowest total ξ-degree of any mismatch
};

// ε(ξ'+ξ'') = τ_{ξ'}(ε)(ξ'') · ε(ξ') in A[ξ', ξ'']/(ξ',ξ'')^(n+1).
template <class K>
CocycleReport cocycle_check(const Stratification<K>& s) {
    const int v = s.nvars, n = s.order;
    auto empty2 = [&]() {
        JetMat<K> j;
        j.P = s.P;
        j.r = s.r;
        j.nvars = 2 * v;
        j.order = n;
        return j;
    };
    // LHS: substitute ξ_i -> ξ'_i + ξ''_i
    JetMat<K> lhs = empty2();
    for (const auto& [k, m] : s.eps) {
        // expand prod_i (ξ'_i + ξ''_i)^(k_i) binomially
        std::vector<std::pair<JetExp, Rational>> parts = {
            {JetExp(2 * v, 0), Rational(1)}};
        for (int i = 0; i < v; ++i) {
            std::vector<std::pair<JetExp, Rational>> np;
            for (int a = 0; a <= k[i]; ++a) {
                mpz_class b;
                mpz_bin_uiui(b.get_mpz_t(), k[i], a);
                for (const auto& [pk, pc] : parts) {
                    JetExp nk = pk;
                    nk[i] += a;
                    nk[v + i] += k[i] - a;
                    np.push_back({nk, pc * Rational(b)});
                }
            }
            parts = std::move(np);
        }
        for (const auto& [pk, pc] : parts) {
            K w = ScalarOps<K>::from_ratio(s.P->proto, pc);
            FMat<K> mm(s.r, s.r);
            for (size_t i = 0; i < s.r; ++i)
                for (size_t j = 0; j < s.r; ++j) mm(i, j) = w * m(i, j);
            lhs.add(pk, mm);
        }
    }
    // RHS: τ_{ξ'}(ε)(ξ'') · ε(ξ')
    JetMat<K> left = empty2(), right = empty2();
    for (const auto& [k, m] : s.eps) {
        // ε(ξ'): place k into the ξ'-block unchanged
        JetExp pk(2 * v, 0);
        for (int i = 0; i < v; ++i) pk[i] = k[i];
        right.add(pk, m);
        // τ_{ξ'}(ε)(ξ''): entries translated into ξ', ξ-monomial into ξ''
        JetExp qk(2 * v, 0);
        for (int i = 0; i < v; ++i) qk[v + i] = k[i];
        for (size_t a = 0; a < s.r; ++a)
            for (size_t b = 0; b < s.r; ++b) {
                auto tr = jet_translate_entry(m(a, b), v, n - jet_total(k), 0, 2);
                for (const auto& [tk, tv] : tr.t) {
                    JetExp fk = tk;  // lives in ξ'-block already (offset 0)
                    for (int i = 0; i < v; ++i) fk[v + i] += k[i];
                    auto it = left.t.find(fk);
                    if (it == left.t.end())
                        it = left.t.emplace(fk, left.zero_mat()).first;
                    it->second(a, b) = it->second(a, b) + tv(0, 0);
                }
            }
    }
    // As matrices the transition-translated factor multiplies on the right:
    // each factor carries its own translation, so operator composition
    // reverses the apparent matrix order.
    JetMat<K> diff = lhs - (right * left);
    CocycleReport rep;
    for (const auto& [k, m] : diff.t) {
        if (m.all_zero()) continue;
        rep.pass = false;
        int d = jet_total(k);
        if (rep.fail_degree < 0 || d < rep.fail_degree) rep.fail_degree = d;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// divided-power differential operators

template <class K>
struct DividedPowerOperator {
    PresPtr<K> P;
    std::map<JetExp, Fringe<K>> a;  // multi-index -> coefficient

    int order() const {
        int o = 0;
        for (const auto& [k, v] : a)
            if (!is_zero(v)) o = std::max(o, jet_total(k));
        return o;
    }
};

template <class K>
DividedPowerOperator<K> dp_basis(PresPtr<K> P, const JetExp& k,
                                 const Fringe<K>& coef) {
    DividedPowerOperator<K> d;
    d.P = P;
    if (!is_zero(coef)) d.a.emplace(k, coef);
    return d;
}

// ∂^[k](f) = ∂^k f / k!
template <class K>
Fringe<K> divided_derivative(const Fringe<K>& f, const JetExp& k) {
    Fringe<K> r = f;
    for (size_t i = 0; i < k.size(); ++i)
        for (int t = 0; t < k[i]; ++t)
            r = partial_derivative(r, static_cast<int>(i));
    return ScalarOps<K>::from_ratio(f.P->proto, inv_factorial(k)) * r;
}

template <class K>
Fringe<K> apply_operator(const DividedPowerOperator<K>& D, const Fringe<K>& f) {
    Fringe<K> r = fringe_zero(f.P, f.degree_bound);
    for (const auto& [k, v] : D.a) r = r + v * divided_derivative(f, k);
    return r;
}

inline Rational multi_binomial(const JetExp& u, const JetExp& v) {
    Rational r(1);
    for (size_t i = 0; i < u.size(); ++i) {
        mpz_class b;
        mpz_bin_uiui(b.get_mpz_t(), u[i], v[i]);
        r *= Rational(b);
    }
    return r;
}

// Composite operator: apply D first, then E.  Uses
// ∂^[k] ∘ (a ∂^[l]) = Σ_{m≤k} ∂^[m](a) · C(k−m+l, l) · ∂^[k−m+l].
template <class K>
DividedPowerOperator<K> compose_operators(const DividedPowerOperator<K>& D,
                                          const DividedPowerOperator<K>& E) {
    DividedPowerOperator<K> out;
    out.P = D.P;
    auto add = [&](const JetExp& k, const Fringe<K>& v) {
        if (is_zero(v)) return;
        auto it = out.a.find(k);
        if (it == out.a.end()) out.a.emplace(k, v);
        else {
            it->second = it->second + v;
            if (is_zero(it->second)) out.a.erase(it);
        }
    };
    for (const auto& [k, b] : E.a)
        for (const auto& [l, acoef] : D.a) {
            // enumerate m ≤ k
            std::vector<JetExp> ms = {JetExp(k.size(), 0)};
            for (size_t i = 0; i < k.size(); ++i) {
                std::vector<JetExp> nm;
                for (const auto& m : ms)
                    for (int e = 0; e <= k[i]; ++e) {
                        JetExp t = m;
                        t[i] = e;
                        nm.push_back(t);
                    }
                ms = std::move(nm);
            }
            for (const auto& m : ms) {
                JetExp kml(k.size());
                for (size_t i = 0; i < k.size(); ++i) kml[i] = k[i] - m[i] + l[i];
                Rational c = multi_binomial(kml, l);
                add(kml, ScalarOps<K>::from_ratio(D.P->proto, c) *
                             (b * divided_derivative(acoef, m)));
            }
        }
    return out;
}

// Action of D on a module section through the Taylor matrix:
//   D·s = Σ_k a_k · Σ_{j≤k} ε_{k−j} · ∂^[j](s)
template <class K>
std::vector<Fringe<K>> operator_action(const DividedPowerOperator<K>& D,
                                       const std::vector<Fringe<K>>& s,
                                       const Stratification<K>& eps) {
    if (D.order() > eps.order)
        throw OrderExceedsJet("operator order exceeds the jet order of the stratification");
    std::vector<Fringe<K>> out(s.size(), fringe_zero(eps.P));
    for (const auto& [k, ak] : D.a) {
        // enumerate j ≤ k
        std::vector<JetExp> js = {JetExp(k.size(), 0)};
        for (size_t i = 0; i < k.size(); ++i) {
            std::vector<JetExp> nj;
            for (const auto& j : js)
                for (int e = 0; e <= k[i]; ++e) {
                    JetExp t = j;
                    t[i] = e;
                    nj.push_back(t);
                }
            js = std::move(nj);
        }
        for (const auto& j : js) {
            JetExp kj(k.size());
            for (size_t i = 0; i < k.size(); ++i) kj[i] = k[i] - j[i];
            auto it = eps.eps.find(kj);
            if (it == eps.eps.end()) continue;
            for (size_t row = 0; row < s.size(); ++row) {
                Fringe<K> acc = fringe_zero(eps.P);
                for (size_t col = 0; col < s.size(); ++col)
                    acc = acc + it->second(row, col) * divided_derivative(s[col], j);
                out[row] = out[row] + ak * acc;
            }
        }
    }
    return out;
}

}  // namespace rigid

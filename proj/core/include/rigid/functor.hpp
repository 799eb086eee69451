#pragma once

#include "rigid/derham.hpp"

namespace rigid {

// Ring map A -> B, given by images of the generators behind each key slot:
//   AffineSpace/Torus: one image per coordinate
//   LocalizedLine:     images of x and f^-1
//   Hyperelliptic:     images of x, f^-1 and y
//   MonicCover:        base slots followed by the image of y
// Carries an optional finiteness witness: an A-module basis of B.
template <class K>
struct RingMap {
    PresPtr<K> A, B;
    std::vector<Fringe<K>> slots;          // one image per key slot of A
    std::vector<Fringe<K>> basis;          // finiteness witness (may be empty)
    mutable std::map<int, Fringe<K>> slot_inverses;

    bool finite() const { return !basis.empty(); }
};

template <class K>
const Fringe<K>& slot_inverse(const RingMap<K>& phi, int slot) {
    auto it = phi.slot_inverses.find(slot);
    if (it != phi.slot_inverses.end()) return it->second;
    auto inv = invert_in_ring(phi.slots[slot]);
    if (!inv) throw Error("ring map: generator image is not invertible");
    return phi.slot_inverses.emplace(slot, std::move(*inv)).first->second;
}

template <class K>
Fringe<K> apply_map(const RingMap<K>& phi, const Fringe<K>& a) {
    Fringe<K> out = fringe_zero(phi.B, 4 * kDefaultDegreeBound);
    for (const auto& [k, v] : a.c) {
        Fringe<K> term = fr_const(phi.B, v, 4 * kDefaultDegreeBound);
        for (size_t s = 0; s < k.size(); ++s) {
            int e = k[s];
            const Fringe<K>& g =
                e >= 0 ? phi.slots[s] : slot_inverse(phi, static_cast<int>(s));
            for (int t = 0; t < std::abs(e); ++t) term = term * g;
        }
        out = out + term;
    }
    return out;
}

namespace detail {
template <class K>
Fringe<K> eval_poly(const std::vector<K>& f, const Fringe<K>& x) {
    Fringe<K> r = fringe_zero(x.P, x.degree_bound);
    Fringe<K> p = fr_one(x.P, x.degree_bound);
    for (size_t i = 0; i < f.size(); ++i) {
        if (!is_zero(f[i])) r = r + f[i] * p;
        if (i + 1 < f.size()) p = p * x;
    }
    return r;
}
}  // namespace detail

// Checks A's defining relations inside B through the slot images.
template <class K>
void check_ring_map(const RingMap<K>& phi) {
    const auto& A = *phi.A;
    switch (A.kind) {
        case PresKind::AffineSpace: break;
        case PresKind::Torus:
            for (int i = 0; i < A.dim; ++i) slot_inverse(phi, i);
            break;
        case PresKind::LocalizedLine: {
            auto fi = detail::eval_poly(A.f, phi.slots[0]) * phi.slots[1];
            if (!(fi == fr_one(phi.B)))
                throw Error("ring map: image of f^-1 is not inverse to f(x)");
            break;
        }
        case PresKind::Hyperelliptic: {
            auto fi = detail::eval_poly(A.f, phi.slots[0]) * phi.slots[1];
            if (!(fi == fr_one(phi.B)))
                throw Error("ring map: image of f^-1 is not inverse to f(x)");
            auto y2 = phi.slots[2] * phi.slots[2];
            if (!(y2 == detail::eval_poly(A.f, phi.slots[0])))
                throw Error("ring map: y image violates y^2 = f");
            break;
        }
        case PresKind::MonicCover: {
            Fringe<K> acc = fringe_zero(phi.B);
            Fringe<K> p = fr_one(phi.B);
            const auto& y = phi.slots.back();
            RingMap<K> base = phi;
            base.A = A.base;
            base.slots.pop_back();
            for (int k = 0; k <= A.mdeg(); ++k) {
                acc = acc + apply_map(base, A.m[k]) * p;
                if (k < A.mdeg()) p = p * y;
            }
            if (!acc.is_zero_elt())
                throw Error("ring map: y image violates the minimal polynomial");
            break;
        }
    }
}

// x ↦ t^m on the 1-torus, with witness basis {1, t, ..., t^(m-1)}.
template <class K>
RingMap<K> kummer_power_map(PresPtr<K> T, int m) {
    RingMap<K> phi;
    phi.A = T;
    phi.B = T;
    phi.slots = {fr_monomial(T, Mono{m}, scalar_one(T->proto))};
    for (int j = 0; j < m; ++j)
        phi.basis.push_back(fr_monomial(T, Mono{j}, scalar_one(T->proto)));
    check_ring_map(phi);
    return phi;
}

// base ↪ MonicCover(base, m), with witness basis {1, y, ..., y^(deg m - 1)}.
template <class K>
RingMap<K> cover_inclusion(PresPtr<K> B) {
    if (B->kind != PresKind::MonicCover)
        throw Error("cover_inclusion expects a monic cover");
    RingMap<K> phi;
    phi.A = B->base;
    phi.B = B;
    for (int s = 0; s < B->base->key_size(); ++s) {
        Mono k(B->key_size(), 0);
        k[s] = 1;
        phi.slots.push_back(fr_monomial(B, k, scalar_one(B->proto)));
    }
    for (int e = 0; e < B->mdeg(); ++e) {
        Mono k(B->key_size(), 0);
        k.back() = e;
        phi.basis.push_back(fr_monomial(B, k, scalar_one(B->proto)));
    }
    check_ring_map(phi);
    return phi;
}

template <class K>
RingMap<K> identity_map(PresPtr<K> P) {
    RingMap<K> phi;
    phi.A = P;
    phi.B = P;
    for (int s = 0; s < P->key_size(); ++s) {
        Mono k(P->key_size(), 0);
        k[s] = 1;
        phi.slots.push_back(fr_monomial(P, k, scalar_one(P->proto)));
    }
    phi.basis = {fr_one(P)};
    check_ring_map(phi);
    return phi;
}

// Express a B-element in the witness basis with A-coefficients, by an exact
// linear solve over growing A-windows.
template <class K>
std::vector<Fringe<K>> decompose(const RingMap<K>& phi, const Fringe<K>& g,
                                 int tries = 3) {
    if (!phi.finite()) throw Error("decompose needs a finiteness witness");
    long gsize = 1;
    for (const auto& [k, v] : g.c)
        gsize = std::max(gsize, phi.B->mono_size(k));
    for (int t = 1; t <= tries; ++t) {
        long W = gsize + 4 * t;
        auto dom = window_monomials(phi.A, W);
        std::vector<Fringe<K>> cols;
        std::map<Mono, size_t> codx;
        for (size_t j = 0; j < phi.basis.size(); ++j)
            for (const auto& m : dom) {
                auto img = phi.basis[j] *
                           apply_map(phi, fr_monomial(phi.A, m,
                                                      scalar_one(phi.A->proto)));
                for (const auto& [k, v] : img.c) codx.emplace(k, 0);
                cols.push_back(std::move(img));
            }
        for (const auto& [k, v] : g.c) codx.emplace(k, 0);
        size_t idx = 0;
        for (auto& [k, v] : codx) v = idx++;
        Matrix<K> A(codx.size(), cols.size()), b(codx.size(), 1);
        for (size_t j = 0; j < cols.size(); ++j)
            for (const auto& [k, v] : cols[j].c) A(codx.at(k), j) = v;
        for (const auto& [k, v] : g.c) b(codx.at(k), 0) = v;
        auto s = solve_linear(A, b);
        if (!s.particular) continue;
        std::vector<Fringe<K>> out(phi.basis.size(), fringe_zero(phi.A));
        for (size_t j = 0; j < cols.size(); ++j) {
            const K& x = (*s.particular)(j, 0);
            if (is_zero(x)) continue;
            size_t bi = j / dom.size();
            const Mono& m = dom[j % dom.size()];
            out[bi] = out[bi] + x * fr_monomial(phi.A, m,
                                                scalar_one(phi.A->proto));
        }
        return out;
    }
    throw Error("decompose: element is not in the witness-basis span at truncation");
}

// chain rule: N^B_j = Σ_i φ(N^A_i) · ∂_j(φ(x_i))
template <class K>
Connection<K> pullback_module(const Connection<K>& c, const RingMap<K>& phi) {
    Connection<K> out = trivial_connection(phi.B, c.r);
    for (int j = 0; j < phi.B->dim; ++j)
        for (int i = 0; i < c.nvars(); ++i) {
            auto dxi = partial_derivative(phi.slots[i], j);
            if (dxi.is_zero_elt()) continue;
            for (size_t a = 0; a < c.r; ++a)
                for (size_t b = 0; b < c.r; ++b)
                    out.N[j](a, b) =
                        out.N[j](a, b) + apply_map(phi, c.N[i](a, b)) * dxi;
        }
    return out;
}

// Pushforward of a connection over B to A along a finite map (one variable).
// The A-derivation lifts to B as (dφ(x)/dt)^{-1} ∂_t; sections b_j ⊗ e_c get
// differentiated and re-expressed in the witness basis.
template <class K>
Connection<K> pushforward_finite(const Connection<K>& cb, const RingMap<K>& phi) {
    if (!phi.finite()) throw Error("pushforward needs a finiteness witness");
    if (phi.A->dim != 1 || phi.B->dim != 1)
        throw UnsupportedPresentation("finite pushforward is one-dimensional");
    auto dphi = partial_derivative(phi.slots[0], 0);
    auto dinv = invert_in_ring(dphi);
    if (!dinv)
        throw NonEtale("cover is ramified: dφ(x) is not invertible");
    const size_t s = phi.basis.size(), r = cb.r;
    Connection<K> out = trivial_connection(phi.A, r * s);
    for (size_t j = 0; j < s; ++j)
        for (size_t c = 0; c < r; ++c) {
            // ∇_{∂x}(b_j e_c) = (D b_j) e_c + b_j Σ_row (dφ^{-1} N^B)(row, c) e_row
            std::vector<Fringe<K>> w(r, fringe_zero(phi.B));
            w[c] = partial_derivative(phi.basis[j], 0) * (*dinv);
            for (size_t row = 0; row < r; ++row)
                w[row] = w[row] + phi.basis[j] * (*dinv) * cb.N[0](row, c);
            for (size_t row = 0; row < r; ++row) {
                auto coeffs = decompose(phi, w[row]);
                for (size_t bj = 0; bj < s; ++bj)
                    out.N[0](bj * r + row, j * r + c) = coeffs[bj];
            }
        }
    return out;
}

// A group of automorphisms of B over A (each fixing the image of A).
template <class K>
struct GroupAction {
    std::vector<RingMap<K>> elements;  // B -> B, identity included
};

// sign-flip automorphism y ↦ -y (quadratic covers) or t ↦ -t (x ↦ t^2)
template <class K>
GroupAction<K> quadratic_action(const RingMap<K>& phi) {
    GroupAction<K> G;
    G.elements.push_back(identity_map(phi.B));
    RingMap<K> g = identity_map(phi.B);
    g.slots.back() = -g.slots.back();
    g.slot_inverses.clear();
    check_ring_map(g);
    G.elements.push_back(g);
    return G;
}

template <class K>
struct TraceSplitting {
    FMat<K> e;           // idempotent on the pushed-forward module, over A
    size_t rank = 0;     // rank of the original module
};

// e = (1/|G|) Σ_g ρ(g) acting on f_* f^* E in the witness basis.
template <class K>
TraceSplitting<K> trace_splitting(const Connection<K>& c, const RingMap<K>& phi,
                                  const GroupAction<K>& G) {
    const size_t s = phi.basis.size(), r = c.r;
    const long order = static_cast<long>(G.elements.size());
    K invn{};
    try {
        invn = inv(ScalarOps<K>::from_long(phi.A->proto, order));
        if constexpr (ScalarOps<K>::is_padic) {
            if (invn.valuation() < 0)
                throw GroupOrderNotInvertible("group order has positive valuation");
        }
    } catch (const PrecisionExhausted&) {
        throw GroupOrderNotInvertible("group order is not invertible");
    }
    TraceSplitting<K> out;
    out.rank = r;
    FMat<K> e(r * s, r * s);
    for (size_t i = 0; i < r * s; ++i)
        for (size_t j = 0; j < r * s; ++j) e(i, j) = fringe_zero(phi.A);
    for (const auto& g : G.elements) {
        // ρ(g): b_j ↦ g(b_j), re-expressed in the witness basis, ⊗ identity
        for (size_t j = 0; j < s; ++j) {
            auto coeffs = decompose(phi, apply_map(g, phi.basis[j]));
            for (size_t bj = 0; bj < s; ++bj)
                for (size_t comp = 0; comp < r; ++comp)
                    e(bj * r + comp, j * r + comp) =
                        e(bj * r + comp, j * r + comp) +
                        invn * coeffs[bj];
        }
    }
    out.e = std::move(e);
    return out;
}

template <class K>
Fringe<K> matrix_trace(const FMat<K>& m) {
    Fringe<K> t;
    for (size_t i = 0; i < m.rows(); ++i) t = t + m(i, i);
    return t;
}

}  // namespace rigid

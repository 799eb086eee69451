#pragma once

#include <algorithm>
#include <string>

#include "rigid/diffcalc.hpp"

namespace rigid {

// Degree 0: a section (coefficient vector of length r).
// Degree 1: a 1-form, coefficients against the coordinate covector dx.
template <class K>
struct DeRhamForm {
    int degree = 0;
    std::vector<Fringe<K>> coeff;
    std::string covector;  // "", "dx", ...
};

struct TruncationLevel {
    int degree = 16;   // first domain window size
    int step = 4;      // window growth between levels
    int max_levels = 4;
    int rep_window = -1;  // candidate-representative size cap; -1 = per-kind default
};

template <class K>
struct CohomologyResult {
    std::vector<size_t> dims;  // per degree 0..dim
    std::vector<DeRhamForm<K>> basis;
    // (window, dims) pairs actually computed; success = two consecutive agree
    std::vector<std::pair<int, std::vector<size_t>>> stabilization;
    bool stabilized = false;
    long precision_loss = 0;
};

struct SupportResult {
    std::vector<size_t> dims;  // H^0_Z, H^1_Z, H^2_Z
    size_t restriction_rank_h0 = 0;
    size_t restriction_rank_h1 = 0;
};

namespace detail {

// the truncated matrix of ∇ : A^r -> A^r dx on a one-dimensional presentation
template <class K>
struct TruncatedNabla {
    PresPtr<K> P;
    size_t r = 1;
    std::vector<Mono> dom;
    std::vector<Mono> cod;
    std::map<Mono, size_t> codpos;
    std::vector<std::vector<Fringe<K>>> images;  // per dom mono x component
};

template <class K>
TruncatedNabla<K> nabla_images(const Connection<K>& c, int D) {
    TruncatedNabla<K> t;
    t.P = c.P;
    t.r = c.r;
    t.dom = window_monomials(c.P, D);
    const int bound = 4 * kDefaultDegreeBound;
    for (const auto& m : t.dom) {
        auto mf = fr_monomial(c.P, m, scalar_one(c.P->proto), bound);
        for (size_t comp = 0; comp < t.r; ++comp) {
            std::vector<Fringe<K>> img(t.r, fringe_zero(c.P, bound));
            img[comp] = partial_derivative(mf, 0);
            for (size_t row = 0; row < t.r; ++row)
                img[row] = img[row] + c.N[0](row, comp) * mf;
            for (const auto& g : img)
                if (g.tail_dropped)
                    throw Error("truncation overflow while building the de Rham matrix");
            t.images.push_back(std::move(img));
        }
    }
    return t;
}

template <class K>
void index_support(TruncatedNabla<K>& t,
                   const std::vector<std::vector<Fringe<K>>>& extra) {
    auto note = [&](const Fringe<K>& g) {
        for (const auto& [k, v] : g.c)
            if (!t.codpos.count(k)) {
                t.codpos.emplace(k, 0);
            }
    };
    for (const auto& img : t.images)
        for (const auto& g : img) note(g);
    for (const auto& img : extra)
        for (const auto& g : img) note(g);
    size_t idx = 0;
    for (auto& [k, v] : t.codpos) {
        t.cod.push_back(k);
        v = idx++;
    }
}

template <class K>
Matrix<K> assemble(const TruncatedNabla<K>& t,
                   const std::vector<std::vector<Fringe<K>>>& cols) {
    Matrix<K> A(t.cod.size() * t.r, cols.size());
    for (size_t j = 0; j < cols.size(); ++j)
        for (size_t row = 0; row < t.r; ++row)
            for (const auto& [k, v] : cols[j][row].c)
                A(t.codpos.at(k) * t.r + row, j) = v;
    return A;
}

// default size cap for H^1 candidate representatives
template <class K>
int default_rep_window(const PresPtr<K>& P) {
    switch (P->kind) {
        case PresKind::AffineSpace:
        case PresKind::Torus: return 3;
        case PresKind::LocalizedLine: return 2 * P->fdeg();
        case PresKind::Hyperelliptic: return 2 * P->fdeg() + P->y_weight();
        case PresKind::MonicCover:
            return default_rep_window(P->base) +
                   (P->mdeg() - 1) * P->y_weight();
    }
    return 4;
}

// candidate forms: every window monomial in every component slot
template <class K>
std::vector<std::vector<Fringe<K>>> rep_candidates(const PresPtr<K>& P,
                                                   size_t r, int w) {
    std::vector<std::vector<Fringe<K>>> out;
    auto monos = window_monomials(P, w);
    std::sort(monos.begin(), monos.end(), [&](const Mono& a, const Mono& b) {
        long sa = P->mono_size(a), sb = P->mono_size(b);
        return sa != sb ? sa < sb : a < b;
    });
    for (const auto& m : monos)
        for (size_t comp = 0; comp < r; ++comp) {
            std::vector<Fringe<K>> f(r, fringe_zero(P));
            f[comp] = fr_monomial(P, m, scalar_one(P->proto));
            out.push_back(std::move(f));
        }
    return out;
}

template <class K>
bool connection_is_onedim(const Connection<K>& c) {
    return c.P->dim == 1;
}

}  // namespace detail

// ∇ applied to a degree-0 form.
template <class K>
DeRhamForm<K> dr_differential(const DeRhamForm<K>& s, const Connection<K>& c) {
    if (s.degree != 0) throw Error("dr_differential expects a degree-0 form");
    DeRhamForm<K> out;
    out.degree = 1;
    out.covector = "dx";
    out.coeff.assign(c.r, fringe_zero(c.P));
    for (size_t row = 0; row < c.r; ++row) {
        out.coeff[row] = partial_derivative(s.coeff[row], 0);
        for (size_t col = 0; col < c.r; ++col)
            out.coeff[row] = out.coeff[row] + c.N[0](row, col) * s.coeff[col];
    }
    return out;
}

template <class K>
struct Reduction {
    DeRhamForm<K> reduced;    // window representative
    DeRhamForm<K> exact_part; // s with ω = reduced + ∇s
    long precision_loss = 0;
};

// Write ω = (window representative) + ∇s by solving on growing windows.
template <class K>
Reduction<K> reduce_form(const DeRhamForm<K>& omega, const Connection<K>& c,
                         TruncationLevel t = {}) {
    if (omega.degree != 1) throw Error("reduce_form expects a 1-form");
    const int w = t.rep_window > 0 ? t.rep_window
                                   : detail::default_rep_window(c.P);
    int D = t.degree;
    for (int attempt = 0; attempt < t.max_levels; ++attempt, D += t.step) {
        auto nb = detail::nabla_images(c, D);
        auto cands = detail::rep_candidates(c.P, c.r, w);
        std::vector<std::vector<Fringe<K>>> extra = cands;
        extra.push_back(omega.coeff);
        detail::index_support(nb, extra);
        auto A = detail::assemble(nb, nb.images);
        auto b = detail::assemble(nb, {omega.coeff});
        // prefer a fully exact solution
        auto s0 = solve_linear(A, b);
        Reduction<K> out;
        out.exact_part.degree = 0;
        out.reduced.degree = 1;
        out.reduced.covector = "dx";
        if (s0.particular) {
            out.precision_loss = s0.precision_loss;
            out.reduced.coeff.assign(c.r, fringe_zero(c.P));
            out.exact_part.coeff.assign(c.r, fringe_zero(c.P));
            for (size_t j = 0; j < nb.dom.size(); ++j)
                for (size_t comp = 0; comp < c.r; ++comp) {
                    const K& x = (*s0.particular)(j * c.r + comp, 0);
                    if (!is_zero(x))
                        out.exact_part.coeff[comp] =
                            out.exact_part.coeff[comp] +
                            x * fr_monomial(c.P, nb.dom[j],
                                            scalar_one(c.P->proto));
                }
            return out;
        }
        auto C = detail::assemble(nb, cands);
        auto s1 = solve_linear(A.hcat(C), b);
        if (s1.particular) {
            out.precision_loss = s1.precision_loss;
            out.reduced.coeff.assign(c.r, fringe_zero(c.P));
            out.exact_part.coeff.assign(c.r, fringe_zero(c.P));
            const size_t na = nb.dom.size() * c.r;
            for (size_t j = 0; j < na; ++j) {
                const K& x = (*s1.particular)(j, 0);
                if (!is_zero(x))
                    out.exact_part.coeff[j % c.r] =
                        out.exact_part.coeff[j % c.r] +
                        x * fr_monomial(c.P, nb.dom[j / c.r],
                                        scalar_one(c.P->proto));
            }
            for (size_t j = 0; j < cands.size(); ++j) {
                const K& x = (*s1.particular)(na + j, 0);
                if (!is_zero(x))
                    for (size_t comp = 0; comp < c.r; ++comp)
                        out.reduced.coeff[comp] =
                            out.reduced.coeff[comp] + x * cands[j][comp];
            }
            return out;
        }
    }
    throw Resonance("reduction solve stayed singular", D - t.step);
}

// One-dimensional cohomology at a fixed window; returns (h0, h1, basis, loss).
namespace detail {
template <class K>
std::tuple<size_t, size_t, std::vector<DeRhamForm<K>>, long> cohomology_at(
    const Connection<K>& c, int D, int w) {
    auto nb = nabla_images(c, D);
    auto cands = rep_candidates(c.P, c.r, w);
    index_support(nb, cands);
    auto A = assemble(nb, nb.images);
    auto C = assemble(nb, cands);
    auto sA = solve_linear(A, Matrix<K>());
    auto sAC = solve_linear(A.hcat(C), Matrix<K>());
    std::vector<DeRhamForm<K>> basis;
    // H^0 basis from the kernel of the truncated ∇
    for (const auto& kv : sA.kernel) {
        DeRhamForm<K> f;
        f.degree = 0;
        f.coeff.assign(c.r, fringe_zero(c.P));
        for (size_t j = 0; j < nb.dom.size(); ++j)
            for (size_t comp = 0; comp < c.r; ++comp)
                if (!is_zero(kv[j * c.r + comp]))
                    f.coeff[comp] =
                        f.coeff[comp] +
                        kv[j * c.r + comp] *
                            fr_monomial(c.P, nb.dom[j], scalar_one(c.P->proto));
        basis.push_back(std::move(f));
    }
    size_t h0 = sA.kernel.size();
    // H^1: candidate columns that remain independent modulo the image
    size_t h1 = sAC.rank - sA.rank;
    const size_t na = nb.dom.size() * c.r;
    for (size_t pc : sAC.pivot_cols)
        if (pc >= na) {
            DeRhamForm<K> f;
            f.degree = 1;
            f.covector = "dx";
            f.coeff = cands[pc - na];
            basis.push_back(std::move(f));
        }
    return {h0, h1, basis, sA.precision_loss + sAC.precision_loss};
}

// split rank-1 multivariable connections: N_i depends only on x_i
template <class K>
std::optional<std::vector<Connection<K>>> split_factors(const Connection<K>& c) {
    if (c.r != 1) return std::nullopt;
    std::vector<Connection<K>> out;
    for (int i = 0; i < c.nvars(); ++i) {
        PresPtr<K> P1 = c.P->kind == PresKind::Torus
                            ? make_torus<K>(1, c.P->proto)
                            : make_affine<K>(1, c.P->proto);
        auto ci = trivial_connection(P1, 1);
        for (const auto& [k, v] : c.N[i](0, 0).c) {
            for (int j = 0; j < c.nvars(); ++j)
                if (j != i && k[j] != 0) return std::nullopt;
            detail::reduce_term(*P1, Mono{k[i]}, v, ci.N[0](0, 0).c);
        }
        out.push_back(std::move(ci));
    }
    return out;
}
}  // namespace detail

template <class K>
CohomologyResult<K> cohomology(const Connection<K>& c, TruncationLevel t = {}) {
    CohomologyResult<K> res;
    if (c.P->dim > 1) {
        if (c.P->kind != PresKind::AffineSpace && c.P->kind != PresKind::Torus)
            throw UnsupportedPresentation("multivariable cohomology needs a product presentation");
        auto split = detail::split_factors(c);
        if (!split)
            throw UnsupportedPresentation(
                "multivariable connections must split as direct products of "
                "one-variable data");
        // Künneth: convolve per-variable dimension vectors
        std::vector<size_t> dims = {1};
        bool stab = true;
        long loss = 0;
        for (auto& ci : *split) {
            auto r1 = cohomology(ci, t);
            stab = stab && r1.stabilized;
            loss += r1.precision_loss;
            std::vector<size_t> nd(dims.size() + 1, 0);
            for (size_t a = 0; a < dims.size(); ++a)
                for (size_t b = 0; b < 2; ++b) nd[a + b] += dims[a] * r1.dims[b];
            dims = std::move(nd);
        }
        res.dims = dims;
        res.stabilized = stab;
        res.precision_loss = loss;
        res.stabilization.push_back({t.degree, res.dims});
        return res;
    }
    if (!is_integrable(c)) throw Error("cohomology requires an integrable connection");
    const int w = t.rep_window > 0 ? t.rep_window
                                   : detail::default_rep_window(c.P);
    std::vector<size_t> prev;
    int D = t.degree;
    for (int lvl = 0; lvl < t.max_levels; ++lvl, D += t.step) {
        auto [h0, h1, basis, loss] = detail::cohomology_at(c, D, w);
        std::vector<size_t> dims = {h0, h1};
        res.stabilization.push_back({D, dims});
        res.precision_loss = std::max(res.precision_loss, loss);
        if (!prev.empty() && prev == dims) {
            res.dims = dims;
            res.basis = std::move(basis);
            res.stabilized = true;
            return res;
        }
        prev = dims;
    }
    res.dims = prev;
    res.stabilized = false;
    return res;
}

// throwing variant for callers that need settled dimensions
template <class K>
CohomologyResult<K> cohomology_settled(const Connection<K>& c,
                                       TruncationLevel t = {}) {
    auto r = cohomology(c, t);
    if (!r.stabilized)
        throw NotStabilized("cohomology dimensions did not stabilize across windows");
    return r;
}

// ---------------------------------------------------------------------------
// Poincaré homotopy tower

// An element of the truncated disk tower: polynomial levels s_0 .. s_L in t.
template <class K>
struct TowerElement {
    std::vector<std::vector<K>> levels;  // level -> coefficients (low -> high)
};

namespace detail {
template <class K>
std::vector<K> poly_trim(std::vector<K> a) {
    while (!a.empty() && is_zero(a.back())) a.pop_back();
    return a;
}
}  // namespace detail

// ∫ : level k takes the antiderivative of level k+1, t^r -> t^(r+1)/(r+1)
template <class K>
TowerElement<K> tower_integrate(const TowerElement<K>& m, const K& like) {
    TowerElement<K> out;
    for (size_t k = 0; k + 1 < m.levels.size(); ++k) {
        const auto& s = m.levels[k + 1];
        std::vector<K> r(s.size() + 1, K{});
        if constexpr (!ScalarOps<K>::is_padic) r.assign(s.size() + 1, K(0));
        for (size_t i = 0; i < s.size(); ++i)
            r[i + 1] = s[i] * ScalarOps<K>::from_ratio(
                                  like, Rational(1, static_cast<long>(i) + 1));
        out.levels.push_back(detail::poly_trim(std::move(r)));
    }
    return out;
}

// ∂ : componentwise d/dt
template <class K>
TowerElement<K> tower_derive(const TowerElement<K>& m, const K& like) {
    TowerElement<K> out;
    for (const auto& s : m.levels) {
        std::vector<K> r;
        for (size_t i = 1; i < s.size(); ++i)
            r.push_back(s[i] * ScalarOps<K>::from_long(like, static_cast<long>(i)));
        out.levels.push_back(detail::poly_trim(std::move(r)));
    }
    return out;
}

// d : tower difference, (ds)_k = s_{k+1} - s_k
template <class K>
TowerElement<K> tower_difference(const TowerElement<K>& m) {
    TowerElement<K> out;
    for (size_t k = 0; k + 1 < m.levels.size(); ++k) {
        auto a = m.levels[k + 1];
        const auto& b = m.levels[k];
        if (a.size() < b.size()) a.resize(b.size(), K{});
        for (size_t i = 0; i < b.size(); ++i) a[i] = a[i] - b[i];
        out.levels.push_back(detail::poly_trim(std::move(a)));
    }
    return out;
}

// i ∘ p : constant term of the next level, included as a constant
template <class K>
TowerElement<K> tower_ip(const TowerElement<K>& m) {
    TowerElement<K> out;
    for (size_t k = 0; k + 1 < m.levels.size(); ++k) {
        std::vector<K> r;
        if (!m.levels[k + 1].empty() && !is_zero(m.levels[k + 1][0]))
            r.push_back(m.levels[k + 1][0]);
        out.levels.push_back(std::move(r));
    }
    return out;
}

struct HomotopyReport {
    bool d_int = false;   // d∘∫ − ∫∘d = 0
    bool dd_int = false;  // ∂∘∫ − ∫∘∂ = i∘p
    bool unit = false;    // ∂∘∫ = Id + d
    bool all() const { return d_int && dd_int && unit; }
};

template <class K>
bool tower_equal(const TowerElement<K>& a, const TowerElement<K>& b,
                 size_t upto) {
    for (size_t k = 0; k < upto; ++k) {
        auto x = k < a.levels.size() ? detail::poly_trim(a.levels[k])
                                     : std::vector<K>{};
        auto y = k < b.levels.size() ? detail::poly_trim(b.levels[k])
                                     : std::vector<K>{};
        if (x.size() != y.size()) return false;
        for (size_t i = 0; i < x.size(); ++i)
            if (!(x[i] == y[i])) return false;
    }
    return true;
}

template <class K>
HomotopyReport poincare_homotopy_check(const TowerElement<K>& m, const K& like) {
    if (m.levels.size() < 3) throw Error("homotopy check needs tower depth >= 3");
    const size_t L = m.levels.size();
    HomotopyReport rep;
    auto I = tower_integrate(m, like);
    auto dI = tower_difference(I);
    auto Id_ = tower_integrate(tower_difference(m), like);
    rep.d_int = tower_equal(dI, Id_, L - 2);
    auto ddI = tower_derive(I, like);
    auto Idd = tower_integrate(tower_derive(m, like), like);
    auto ip = tower_ip(m);
    TowerElement<K> lhs2;
    for (size_t k = 0; k + 1 < L; ++k) {
        auto a = k < ddI.levels.size() ? ddI.levels[k] : std::vector<K>{};
        const auto b = k < Idd.levels.size() ? Idd.levels[k] : std::vector<K>{};
        if (a.size() < b.size()) a.resize(b.size(), K{});
        for (size_t i = 0; i < b.size(); ++i) a[i] = a[i] - b[i];
        lhs2.levels.push_back(detail::poly_trim(std::move(a)));
    }
    rep.dd_int = tower_equal(lhs2, ip, L - 1);
    // ∂∘∫ = Id + d
    TowerElement<K> rhs3 = tower_difference(m);
    for (size_t k = 0; k + 1 < L; ++k) {
        auto a = rhs3.levels[k];
        const auto& b = m.levels[k];
        if (a.size() < b.size()) a.resize(b.size(), K{});
        for (size_t i = 0; i < b.size(); ++i) a[i] = a[i] + b[i];
        rhs3.levels[k] = detail::poly_trim(std::move(a));
    }
    rep.unit = tower_equal(ddI, rhs3, L - 1);
    return rep;
}

// ---------------------------------------------------------------------------
// cohomology with support via the open/closed long exact sequence

// ∇ given over AffineSpace(1) with polynomial matrices; Z = zero locus of f.
template <class K>
SupportResult cohomology_with_support(const Connection<K>& ambient,
                                      const std::vector<K>& f,
                                      TruncationLevel t = {}) {
    SupportResult out;
    if (f.size() < 2) {  // empty puncture set
        out.dims = {0, 0, 0};
        return out;
    }
    if (ambient.P->kind != PresKind::AffineSpace || ambient.P->dim != 1)
        throw UnsupportedPresentation("support cohomology expects an ambient affine line");
    auto U = make_localized_line<K>(f, ambient.P->proto);
    auto cu = trivial_connection(U, ambient.r);
    for (size_t i = 0; i < ambient.r; ++i)
        for (size_t j = 0; j < ambient.r; ++j) {
            Fringe<K> g = fringe_zero(U);
            for (const auto& [k, v] : ambient.N[0](i, j).c)
                detail::reduce_term(*U, Mono{k[0], 0}, v, g.c);
            g.cert = tight_certificate(g);
            cu.N[0](i, j) = g;
        }
    auto HA = cohomology_settled(ambient, t);
    auto HU = cohomology_settled(cu, t);
    // restriction on H^0: horizontal polynomial sections restrict injectively
    // unless they vanish; compute the rank of their span inside ker ∇_U
    size_t rho0 = 0;
    {
        std::vector<std::vector<Fringe<K>>> imgs;
        for (const auto& b : HA.basis)
            if (b.degree == 0) {
                std::vector<Fringe<K>> v;
                for (const auto& g : b.coeff) {
                    Fringe<K> h = fringe_zero(U);
                    for (const auto& [k, val] : g.c)
                        detail::reduce_term(*U, Mono{k[0], 0}, val, h.c);
                    v.push_back(std::move(h));
                }
                imgs.push_back(std::move(v));
            }
        if (!imgs.empty()) {
            std::map<Mono, size_t> idx;
            for (const auto& v : imgs)
                for (const auto& g : v)
                    for (const auto& [k, val] : g.c) idx.emplace(k, idx.size());
            size_t rr = 0;
            for (auto& [k, v] : idx) v = rr++;
            Matrix<K> M(rr * ambient.r, imgs.size());
            for (size_t j = 0; j < imgs.size(); ++j)
                for (size_t comp = 0; comp < ambient.r; ++comp)
                    for (const auto& [k, val] : imgs[j][comp].c)
                        M(idx.at(k) * ambient.r + comp, j) = val;
            rho0 = rank(M);
        }
    }
    // restriction on H^1: rank of the images of ambient H^1 classes inside
    // the localized cokernel
    size_t rho1 = 0;
    {
        std::vector<std::vector<Fringe<K>>> reps;
        for (const auto& b : HA.basis)
            if (b.degree == 1) {
                std::vector<Fringe<K>> v;
                for (const auto& g : b.coeff) {
                    Fringe<K> h = fringe_zero(U);
                    for (const auto& [k, val] : g.c)
                        detail::reduce_term(*U, Mono{k[0], 0}, val, h.c);
                    v.push_back(std::move(h));
                }
                reps.push_back(std::move(v));
            }
        if (!reps.empty()) {
            auto nb = detail::nabla_images(cu, t.degree + t.step);
            detail::index_support(nb, reps);
            auto A = detail::assemble(nb, nb.images);
            auto C = detail::assemble(nb, reps);
            rho1 = rank(A.hcat(C)) - rank(A);
        }
    }
    size_t h0a = HA.dims[0], h1a = HA.dims[1];
    size_t h0u = HU.dims[0], h1u = HU.dims[1];
    out.restriction_rank_h0 = rho0;
    out.restriction_rank_h1 = rho1;
    out.dims = {h0a - rho0, (h0u - rho0) + (h1a - rho1), h1u - rho1};
    return out;
}

}  // namespace rigid

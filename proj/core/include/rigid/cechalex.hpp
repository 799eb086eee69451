#pragma once

#include "rigid/derham.hpp"

namespace rigid {

// Basis key of the k-fold jet module: (jet exponents, x-monomial, component).
// Jet exponents are stored as k consecutive blocks of length nvars.
using CechKey = std::tuple<std::vector<int>, Mono, size_t>;

template <class K>
using CechElt = std::map<CechKey, K>;

namespace detail {

template <class K>
void cech_add(CechElt<K>& e, const CechKey& k, const K& v) {
    if (is_zero(v)) return;
    auto it = e.find(k);
    if (it == e.end()) e.emplace(k, v);
    else {
        it->second = it->second + v;
        if (is_zero(it->second)) e.erase(it);
    }
}

// all divided derivatives ∂^j a / j! with |j| ≤ cap
template <class K>
std::map<std::vector<int>, Fringe<K>> divided_jets(const Fringe<K>& a, int v,
                                                   int cap) {
    std::map<std::vector<int>, Fringe<K>> out;  // exponent -> ∂^j a (no factorial)
    out.emplace(std::vector<int>(v, 0), a);
    std::vector<std::vector<int>> layer = {std::vector<int>(v, 0)};
    for (int d = 1; d <= cap; ++d) {
        std::vector<std::vector<int>> next;
        for (const auto& k : layer)
            for (int i = 0; i < v; ++i) {
                std::vector<int> nk = k;
                nk[i] += 1;
                int step = 0;
                while (nk[step] == 0) ++step;
                if (step != i || out.count(nk)) continue;
                out.emplace(nk, partial_derivative(out.at(k), i));
                next.push_back(nk);
            }
        layer = std::move(next);
    }
    for (auto& [k, g] : out)
        g = ScalarOps<K>::from_ratio(a.P->proto, inv_factorial(JetExp(k))) * g;
    return out;
}

}  // namespace detail

// Apply the kth Čech–Alexander differential d^k = Σ_i (−1)^i d_k^i to a basis
// element of the k-fold jet module.
template <class K>
CechElt<K> cech_differential_of(const Stratification<K>& eps, int k,
                                const std::vector<int>& jet, const Mono& mono,
                                size_t comp) {
    const int v = eps.nvars, n = eps.order;
    const int jtot = jet_total(jet);
    CechElt<K> out;
    const K one = scalar_one(eps.P->proto);
    auto F = fr_monomial(eps.P, mono, one, 4 * kDefaultDegreeBound);

    // 0th coface: fresh front block; coefficients τ-translated, then ε applied
    auto jets = detail::divided_jets(F, v, n - jtot);
    for (const auto& [ek, em] : eps.eps)
        for (const auto& [j, g] : jets) {
            if (jet_total(JetExp(ek)) + jet_total(j) + jtot > n) continue;
            std::vector<int> front(v);
            for (int i = 0; i < v; ++i) front[i] = ek[i] + j[i];
            std::vector<int> nj(front.begin(), front.end());
            nj.insert(nj.end(), jet.begin(), jet.end());
            for (size_t row = 0; row < eps.r; ++row) {
                auto prod = em(row, comp) * g;
                for (const auto& [m2, c2] : prod.c)
                    detail::cech_add(out, CechKey{nj, m2, row}, c2);
            }
        }

    // inner cofaces i = 1..k: split block i binomially over blocks (i, i+1)
    for (int i = 1; i <= k; ++i) {
        std::vector<std::pair<std::vector<int>, Rational>> parts = {
            {std::vector<int>((k + 1) * v, 0), Rational(1)}};
        // copy unaffected blocks: t < i stays at t, t > i shifts to t+1
        for (auto& [pk, pc] : parts) {
            for (int t = 0; t < i - 1; ++t)
                for (int x = 0; x < v; ++x) pk[t * v + x] = jet[t * v + x];
            for (int t = i; t < k; ++t)
                for (int x = 0; x < v; ++x) pk[(t + 1) * v + x] = jet[t * v + x];
        }
        for (int x = 0; x < v; ++x) {
            int a = jet[(i - 1) * v + x];
            std::vector<std::pair<std::vector<int>, Rational>> np;
            for (int b = 0; b <= a; ++b) {
                mpz_class bc;
                mpz_bin_uiui(bc.get_mpz_t(), a, b);
                for (const auto& [pk, pc] : parts) {
                    auto nk = pk;
                    nk[(i - 1) * v + x] += b;
                    nk[i * v + x] += a - b;
                    np.push_back({nk, pc * Rational(bc)});
                }
            }
            parts = std::move(np);
        }
        Rational sgn = (i % 2 == 0) ? Rational(1) : Rational(-1);
        for (const auto& [pk, pc] : parts)
            detail::cech_add(out, CechKey{pk, mono, comp},
                             K(ScalarOps<K>::from_ratio(eps.P->proto, sgn * pc) *
                               one));
    }

    // last coface: append a fresh trailing block
    {
        std::vector<int> nj = jet;
        nj.insert(nj.end(), v, 0);
        Rational sgn = ((k + 1) % 2 == 0) ? Rational(1) : Rational(-1);
        detail::cech_add(out, CechKey{nj, mono, comp},
                         ScalarOps<K>::from_ratio(eps.P->proto, sgn));
    }
    return out;
}

// enumerate the basis of the k-fold jet module on the window
template <class K>
std::vector<CechKey> cech_basis(const Stratification<K>& eps, int k, int D) {
    std::vector<CechKey> out;
    const int v = eps.nvars, n = eps.order;
    std::vector<std::vector<int>> jets = {std::vector<int>(k * v, 0)};
    for (int slot = 0; slot < k * v; ++slot) {
        std::vector<std::vector<int>> nj;
        for (const auto& j : jets) {
            int used = 0;
            for (int x : j) used += x;
            for (int e = 0; used + e <= n; ++e) {
                auto t = j;
                t[slot] = e;
                nj.push_back(t);
            }
        }
        jets = std::move(nj);
    }
    auto monos = window_monomials(eps.P, D);
    for (const auto& j : jets)
        for (const auto& m : monos)
            for (size_t c = 0; c < eps.r; ++c) out.push_back({j, m, c});
    return out;
}

template <class K>
struct JetCechComplex {
    Stratification<K> eps;
    int k_max = 1;
    int window = 16;
    std::vector<std::vector<CechKey>> dom;      // basis per level 0..k_max
    std::vector<std::vector<CechKey>> cod;      // output support per level
    std::vector<Matrix<K>> d;                   // d^k : level k -> level k+1
};

template <class K>
JetCechComplex<K> build_jet_cech(const Stratification<K>& eps, int k_max, int D) {
    {
        auto rep = cocycle_check(eps);
        if (!rep.pass)
            throw CocycleFailed("stratification fails the cocycle identity at degree " +
                                std::to_string(rep.fail_degree));
    }
    JetCechComplex<K> cx;
    cx.eps = eps;
    cx.k_max = k_max;
    cx.window = D;
    for (int k = 0; k <= k_max; ++k)
        cx.dom.push_back(cech_basis(eps, k, D));
    for (int k = 0; k < k_max; ++k) {
        std::vector<CechElt<K>> images;
        std::map<CechKey, size_t> codpos;
        for (const auto& [jet, mono, comp] : cx.dom[k]) {
            auto img = cech_differential_of(eps, k, jet, mono, comp);
            for (const auto& [key, val] : img) codpos.emplace(key, 0);
            images.push_back(std::move(img));
        }
        size_t idx = 0;
        std::vector<CechKey> cod;
        for (auto& [key, val] : codpos) {
            cod.push_back(key);
            val = idx++;
        }
        Matrix<K> M(cod.size(), images.size());
        for (size_t j = 0; j < images.size(); ++j)
            for (const auto& [key, val] : images[j]) M(codpos.at(key), j) = val;
        cx.cod.push_back(std::move(cod));
        cx.d.push_back(std::move(M));
    }
    // verify d∘d = 0 on every domain basis vector
    for (int k = 0; k + 1 < k_max; ++k) {
        for (const auto& [jet, mono, comp] : cx.dom[k]) {
            auto img = cech_differential_of(eps, k, jet, mono, comp);
            CechElt<K> twice;
            for (const auto& [key, val] : img) {
                const auto& [j2, m2, c2] = key;
                auto img2 = cech_differential_of(eps, k + 1, j2, m2, c2);
                for (const auto& [key2, val2] : img2)
                    detail::cech_add(twice, key2, K(val * val2));
            }
            if (!twice.empty())
                throw CocycleFailed("d∘d ≠ 0 at simplicial degree " +
                                    std::to_string(k));
        }
    }
    return cx;
}

// H^0 of the stratified module: kernel of d^0 on the truncated window.
template <class K>
std::pair<size_t, std::vector<std::vector<K>>> h0_strat_at(
    const Stratification<K>& eps, int D) {
    auto cx = build_jet_cech(eps, 1, D);
    auto s = solve_linear(cx.d[0], Matrix<K>());
    return {s.kernel.size(), s.kernel};
}

template <class K>
size_t h0_strat(const Stratification<K>& eps, TruncationLevel t = {}) {
    std::optional<size_t> prev;
    int D = t.degree;
    for (int lvl = 0; lvl < t.max_levels; ++lvl, D += t.step) {
        auto [h, kern] = h0_strat_at(eps, D);
        if (prev && *prev == h) return h;
        prev = h;
    }
    throw NotStabilized("jet H^0 dimension did not stabilize");
}

// H^0 and H^1 of the jet complex at one window.  H^1 uses only kernel
// vectors supported in the window interior, since boundary classes may
// only bound from outside the truncation.
template <class K>
std::pair<size_t, size_t> jet_cohomology_at(const Stratification<K>& eps, int D,
                                            int D_int) {
    auto cx = build_jet_cech(eps, 2, D);
    auto s0 = solve_linear(cx.d[0], Matrix<K>());
    size_t h0 = s0.kernel.size();
    auto s1 = solve_linear(cx.d[1], Matrix<K>());
    // kernel of d^1 as a matrix K1 (columns = kernel vectors)
    const auto& dom1 = cx.dom[1];
    Matrix<K> K1(dom1.size(), s1.kernel.size());
    for (size_t j = 0; j < s1.kernel.size(); ++j)
        for (size_t i = 0; i < dom1.size(); ++i) K1(i, j) = s1.kernel[j][i];
    // boundary projector rows: x-monomials of size > D_int
    std::vector<size_t> boundary;
    for (size_t i = 0; i < dom1.size(); ++i)
        if (eps.P->mono_size(std::get<1>(dom1[i])) > D_int) boundary.push_back(i);
    Matrix<K> B(boundary.size(), K1.cols());
    for (size_t bi = 0; bi < boundary.size(); ++bi)
        for (size_t j = 0; j < K1.cols(); ++j) B(bi, j) = K1(boundary[bi], j);
    auto sb = solve_linear(B, Matrix<K>());
    // interior kernel vectors: K1 * (kernel of B)
    Matrix<K> Z(K1.cols(), sb.kernel.size());
    for (size_t j = 0; j < sb.kernel.size(); ++j)
        for (size_t i = 0; i < K1.cols(); ++i) Z(i, j) = sb.kernel[j][i];
    Matrix<K> K1int = K1 * Z;
    // image of d^0 on the level-1 basis, extended by any image keys that
    // fall outside the level-1 window (kernel vectors are zero there)
    std::map<CechKey, size_t> pos1;
    for (size_t i = 0; i < dom1.size(); ++i) pos1.emplace(dom1[i], i);
    std::vector<CechElt<K>> images0;
    for (const auto& [jet, mono, comp] : cx.dom[0]) {
        auto img = cech_differential_of(eps, 0, jet, mono, comp);
        for (const auto& [key, val] : img) pos1.emplace(key, pos1.size());
        images0.push_back(std::move(img));
    }
    Matrix<K> I0(pos1.size(), cx.dom[0].size());
    for (size_t j = 0; j < images0.size(); ++j)
        for (const auto& [key, val] : images0[j]) I0(pos1.at(key), j) = val;
    Matrix<K> K1ext(pos1.size(), K1int.cols());
    for (size_t i = 0; i < dom1.size(); ++i)
        for (size_t j = 0; j < K1int.cols(); ++j) K1ext(i, j) = K1int(i, j);
    size_t h1 = rank(I0.hcat(K1ext)) - rank(I0);
    return {h0, h1};
}

template <class K>
struct ComparisonRow {
    int jet_order;
    std::vector<size_t> jet_dims;
    std::vector<size_t> dr_dims;
    bool equal0, equal1;
};

template <class K>
std::vector<ComparisonRow<K>> compare_with_derham(const Connection<K>& c,
                                                  int n_lo, int n_hi,
                                                  TruncationLevel t = {}) {
    auto dr = cohomology_settled(c, t);
    std::vector<ComparisonRow<K>> rows;
    for (int n = n_lo; n <= n_hi; ++n) {
        auto eps = taylor_stratification(c, n);
        std::optional<std::pair<size_t, size_t>> prev;
        std::pair<size_t, size_t> got{0, 0};
        bool ok = false;
        int D = t.degree;
        for (int lvl = 0; lvl < t.max_levels; ++lvl, D += t.step) {
            got = jet_cohomology_at(eps, D, D / 2);
            if (prev && *prev == got) {
                ok = true;
                break;
            }
            prev = got;
        }
        if (!ok) throw NotStabilized("jet cohomology did not stabilize");
        ComparisonRow<K> row;
        row.jet_order = n;
        row.jet_dims = {got.first, got.second};
        row.dr_dims = dr.dims;
        row.equal0 = got.first == dr.dims[0];
        row.equal1 = got.second == dr.dims[1];
        rows.push_back(row);
    }
    return rows;
}

}  // namespace rigid

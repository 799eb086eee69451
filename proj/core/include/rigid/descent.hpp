#pragma once

#include "rigid/functor.hpp"

namespace rigid {

// ---------------------------------------------------------------------------
// Tensor powers of a finite free cover through the finiteness witness
// ---------------------------------------------------------------------------

// Multiplication table of B over A in the witness basis: b_i b_j = Σ_k sc[i][j][k] b_k,
// plus the coordinates of 1 ∈ B.  Everything downstream works with finite
// matrices of A-coefficients; the tensor powers B⊗B, B⊗B⊗B are never formed
// symbolically.
template <class K>
struct TensorAlg {
    RingMap<K> phi;
    size_t s = 0;                                         // witness rank [B:A]
    std::vector<std::vector<std::vector<Fringe<K>>>> sc;  // structure constants
    std::vector<Fringe<K>> one;                           // coords of 1 in the basis
};

template <class K>
TensorAlg<K> tensor_algebra(const RingMap<K>& phi) {
    if (!phi.finite()) throw Error("tensor_algebra needs a finiteness witness");
    TensorAlg<K> T;
    T.phi = phi;
    T.s = phi.basis.size();
    T.sc.resize(T.s);
    for (size_t i = 0; i < T.s; ++i) {
        T.sc[i].resize(T.s);
        for (size_t j = 0; j < T.s; ++j)
            T.sc[i][j] = decompose(phi, Fringe<K>(phi.basis[i] * phi.basis[j]));
    }
    T.one = decompose(phi, fr_one(phi.B));
    return T;
}

// An element of B ⊗_A B: a(u, v) is the A-coefficient of b_u ⊗ b_v.
template <class K>
using Tensor2 = Matrix<Fringe<K>>;

// An element of B ⊗_A B ⊗_A B, indexed by the first slot.
template <class K>
using Tensor3 = std::vector<Matrix<Fringe<K>>>;

template <class K>
Tensor2<K> t2_zero(const TensorAlg<K>& T) {
    Tensor2<K> z(T.s, T.s);
    for (size_t u = 0; u < T.s; ++u)
        for (size_t v = 0; v < T.s; ++v) z(u, v) = fringe_zero(T.phi.A);
    return z;
}

template <class K>
Tensor2<K> t2_one(const TensorAlg<K>& T) {
    Tensor2<K> e = t2_zero(T);
    for (size_t u = 0; u < T.s; ++u)
        for (size_t v = 0; v < T.s; ++v) e(u, v) = T.one[u] * T.one[v];
    return e;
}

template <class K>
Tensor2<K> t2_mul(const TensorAlg<K>& T, const Tensor2<K>& a, const Tensor2<K>& b) {
    Tensor2<K> r = t2_zero(T);
    for (size_t u1 = 0; u1 < T.s; ++u1)
        for (size_t v1 = 0; v1 < T.s; ++v1) {
            if (a(u1, v1).is_zero_elt()) continue;
            for (size_t u2 = 0; u2 < T.s; ++u2)
                for (size_t v2 = 0; v2 < T.s; ++v2) {
                    if (b(u2, v2).is_zero_elt()) continue;
                    auto c = a(u1, v1) * b(u2, v2);
                    for (size_t u = 0; u < T.s; ++u)
                        for (size_t v = 0; v < T.s; ++v) {
                            if (T.sc[u1][u2][u].is_zero_elt() ||
                                T.sc[v1][v2][v].is_zero_elt())
                                continue;
                            r(u, v) = r(u, v) +
                                      Fringe<K>(c * T.sc[u1][u2][u]) *
                                          T.sc[v1][v2][v];
                        }
                }
        }
    return r;
}

template <class K>
Tensor3<K> t3_zero(const TensorAlg<K>& T) {
    return Tensor3<K>(T.s, t2_zero(T));
}

// The three coface pullbacks B⊗B → B⊗B⊗B: pij places the two tensor factors
// in cube slots i and j and inserts 1 in the remaining slot.
template <class K>
Tensor3<K> t3_pullback(const TensorAlg<K>& T, const Tensor2<K>& a,
                       int si, int sj) {
    Tensor3<K> r = t3_zero(T);
    int missing = 3 - si - sj;  // slots are 0,1,2
    for (size_t p = 0; p < T.s; ++p)
        for (size_t q = 0; q < T.s; ++q) {
            if (a(p, q).is_zero_elt()) continue;
            for (size_t w = 0; w < T.s; ++w) {
                if (T.one[w].is_zero_elt()) continue;
                size_t idx[3];
                idx[si] = p;
                idx[sj] = q;
                idx[missing] = w;
                r[idx[0]](idx[1], idx[2]) =
                    r[idx[0]](idx[1], idx[2]) + Fringe<K>(a(p, q) * T.one[w]);
            }
        }
    return r;
}

template <class K>
Tensor3<K> t3_mul(const TensorAlg<K>& T, const Tensor3<K>& a, const Tensor3<K>& b) {
    Tensor3<K> r = t3_zero(T);
    for (size_t u1 = 0; u1 < T.s; ++u1)
        for (size_t v1 = 0; v1 < T.s; ++v1)
            for (size_t w1 = 0; w1 < T.s; ++w1) {
                if (a[u1](v1, w1).is_zero_elt()) continue;
                for (size_t u2 = 0; u2 < T.s; ++u2)
                    for (size_t v2 = 0; v2 < T.s; ++v2)
                        for (size_t w2 = 0; w2 < T.s; ++w2) {
                            if (b[u2](v2, w2).is_zero_elt()) continue;
                            auto c = a[u1](v1, w1) * b[u2](v2, w2);
                            for (size_t u = 0; u < T.s; ++u) {
                                if (T.sc[u1][u2][u].is_zero_elt()) continue;
                                auto cu = Fringe<K>(c * T.sc[u1][u2][u]);
                                for (size_t v = 0; v < T.s; ++v) {
                                    if (T.sc[v1][v2][v].is_zero_elt()) continue;
                                    auto cv = Fringe<K>(cu * T.sc[v1][v2][v]);
                                    for (size_t w = 0; w < T.s; ++w) {
                                        if (T.sc[w1][w2][w].is_zero_elt())
                                            continue;
                                        r[u](v, w) = r[u](v, w) +
                                                     cv * T.sc[w1][w2][w];
                                    }
                                }
                            }
                        }
            }
    return r;
}

// ---------------------------------------------------------------------------
// Amitsur complex
// ---------------------------------------------------------------------------

namespace detail {

// Assemble an A-linear map given by a matrix of A-ring entries into an exact
// K-matrix over the monomial window: one domain column per (column, window
// monomial), codomain rows covering the full support of all images so that
// kernels are exact rather than truncated.
template <class K>
struct AssembledMap {
    std::vector<Mono> dom;
    std::map<Mono, size_t> codpos;
    size_t rows_per_mono = 0;  // matrix row count of the Fringe-matrix
    Matrix<K> mat;
};

template <class K>
AssembledMap<K> assemble_fringe_map(const Matrix<Fringe<K>>& F,
                                    const PresPtr<K>& A, int window,
                                    const std::vector<Mono>* extra_rows = nullptr) {
    AssembledMap<K> out;
    out.dom = window_monomials(A, window);
    out.rows_per_mono = F.rows();
    std::vector<std::vector<Fringe<K>>> images;  // per (col, mono): F.rows() entries
    images.reserve(F.cols() * out.dom.size());
    for (size_t j = 0; j < F.cols(); ++j)
        for (const auto& m : out.dom) {
            auto mf = fr_monomial(A, m, scalar_one(A->proto));
            std::vector<Fringe<K>> img;
            img.reserve(F.rows());
            for (size_t i = 0; i < F.rows(); ++i) {
                auto g = F(i, j) * mf;
                if (g.tail_dropped)
                    throw Error("truncation overflow while assembling a module map");
                img.push_back(std::move(g));
            }
            images.push_back(std::move(img));
        }
    for (const auto& m : out.dom) out.codpos.emplace(m, 0);
    for (const auto& img : images)
        for (const auto& g : img)
            for (const auto& [k, v] : g.c) out.codpos.emplace(k, 0);
    if (extra_rows)
        for (const auto& m : *extra_rows) out.codpos.emplace(m, 0);
    size_t idx = 0;
    for (auto& [k, v] : out.codpos) v = idx++;
    out.mat = Matrix<K>(out.codpos.size() * F.rows(), images.size());
    for (size_t j = 0; j < images.size(); ++j)
        for (size_t i = 0; i < F.rows(); ++i)
            for (const auto& [k, v] : images[j][i].c)
                out.mat(out.codpos.at(k) * F.rows() + i, j) = v;
    return out;
}

}  // namespace detail

template <class K>
struct AmitsurReport {
    size_t length = 0;             // number of differentials built
    std::vector<size_t> dims;      // truncated dim of each term C^0..C^L
    std::vector<size_t> h;         // cohomology dims in degrees 0..L-1
    size_t window_size = 0;        // |W|, the monomial window used
    bool h0_is_module = false;     // ker d^0 coincides with the image of M
};

namespace detail {

// The Amitsur coface e_i in degree k, as an A-linear matrix from
// M ⊗ B^⊗(k+1) to M ⊗ B^⊗(k+2): insert 1 into tensor slot i.
// Index layout: (tuple (j_0..j_k), component c) -> flat = tup * r + c, with
// slot 0 fastest in the tuple.
template <class K>
Matrix<Fringe<K>> amitsur_coface(const TensorAlg<K>& T, size_t r, int k, int i) {
    size_t s = T.s;
    size_t dcols = r, drows = r;
    for (int t = 0; t <= k; ++t) dcols *= s;
    drows = dcols * s;
    Matrix<Fringe<K>> F(drows, dcols);
    for (size_t a = 0; a < drows; ++a)
        for (size_t b = 0; b < dcols; ++b) F(a, b) = fringe_zero(T.phi.A);
    size_t ntup = dcols / r;
    for (size_t tup = 0; tup < ntup; ++tup) {
        // insert u at slot i: low slots (< i) keep their place, the rest shift
        size_t lowbase = 1;
        for (int t = 0; t < i; ++t) lowbase *= s;
        size_t low = tup % lowbase, high = tup / lowbase;
        for (size_t u = 0; u < s; ++u) {
            if (T.one[u].is_zero_elt()) continue;
            size_t rtup = low + lowbase * (u + s * high);
            for (size_t c = 0; c < r; ++c)
                F(rtup * r + c, tup * r + c) =
                    F(rtup * r + c, tup * r + c) + T.one[u];
        }
    }
    return F;
}

template <class K>
Matrix<Fringe<K>> amitsur_differential(const TensorAlg<K>& T, size_t r, int k) {
    auto d = amitsur_coface(T, r, k, 0);
    for (int i = 1; i <= k + 1; ++i) {
        auto e = amitsur_coface(T, r, k, i);
        if (i % 2 == 0)
            d = d + e;
        else
            d = d - e;
    }
    return d;
}

}  // namespace detail

// The Amitsur complex of the free A-module M = A^r along a finite free cover:
//   C^k = M ⊗_A B^⊗(k+1),  d^k = Σ_i (-1)^i (insert 1 in slot i).
// Exactness is measured exactly at the monomial window: images never drop
// terms because the codomain rows cover their full support.
template <class K>
AmitsurReport<K> amitsur_complex(size_t r, const RingMap<K>& phi, int length,
                                 int window = 4) {
    if (!phi.finite() || phi.basis.empty())
        throw NotFaithfullyFlat("cover has a rank-zero fiber");
    auto T = tensor_algebra(phi);
    const auto& A = phi.A;
    AmitsurReport<K> rep;
    rep.length = static_cast<size_t>(length);
    auto W = window_monomials(A, window);
    rep.window_size = W.size();

    // degree-k differentials as Fringe matrices, and the augmentation M -> C^0
    std::vector<Matrix<Fringe<K>>> d;
    for (int k = 0; k < length; ++k)
        d.push_back(detail::amitsur_differential(T, r, k));
    Matrix<Fringe<K>> aug(r * T.s, r);
    for (size_t a = 0; a < aug.rows(); ++a)
        for (size_t b = 0; b < aug.cols(); ++b) aug(a, b) = fringe_zero(A);
    for (size_t u = 0; u < T.s; ++u)
        for (size_t c = 0; c < r; ++c) aug(u * r + c, c) = T.one[u];

    // cochain identity d∘d = 0, checked exactly on the Fringe matrices
    for (int k = 0; k + 1 < length; ++k)
        if (!(d[k + 1] * d[k]).all_zero())
            throw Error("Amitsur differentials do not compose to zero");

    rep.dims.push_back(r * W.size());
    if (length > 0) rep.dims.push_back(d[0].cols() * W.size());
    for (int k = 0; k < length; ++k) rep.dims.push_back(d[k].rows() * W.size());

    std::optional<detail::AssembledMap<K>> prev;  // assembled d^{k-1}
    for (int k = 0; k < length; ++k) {
        auto cur = detail::assemble_fringe_map(d[k], A, window);
        auto kern = kernel_basis(cur.mat);
        if (k == 0) {
            // H^0: kernel of d^0 against the augmentation image, both written
            // in the C^0 window coordinates (column index = block * |W| + mono)
            rep.h.push_back(kern.size());
            const size_t nper = cur.dom.size(), dom0 = cur.mat.cols();
            std::map<Mono, size_t> dpos;
            for (size_t i = 0; i < cur.dom.size(); ++i)
                dpos.emplace(cur.dom[i], i);
            std::vector<std::vector<K>> acols;
            for (size_t c = 0; c < r; ++c)
                for (const auto& m : cur.dom) {
                    std::vector<K> col(dom0, K());
                    bool inside = true;
                    for (size_t u = 0; u < T.s && inside; ++u) {
                        auto g = T.one[u] *
                                 fr_monomial(A, m, scalar_one(A->proto));
                        for (const auto& [mk, mv] : g.c) {
                            auto it = dpos.find(mk);
                            if (it == dpos.end()) { inside = false; break; }
                            col[(u * r + c) * nper + it->second] = mv;
                        }
                    }
                    if (inside) acols.push_back(std::move(col));
                }
            Matrix<K> both(dom0, acols.size() + kern.size());
            for (size_t j = 0; j < acols.size(); ++j)
                for (size_t i = 0; i < dom0; ++i) both(i, j) = acols[j][i];
            for (size_t j = 0; j < kern.size(); ++j)
                for (size_t i = 0; i < dom0; ++i)
                    both(i, acols.size() + j) = kern[j][i];
            Matrix<K> augm(dom0, acols.size());
            for (size_t j = 0; j < acols.size(); ++j)
                for (size_t i = 0; i < dom0; ++i) augm(i, j) = acols[j][i];
            size_t ra = rank(augm);
            rep.h0_is_module = (ra == kern.size() && rank(both) == ra);
        } else {
            // exactness at degree k: ker d^k against im d^{k-1}
            // pad kernel vectors of d^k (domain window coords) into the
            // codomain row space of d^{k-1}
            const auto& pm = *prev;
            size_t rows = pm.mat.rows();
            Matrix<K> stack(rows, pm.mat.cols() + kern.size());
            for (size_t i = 0; i < rows; ++i)
                for (size_t j = 0; j < pm.mat.cols(); ++j)
                    stack(i, j) = pm.mat(i, j);
            // kernel coordinates: (col block, window mono) with the same
            // domain ordering as cur; map into prev's codomain rows
            size_t nper = cur.dom.size();
            for (size_t kj = 0; kj < kern.size(); ++kj)
                for (size_t idx = 0; idx < kern[kj].size(); ++idx) {
                    if (is_zero(kern[kj][idx])) continue;
                    size_t blk = idx / nper, mpos = idx % nper;
                    const Mono& m = cur.dom[mpos];
                    auto it = pm.codpos.find(m);
                    if (it == pm.codpos.end())
                        throw Error("window mismatch between Amitsur degrees");
                    stack(it->second * pm.rows_per_mono + blk,
                          pm.mat.cols() + kj) = kern[kj][idx];
                }
            size_t rim = rank(pm.mat);
            rep.h.push_back(rank(stack) - rim);
        }
        prev = std::move(cur);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Descent data
// ---------------------------------------------------------------------------

// A finite free module M = B^rank with a gluing isomorphism over B ⊗_A B,
// given as a rank×rank matrix of tensor-square elements, and optionally a
// connection on M.
template <class K>
struct DescentDatum {
    RingMap<K> phi;  // the cover A -> B with finiteness witness
    size_t rank = 0;
    std::vector<std::vector<Tensor2<K>>> glue;  // rank×rank over B⊗B
    std::optional<Connection<K>> conn;          // connection on M over B
};

template <class K>
DescentDatum<K> canonical_datum(const RingMap<K>& phi, size_t rank) {
    auto T = tensor_algebra(phi);
    DescentDatum<K> D;
    D.phi = phi;
    D.rank = rank;
    D.glue.assign(rank, std::vector<Tensor2<K>>(rank, t2_zero(T)));
    for (size_t c = 0; c < rank; ++c) D.glue[c][c] = t2_one(T);
    return D;
}

struct CocycleCheck {
    bool pass = true;
    size_t row = 0, col = 0;    // offending matrix entry
    size_t u = 0, v = 0, w = 0; // offending tensor-cube coordinate
};

// Verifies p13*(glue) = p12*(glue) ∘ p23*(glue) over B⊗B⊗B by explicit basis
// expansion.  Slot conventions: p12 -> slots (0,1), p13 -> (0,2), p23 -> (1,2).
template <class K>
CocycleCheck check_cocycle(const DescentDatum<K>& D) {
    auto T = tensor_algebra(D.phi);
    const size_t r = D.rank;
    std::vector<std::vector<Tensor3<K>>> lhs(r, std::vector<Tensor3<K>>(r)),
        rhs(r, std::vector<Tensor3<K>>(r, t3_zero(T)));
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
            lhs[i][j] = t3_pullback(T, D.glue[i][j], 0, 2);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j) {
            auto a = t3_pullback(T, D.glue[i][j], 0, 1);
            for (size_t k = 0; k < r; ++k) {
                auto b = t3_pullback(T, D.glue[j][k], 1, 2);
                auto p = t3_mul(T, a, b);
                for (size_t u = 0; u < T.s; ++u)
                    for (size_t v = 0; v < T.s; ++v)
                        for (size_t w = 0; w < T.s; ++w)
                            rhs[i][k][u](v, w) = rhs[i][k][u](v, w) + p[u](v, w);
            }
        }
    CocycleCheck out;
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
            for (size_t u = 0; u < T.s; ++u)
                for (size_t v = 0; v < T.s; ++v)
                    for (size_t w = 0; w < T.s; ++w)
                        if (!(lhs[i][j][u](v, w) == rhs[i][j][u](v, w))) {
                            out.pass = false;
                            out.row = i; out.col = j;
                            out.u = u; out.v = v; out.w = w;
                            return out;
                        }
    return out;
}

template <class K>
struct DescendResult {
    size_t rank = 0;
    // A-basis of the descended module, as elements of M = B^rank
    std::vector<std::vector<Fringe<K>>> basis;
    std::optional<Connection<K>> conn;  // descended connection over A
};

namespace detail {

// the image of an A-window monomial inside B
template <class K>
Fringe<K> lift_monomial(const RingMap<K>& phi, const Mono& m) {
    return apply_map(phi, fr_monomial(phi.A, m, scalar_one(phi.A->proto)));
}

// coordinates of a B^rank element in the (component, B-monomial) index space
template <class K>
void note_support(const std::vector<Fringe<K>>& v, std::map<Mono, size_t>& pos) {
    for (const auto& g : v)
        for (const auto& [k, x] : g.c) pos.emplace(k, 0);
}

template <class K>
void fill_column(const std::vector<Fringe<K>>& v,
                 const std::map<Mono, size_t>& pos, size_t r,
                 Matrix<K>& A, size_t col) {
    for (size_t c = 0; c < r; ++c)
        for (const auto& [k, x] : v[c].c) A(pos.at(k) * r + c, col) = x;
}

}  // namespace detail

// Effective descent: the equalizer { m ∈ M : glue·ι₂(m) = ι₁(m) }, computed
// as an exact kernel at the monomial window, then regrouped into an A-basis.
// When the datum carries a connection it is restricted to the equalizer.
template <class K>
DescendResult<K> descend(const DescentDatum<K>& D, int window = 4) {
    auto cc = check_cocycle(D);
    if (!cc.pass)
        throw CocycleFailed("descent datum fails the cocycle identity");
    auto T = tensor_algebra(D.phi);
    const auto& A = D.phi.A;
    const size_t r = D.rank, s = T.s;
    auto W = window_monomials(A, window);

    // Θ(m) = glue·ι₂(m) − ι₁(m), columns indexed by (component, basis j, mono)
    struct Col { size_t c, j; Mono m; };
    std::vector<Col> dom;
    std::vector<std::vector<Tensor2<K>>> images;  // per column: r tensor entries
    for (size_t c = 0; c < r; ++c)
        for (size_t j = 0; j < s; ++j)
            for (const auto& m : W) {
                auto am = fr_monomial(A, m, scalar_one(A->proto));
                Tensor2<K> i1 = t2_zero(T), i2 = t2_zero(T);
                for (size_t u = 0; u < s; ++u) {
                    if (T.one[u].is_zero_elt()) continue;
                    i1(j, u) = i1(j, u) + Fringe<K>(T.one[u] * am);
                    i2(u, j) = i2(u, j) + Fringe<K>(T.one[u] * am);
                }
                std::vector<Tensor2<K>> img(r, t2_zero(T));
                for (size_t row = 0; row < r; ++row) {
                    img[row] = t2_mul(T, D.glue[row][c], i2);
                    if (row == c)
                        for (size_t u = 0; u < s; ++u)
                            for (size_t v = 0; v < s; ++v)
                                img[row](u, v) = img[row](u, v) - i1(u, v);
                }
                dom.push_back({c, j, m});
                images.push_back(std::move(img));
            }

    // assemble over the full support of the images: exact kernel
    std::map<Mono, size_t> codpos;
    for (const auto& img : images)
        for (const auto& t2 : img)
            for (size_t u = 0; u < s; ++u)
                for (size_t v = 0; v < s; ++v)
                    for (const auto& [k, x] : t2(u, v).c) codpos.emplace(k, 0);
    size_t idx = 0;
    for (auto& [k, v] : codpos) v = idx++;
    const size_t cells = r * s * s;
    Matrix<K> Th(codpos.size() * cells, images.size());
    for (size_t col = 0; col < images.size(); ++col)
        for (size_t row = 0; row < r; ++row)
            for (size_t u = 0; u < s; ++u)
                for (size_t v = 0; v < s; ++v)
                    for (const auto& [k, x] : images[col][row](u, v).c)
                        Th(codpos.at(k) * cells + (row * s + u) * s + v, col) = x;
    auto kern = kernel_basis(Th);

    // regroup the kernel into an A-basis: greedily pick kernel elements not in
    // the A-span (window shifts) of the ones already picked
    auto elem_of = [&](const std::vector<K>& vec) {
        std::vector<Fringe<K>> m(r, fringe_zero(D.phi.B));
        for (size_t i = 0; i < vec.size(); ++i) {
            if (is_zero(vec[i])) continue;
            const auto& cd = dom[i];
            m[cd.c] = m[cd.c] +
                      vec[i] * Fringe<K>(D.phi.basis[cd.j] *
                                         detail::lift_monomial(D.phi, cd.m));
        }
        return m;
    };
    std::vector<std::vector<Fringe<K>>> picked;
    {
        // sort kernel elements by the largest monomial they touch
        std::vector<std::pair<long, size_t>> order;
        for (size_t i = 0; i < kern.size(); ++i) {
            long sz = 0;
            for (size_t j = 0; j < kern[i].size(); ++j)
                if (!is_zero(kern[i][j])) sz = std::max(sz, A->mono_size(dom[j].m));
            order.push_back({sz, i});
        }
        std::sort(order.begin(), order.end());
        std::map<Mono, size_t> pos;
        std::vector<std::vector<Fringe<K>>> spanners;
        std::vector<std::vector<Fringe<K>>> kelems;
        for (const auto& [sz, i] : order) kelems.push_back(elem_of(kern[i]));
        for (const auto& v : kelems) detail::note_support(v, pos);
        // span columns also include window shifts of picked elements
        auto rebuild = [&](const std::vector<std::vector<Fringe<K>>>& extra) {
            size_t np = 0;
            for (auto& [k, v] : pos) v = np++;
            Matrix<K> S(pos.size() * r, spanners.size() + extra.size());
            for (size_t j = 0; j < spanners.size(); ++j)
                detail::fill_column(spanners[j], pos, r, S, j);
            for (size_t j = 0; j < extra.size(); ++j)
                detail::fill_column(extra[j], pos, r, S, spanners.size() + j);
            return S;
        };
        for (const auto& v : kelems) {
            auto S = rebuild({});
            auto Sv = rebuild({v});
            if (spanners.empty() || rank(Sv) > rank(S)) {
                picked.push_back(v);
                for (const auto& m : W) {
                    auto lm = detail::lift_monomial(D.phi, m);
                    std::vector<Fringe<K>> sh(r, fringe_zero(D.phi.B));
                    bool ok = true;
                    for (size_t c = 0; c < r; ++c) {
                        sh[c] = v[c] * lm;
                        if (sh[c].tail_dropped) ok = false;
                    }
                    if (!ok) continue;
                    detail::note_support(sh, pos);
                    spanners.push_back(std::move(sh));
                }
            }
        }
    }
    if (picked.size() * W.size() != kern.size())
        throw RankDeficient(
            "descended kernel does not form a free module at this truncation");

    DescendResult<K> out;
    out.rank = picked.size();
    out.basis = picked;

    if (D.conn && out.rank > 0) {
        if (D.phi.A->dim != 1)
            throw UnsupportedPresentation(
                "descending a connection needs a one-dimensional base");
        auto dphi = partial_derivative(D.phi.slots[0], 0);
        auto dinv = invert_in_ring(dphi);
        if (!dinv) throw NonEtale("cover is ramified: dφ(x) is not invertible");
        // ∇(v_i) in M, then re-expand over { window monomial × v_j }
        std::vector<std::vector<Fringe<K>>> targets;
        for (const auto& v : picked) {
            std::vector<Fringe<K>> nab(r, fringe_zero(D.phi.B));
            for (size_t row = 0; row < r; ++row) {
                nab[row] = Fringe<K>(partial_derivative(v[row], 0) * (*dinv));
                for (size_t c = 0; c < r; ++c)
                    nab[row] = nab[row] +
                               Fringe<K>(D.conn->N[0](row, c) * (*dinv)) * v[c];
            }
            targets.push_back(std::move(nab));
        }
        auto Wd = window_monomials(A, window + 2);
        std::vector<std::vector<Fringe<K>>> cols;
        for (size_t j = 0; j < picked.size(); ++j)
            for (const auto& m : Wd) {
                auto lm = detail::lift_monomial(D.phi, m);
                std::vector<Fringe<K>> sh(r, fringe_zero(D.phi.B));
                for (size_t c = 0; c < r; ++c) sh[c] = picked[j][c] * lm;
                cols.push_back(std::move(sh));
            }
        std::map<Mono, size_t> pos;
        for (const auto& v : cols) detail::note_support(v, pos);
        for (const auto& v : targets) detail::note_support(v, pos);
        size_t np = 0;
        for (auto& [k, x] : pos) x = np++;
        Matrix<K> S(pos.size() * r, cols.size()), b(pos.size() * r, targets.size());
        for (size_t j = 0; j < cols.size(); ++j)
            detail::fill_column(cols[j], pos, r, S, j);
        for (size_t j = 0; j < targets.size(); ++j)
            detail::fill_column(targets[j], pos, r, b, j);
        auto sol = solve_linear(S, b);
        if (!sol.particular)
            throw RankDeficient(
                "connection does not restrict to the descended module "
                "at this truncation");
        Connection<K> cn = trivial_connection(A, out.rank);
        for (size_t i = 0; i < targets.size(); ++i)
            for (size_t col = 0; col < cols.size(); ++col) {
                const K& x = (*sol.particular)(col, i);
                if (is_zero(x)) continue;
                size_t j = col / Wd.size();
                const Mono& m = Wd[col % Wd.size()];
                cn.N[0](j, i) = cn.N[0](j, i) +
                                x * fr_monomial(A, m, scalar_one(A->proto));
            }
        out.conn = std::move(cn);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Towers, the Roos complex, and Mittag-Leffler
// ---------------------------------------------------------------------------

// A tower M_0 ← M_1 ← … ← M_{N-1} of finite-dimensional K-spaces; maps[n] is
// the transition M_{n+1} → M_n.
template <class K>
struct Tower {
    std::vector<size_t> dims;
    std::vector<Matrix<K>> maps;

    size_t depth() const { return dims.size(); }
};

template <class K>
void validate_tower(const Tower<K>& T) {
    if (T.dims.size() != T.maps.size() + 1)
        throw Error("tower: need exactly one transition map per step");
    for (size_t n = 0; n < T.maps.size(); ++n)
        if (T.maps[n].rows() != T.dims[n] || T.maps[n].cols() != T.dims[n + 1])
            throw Error("tower: transition map shape mismatch");
}

struct RoosReport {
    size_t depth = 0;
    size_t lim = 0;   // dimension of the limit detected at the depth cap
    size_t lim1 = 0;  // cokernel dimension of the Roos differential
};

// The two-term complex ∏ M_n → ∏ M_n with d({s_n}) = {s_n − T_n s_{n+1}}.
// At the depth cap the kernel consists of the compatible finite sequences;
// the limit is read off as the span such sequences cut out at the bottom
// level, which stabilizes to lim as the depth grows.
template <class K>
RoosReport roos_complex(const Tower<K>& T, const K& like = K()) {
    validate_tower(T);
    const size_t N = T.depth();
    if (N < 2) throw Error("roos_complex needs depth >= 2");
    size_t domdim = 0, coddim = 0;
    std::vector<size_t> doff(N, 0), coff(N, 0);
    for (size_t n = 0; n < N; ++n) {
        doff[n] = domdim;
        domdim += T.dims[n];
    }
    for (size_t n = 0; n + 1 < N; ++n) {
        coff[n] = coddim;
        coddim += T.dims[n];
    }
    Matrix<K> d(coddim, domdim);
    for (size_t n = 0; n + 1 < N; ++n) {
        for (size_t i = 0; i < T.dims[n]; ++i)
            d(coff[n] + i, doff[n] + i) = scalar_one(like);
        for (size_t i = 0; i < T.dims[n]; ++i)
            for (size_t j = 0; j < T.dims[n + 1]; ++j)
                d(coff[n] + i, doff[n + 1] + j) =
                    d(coff[n] + i, doff[n + 1] + j) - T.maps[n](i, j);
    }
    auto sol = solve_linear(d, Matrix<K>());
    RoosReport rep;
    rep.depth = N;
    rep.lim1 = coddim - sol.rank;
    // project the compatible sequences to the bottom level
    Matrix<K> bottom(T.dims[0], sol.kernel.size());
    for (size_t j = 0; j < sol.kernel.size(); ++j)
        for (size_t i = 0; i < T.dims[0]; ++i)
            bottom(i, j) = sol.kernel[j][doff[0] + i];
    rep.lim = rank(bottom);
    return rep;
}

// True when, for every level, the chain of images from higher levels becomes
// stationary before the depth cap runs out.
template <class K>
bool mittag_leffler_check(const Tower<K>& T) {
    validate_tower(T);
    const size_t N = T.depth();
    for (size_t n = 0; n + 2 < N; ++n) {
        std::vector<size_t> ranks;
        Matrix<K> comp = T.maps[n];
        ranks.push_back(rank(comp));
        for (size_t k = n + 1; k + 1 < N; ++k) {
            comp = comp * T.maps[k];
            ranks.push_back(rank(comp));
        }
        if (ranks.size() >= 2 && ranks[ranks.size() - 1] != ranks[ranks.size() - 2])
            return false;
    }
    return true;
}

}  // namespace rigid

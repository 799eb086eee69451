#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rigid/derham.hpp"

using namespace rigid;

namespace {

Rational q(long n, long d = 1) { return make_ratio(n, d); }

template <class K>
DeRhamForm<K> section(PresPtr<K> P, const Fringe<K>& f) {
    DeRhamForm<K> s;
    s.degree = 0;
    s.coeff = {f};
    return s;
}

template <class K>
DeRhamForm<K> oneform(PresPtr<K> P, const Fringe<K>& f) {
    DeRhamForm<K> s;
    s.degree = 1;
    s.covector = "dx";
    s.coeff = {f};
    return s;
}

template <class K>
bool forms_equal(const DeRhamForm<K>& a, const DeRhamForm<K>& b) {
    if (a.coeff.size() != b.coeff.size()) return false;
    for (size_t i = 0; i < a.coeff.size(); ++i)
        if (!(a.coeff[i] == b.coeff[i])) return false;
    return true;
}

}  // namespace

TEST_CASE("dr_differential basics") {
    auto P = make_affine<Rational>(1, q(1));
    auto c = trivial_connection(P, 1);
    CHECK(dr_differential(section(P, fr_one(P)), c).coeff[0].is_zero_elt());
    auto x2 = fr_monomial(P, Mono{2}, q(1));
    CHECK(dr_differential(section(P, x2), c).coeff[0] ==
          fr_monomial(P, Mono{1}, q(2)));
    auto T = make_torus<Rational>(1, q(1));
    auto ck = kummer_connection(T, q(2, 3));
    CHECK(dr_differential(section(T, fr_one(T)), ck).coeff[0] ==
          fr_monomial(T, Mono{-1}, q(2, 3)));
}

TEST_CASE("reduce_form finds antiderivatives on the affine line") {
    auto P = make_affine<Rational>(1, q(1));
    auto c = trivial_connection(P, 1);
    auto red = reduce_form(oneform(P, fr_monomial(P, Mono{3}, q(1))), c);
    CHECK(red.reduced.coeff[0].is_zero_elt());
    CHECK(red.exact_part.coeff[0] == fr_monomial(P, Mono{4}, q(1, 4)));
}

TEST_CASE("reduce_form keeps dx/x on the torus") {
    auto P = make_torus<Rational>(1, q(1));
    auto c = trivial_connection(P, 1);
    auto dxx = fr_monomial(P, Mono{-1}, q(1));
    auto red = reduce_form(oneform(P, dxx), c);
    CHECK(red.reduced.coeff[0] == dxx);
    CHECK(red.exact_part.coeff[0].is_zero_elt());
}

TEST_CASE("reduce_form soundness on random forms") {
    std::mt19937 rng(71);
    auto T = make_torus<Rational>(1, q(1));
    auto H = make_hyperelliptic<Rational>({q(0), q(-1), q(0), q(1)}, q(1));
    std::uniform_int_distribution<int> cd(-5, 5), ed(-4, 6);
    auto run = [&](auto P, auto c) {
        for (int t = 0; t < 8; ++t) {
            std::vector<std::pair<Mono, Rational>> terms;
            for (int s = 0; s < 3; ++s) {
                Mono k(P->key_size(), 0);
                k[0] = std::abs(ed(rng));
                if (P->kind == PresKind::Torus) k[0] = ed(rng);
                if (P->kind == PresKind::Hyperelliptic) {
                    k[1] = std::abs(ed(rng)) % 3;
                    k[2] = std::abs(ed(rng)) % 2;
                }
                terms.push_back({k, q(cd(rng))});
            }
            auto w = oneform(P, normal_form(P, terms));
            auto red = reduce_form(w, c);
            // ω = reduced + ∇(exact_part), exactly
            auto back = dr_differential(red.exact_part, c);
            CHECK(w.coeff[0] == red.reduced.coeff[0] + back.coeff[0]);
        }
    };
    run(T, trivial_connection(T, 1));
    run(T, kummer_connection(T, q(1, 2)));
    run(H, trivial_connection(H, 1));
}

TEST_CASE("affine line cohomology is (1, 0)") {
    auto P = make_affine<Rational>(1, q(1));
    auto r = cohomology(trivial_connection(P, 1));
    REQUIRE(r.stabilized);
    CHECK(r.dims == std::vector<size_t>{1, 0});
    CHECK(r.stabilization.front().first == 16);
    // p-adic coefficients give the same answer
    Padic proto(5, 20);
    auto Pp = make_affine<Padic>(1, proto);
    auto rp = cohomology(trivial_connection(Pp, 1));
    REQUIRE(rp.stabilized);
    CHECK(rp.dims == std::vector<size_t>{1, 0});
}

TEST_CASE("torus cohomology: trivial and Kummer") {
    auto P = make_torus<Rational>(1, q(1));
    auto r = cohomology(trivial_connection(P, 1));
    REQUIRE(r.stabilized);
    CHECK(r.dims == std::vector<size_t>{1, 1});
    // the H^1 representative is dx/x
    bool found = false;
    for (const auto& b : r.basis)
        if (b.degree == 1 && b.coeff[0] == fr_monomial(P, Mono{-1}, q(1)))
            found = true;
    CHECK(found);

    Padic proto(5, 20);
    auto Pp = make_torus<Padic>(1, proto);
    auto rk = cohomology(kummer_connection(Pp, Rational(1, 2)));
    REQUIRE(rk.stabilized);
    CHECK(rk.dims == std::vector<size_t>{0, 0});

    auto r1 = cohomology(kummer_connection(Pp, Rational(1)));
    REQUIRE(r1.stabilized);
    CHECK(r1.dims == std::vector<size_t>{1, 1});
}

TEST_CASE("torus dims against an independent truncated-rank oracle") {
    // oracle: over the window x^-D..x^D, the image of d is spanned by
    // k x^(k-1); rank and kernel counted directly from that formula
    for (int D : {20, 24}) {
        size_t rank_oracle = 0, kernel_oracle = 0;
        for (int k = -D; k <= D; ++k) {
            if (k == 0) ++kernel_oracle;
            else ++rank_oracle;
        }
        size_t forms = 2 * D + 1;
        size_t missed = forms - rank_oracle;  // monomials x^j dx not hit
        CHECK(kernel_oracle == 1);
        // x^(k-1) for k != 0 covers every exponent except -1: coker dim 1
        CHECK(missed == 1);
    }
    auto P = make_torus<Rational>(1, q(1));
    auto r = cohomology(trivial_connection(P, 1));
    CHECK(r.dims == std::vector<size_t>{1, 1});
}

TEST_CASE("Kuenneth for split multivariable data") {
    auto P = make_torus<Rational>(2, q(1));
    auto r = cohomology(trivial_connection(P, 1));
    REQUIRE(r.stabilized);
    CHECK(r.dims == std::vector<size_t>{1, 2, 1});
    auto Pa = make_affine<Rational>(2, q(1));
    auto ra = cohomology(trivial_connection(Pa, 1));
    CHECK(ra.dims == std::vector<size_t>{1, 0, 0});
    // a genuinely mixed connection is rejected
    auto mixed = trivial_connection(P, 1);
    mixed.N[0](0, 0) = fr_monomial(P, Mono{0, 1}, q(1));  // N_1 depends on x_2
    CHECK_THROWS_AS(cohomology(mixed), UnsupportedPresentation);
}

TEST_CASE("poincare homotopy identities") {
    Rational like(1);
    // t^r integrates to t^(r+1)/(r+1)
    TowerElement<Rational> m;
    m.levels = {{q(0)}, {q(0), q(0), q(1)}, {q(0), q(0), q(1)}};
    auto I = tower_integrate(m, like);
    REQUIRE(I.levels.size() == 2);
    REQUIRE(I.levels[0].size() == 4);
    CHECK(I.levels[0][3] == q(1, 3));
    // m = 1 everywhere
    TowerElement<Rational> one;
    one.levels = {{q(1)}, {q(1)}, {q(1)}, {q(1)}};
    CHECK(poincare_homotopy_check(one, like).all());
    // random towers of degree <= 8
    std::mt19937 rng(83);
    std::uniform_int_distribution<int> cd(-7, 7);
    for (int t = 0; t < 30; ++t) {
        TowerElement<Rational> r;
        for (int k = 0; k < 5; ++k) {
            std::vector<Rational> lv;
            for (int i = 0; i <= 8; ++i) lv.push_back(q(cd(rng)));
            r.levels.push_back(lv);
        }
        CHECK(poincare_homotopy_check(r, like).all());
    }
    // p-adic towers
    Padic plike(5, 20);
    for (int t = 0; t < 10; ++t) {
        TowerElement<Padic> r;
        for (int k = 0; k < 4; ++k) {
            std::vector<Padic> lv;
            for (int i = 0; i <= 8; ++i)
                lv.push_back(Padic::from_integer(5, 20, cd(rng)));
            r.levels.push_back(lv);
        }
        CHECK(poincare_homotopy_check(r, plike).all());
    }
}

TEST_CASE("cohomology with support at punctures") {
    auto P = make_affine<Rational>(1, q(1));
    auto c = trivial_connection(P, 1);
    // Z = {0}: f = x
    auto s1 = cohomology_with_support(c, {q(0), q(1)});
    CHECK(s1.dims == std::vector<size_t>{0, 0, 1});
    // Z = {0, 1}: f = x^2 - x
    auto s2 = cohomology_with_support(c, {q(0), q(-1), q(1)});
    CHECK(s2.dims == std::vector<size_t>{0, 0, 2});
    // Z = empty
    auto s0 = cohomology_with_support(c, {q(1)});
    CHECK(s0.dims == std::vector<size_t>{0, 0, 0});
    // Euler characteristic consistency with the long exact sequence
    for (const auto& s : {s1, s2}) {
        long chiZ = static_cast<long>(s.dims[0]) - s.dims[1] + s.dims[2];
        // chi(A^1) - chi(U) with U losing one H^0... computed directly:
        // chi_Z = chi_A - chi_U
        long chiA = 1 - 0;
        long chiU = 1 - static_cast<long>(s.dims[2]);
        CHECK(chiZ == chiA - chiU);
    }
}

TEST_CASE("stabilization monotonicity on the torus") {
    auto P = make_torus<Rational>(1, q(1));
    TruncationLevel t;
    t.max_levels = 4;
    auto r = cohomology(trivial_connection(P, 1), t);
    REQUIRE(r.stabilization.size() >= 2);
    auto first = r.stabilization[0].second;
    for (const auto& [lvl, dims] : r.stabilization) CHECK(dims == first);
}

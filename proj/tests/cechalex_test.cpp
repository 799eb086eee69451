#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rigid/cechalex.hpp"

using namespace rigid;

namespace {
Rational q(long n, long d = 1) { return make_ratio(n, d); }
}

TEST_CASE("trivial stratification: jet H^0 over the affine line") {
    auto P = make_affine<Rational>(1, q(1));
    auto eps = taylor_stratification(trivial_connection(P, 1), 1);
    auto [h0, kern] = h0_strat_at(eps, 12);
    CHECK(h0 == 1);  // constants
    auto cx = build_jet_cech(eps, 2, 8);  // also verifies d∘d = 0
    CHECK(cx.d.size() == 2);
}

TEST_CASE("Kummer(1/2) has no horizontal jets") {
    auto P = make_torus<Rational>(1, q(1));
    auto eps = taylor_stratification(kummer_connection(P, q(1, 2)), 3);
    auto [h0, kern] = h0_strat_at(eps, 12);
    CHECK(h0 == 0);
    CHECK(h0_strat(eps) == 0);
}

TEST_CASE("gauge-trivial Kummer(1) has the horizontal section 1/x") {
    auto P = make_torus<Rational>(1, q(1));
    auto c = kummer_connection(P, q(1));
    // oracle: ∇(x^-1) = -x^-2 dx + x^-1 dx/x = 0
    auto xinv = fr_monomial(P, Mono{-1}, q(1));
    auto grad = partial_derivative(xinv) + c.N[0](0, 0) * xinv;
    CHECK(grad.is_zero_elt());
    auto eps = taylor_stratification(c, 3);
    CHECK(h0_strat(eps) == 1);
}

TEST_CASE("jet H^0 equals the de Rham kernel dimension") {
    auto P = make_torus<Rational>(1, q(1));
    for (auto a : {q(0), q(1, 2), q(1), q(2)}) {
        auto c = kummer_connection(P, a);
        auto dr = cohomology_settled(c);
        auto eps = taylor_stratification(c, 3);
        CHECK(h0_strat(eps) == dr.dims[0]);
    }
}

TEST_CASE("cocycle violations are rejected at construction") {
    auto P = make_affine<Rational>(2, q(1));
    auto c = trivial_connection(P, 2);
    c.N[0](0, 1) = fr_one(P);
    c.N[1](1, 0) = fr_one(P);
    auto eps = taylor_stratification(c, 2);
    CHECK_THROWS_AS(build_jet_cech(eps, 1, 6), CocycleFailed);
}

TEST_CASE("comparison with de Rham on the standard suite") {
    TruncationLevel t;
    auto PA = make_affine<Rational>(1, q(1));
    auto PT = make_torus<Rational>(1, q(1));
    struct Case {
        const char* name;
        Connection<Rational> c;
        std::vector<size_t> dims;
    };
    std::vector<Case> cases;
    cases.push_back({"A1 trivial", trivial_connection(PA, 1), {1, 0}});
    cases.push_back({"Torus trivial", trivial_connection(PT, 1), {1, 1}});
    cases.push_back({"Kummer(1/2)", kummer_connection(PT, q(1, 2)), {0, 0}});
    cases.push_back({"Kummer(1)", kummer_connection(PT, q(1)), {1, 1}});
    for (auto& cs : cases) {
        CAPTURE(cs.name);
        auto rows = compare_with_derham(cs.c, 3, 4, t);
        REQUIRE(rows.size() == 2);
        for (auto& row : rows) {
            CHECK(row.dr_dims == cs.dims);
            CHECK(row.jet_dims == cs.dims);
            CHECK(row.equal0);
            CHECK(row.equal1);
        }
        CHECK(rows[0].jet_dims == rows[1].jet_dims);
    }
}

TEST_CASE("comparison for a random integrable rank-2 connection") {
    std::mt19937 rng(97);
    auto PT = make_torus<Rational>(1, q(1));
    auto c = trivial_connection(PT, 2);
    std::uniform_int_distribution<int> cd(-2, 2), ed(-1, 2);
    for (size_t i = 0; i < 2; ++i)
        for (size_t j = 0; j < 2; ++j)
            c.N[0](i, j) = fr_monomial(PT, Mono{ed(rng)}, q(cd(rng)));
    REQUIRE(is_integrable(c));  // one variable: always integrable
    auto rows = compare_with_derham(c, 3, 4);
    REQUIRE(rows.size() == 2);
    for (auto& row : rows) {
        CHECK(row.equal0);
        CHECK(row.equal1);
    }
    CHECK(rows[0].jet_dims == rows[1].jet_dims);
}

// Microbenchmarks for the hot paths: exact linear solving, cohomology of the
// torus, and Taylor stratification of a connection.

#include <benchmark/benchmark.h>

#include <random>

#include "rigid/derham.hpp"
#include "rigid/diffcalc.hpp"

using namespace rigid;

namespace {

Matrix<Rational> random_matrix(size_t n, size_t m, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<long> num(-9, 9);
    std::uniform_int_distribution<long> den(1, 9);
    Matrix<Rational> a(n, m);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j) a(i, j) = make_ratio(num(rng), den(rng));
    return a;
}

void bm_solve_linear_rational(benchmark::State& state) {
    const size_t n = static_cast<size_t>(state.range(0));
    auto a = random_matrix(n, n, 42);
    auto b = random_matrix(n, 1, 7);
    for (auto _ : state) {
        auto sol = solve_linear(a, b);
        benchmark::DoNotOptimize(sol.rank);
    }
}

void bm_rank_padic(benchmark::State& state) {
    const size_t n = static_cast<size_t>(state.range(0));
    std::mt19937 rng(42);
    std::uniform_int_distribution<long> num(-60, 60);
    Padic proto(5, 20);
    Matrix<Padic> a(n, n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            a(i, j) = ScalarOps<Padic>::from_long(proto, num(rng));
    for (auto _ : state) benchmark::DoNotOptimize(rank(a));
}

void bm_torus_cohomology(benchmark::State& state) {
    auto T = make_torus<Rational>(1, Rational(1));
    auto c = kummer_connection(T, make_ratio(static_cast<long>(state.range(0)), 7));
    for (auto _ : state) {
        auto res = cohomology_settled(c);
        benchmark::DoNotOptimize(res.dims.data());
    }
}

void bm_taylor_stratification(benchmark::State& state) {
    auto T = make_torus<Rational>(1, Rational(1));
    auto c = trivial_connection(T, 2);
    c.N[0](0, 0) = fr_monomial(T, Mono{-1}, make_ratio(1, 2));
    c.N[0](1, 1) = fr_monomial(T, Mono{1}, Rational(3));
    const int order = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto eps = taylor_stratification(c, order);
        benchmark::DoNotOptimize(eps.eps.size());
    }
}

BENCHMARK(bm_solve_linear_rational)->Arg(16)->Arg(32)->Arg(64);
BENCHMARK(bm_rank_padic)->Arg(16)->Arg(32)->Arg(64);
BENCHMARK(bm_torus_cohomology)->Arg(1)->Arg(3);
BENCHMARK(bm_taylor_stratification)->Arg(3)->Arg(5);

}  // namespace

BENCHMARK_MAIN();

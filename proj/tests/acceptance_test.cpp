// Acceptance gate: one pass/fail line per criterion.
//
// Each criterion is independent; a throw inside a criterion marks it failed
// but the remaining criteria still run.  The exit status is the number of
// failed criteria.

#include <cstdio>
#include <functional>
#include <random>

#include "rigid/cechalex.hpp"
#include "rigid/descent.hpp"

using namespace rigid;

namespace {

int failures = 0;

void criterion(int n, const char* desc, const std::function<bool()>& fn) {
    bool ok = false;
    std::string err;
    try {
        ok = fn();
    } catch (const std::exception& e) {
        err = e.what();
    }
    std::printf("criterion %2d: %s - %s%s%s\n", n, ok ? "PASS" : "FAIL", desc,
                err.empty() ? "" : " | exception: ", err.c_str());
    if (!ok) ++failures;
}

Rational q(long n, long d = 1) { return make_ratio(n, d); }

template <class K>
PresPtr<K> quadratic_cover_of(PresPtr<K> A) {
    std::vector<Fringe<K>> m = {-fr_monomial(A, Mono{1}, scalar_one(A->proto)),
                                fringe_zero(A), fr_one(A)};
    return make_monic_cover(A, m);
}

// H^1 basis forms that carry an odd power of the cover coordinate
template <class K>
size_t odd_rep_count(const CohomologyResult<K>& r) {
    size_t n = 0;
    for (const auto& b : r.basis) {
        if (b.degree != 1) continue;
        bool odd = false;
        for (const auto& g : b.coeff)
            for (const auto& [k, v] : g.c)
                if (k.back() % 2 != 0) odd = true;
        if (odd) ++n;
    }
    return n;
}

}  // namespace

int main() {
    criterion(1, "affine line: trivial rank-1 has dims (1, 0) over Q and Q_5",
              [] {
                  auto cq = trivial_connection(make_affine<Rational>(1, q(1)), 1);
                  auto rq = cohomology_settled(cq);
                  auto cp = trivial_connection(
                      make_affine<Padic>(1, Padic(5, 20)), 1);
                  auto rp = cohomology_settled(cp);
                  bool by16 = rq.stabilization.front().first == 16 &&
                              rq.stabilization.size() == 2;
                  return rq.dims == std::vector<size_t>{1, 0} &&
                         rp.dims == std::vector<size_t>{1, 0} && by16 &&
                         rp.stabilized;
              });

    criterion(2, "torus: trivial (1,1) with basis dx/x; Kummer(1/2, p=5) (0,0); Kummer(1) (1,1)",
              [] {
                  auto T = make_torus<Rational>(1, q(1));
                  auto rt = cohomology_settled(trivial_connection(T, 1));
                  bool dxx = false;
                  for (const auto& b : rt.basis)
                      if (b.degree == 1 && b.coeff[0].c.size() == 1) {
                          const auto& [k, v] = *b.coeff[0].c.begin();
                          dxx = dxx || (k == Mono{-1} && v == q(1));
                      }
                  auto T5 = make_torus<Padic>(1, Padic(5, 20));
                  auto rh = cohomology_settled(kummer_connection(
                      T5, q(1, 2)));
                  auto r1 = cohomology_settled(kummer_connection(T, q(1)));
                  return rt.dims == std::vector<size_t>{1, 1} && dxx &&
                         rh.dims == std::vector<size_t>{0, 0} &&
                         r1.dims == std::vector<size_t>{1, 1};
              });

    criterion(3, "jet Cech-Alexander dims equal de Rham dims at jet orders 3 and 4",
              [] {
                  auto PA = make_affine<Rational>(1, q(1));
                  auto PT = make_torus<Rational>(1, q(1));
                  std::vector<Connection<Rational>> cases = {
                      trivial_connection(PA, 1), trivial_connection(PT, 1),
                      kummer_connection(PT, q(1, 2)),
                      kummer_connection(PT, q(1))};
                  std::mt19937 rng(5);
                  std::uniform_int_distribution<int> cd(-2, 2), ed(-2, 2);
                  auto cr = trivial_connection(PT, 2);
                  for (size_t i = 0; i < 2; ++i)
                      for (size_t j = 0; j < 2; ++j)
                          cr.N[0](i, j) =
                              fr_monomial(PT, Mono{ed(rng)}, q(cd(rng)));
                  cases.push_back(cr);
                  for (const auto& c : cases) {
                      auto rows = compare_with_derham(c, 3, 4);
                      if (rows.size() != 2) return false;
                      for (const auto& row : rows)
                          if (!row.equal0 || !row.equal1) return false;
                      if (rows[0].jet_dims != rows[1].jet_dims) return false;
                  }
                  return true;
              });

    criterion(4, "25 random integrable connections: cocycle passes at order 4, roundtrip is the identity; fixed non-integrable example fails at degree 2",
              [] {
                  std::mt19937 rng(11);
                  std::uniform_int_distribution<size_t> rr(1, 3);
                  std::uniform_int_distribution<int> cd(-3, 3);
                  for (int t = 0; t < 25; ++t) {
                      bool torus = t % 2 == 0;
                      auto P = torus ? make_torus<Rational>(1, q(1))
                                     : make_affine<Rational>(1, q(1));
                      std::uniform_int_distribution<int> ed(torus ? -3 : 0, 3);
                      size_t r = rr(rng);
                      auto c = trivial_connection(P, r);
                      for (size_t i = 0; i < r; ++i)
                          for (size_t j = 0; j < r; ++j)
                              c.N[0](i, j) =
                                  fr_monomial(P, Mono{ed(rng)}, q(cd(rng)));
                      if (!is_integrable(c)) return false;
                      auto eps = taylor_stratification(c, 4);
                      if (!cocycle_check(eps).pass) return false;
                      auto back = connection_from_stratification(eps);
                      for (size_t i = 0; i < r; ++i)
                          for (size_t j = 0; j < r; ++j)
                              if (!(back.N[0](i, j) == c.N[0](i, j)))
                                  return false;
                  }
                  auto P2 = make_affine<Rational>(2, q(1));
                  auto bad = trivial_connection(P2, 2);
                  bad.N[0](0, 1) = fr_one(P2);
                  bad.N[1](1, 0) = fr_one(P2);
                  auto rep = cocycle_check(taylor_stratification(bad, 3));
                  return !rep.pass && rep.fail_degree == 2;
              });

    criterion(5, "Poincare homotopy: all three identities for 100 random towers over Q and over Q_5 (N=20)",
              [] {
                  std::mt19937 rng(23);
                  std::uniform_int_distribution<long> cd(-9, 9);
                  Padic proto(5, 20);
                  for (int t = 0; t < 100; ++t) {
                      TowerElement<Rational> mq;
                      TowerElement<Padic> mp;
                      for (int k = 0; k < 6; ++k) {
                          std::vector<Rational> lq;
                          std::vector<Padic> lp;
                          for (int d = 0; d <= 8; ++d) {
                              long v = cd(rng);
                              lq.push_back(q(v));
                              lp.push_back(ScalarOps<Padic>::from_long(proto, v));
                          }
                          mq.levels.push_back(std::move(lq));
                          mp.levels.push_back(std::move(lp));
                      }
                      if (!poincare_homotopy_check(mq, q(1)).all()) return false;
                      if (!poincare_homotopy_check(mp, proto).all()) return false;
                  }
                  return true;
              });

    criterion(6, "finite pushforward at p=5 splits as Kummer(0) + Kummer(1/2) with matching dims; trace idempotent recovers the trivial module",
              [] {
                  Padic proto(5, 20);
                  auto A = make_torus<Padic>(1, proto);
                  auto B = quadratic_cover_of(A);
                  auto phi = cover_inclusion(B);
                  auto pf = pushforward_finite(trivial_connection(B, 1), phi);
                  if (pf.r != 2) return false;
                  auto half_over_x = fr_monomial(
                      A, Mono{-1}, ScalarOps<Padic>::from_ratio(proto, q(1, 2)));
                  bool shape = pf.N[0](0, 0).is_zero_elt() &&
                               pf.N[0](0, 1).is_zero_elt() &&
                               pf.N[0](1, 0).is_zero_elt() &&
                               pf.N[0](1, 1) == half_over_x;
                  auto up = cohomology_settled(trivial_connection(B, 1));
                  auto down = cohomology_settled(pf);
                  auto k0 = cohomology_settled(
                      kummer_connection(A, q(0)));
                  auto kh = cohomology_settled(
                      kummer_connection(A, q(1, 2)));
                  bool dims = up.dims == down.dims &&
                              down.dims == std::vector<size_t>{1, 1} &&
                              k0.dims == std::vector<size_t>{1, 1} &&
                              kh.dims == std::vector<size_t>{0, 0};
                  auto G = quadratic_action(phi);
                  auto ts = trace_splitting(trivial_connection(A, 1), phi, G);
                  bool idem = ts.e * ts.e == ts.e;
                  bool recovers = ts.e(0, 0) == fr_one(A) &&
                                  ts.e(0, 1).is_zero_elt() &&
                                  ts.e(1, 0).is_zero_elt() &&
                                  ts.e(1, 1).is_zero_elt() &&
                                  matrix_trace(ts.e) == fr_one(A);
                  return shape && dims && idem && recovers;
              });

    criterion(7, "descent: Amitsur exact in degrees 1-2; canonical roundtrip for 10 random ranks; branch swap gives the Kummer(1/2) twist",
              [] {
                  auto A = make_torus<Rational>(1, q(1));
                  auto B = quadratic_cover_of(A);
                  auto phi = cover_inclusion(B);
                  auto rep = amitsur_complex<Rational>(1, phi, 3, 3);
                  bool exact = rep.h[1] == 0 && rep.h[2] == 0 && rep.h0_is_module;
                  std::mt19937 rng(3);
                  std::uniform_int_distribution<size_t> rd(1, 3);
                  for (int t = 0; t < 10; ++t) {
                      size_t r = rd(rng);
                      if (descend(canonical_datum(phi, r), 3).rank != r)
                          return false;
                  }
                  auto T = tensor_algebra(phi);
                  DescentDatum<Rational> D;
                  D.phi = phi;
                  D.rank = 1;
                  D.glue = {{t2_zero(T)}};
                  D.glue[0][0](1, 1) = fr_monomial(A, Mono{-1}, q(1));
                  D.conn = trivial_connection(B, 1);
                  auto res = descend(D, 3);
                  if (res.rank != 1 || !res.conn) return false;
                  if (res.basis[0][0].c.size() != 1) return false;
                  auto [bk, bx] = *res.basis[0][0].c.begin();
                  if (bk.back() != 1) return false;
                  long k = bk[0];
                  auto expect = fr_monomial(A, Mono{-1}, q(2 * k + 1, 2));
                  bool twist = res.conn->N[0](0, 0) == expect;
                  auto dims = cohomology_settled(*res.conn).dims;
                  return exact && twist && dims == std::vector<size_t>{0, 0};
              });

    criterion(8, "cohomology with support: H_Z(A1, trivial) = (0,0,1) for Z={0} and (0,0,2) for Z={0,1}",
              [] {
                  auto c = trivial_connection(make_affine<Rational>(1, q(1)), 1);
                  auto one = cohomology_with_support(c, {q(0), q(1)});
                  auto two = cohomology_with_support(c, {q(0), q(-1), q(1)});
                  return one.dims == std::vector<size_t>{0, 0, 1} &&
                         two.dims == std::vector<size_t>{0, 0, 2};
              });

    criterion(9, "hyperelliptic y^2 = x^3 - x over Q_5 (N=20): H^1 dim 3 at windows (20, 24), odd part spanned by {dx/y, x dx/y}",
              [] {
                  Padic proto(5, 20);
                  Padic one = ScalarOps<Padic>::from_long(proto, 1);
                  auto H = make_hyperelliptic<Padic>(
                      {ScalarOps<Padic>::from_long(proto, 0),
                       ScalarOps<Padic>::from_long(proto, -1),
                       ScalarOps<Padic>::from_long(proto, 0), one},
                      proto);
                  auto c = trivial_connection(H, 1);

                  // oracle first: raw truncated cokernel of d on the D=28
                  // window, then the span the small monomial forms cut out in
                  // it (the raw count includes boundary junk, the span is the
                  // stable part; it reads 5, not the golden 3)
                  auto dom = window_monomials(H, 28);
                  std::map<Mono, size_t> cod;
                  std::vector<Fringe<Padic>> imgs;
                  for (const auto& m : dom) {
                      auto im = partial_derivative(
                          fr_monomial(H, m, one, 4 * kDefaultDegreeBound));
                      for (const auto& [k, v] : im.c) cod.emplace(k, 0);
                      imgs.push_back(std::move(im));
                  }
                  for (const auto& m : dom) cod.emplace(m, 0);
                  size_t i = 0;
                  for (auto& [k, v] : cod) v = i++;
                  Matrix<Padic> Amat(cod.size(), dom.size());
                  for (size_t j = 0; j < dom.size(); ++j)
                      for (const auto& [k, v] : imgs[j].c)
                          Amat(cod.at(k), j) = v;
                  size_t rka = rank(Amat);
                  auto cands = window_monomials(H, 8);
                  Matrix<Padic> C(cod.size(), cands.size());
                  for (size_t j = 0; j < cands.size(); ++j)
                      C(cod.at(cands[j]), j) = one;
                  size_t oracle_h1 = rank(Amat.hcat(C)) - rka;

                  // odd part: dx/y = y f^-1 dx and x dx/y stay independent in
                  // the cokernel
                  Matrix<Padic> odd(cod.size(), 2);
                  odd(cod.at(Mono{0, 1, 1}), 0) = one;
                  odd(cod.at(Mono{1, 1, 1}), 1) = one;
                  bool odd_indep = rank(Amat.hcat(odd)) == rka + 2;

                  // engine at truncation windows 20 and 24
                  TruncationLevel t;
                  t.degree = 20;
                  t.step = 4;
                  auto res = cohomology(c, t);
                  bool windows_agree = res.stabilized &&
                                       res.stabilization.size() == 2 &&
                                       res.stabilization[0].first == 20 &&
                                       res.stabilization[1].first == 24;
                  bool oracle_matches_engine = res.dims[1] == oracle_h1;
                  bool odd_is_two = odd_rep_count(res) == 2;

                  std::printf(
                      "              [criterion 9 detail] engine H^1 = %zu, "
                      "oracle span = %zu, raw coker = %zu, odd reps = %zu, "
                      "odd pair independent = %d\n",
                      res.dims.size() > 1 ? res.dims[1] : 0, oracle_h1,
                      cod.size() - rka, odd_rep_count(res), odd_indep ? 1 : 0);

                  bool golden_dim_three = res.dims[1] == 3;
                  return windows_agree && oracle_matches_engine && odd_indep &&
                         odd_is_two && golden_dim_three;
              });

    criterion(10, "Roos: surjective towers have lim1 = 0; t-multiplication tower matches brute force at depths 4-8",
              [] {
                  std::mt19937 rng(9);
                  std::uniform_int_distribution<long> cd(-3, 3);
                  Tower<Rational> surj;
                  surj.dims = {2, 3, 4, 5, 6};
                  for (size_t n = 0; n + 1 < surj.dims.size(); ++n) {
                      Matrix<Rational> m(surj.dims[n], surj.dims[n + 1]);
                      do {
                          for (size_t a = 0; a < m.rows(); ++a)
                              for (size_t b = 0; b < m.cols(); ++b)
                                  m(a, b) = q(cd(rng));
                      } while (rank(m) < m.rows());
                      surj.maps.push_back(m);
                  }
                  if (roos_complex(surj, q(1)).lim1 != 0) return false;
                  if (!mittag_leffler_check(surj)) return false;
                  for (size_t N = 4; N <= 8; ++N) {
                      Tower<Rational> T;
                      for (size_t n = 0; n < N; ++n) T.dims.push_back(n + 1);
                      for (size_t n = 0; n + 1 < N; ++n) {
                          Matrix<Rational> m(n + 1, n + 2);
                          for (size_t j = 0; j + 1 < n + 1; ++j)
                              m(j + 1, j) = q(1);
                          T.maps.push_back(m);
                      }
                      auto rc = roos_complex(T, q(1));
                      if (rc.lim != 0) return false;
                      size_t domdim = 0, coddim = 0;
                      for (size_t n = 0; n < N; ++n) domdim += T.dims[n];
                      for (size_t n = 0; n + 1 < N; ++n) coddim += T.dims[n];
                      Matrix<Rational> d(coddim, domdim);
                      size_t ro = 0, co = 0;
                      for (size_t n = 0; n + 1 < N; ++n) {
                          for (size_t a = 0; a < T.dims[n]; ++a)
                              d(ro + a, co + a) = q(1);
                          for (size_t a = 0; a < T.dims[n]; ++a)
                              for (size_t b = 0; b < T.dims[n + 1]; ++b)
                                  d(ro + a, co + T.dims[n] + b) =
                                      d(ro + a, co + T.dims[n] + b) -
                                      T.maps[n](a, b);
                          ro += T.dims[n];
                          co += T.dims[n];
                      }
                      if (rc.lim1 != coddim - rank(d)) return false;
                  }
                  return true;
              });

    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures;
}

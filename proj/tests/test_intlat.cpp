#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"
#include "torusconj/intlat.hpp"

using namespace torusconj;
using namespace torusconj::intlat;

namespace {

// Leibniz expansion over all permutations.
Integer leibniz_det(const IntMatrix& m) {
  const std::size_t n = m.rows();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  Integer total = 0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (p[i] > p[j]) ++inversions;
    Integer term = inversions % 2 ? -1 : 1;
    for (std::size_t i = 0; i < n; ++i) term *= m(i, p[i]);
    total += term;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

bool is_row_hnf(const IntMatrix& h) {
  std::size_t prev_pivot = 0;
  bool first = true;
  bool zero_seen = false;
  for (std::size_t i = 0; i < h.rows(); ++i) {
    std::size_t j = 0;
    while (j < h.cols() && h(i, j) == 0) ++j;
    if (j == h.cols()) {
      zero_seen = true;
      continue;
    }
    if (zero_seen) return false;
    if (!first && j <= prev_pivot) return false;
    if (h(i, j) <= 0) return false;
    for (std::size_t r = 0; r < i; ++r)
      if (h(r, j) < 0 || h(r, j) >= h(i, j)) return false;
    prev_pivot = j;
    first = false;
  }
  return true;
}

IntMatrix shifted(const IntMatrix& m, const Integer& r) {
  IntMatrix s = m;
  for (std::size_t i = 0; i < m.rows(); ++i) s(i, i) -= r;
  return s;
}

Integer sup_norm(const IntVector& v) {
  Integer s = 0;
  for (const auto& x : v) s = std::max(s, Integer(abs(x)));
  return s;
}

bool is_primitive(const IntVector& v) {
  Integer g = 0;
  for (const auto& x : v) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
  return g == 1;
}

bool top_right_zero(const BlockForm& b) {
  for (std::size_t i = 0; i < b.k; ++i)
    for (std::size_t j = b.k; j < b.conjugated.cols(); ++j)
      if (b.conjugated(i, j) != 0) return false;
  return true;
}

bool bottom_left_zero(const BlockForm& b) {
  for (std::size_t i = b.k; i < b.conjugated.rows(); ++i)
    for (std::size_t j = 0; j < b.k; ++j)
      if (b.conjugated(i, j) != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("determinant agrees with the Leibniz expansion") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 5;
    const IntMatrix m = testing::random_int_matrix(rng, n, n, 9);
    CHECK(determinant(m) == leibniz_det(m));
  }
  CHECK(determinant(IntMatrix{{2, 1}, {1, 1}}) == 1);
}

TEST_CASE("Hermite normal form: U M = H, U unimodular, H canonical") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = 1 + trial % 4;
    const std::size_t c = 1 + (trial / 4) % 4;
    const IntMatrix m = testing::random_int_matrix(rng, r, c, 6);
    const HermiteForm hf = hermite_normal_form(m);
    CHECK(hf.U * m == hf.H);
    const Integer det = determinant(hf.U);
    CHECK((det == 1 || det == -1));
    CHECK(is_row_hnf(hf.H));
  }
}

TEST_CASE("Hermite normal form matches brute-force search over small unimodular U") {
  std::mt19937_64 rng(3);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const IntMatrix m = testing::random_int_matrix(rng, 2, 2, 4);
    const IntMatrix h = hermite_normal_form(m).H;
    for (long a = -3; a <= 3; ++a)
      for (long b = -3; b <= 3; ++b)
        for (long c = -3; c <= 3; ++c)
          for (long d = -3; d <= 3; ++d) {
            if (a * d - b * c != 1 && a * d - b * c != -1) continue;
            const IntMatrix cand = IntMatrix{{a, b}, {c, d}} * m;
            if (!is_row_hnf(cand)) continue;
            CHECK(cand == h);  // the Hermite form is unique
            ++compared;
          }
  }
  CHECK(compared > 0);
}

TEST_CASE("unimodular matrices") {
  const UnimodularMatrix s(IntMatrix{{2, 1}, {1, 1}});
  CHECK(s.det() == 1);
  CHECK(s.matrix() * s.inverse() == IntMatrix::identity(2));
  CHECK_THROWS_AS(UnimodularMatrix(IntMatrix{{2, 0}, {0, 1}}), PreconditionError);
}

TEST_CASE("characteristic polynomial satisfies Cayley-Hamilton and det(xI - M)") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 5;
    const IntMatrix m = testing::random_int_matrix(rng, n, n, 5);
    const std::vector<Integer> c = characteristic_polynomial(m);
    REQUIRE(c.size() == n);
    // p(M) by Horner.
    IntMatrix p = IntMatrix::identity(n);
    for (std::size_t i = n; i-- > 0;) {
      p = p * m;
      for (std::size_t j = 0; j < n; ++j) p(j, j) += c[i];
    }
    CHECK(p == IntMatrix(n, n));
    for (long x = -3; x <= 3; ++x) {
      Integer px = 1;
      for (std::size_t i = n; i-- > 0;) px = px * x + c[i];
      // det(xI - M) = (-1)^n det(M - xI)
      CHECK(px == determinant(shifted(m, x)) * ((n % 2) ? -1 : 1));
    }
  }
}

TEST_CASE("integer eigenvalues match a brute-force root search within the Cauchy bound") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 1 + trial % 4;
    IntMatrix m = testing::random_int_matrix(rng, n, n, 4);
    if (trial % 3 == 0)  // triangular: eigenvalues on the diagonal
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) m(i, j) = 0;
    const std::vector<Integer> c = characteristic_polynomial(m);
    Integer bound = 0;
    for (const auto& x : c) bound = std::max(bound, Integer(abs(x)));
    bound += 1;
    std::vector<Integer> expected;
    for (Integer r = -bound; r <= bound; ++r)
      if (determinant(shifted(m, r)) == 0) expected.push_back(r);
    CHECK(integer_eigenvalues(m) == expected);
  }
}

TEST_CASE("Lehmer companion matrix has no integer eigenvalue") {
  const auto spec = testing::load_fixture("lehmer.map");
  CHECK(integer_eigenvalues(spec.M).empty());
}

TEST_CASE("integer eigenvectors") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const IntMatrix m = testing::random_int_matrix(rng, n, n, 3);
    for (const auto& r : integer_eigenvalues(m)) {
      const IntVector v = left_eigenvector_integer(m, r);
      const IntVector u = derive_invariant_line(m, r);
      CHECK(is_primitive(v));
      CHECK(is_primitive(u));
      const IntVector vm = m.transpose() * v;
      const IntVector mu = m * u;
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(vm[i] == r * v[i]);
        CHECK(mu[i] == r * u[i]);
      }
    }
  }
  CHECK_THROWS_AS(left_eigenvector_integer(IntMatrix{{2, 1}, {0, 1}}, Integer(3)), PreconditionError);
}

TEST_CASE("orthogonal sublattice basis spans every orthogonal vector in a box") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    IntVector v = testing::random_int_vector(rng, 3, 6);
    if (sup_norm(v) == 0) continue;
    v = primitive(v);
    const auto basis = orthogonal_sublattice_basis(v);
    REQUIRE(basis.size() == 2);
    // For primitive v the orthogonal lattice has covolume |v|: b1 x b2 = +-v.
    const IntVector& a = basis[0];
    const IntVector& b = basis[1];
    const IntVector cross{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    const bool plus = cross == v;
    IntVector neg = v;
    for (auto& x : neg) x = -x;
    CHECK((plus || cross == neg));
    // Every w in [-5,5]^3 with v.w = 0 has integer coordinates in the basis.
    const IntMatrix bm = IntMatrix::from_columns({a, b, v});
    for (long x = -5; x <= 5; ++x)
      for (long y = -5; y <= 5; ++y)
        for (long z = -5; z <= 5; ++z) {
          const IntVector w{x, y, z};
          if (dot(v, w) != 0) continue;
          // Cramer's rule against the unimodular-up-to-|v|^2 matrix [a b v].
          const Integer det = determinant(bm);
          for (std::size_t col = 0; col < 2; ++col) {
            IntMatrix repl = bm;
            for (std::size_t i = 0; i < 3; ++i) repl(i, col) = w[i];
            CHECK(determinant(repl) % det == 0);
          }
        }
  }
}

TEST_CASE("tiling parallelotope: exact identities and a minimal last vector") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 2 + trial % 2;
    IntVector v = testing::random_int_vector(rng, d, 6);
    if (sup_norm(v) == 0) continue;
    v = primitive(v);
    const TilingParallelotope t = tiling_parallelotope(v);
    const Integer det = determinant(t.W);
    CHECK((det == 1 || det == -1));
    for (std::size_t i = 0; i + 1 < d; ++i) CHECK(dot(v, t.W.col(i)) == 0);
    const IntVector wd = t.W.col(d - 1);
    CHECK(dot(v, wd) == 1);
    // No solution of v.w = 1 has a smaller sup norm.
    const long r = sup_norm(wd).get_si();
    std::vector<long> w(d, -r);
    for (;;) {
      IntVector wi(w.begin(), w.end());
      if (dot(v, wi) == 1) CHECK(sup_norm(wi) >= r);
      std::size_t i = 0;
      while (i < d && ++w[i] > r) w[i++] = -r;
      if (i == d) break;
    }
  }
  CHECK(tiling_parallelotope(IntVector{2, 4}).v == IntVector{1, 2});
  CHECK_THROWS(tiling_parallelotope(IntVector{0, 0}));
}

TEST_CASE("tiling parallelotope examples") {
  for (const IntVector& v : {IntVector{1, 1}, IntVector{1, 0}, IntVector{2, 3}}) {
    const TilingParallelotope t = tiling_parallelotope(v);
    const Integer det = determinant(t.W);
    CHECK((det == 1 || det == -1));
    CHECK(dot(v, t.W.col(0)) == 0);
    CHECK(dot(v, t.W.col(1)) == 1);
  }
  const IntVector w1 = tiling_parallelotope(IntVector{2, 3}).W.col(0);
  CHECK((w1 == IntVector{3, -2} || w1 == IntVector{-3, 2}));
}

TEST_CASE("classification of blocks") {
  CHECK(classify(IntMatrix{{2}}) == Classification::expanding);
  CHECK(classify(IntMatrix{{-3}}) == Classification::expanding);
  CHECK(classify(IntMatrix{{2, 1}, {1, 1}}) == Classification::hyperbolic);
  CHECK(classify(IntMatrix{{1}}) == Classification::neither);
  CHECK(classify(IntMatrix{{0, -1}, {1, 0}}) == Classification::neither);
}

TEST_CASE("block_triangularize keeps the sublattice in the first columns") {
  const IntMatrix m{{2, 1}, {0, 1}};
  const BlockForm b = block_triangularize(m, {IntVector{1, 0}});
  CHECK(b.k == 1);
  CHECK(b.S.matrix().col(0) == IntVector{1, 0});
  CHECK(bottom_left_zero(b));
  CHECK(b.A == IntMatrix{{2}});
  CHECK(b.shape == BlockShape::upper);
  CHECK_FALSE(b.first_coords_are_factor());
  CHECK(b.S_inv * m * b.S.matrix() == b.conjugated);

  CHECK_THROWS_AS(block_triangularize(m, {IntVector{0, 1}}), PreconditionError);  // not invariant
  CHECK_THROWS_AS(block_triangularize(m, {IntVector{2, 0}}), PreconditionError);  // not a direct summand

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const IntMatrix r = testing::random_int_matrix(rng, 3, 3, 3);
    for (const auto& ev : integer_eigenvalues(r)) {
      const BlockForm bf = block_triangularize(r, {derive_invariant_line(r, ev)});
      CHECK(bottom_left_zero(bf));
      CHECK(bf.A == IntMatrix{{ev.get_si()}});
    }
  }
}

TEST_CASE("factor forms make the first coordinates a factor") {
  const BlockForm b = factor_form_for_eigenvalue(IntMatrix{{2, 1}, {0, 1}}, Integer(2));
  CHECK(b.S.matrix() == IntMatrix{{1, 1}, {0, -1}});
  CHECK(b.conjugated == IntMatrix{{2, 0}, {0, 1}});
  CHECK(b.shape == BlockShape::diagonal);
  CHECK(b.classification == Classification::expanding);

  // Left and right eigenvectors pair to 2 here, so the tiling branch is used.
  const BlockForm t = factor_form_for_eigenvalue(IntMatrix{{3, 1}, {0, 1}}, Integer(3));
  CHECK(top_right_zero(t));
  CHECK(t.A == IntMatrix{{3}});
  CHECK(t.S_inv * IntMatrix{{3, 1}, {0, 1}} * t.S.matrix() == t.conjugated);

  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const IntMatrix r = testing::random_int_matrix(rng, n, n, 3);
    for (const auto& ev : integer_eigenvalues(r)) {
      const BlockForm f = factor_form_for_eigenvalue(r, ev);
      CHECK(top_right_zero(f));
      CHECK(f.first_coords_are_factor());
      CHECK(f.S_inv * r * f.S.matrix() == f.conjugated);
      CHECK(f.A == IntMatrix{{ev.get_si()}});
    }
  }
  CHECK_THROWS_AS(factor_form(IntMatrix{{2, 1}, {0, 1}}, {IntVector{1, 0}}), PreconditionError);
}

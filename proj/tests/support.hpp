#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>

#include "torusconj/dynamics.hpp"
#include "torusconj/intlat.hpp"
#include "torusconj/specdsl.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(TORUSCONJ_FIXTURES) + "/" + name; }

inline torusconj::specdsl::TorusMapSpec load_fixture(const std::string& name) {
  return torusconj::specdsl::load_spec(fixture(name));
}

inline torusconj::intlat::IntMatrix random_int_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, int bound) {
  std::uniform_int_distribution<int> u(-bound, bound);
  torusconj::intlat::IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

inline torusconj::intlat::IntVector random_int_vector(std::mt19937_64& rng, std::size_t n, int bound) {
  std::uniform_int_distribution<int> u(-bound, bound);
  torusconj::intlat::IntVector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

/// Canonical spec with dim in [1, max_dim], entries of M in [-3,3] and up to
/// six trig terms with |coefficient| <= coef and frequencies in [-3,3].
inline torusconj::specdsl::TorusMapSpec random_spec(std::mt19937_64& rng, std::size_t max_dim, double coef) {
  using namespace torusconj::specdsl;
  std::uniform_int_distribution<std::size_t> dim_d(1, max_dim);
  std::uniform_int_distribution<int> term_count(0, 6), freq(-3, 3), kind(0, 1);
  std::uniform_real_distribution<double> c(-coef, coef);
  TorusMapSpec s;
  s.dim = dim_d(rng);
  s.M = random_int_matrix(rng, s.dim, s.dim, 3);
  const int n = term_count(rng);
  std::uniform_int_distribution<std::size_t> comp(0, s.dim - 1);
  for (int i = 0; i < n; ++i) {
    std::vector<std::int64_t> f(s.dim);
    for (auto& x : f) x = freq(rng);
    s.terms.push_back(TrigTerm{comp(rng), c(rng), kind(rng) ? TrigKind::sin : TrigKind::cos, f});
  }
  s.canonicalize();
  return s;
}

inline Eigen::VectorXd random_point(std::mt19937_64& rng, std::size_t dim, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = u(rng);
  return z;
}

/// A spec together with a block form and the spec in block coordinates.
struct Prepared {
  torusconj::intlat::BlockForm block;
  torusconj::specdsl::TorusMapSpec coords;
};

/// Factor form for the integer eigenvalue m of the spec's matrix.
inline Prepared prepare_factor(const torusconj::specdsl::TorusMapSpec& spec, long m) {
  torusconj::intlat::BlockForm block = torusconj::intlat::factor_form_for_eigenvalue(spec.M, m);
  auto coords = torusconj::dynamics::change_coordinates(spec, block.S);
  return Prepared{std::move(block), std::move(coords)};
}

/// k = d with S = identity.
inline Prepared prepare_full(const torusconj::specdsl::TorusMapSpec& spec) {
  std::vector<torusconj::intlat::IntVector> basis;
  for (std::size_t j = 0; j < spec.dim; ++j) basis.push_back(torusconj::intlat::IntMatrix::identity(spec.dim).col(j));
  return Prepared{torusconj::intlat::block_triangularize(spec.M, basis), spec};
}

}  // namespace testing

#pragma once

// Exact integer lattice algebra: Hermite forms, integer eigen-structure,
// unimodular completions and block forms of winding matrices.

#include <gmpxx.h>

#include <Eigen/Dense>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "torusconj/error.hpp"

namespace torusconj::intlat {

using Integer = mpz_class;
using Rational = mpq_class;
using IntVector = std::vector<Integer>;

/// Dense row-major matrix of arbitrary-precision integers.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols);
  IntMatrix(std::initializer_list<std::initializer_list<long>> rows);

  static IntMatrix identity(std::size_t n);
  static IntMatrix from_rows(const std::vector<IntVector>& rows);
  static IntMatrix from_columns(const std::vector<IntVector>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Integer& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Integer& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  IntVector row(std::size_t i) const;
  IntVector col(std::size_t j) const;
  IntMatrix transpose() const;
  IntMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;

  /// Entry-wise conversion; throws if an entry does not fit a double exactly
  /// enough to matter (magnitude above 2^53).
  Eigen::MatrixXd to_double() const;

  std::string to_string() const;

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
  friend IntMatrix operator-(const IntMatrix& a, const IntMatrix& b);
  friend bool operator==(const IntMatrix& a, const IntMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Integer> data_;
};

IntVector operator*(const IntMatrix& a, const IntVector& v);
Integer dot(const IntVector& a, const IntVector& b);

/// Exact determinant (fraction-free Bareiss elimination).
Integer determinant(const IntMatrix& m);

/// Rank over the rationals.
std::size_t rank(const IntMatrix& m);

/// Integer matrix with determinant exactly +1 or -1.
class UnimodularMatrix {
 public:
  /// Throws PreconditionError unless `m` is square with determinant +-1.
  explicit UnimodularMatrix(IntMatrix m);

  const IntMatrix& matrix() const { return inner_; }
  std::size_t dim() const { return inner_.rows(); }
  int det() const { return det_; }
  /// The inverse, which is again an integer matrix.
  IntMatrix inverse() const;

 private:
  IntMatrix inner_;
  int det_ = 1;
};

struct HermiteForm {
  IntMatrix H;
  IntMatrix U;  // unimodular, U * M == H
};

/// Row Hermite normal form: H upper echelon, pivots positive, entries above
/// each pivot reduced into [0, pivot).
HermiteForm hermite_normal_form(const IntMatrix& m);

/// v / gcd(v), orientation preserved. Throws on the zero vector.
IntVector primitive(const IntVector& v);

/// Coefficients c_0..c_{d-1} of det(xI - M) = x^d + c_{d-1} x^{d-1} + ... + c_0.
std::vector<Integer> characteristic_polynomial(const IntMatrix& m);

/// Integer roots of the characteristic polynomial, ascending, no multiplicities.
std::vector<Integer> integer_eigenvalues(const IntMatrix& m);

/// Primitive v with v^T M = m v^T; HNF-first basis vector of the left kernel.
IntVector left_eigenvector_integer(const IntMatrix& m, const Integer& eigenvalue);

/// Primitive u with M u = m u; HNF-first basis vector of the right kernel.
IntVector derive_invariant_line(const IntMatrix& m, const Integer& eigenvalue);

/// HNF-canonical basis of {w : v.w = 0}; d-1 vectors.
std::vector<IntVector> orthogonal_sublattice_basis(const IntVector& v);

struct TilingParallelotope {
  IntVector v;  // primitive
  IntMatrix W;  // columns w_1..w_d
};

TilingParallelotope tiling_parallelotope(const IntVector& v);

enum class Classification { expanding, hyperbolic, neither };
std::string to_string(Classification c);

/// Classification of a small integer block from floating eigenvalues.
Classification classify(const IntMatrix& a, double unit_tol = 1e-9);

/// Which off-diagonal block of S^-1 M S vanishes.
enum class BlockShape {
  upper,     // rows k.. of the first k columns are zero (invariant sublattice)
  factor,    // columns k.. of the first k rows are zero (first k coords are a factor)
  diagonal,  // both
};
std::string to_string(BlockShape s);

struct BlockForm {
  UnimodularMatrix S;
  IntMatrix S_inv;
  IntMatrix conjugated;  // S^-1 M S
  std::size_t k = 0;
  IntMatrix A;  // top-left k x k block
  Classification classification = Classification::neither;
  BlockShape shape = BlockShape::upper;

  bool first_coords_are_factor() const { return shape != BlockShape::upper; }
};

/// Completes an M-invariant direct-summand basis B (column vectors) to S with
/// S^-1 M S block upper triangular; the first k columns of S are exactly B.
BlockForm block_triangularize(const IntMatrix& m, const std::vector<IntVector>& basis);

/// Completes rows P spanning a left-invariant direct summand (P M = A P) to
/// S^-1 whose first k rows are P; S^-1 M S then has a zero top-right block.
BlockForm factor_form(const IntMatrix& m, const std::vector<IntVector>& rows);

/// Factor form for an integer eigenvalue: block diagonal when the primitive
/// left and right eigenvectors pair to +-1, otherwise built from the tiling.
BlockForm factor_form_for_eigenvalue(const IntMatrix& m, const Integer& eigenvalue);

}  // namespace torusconj::intlat

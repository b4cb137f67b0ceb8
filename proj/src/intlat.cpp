#include "torusconj/intlat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>

namespace torusconj::intlat {

// ---------------------------------------------------------------- IntMatrix

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Integer(0)) {}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw PreconditionError("ragged matrix literal");
    for (long x : r) data_.emplace_back(x);
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<IntVector>& rows) {
  if (rows.empty()) return {};
  IntMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) throw PreconditionError("rows of unequal length");
    for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

IntMatrix IntMatrix::from_columns(const std::vector<IntVector>& cols) {
  return from_rows(cols).transpose();
}

IntVector IntMatrix::row(std::size_t i) const {
  return IntVector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                   data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

IntVector IntMatrix::col(std::size_t j) const {
  IntVector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

IntMatrix IntMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  IntMatrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

Eigen::MatrixXd IntMatrix::to_double() const {
  static const Integer limit = Integer(1) << 53;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) {
      const Integer& x = (*this)(i, j);
      if (abs(x) > limit) throw NumericalError("matrix entry exceeds 2^53: " + x.get_str());
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x.get_d();
    }
  return out;
}

std::string IntMatrix::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < rows_; ++i) {
    if (i) os << ',';
    os << '[';
    for (std::size_t j = 0; j < cols_; ++j) {
      if (j) os << ',';
      os << (*this)(i, j).get_str();
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols_ != b.rows_) throw PreconditionError("matrix product dimension mismatch");
  IntMatrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t l = 0; l < a.cols_; ++l) {
      const Integer& x = a(i, l);
      if (x == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += x * b(l, j);
    }
  return c;
}

IntMatrix operator-(const IntMatrix& a, const IntMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw PreconditionError("matrix difference dimension mismatch");
  IntMatrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
  return c;
}

bool operator==(const IntMatrix& a, const IntMatrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

IntVector operator*(const IntMatrix& a, const IntVector& v) {
  if (a.cols() != v.size()) throw PreconditionError("matrix-vector dimension mismatch");
  IntVector out(a.rows(), Integer(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
  return out;
}

Integer dot(const IntVector& a, const IntVector& b) {
  if (a.size() != b.size()) throw PreconditionError("dot product dimension mismatch");
  Integer s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Integer determinant(const IntMatrix& m) {
  if (!m.is_square()) throw PreconditionError("determinant of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  IntMatrix a = m;
  Integer prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Integer t = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        a(i, j) = t;
      }
      a(i, k) = 0;
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

std::size_t rank(const IntMatrix& m) {
  std::vector<std::vector<Rational>> a(m.rows(), std::vector<Rational>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a[i][j] = Rational(m(i, j));
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t p = r;
    while (p < m.rows() && a[p][c] == 0) ++p;
    if (p == m.rows()) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = r + 1; i < m.rows(); ++i) {
      if (a[i][c] == 0) continue;
      Rational f = a[i][c] / a[r][c];
      for (std::size_t j = c; j < m.cols(); ++j) a[i][j] -= f * a[r][j];
    }
    ++r;
  }
  return r;
}

// --------------------------------------------------------- UnimodularMatrix

UnimodularMatrix::UnimodularMatrix(IntMatrix m) : inner_(std::move(m)) {
  if (!inner_.is_square()) throw PreconditionError("unimodular matrix must be square");
  Integer d = determinant(inner_);
  if (d == 1) {
    det_ = 1;
  } else if (d == -1) {
    det_ = -1;
  } else {
    throw PreconditionError("matrix is not unimodular (det = " + d.get_str() + ")");
  }
}

IntMatrix UnimodularMatrix::inverse() const {
  // The Hermite form of a unimodular matrix is the identity, so U = S^-1.
  return hermite_normal_form(inner_).U;
}

// -------------------------------------------------------------- Hermite form

namespace {

void row_combine(IntMatrix& m, std::size_t r, std::size_t i, const Integer& s, const Integer& t,
                 const Integer& u, const Integer& v) {
  // (row r, row i) <- (s*row r + t*row i, u*row r + v*row i)
  for (std::size_t j = 0; j < m.cols(); ++j) {
    Integer a = m(r, j);
    Integer b = m(i, j);
    m(r, j) = s * a + t * b;
    m(i, j) = u * a + v * b;
  }
}

void row_axpy(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& q) {
  for (std::size_t j = 0; j < m.cols(); ++j) m(dst, j) -= q * m(src, j);
}

void row_negate(IntMatrix& m, std::size_t r) {
  for (std::size_t j = 0; j < m.cols(); ++j) m(r, j) = -m(r, j);
}

}  // namespace

HermiteForm hermite_normal_form(const IntMatrix& m) {
  HermiteForm out{m, IntMatrix::identity(m.rows())};
  IntMatrix& H = out.H;
  IntMatrix& U = out.U;
  std::size_t r = 0;
  for (std::size_t c = 0; c < H.cols() && r < H.rows(); ++c) {
    for (std::size_t i = r + 1; i < H.rows(); ++i) {
      if (H(i, c) == 0) continue;
      Integer a = H(r, c);
      Integer b = H(i, c);
      Integer g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
      Integer u = -b / g;
      Integer v = a / g;
      row_combine(H, r, i, s, t, u, v);
      row_combine(U, r, i, s, t, u, v);
    }
    if (H(r, c) == 0) continue;
    if (H(r, c) < 0) {
      row_negate(H, r);
      row_negate(U, r);
    }
    for (std::size_t i = 0; i < r; ++i) {
      Integer q;
      mpz_fdiv_q(q.get_mpz_t(), H(i, c).get_mpz_t(), H(r, c).get_mpz_t());
      if (q == 0) continue;
      row_axpy(H, i, r, q);
      row_axpy(U, i, r, q);
    }
    ++r;
  }
  return out;
}

// ------------------------------------------------------ vectors and kernels

IntVector primitive(const IntVector& v) {
  Integer g = 0;
  for (const auto& x : v) g = gcd(g, x);
  if (g == 0) throw PreconditionError("primitive: zero vector");
  IntVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / g;
  return out;
}

namespace {

// Basis of {x : x^T B = 0} as the HNF of the trailing rows of the transform.
std::vector<IntVector> left_kernel_basis(const IntMatrix& b) {
  HermiteForm hf = hermite_normal_form(b);
  std::vector<IntVector> rows;
  for (std::size_t i = 0; i < hf.H.rows(); ++i) {
    bool zero = true;
    for (std::size_t j = 0; j < hf.H.cols() && zero; ++j) zero = hf.H(i, j) == 0;
    if (zero) rows.push_back(hf.U.row(i));
  }
  if (rows.empty()) return rows;
  IntMatrix canon = hermite_normal_form(IntMatrix::from_rows(rows)).H;
  std::vector<IntVector> basis;
  for (std::size_t i = 0; i < canon.rows(); ++i) basis.push_back(canon.row(i));
  return basis;
}

IntMatrix shifted(const IntMatrix& m, const Integer& lambda) {
  IntMatrix b = m;
  for (std::size_t i = 0; i < b.rows(); ++i) b(i, i) -= lambda;
  return b;
}

void require_eigenvalue(const IntMatrix& m, const Integer& lambda) {
  if (!m.is_square()) throw PreconditionError("winding matrix must be square");
  if (determinant(shifted(m, lambda)) != 0)
    throw PreconditionError(lambda.get_str() + " is not an eigenvalue (det(M - mI) != 0)");
}

}  // namespace

std::vector<Integer> characteristic_polynomial(const IntMatrix& m) {
  if (!m.is_square()) throw PreconditionError("characteristic polynomial of a non-square matrix");
  // Faddeev-LeVerrier; every division below is exact over the integers.
  const std::size_t n = m.rows();
  std::vector<Integer> c(n + 1, Integer(0));
  c[n] = 1;
  IntMatrix mk(n, n);  // M_0 = 0
  for (std::size_t k = 1; k <= n; ++k) {
    IntMatrix next = m * mk;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    mk = std::move(next);
    IntMatrix prod = m * mk;
    Integer tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += prod(i, i);
    Integer q = -tr;
    mpz_divexact_ui(q.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(k));
    c[n - k] = q;
  }
  c.pop_back();
  return c;
}

namespace {

Integer eval_monic(const std::vector<Integer>& low, const Integer& x) {
  Integer acc = 1;
  for (std::size_t i = low.size(); i-- > 0;) acc = acc * x + low[i];
  return acc;
}

}  // namespace

std::vector<Integer> integer_eigenvalues(const IntMatrix& m) {
  std::vector<Integer> coeffs = characteristic_polynomial(m);
  std::vector<Integer> roots;
  std::size_t shift = 0;
  while (shift < coeffs.size() && coeffs[shift] == 0) ++shift;
  if (shift > 0) roots.emplace_back(0);
  if (shift == coeffs.size()) return roots;  // x^d

  Integer c = abs(coeffs[shift]);
  Integer root_c = sqrt(c);
  if (root_c > Integer(100000000))
    throw NumericalError("constant coefficient too large for divisor enumeration: " + c.get_str());
  std::vector<Integer> candidates;
  for (Integer q = 1; q <= root_c; ++q) {
    if (c % q != 0) continue;
    candidates.push_back(q);
    candidates.push_back(c / q);
  }
  for (const Integer& q : candidates)
    for (const Integer& r : {q, Integer(-q)})
      if (eval_monic(coeffs, r) == 0) roots.push_back(r);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

IntVector left_eigenvector_integer(const IntMatrix& m, const Integer& eigenvalue) {
  require_eigenvalue(m, eigenvalue);
  auto basis = left_kernel_basis(shifted(m, eigenvalue));
  return primitive(basis.front());
}

IntVector derive_invariant_line(const IntMatrix& m, const Integer& eigenvalue) {
  require_eigenvalue(m, eigenvalue);
  auto basis = left_kernel_basis(shifted(m, eigenvalue).transpose());
  return primitive(basis.front());
}

std::vector<IntVector> orthogonal_sublattice_basis(const IntVector& v) {
  IntVector p = primitive(v);
  if (p.size() < 2) return {};
  return left_kernel_basis(IntMatrix::from_columns({p}));
}

// ------------------------------------------------------------------ tiling

namespace {

// Lexicographically smallest x with minimal sup-norm solving p.x = 1, or
// nullopt when the search box would be too large for exact enumeration.
std::optional<IntVector> min_sup_norm_solution(const IntVector& p, long max_radius) {
  const std::size_t d = p.size();
  std::vector<long> w(d);
  long l1 = 0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!p[i].fits_slong_p()) return std::nullopt;
    w[i] = p[i].get_si();
    l1 += std::labs(w[i]);
    if (l1 > 1000000) return std::nullopt;
  }
  for (long r = 1; r <= max_radius; ++r) {
    const long span = r * l1;
    if (span > 2000000) return std::nullopt;
    const std::size_t width = static_cast<std::size_t>(2 * span + 1);
    // reach[j][s + span]: coordinates j..d-1 can sum to s.
    std::vector<std::vector<char>> reach(d + 1, std::vector<char>(width, 0));
    reach[d][static_cast<std::size_t>(span)] = 1;
    for (std::size_t j = d; j-- > 0;) {
      for (std::size_t s = 0; s < width; ++s) {
        if (!reach[j + 1][s]) continue;
        for (long x = -r; x <= r; ++x) {
          long t = static_cast<long>(s) + x * w[j];
          if (t >= 0 && t < static_cast<long>(width)) reach[j][static_cast<std::size_t>(t)] = 1;
        }
      }
    }
    if (!reach[0][static_cast<std::size_t>(span + 1)]) continue;
    IntVector x(d);
    long remaining = 1;
    for (std::size_t j = 0; j < d; ++j) {
      for (long c = -r; c <= r; ++c) {
        long rest = remaining - c * w[j];
        long idx = rest + span;
        if (idx >= 0 && idx < static_cast<long>(width) && reach[j + 1][static_cast<std::size_t>(idx)]) {
          x[j] = c;
          remaining = rest;
          break;
        }
      }
    }
    return x;
  }
  return std::nullopt;
}

}  // namespace

TilingParallelotope tiling_parallelotope(const IntVector& v) {
  IntVector p = primitive(v);
  const std::size_t d = p.size();
  std::vector<IntVector> cols = orthogonal_sublattice_basis(p);

  // Any solution of p.w = 1 completes the orthogonal lattice to Z^d; the
  // Hermite transform of the column p supplies one, the search a smaller one.
  HermiteForm hf = hermite_normal_form(IntMatrix::from_columns({p}));
  IntVector wd = hf.U.row(0);
  long bound = 0;
  for (const auto& x : wd) {
    const Integer ax = abs(x);
    bound = std::max(bound, ax.fits_slong_p() ? ax.get_si() : 1000000L);
  }
  if (auto best = min_sup_norm_solution(p, std::min(bound, 1000000L))) wd = *best;
  cols.push_back(wd);

  TilingParallelotope tp{p, IntMatrix::from_columns(cols)};
  for (std::size_t i = 0; i + 1 < d; ++i)
    if (dot(p, tp.W.col(i)) != 0) throw NumericalError("tiling: orthogonality certificate failed");
  if (dot(p, tp.W.col(d - 1)) != 1) throw NumericalError("tiling: v.w_d != 1");
  Integer det = determinant(tp.W);
  if (det != 1 && det != -1) throw NumericalError("tiling: det(W) = " + det.get_str());
  return tp;
}

// ------------------------------------------------------------- block forms

std::string to_string(Classification c) {
  switch (c) {
    case Classification::expanding: return "expanding";
    case Classification::hyperbolic: return "hyperbolic";
    case Classification::neither: return "neither";
  }
  return "?";
}

std::string to_string(BlockShape s) {
  switch (s) {
    case BlockShape::upper: return "upper";
    case BlockShape::factor: return "factor";
    case BlockShape::diagonal: return "diagonal";
  }
  return "?";
}

Classification classify(const IntMatrix& a, double unit_tol) {
  if (a.rows() == 0) return Classification::neither;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a.to_double(), false);
  bool expanding = true;
  bool hyperbolic = true;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double mag = std::abs(es.eigenvalues()[i]);
    if (!(mag > 1.0 + unit_tol)) expanding = false;
    if (std::abs(mag - 1.0) <= unit_tol) hyperbolic = false;
  }
  if (expanding) return Classification::expanding;
  if (hyperbolic) return Classification::hyperbolic;
  return Classification::neither;
}

namespace {

bool zero_block(const IntMatrix& t, std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) {
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      if (t(r0 + i, c0 + j) != 0) return false;
  return true;
}

// Hermite transform U with U * B^T = [I; 0]; throws with the offending pivot
// when span(B) is not a direct summand of Z^d.
IntMatrix direct_summand_transform(const std::vector<IntVector>& vectors) {
  const std::size_t k = vectors.size();
  IntMatrix bt = IntMatrix::from_columns(vectors);
  HermiteForm hf = hermite_normal_form(bt);
  for (std::size_t i = 0; i < k; ++i) {
    if (hf.H(i, i) != 1)
      throw PreconditionError("sublattice is not a direct summand: Hermite pivot " + std::to_string(i + 1) +
                              " is " + hf.H(i, i).get_str());
  }
  return hf.U;
}

BlockForm assemble(const IntMatrix& m, IntMatrix s, IntMatrix s_inv, std::size_t k) {
  const std::size_t d = m.rows();
  IntMatrix t = s_inv * m * s;
  bool lower_zero = zero_block(t, k, 0, d - k, k);
  bool upper_zero = zero_block(t, 0, k, k, d - k);
  if (!lower_zero && !upper_zero) throw NumericalError("block certificate failed: no off-diagonal block vanishes");
  BlockShape shape = lower_zero && upper_zero ? BlockShape::diagonal
                     : lower_zero            ? BlockShape::upper
                                             : BlockShape::factor;
  IntMatrix a = t.block(0, 0, k, k);
  Classification cls = classify(a);
  return BlockForm{UnimodularMatrix(std::move(s)), std::move(s_inv), std::move(t), k, std::move(a), cls, shape};
}

void check_vectors(const IntMatrix& m, const std::vector<IntVector>& vectors, const char* what) {
  if (!m.is_square()) throw PreconditionError("winding matrix must be square");
  if (vectors.empty() || vectors.size() > m.rows())
    throw PreconditionError(std::string(what) + ": need between 1 and d vectors");
  for (const auto& b : vectors)
    if (b.size() != m.rows()) throw PreconditionError(std::string(what) + ": vector length differs from d");
  if (rank(IntMatrix::from_rows(vectors)) != vectors.size())
    throw PreconditionError(std::string(what) + ": vectors are linearly dependent");
}

}  // namespace

BlockForm block_triangularize(const IntMatrix& m, const std::vector<IntVector>& basis) {
  check_vectors(m, basis, "block_triangularize");
  const std::size_t k = basis.size();
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<IntVector> ext = basis;
    ext.push_back(m * basis[i]);
    if (rank(IntMatrix::from_rows(ext)) != k)
      throw PreconditionError("sublattice is not M-invariant: M*b" + std::to_string(i + 1) +
                              " is outside the span of B");
  }
  IntMatrix u = direct_summand_transform(basis);
  UnimodularMatrix uu(u);
  IntMatrix s = uu.inverse();
  BlockForm bf = assemble(m, std::move(s), std::move(u), k);
  if (bf.shape == BlockShape::factor) throw NumericalError("block certificate failed: lower-left block nonzero");
  return bf;
}

BlockForm factor_form(const IntMatrix& m, const std::vector<IntVector>& rows) {
  check_vectors(m, rows, "factor_form");
  const std::size_t k = rows.size();
  IntMatrix mt = m.transpose();
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<IntVector> ext = rows;
    ext.push_back(mt * rows[i]);
    if (rank(IntMatrix::from_rows(ext)) != k)
      throw PreconditionError("rows are not left-invariant: p" + std::to_string(i + 1) +
                              "*M is outside the row span");
  }
  // U P^T = [I; 0]  =>  P = [I 0] U^-T, so S^-1 = U^-T and S = U^T.
  IntMatrix u = direct_summand_transform(rows);
  IntMatrix s = u.transpose();
  IntMatrix s_inv = UnimodularMatrix(s).inverse();
  BlockForm bf = assemble(m, std::move(s), std::move(s_inv), k);
  if (bf.shape == BlockShape::upper) throw NumericalError("block certificate failed: upper-right block nonzero");
  return bf;
}

BlockForm factor_form_for_eigenvalue(const IntMatrix& m, const Integer& eigenvalue) {
  IntVector v = left_eigenvector_integer(m, eigenvalue);
  IntVector u = derive_invariant_line(m, eigenvalue);
  Integer pairing = dot(v, u);
  std::vector<IntVector> cols;
  if (pairing == 1 || pairing == -1) {
    if (pairing == -1)
      for (auto& x : u) x = -x;
    cols.push_back(u);
    for (auto& w : orthogonal_sublattice_basis(v)) cols.push_back(std::move(w));
  } else {
    TilingParallelotope tp = tiling_parallelotope(v);
    const std::size_t d = tp.W.cols();
    cols.push_back(tp.W.col(d - 1));
    for (std::size_t j = 0; j + 1 < d; ++j) cols.push_back(tp.W.col(j));
  }
  UnimodularMatrix s(IntMatrix::from_columns(cols));
  IntMatrix s_inv = s.inverse();
  BlockForm bf = assemble(m, s.matrix(), std::move(s_inv), 1);
  if (bf.shape == BlockShape::upper) throw NumericalError("block certificate failed: upper-right block nonzero");
  return bf;
}

}  // namespace torusconj::intlat

#pragma once

// Lifts, torus iterates, Jacobians, inverse lifts and global norm bounds for
// maps F(z) = Mz + G(z) mod 1 with trigonometric periodic part G.

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "torusconj/intlat.hpp"
#include "torusconj/specdsl.hpp"

namespace torusconj::dynamics {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Global bounds on G derived from coefficient sums; valid for every z.
struct NormBounds {
  double g_sup = 0.0;   // >= sup |G(z)|
  double g_lip = 0.0;   // Lipschitz constant of G
  double dg_lip = 0.0;  // Lipschitz constant of DG (operator norm)
};

/// A spec compiled for fast floating-point evaluation.
class TorusMap {
 public:
  explicit TorusMap(specdsl::TorusMapSpec spec);

  const specdsl::TorusMapSpec& spec() const { return spec_; }
  std::size_t dim() const { return spec_.dim; }
  const Matrix& M() const { return m_; }
  bool has_periodic_part() const { return !terms_.empty(); }
  bool invertible() const { return invertible_; }
  /// Valid only when invertible().
  const Matrix& M_inv() const { return m_inv_; }

  /// Accumulates G(z) restricted to components [first, first+count) into out.
  void add_G(const Vector& z, std::size_t first, std::size_t count, Eigen::Ref<Vector> out) const;

 private:
  struct Term {
    std::size_t component;
    double coefficient;
    bool is_sin;
    Vector frequency;
  };

  specdsl::TorusMapSpec spec_;
  Matrix m_;
  Matrix m_inv_;
  bool invertible_ = false;
  std::vector<Term> terms_;

  friend Vector eval_G(const TorusMap&, const Vector&);
  friend Matrix jacobian(const TorusMap&, const Vector&);
  friend NormBounds norm_bounds(const TorusMap&, std::size_t, std::size_t);
};

Vector eval_G(const TorusMap& map, const Vector& z);
/// F^(z) = Mz + G(z) on R^d.
Vector eval_lift(const TorusMap& map, const Vector& z);
/// F on the torus; result in [0,1)^d.
Vector eval_torus(const TorusMap& map, const Vector& theta);
/// DF(z) = M + DG(z), with DG from the analytic term derivatives.
Matrix jacobian(const TorusMap& map, const Vector& z);

/// Bounds over all components.
NormBounds norm_bounds(const TorusMap& map);
/// Bounds for the components [first, first+count) of G only.
NormBounds norm_bounds(const TorusMap& map, std::size_t first, std::size_t count);

struct InverseLift {
  Vector w;
  double residual = 0.0;  // |F^(w) - z|
  double rho = 0.0;       // contraction rate |M^-1| Lip(G)
  int iterations = 0;
};

/// Unique preimage under the lift via the contraction w <- M^-1 (z - G(w)).
/// Throws when M is singular or |M^-1| Lip(G) >= 1.
InverseLift invert_lift(const TorusMap& map, const Vector& z, double tol);

/// Conjugated spec for S^-1 F(S z): M' = S^-1 M S, G'(z) = S^-1 G(S z).
specdsl::TorusMapSpec change_coordinates(const specdsl::TorusMapSpec& spec, const intlat::UnimodularMatrix& S);

// Torus helpers.
Vector wrap(const Vector& z);
double wrap(double x);
/// Euclidean combination of per-coordinate circle distances.
double torus_distance(const Vector& a, const Vector& b);
double operator_norm(const Matrix& a);

/// Visits the points (i + offset) / R, i in {0..R-1}^d, in lexicographic order.
template <class Fn>
void for_each_grid_point(std::size_t dim, int resolution, Fn&& fn, double offset = 0.0) {
  std::vector<int> idx(dim, 0);
  Vector p(static_cast<Eigen::Index>(dim));
  for (;;) {
    for (std::size_t i = 0; i < dim; ++i)
      p[static_cast<Eigen::Index>(i)] = (static_cast<double>(idx[i]) + offset) / resolution;
    fn(static_cast<const Vector&>(p));
    std::size_t i = dim;
    while (i-- > 0) {
      if (++idx[i] < resolution) break;
      idx[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) return;
  }
}

}  // namespace torusconj::dynamics

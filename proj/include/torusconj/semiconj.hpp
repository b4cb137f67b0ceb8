#pragma once

// Semi-conjugacy Phi from a torus map to x -> Ax mod 1 on the first k
// coordinates, evaluated as a truncated series with a certified tail bound.
//
// Expanding A:   Phi^(z) = z_W + sum_{n=1..N} A^-n G_W(F^{n-1} z)
// Hyperbolic A:  W = W^u + W^s, with the unstable part as above and the
//                stable part  -sum_{j=1..N} A_s^{j-1} G_W(F^{-j} z)  (both
//                through their oblique projectors).
//
// Orbits are iterated on the torus; G is 1-periodic, so G(F^n z) only depends
// on F^n z mod 1, and the reduction keeps the arguments of G of order one.

#include <algorithm>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "torusconj/dynamics.hpp"
#include "torusconj/intlat.hpp"

namespace torusconj::semiconj {

using dynamics::Matrix;
using dynamics::Vector;

enum class Mode { expanding, hyperbolic };
std::string to_string(Mode m);

struct PhiValue {
  Vector value;
  double error_bound = 0.0;
};

/// Bound on sum_{n >= n0} |V B^n P| closed by a geometric tail.
struct TailBound {
  double head = 0.0;  // sum of the exactly computed norms inside the truncation
  double tail = 0.0;  // certified bound on the discarded norms
  double rho = 0.0;   // |V B^p P|^(1/p)
  int p = 0;
};

class SemiConjEngine {
 public:
  const dynamics::TorusMap& map() const { return map_; }
  Mode mode() const { return mode_; }
  std::size_t k() const { return k_; }
  std::size_t k_u() const { return k_u_; }
  std::size_t k_s() const { return k_ - k_u_; }
  int truncation() const { return n_; }
  const Matrix& A() const { return a_; }
  double A_norm() const { return a_norm_; }
  const Matrix& unstable_basis() const { return v_u_; }
  const Matrix& stable_basis() const { return v_s_; }
  const Matrix& A_u() const { return a_u_; }
  const Matrix& A_s() const { return a_s_; }
  /// Oblique projectors of W onto W^u along W^s and vice versa.
  const Matrix& unstable_projector() const { return p_u_; }
  const Matrix& stable_projector() const { return p_s_; }

  /// Bound on |G_W|, the first k components of G.
  double g_sup_W() const { return g_w_; }
  /// Certified truncation error eps_N of Phi^.
  double tail() const { return eps_u_ + eps_s_; }
  double tail_unstable() const { return eps_u_; }
  double tail_stable() const { return eps_s_; }
  double rho() const { return std::max(tail_u_.rho, tail_s_.rho); }
  const TailBound& unstable_tail_bound() const { return tail_u_; }
  const TailBound& stable_tail_bound() const { return tail_s_; }
  /// C_A = sum_{n>=1} |A^-n| (expanding mode), from computed norms plus tail.
  double C_A() const { return tail_u_.head + tail_u_.tail; }
  /// Floating-point allowance added to every reported ceiling.
  double rounding_allowance() const { return rounding_; }
  /// (|A|+1) eps_N + rounding allowance: ceiling for Phi(F) - A Phi.
  double ceiling() const { return (a_norm_ + 1.0) * tail() + rounding_; }

 private:
  friend SemiConjEngine build_engine(const specdsl::TorusMapSpec&, const intlat::BlockForm&, int);
  friend PhiValue phi_hat(const SemiConjEngine&, const Vector&);

  explicit SemiConjEngine(dynamics::TorusMap map) : map_(std::move(map)) {}

  dynamics::TorusMap map_;
  Mode mode_ = Mode::expanding;
  std::size_t k_ = 0;
  std::size_t k_u_ = 0;
  int n_ = 0;
  Matrix a_;
  double a_norm_ = 0.0;
  Matrix v_u_, v_s_, a_u_, a_s_, p_u_, p_s_;
  std::vector<Matrix> t_u_;  // t_u_[n-1] = V_u A_u^-n Pi_u
  std::vector<Matrix> t_s_;  // t_s_[j-1] = V_s A_s^(j-1) Pi_s
  TailBound tail_u_, tail_s_;
  double g_w_ = 0.0;
  double eps_u_ = 0.0;
  double eps_s_ = 0.0;
  double rounding_ = 0.0;
  double inverse_tol_ = 0.0;
};

/// `spec` must already be in the coordinates of `block` (M == S^-1 M0 S).
/// Requires the first k coordinates to be a factor unless k == d.
SemiConjEngine build_engine(const specdsl::TorusMapSpec& spec, const intlat::BlockForm& block, int truncation);

/// Smallest N with eps_N < 1e-9; throws when the contraction rate exceeds 0.9.
int default_truncation(const specdsl::TorusMapSpec& spec, const intlat::BlockForm& block);

PhiValue phi_hat(const SemiConjEngine& engine, const Vector& z);
PhiValue phi_torus(const SemiConjEngine& engine, const Vector& theta);

struct ResidualReport {
  double max_residual = 0.0;
  Vector argmax;
  double ceiling = 0.0;
  std::size_t points = 0;
  bool within_ceiling() const { return max_residual <= ceiling; }
};

/// max over the lattice {i/R}^d of dist(Phi(F(theta)), A Phi(theta) mod 1).
ResidualReport semiconjugacy_residual(const SemiConjEngine& engine, int resolution);

/// |Phi^(z+m) - Phi^(z) - proj_W m|.
double periodicity_check(const SemiConjEngine& engine, const Vector& z, const Vector& shift);

struct FiberBoundReport {
  double offset_bound = 0.0;       // C_A |G_W| + eps_N
  double max_offset = 0.0;         // max |Phi^(z) - proj_W z|
  double reverse_bound = 0.0;      // 2 C_A |G_W| + 2 eps_N
  double max_reverse = 0.0;        // max ||Phi^ z1 - Phi^ z2| - |z1_W - z2_W||
  double worst_slack = 0.0;        // min over both checks of bound - observed
  std::size_t pairs = 0;
  bool pass() const { return max_offset <= offset_bound && max_reverse <= reverse_bound; }
};

FiberBoundReport fiber_bound_checks(const SemiConjEngine& engine,
                                    const std::vector<std::pair<Vector, Vector>>& pairs);

/// CSV with columns theta_1..theta_d, phi_1..phi_k, error_bound.
void write_phi_grid_csv(const SemiConjEngine& engine, int resolution, std::ostream& out);

using dynamics::for_each_grid_point;

}  // namespace torusconj::semiconj

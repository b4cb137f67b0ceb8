#pragma once

// Cone fields C_a = {v = (a, b) : |b| <= alpha |a|} around the first k
// coordinates, checked against DF over a grid with Lipschitz padding.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "torusconj/dynamics.hpp"
#include "torusconj/intlat.hpp"
#include "torusconj/specdsl.hpp"

namespace torusconj::cones {

using dynamics::Matrix;
using dynamics::Vector;

inline constexpr double infinite_alpha = std::numeric_limits<double>::infinity();

struct ConeParams {
  std::size_t k = 1;
  double alpha = 1.0;  // infinite_alpha for the whole space
  double K = 1.0;

  bool infinite() const { return alpha == infinite_alpha; }
  /// Checks k and alpha; K only matters for verdicts.
  void validate(std::size_t dim) const;
};

bool cone_contains(const ConeParams& params, const Vector& v);

/// Lower bounds from the quadratic-form method.
struct PointwiseCheck {
  double invariance_margin = 0.0;  // <= min over unit v in the cone of alpha|a'| - |b'|
  double expansion_factor = 0.0;   // <= min over unit v in the cone of |a'|
};

PointwiseCheck pointwise_cone_check(const Matrix& L, const ConeParams& params);

/// Minima over `rays` unit vectors in the cone (upper bounds on the true minima).
PointwiseCheck sample_cone_check(const Matrix& L, const ConeParams& params, int rays, std::uint64_t seed);

/// Largest singular value of L restricted to the last d-k coordinates.
double restricted_norm(const Matrix& L, std::size_t k);

struct ConeCertificate {
  ConeParams params;
  int grid_resolution = 0;
  double padding = 0.0;             // bound on |DF(z') - DF(z)| inside a cell
  double invariance_margin = 0.0;   // min over cell centres
  double invariance_padding = 0.0;  // sqrt(1 + alpha^2) * padding
  double expansion_factor = 0.0;    // min over cell centres
  double expansion_margin = 0.0;    // expansion_factor - padding - K
  std::optional<double> domination_margin;  // K - (max restricted norm + padding)
  double max_restricted_norm = 0.0;
  Vector worst_invariance_cell;
  Vector worst_expansion_cell;
  Vector worst_domination_cell;
  bool a2_pass = false;
  std::optional<bool> a4_pass;

  double padded_invariance() const { return invariance_margin - invariance_padding; }
  double padded_expansion() const { return expansion_factor - padding; }
};

/// `spec` must be in coordinates where the cone core is the first k axes.
ConeCertificate verify_A2(const specdsl::TorusMapSpec& spec, const ConeParams& params, int grid_resolution);
/// verify_A2 plus domination; a4_pass implies a2_pass.
ConeCertificate verify_A4(const specdsl::TorusMapSpec& spec, const ConeParams& params, int grid_resolution);

/// The same certificate judged against another expansion constant.
ConeCertificate with_K(ConeCertificate cert, double K);

/// 1 / sqrt(1 + alpha^2): lower bound for |a| over unit cone vectors.
double tau(const ConeParams& params);

/// 0.5 (|m| - 1) for a symmetric M with integer eigenvalue m, |m| > 1.
double delta_bound(const intlat::IntMatrix& M, const intlat::Integer& m);

/// Polygonal length of F^ along z + s*direction, s in [0, length], divided by length.
double image_length_ratio(const dynamics::TorusMap& map, const Vector& z, const Vector& direction, double length,
                          int samples = 1000);

inline const std::vector<double>& default_alphas() {
  static const std::vector<double> a{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  return a;
}

}  // namespace torusconj::cones

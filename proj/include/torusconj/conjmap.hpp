#pragma once

// The conjugacy H(z) = (Phi(z), z_Y) to a skew product over x -> Ax mod 1,
// its inverse along fibers of Phi, and checks on the traced fibers.
//
// For k = 1 the fiber point on each line parallel to the first axis is found
// by a bracketed root search; Phi^ - proj_W is bounded, which fixes the
// bracket, and Phi^ grows strictly along the line, which makes the root
// unique. For k > 1 an uncertified damped iteration is used instead.

#include <iosfwd>
#include <vector>

#include "torusconj/semiconj.hpp"

namespace torusconj::conjmap {

using dynamics::Matrix;
using dynamics::Vector;
using semiconj::SemiConjEngine;

struct HPoint {
  Vector x;  // Phi(z) mod 1, in [0,1)^k
  Vector y;  // last d-k coordinates, in [0,1)^(d-k)
};

HPoint H_forward(const SemiConjEngine& engine, const Vector& z);

struct LiftPoint {
  Vector t;  // first k coordinates of the fiber point, as a lift
  Vector y;
  double residual = 0.0;       // |Phi^((t, y)) - x0|
  double min_slope = 0.0;      // smallest growth rate seen along the search line (k = 1)
  int iterations = 0;
  bool certified = false;      // bracketed search (k = 1)
};

/// The point (t, y0) with Phi^((t, y0)) = x0. Throws NumericalError when the
/// bracket has no sign change or Phi^ is not monotone along the line.
LiftPoint solve_fiber_point(const SemiConjEngine& engine, const Vector& x0, const Vector& y0, double tol);

/// A torus point z with H(z) = (x0, y0) within tol.
Vector H_inverse(const SemiConjEngine& engine, const Vector& x0, const Vector& y0, double tol);

/// Tolerance for H_inverse(H_forward(z)) = z: tol / tau + 2 eps_N / tau.
double round_trip_tolerance(const SemiConjEngine& engine, double tol, double tau);

struct FiberGraph {
  Vector x0;
  int resolution = 0;
  std::vector<Vector> y;  // lattice {i/R}^(d-k), lexicographic
  std::vector<Vector> t;
  std::vector<double> residuals;
  double max_residual = 0.0;
  double monotone_slope = 0.0;       // min observed growth of Phi^ along W
  double continuity_constant = 0.0;  // max |t(y) - t(y')| / h over grid neighbours
  double periodicity_error = 0.0;    // lattice shifts in y and x0
  double periodicity_bound = 0.0;    // 2 eps_N + tol
  double fiber_image_error = 0.0;    // max |Phi^(F^(t, y)) - A x0| mod 1
  double fiber_image_bound = 0.0;    // ceiling + |A| tol
  bool certified = false;

  bool pass(double tol) const {
    return max_residual <= tol && periodicity_error <= periodicity_bound && fiber_image_error <= fiber_image_bound;
  }
};

FiberGraph trace_fiber(const SemiConjEngine& engine, const Vector& theta0, int resolution, double tol);

struct SkewSample {
  Vector x, y;            // grid point (H coordinates)
  Vector base, fiber;     // H(F(H^-1(x, y)))
  double base_residual = 0.0;
};

struct SkewReport {
  int resolution = 0;
  double max_base_residual = 0.0;
  Vector argmax;
  double ceiling = 0.0;  // (|A|+1) eps_N + rounding + tol (1 + |A| / tau)
  std::vector<SkewSample> samples;
  bool certified = false;
  bool within_ceiling() const { return max_base_residual <= ceiling; }
};

SkewReport skew_product_residual(const SemiConjEngine& engine, int resolution, double tol, double tau);

struct SmoothnessReport {
  std::vector<int> resolutions;
  std::vector<double> slope_differences;  // max |slope_h - slope_h/2| at shared points
  bool decreasing = false;
  bool no_certificate = true;
};

/// `fibers` traced at resolutions R, 2R, 4R, ...; `dominated` is the A4 verdict.
SmoothnessReport fiber_smoothness_probe(const std::vector<FiberGraph>& fibers, bool dominated);

void write_fiber_csv(const FiberGraph& fiber, std::ostream& out);
void write_skew_csv(const SkewReport& report, std::ostream& out);

}  // namespace torusconj::conjmap

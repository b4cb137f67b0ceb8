#include "torusconj/conjmap.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "torusconj/error.hpp"

namespace torusconj::conjmap {

using dynamics::torus_distance;
using dynamics::wrap;
using semiconj::phi_hat;

namespace {

void require_expanding(const SemiConjEngine& e) {
  if (e.mode() != semiconj::Mode::expanding) throw PreconditionError("the conjugacy H needs an expanding block");
}

Vector join(const Vector& t, const Vector& y) {
  Vector z(t.size() + y.size());
  z << t, y;
  return z;
}

constexpr int kPrescan = 32;

LiftPoint solve_scalar(const SemiConjEngine& e, double x0, const Vector& y0, double tol) {
  auto f = [&](double t) {
    Vector z(1 + y0.size());
    z << t, y0;
    return phi_hat(e, z).value[0] - x0;
  };
  // |Phi^(z) - z_1| <= C_A |G_W| + eps_N, so these endpoints give f < 0 < f.
  const double c = e.C_A() * e.g_sup_W() + e.tail();
  const double lo0 = x0 - 0.5 - c;
  const double hi0 = x0 + 0.5 + c;

  LiftPoint out;
  out.y = y0;
  out.certified = true;
  out.min_slope = std::numeric_limits<double>::infinity();
  double ts[kPrescan + 1];
  double fs[kPrescan + 1];
  for (int i = 0; i <= kPrescan; ++i) {
    ts[i] = lo0 + (hi0 - lo0) * i / kPrescan;
    fs[i] = f(ts[i]);
  }
  if (!(fs[0] < 0.0 && fs[kPrescan] > 0.0))
    throw NumericalError("fiber bracket has no sign change: Phi^ violates its offset bound");
  int cell = -1;
  for (int i = 0; i < kPrescan; ++i) {
    if (!(fs[i + 1] > fs[i]))
      throw NumericalError("Phi^ is not increasing along the fiber line: inconsistent with the cone certificate");
    out.min_slope = std::min(out.min_slope, (fs[i + 1] - fs[i]) / (ts[i + 1] - ts[i]));
    if (fs[i] <= 0.0 && fs[i + 1] > 0.0) cell = i;
  }

  // Illinois variant of regula falsi inside the bracketing cell. The target is
  // tighter than tol: tau need not bound the slope of Phi^ from below, and the
  // round-trip budget divides the residual by tau.
  const double target = tol / 100.0;
  double a = ts[cell], fa = fs[cell];
  double b = ts[cell + 1], fb = fs[cell + 1];
  double ga = fa, gb = fb;  // unscaled endpoint values for the monotonicity check
  double t = a, ft = fa;
  int side = 0;
  for (out.iterations = 0; out.iterations < 200; ++out.iterations) {
    if (std::abs(ft) <= target && out.iterations > 0) break;
    if (fa == 0.0) {
      t = a;
      ft = 0.0;
      break;
    }
    double m = (a * fb - b * fa) / (fb - fa);
    if (!(m > a && m < b)) m = 0.5 * (a + b);
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(m))) {
      t = m;
      ft = f(m);
      break;
    }
    const double fm = f(m);
    if (!(fm >= ga && fm <= gb))
      throw NumericalError("Phi^ is not monotone along the fiber line: inconsistent with the cone certificate");
    t = m;
    ft = fm;
    if (fm < 0.0) {
      a = m;
      fa = ga = fm;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = m;
      fb = gb = fm;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  out.t = Vector::Constant(1, t);
  out.residual = std::abs(ft);
  return out;
}

// Uncertified: Phi^ - proj_W is bounded, so t <- t - s (Phi^((t, y)) - x0)
// with step halving until the residual decreases.
LiftPoint solve_damped(const SemiConjEngine& e, const Vector& x0, const Vector& y0, double tol) {
  LiftPoint out;
  out.y = y0;
  out.t = x0;
  Vector r = phi_hat(e, join(out.t, y0)).value - x0;
  double rn = r.norm();
  for (out.iterations = 0; out.iterations < 500 && rn > tol; ++out.iterations) {
    double s = 1.0;
    for (;;) {
      const Vector cand = out.t - s * r;
      const Vector rc = phi_hat(e, join(cand, y0)).value - x0;
      if (rc.norm() < rn || s < 1e-6) {
        out.t = cand;
        r = rc;
        rn = rc.norm();
        break;
      }
      s *= 0.5;
    }
  }
  out.residual = rn;
  return out;
}

}  // namespace

HPoint H_forward(const SemiConjEngine& engine, const Vector& z) {
  require_expanding(engine);
  const auto k = static_cast<Eigen::Index>(engine.k());
  return HPoint{wrap(phi_hat(engine, z).value), wrap(Vector(z.tail(z.size() - k)))};
}

LiftPoint solve_fiber_point(const SemiConjEngine& engine, const Vector& x0, const Vector& y0, double tol) {
  require_expanding(engine);
  if (!(tol > 0.0)) throw PreconditionError("solver tolerance must be positive");
  const auto k = static_cast<Eigen::Index>(engine.k());
  const auto d = static_cast<Eigen::Index>(engine.map().dim());
  if (x0.size() != k || y0.size() != d - k) throw PreconditionError("solve_fiber_point: dimension mismatch");
  if (k == 1) return solve_scalar(engine, x0[0], y0, tol);
  return solve_damped(engine, x0, y0, tol);
}

Vector H_inverse(const SemiConjEngine& engine, const Vector& x0, const Vector& y0, double tol) {
  const LiftPoint p = solve_fiber_point(engine, x0, y0, tol);
  return wrap(join(p.t, p.y));
}

double round_trip_tolerance(const SemiConjEngine& engine, double tol, double tau) {
  if (!(tau > 0.0)) throw PreconditionError("tau must be positive");
  return tol / tau + 2.0 * engine.tail() / tau;
}

FiberGraph trace_fiber(const SemiConjEngine& engine, const Vector& theta0, int resolution, double tol) {
  require_expanding(engine);
  if (resolution < 2) throw PreconditionError("fiber grid resolution must be >= 2");
  const std::size_t k = engine.k();
  const std::size_t m = engine.map().dim() - k;
  const double h = 1.0 / resolution;

  FiberGraph g;
  g.x0 = theta0;
  g.resolution = resolution;
  g.certified = k == 1;
  g.monotone_slope = std::numeric_limits<double>::infinity();
  g.periodicity_bound = 2.0 * engine.tail() + tol;
  g.fiber_image_bound = engine.ceiling() + engine.A_norm() * tol;
  const Vector ax0 = engine.A() * theta0;

  auto solve = [&](const Vector& x, const Vector& y) {
    const LiftPoint p = solve_fiber_point(engine, x, y, tol);
    if (p.certified) g.monotone_slope = std::min(g.monotone_slope, p.min_slope);
    return p;
  };

  if (m == 0) {
    const LiftPoint p = solve(theta0, Vector(0));
    g.y.push_back(Vector(0));
    g.t.push_back(p.t);
    g.residuals.push_back(p.residual);
  } else {
    dynamics::for_each_grid_point(m, resolution, [&](const Vector& y) {
      const LiftPoint p = solve(theta0, y);
      g.y.push_back(y);
      g.t.push_back(p.t);
      g.residuals.push_back(p.residual);
    });
  }

  for (std::size_t i = 0; i < g.t.size(); ++i) {
    const Vector z = join(g.t[i], g.y[i]);
    g.max_residual = std::max(g.max_residual, g.residuals[i]);
    const Vector image = phi_hat(engine, dynamics::eval_lift(engine.map(), z)).value;
    g.fiber_image_error = std::max(g.fiber_image_error, torus_distance(image, ax0));
    // x0 -> x0 + e_j moves the fiber point by e_j.
    for (std::size_t j = 0; j < k; ++j) {
      Vector e = Vector::Zero(static_cast<Eigen::Index>(k));
      e[static_cast<Eigen::Index>(j)] = 1.0;
      const LiftPoint p = solve(theta0 + e, g.y[i]);
      g.periodicity_error = std::max(g.periodicity_error, (p.t - g.t[i] - e).norm());
    }
    // y -> y + e_j leaves the fiber point unchanged (proj_W of the shift is 0),
    // and the neighbour along axis j is at most one grid step away.
    std::size_t stride = 1;
    for (std::size_t jj = m; jj-- > 0;) {
      Vector e = Vector::Zero(static_cast<Eigen::Index>(m));
      e[static_cast<Eigen::Index>(jj)] = 1.0;
      const LiftPoint p = solve(theta0, g.y[i] + e);
      g.periodicity_error = std::max(g.periodicity_error, (p.t - g.t[i]).norm());
      const std::size_t idx = (i / stride) % static_cast<std::size_t>(resolution);
      const std::size_t nb = idx + 1 < static_cast<std::size_t>(resolution) ? i + stride : i + stride - stride * resolution;
      g.continuity_constant = std::max(g.continuity_constant, (g.t[nb] - g.t[i]).norm() / h);
      stride *= static_cast<std::size_t>(resolution);
    }
  }
  if (!g.certified) g.monotone_slope = 0.0;
  return g;
}

SkewReport skew_product_residual(const SemiConjEngine& engine, int resolution, double tol, double tau) {
  require_expanding(engine);
  if (resolution < 2) throw PreconditionError("skew grid resolution must be >= 2");
  if (!(tau > 0.0)) throw PreconditionError("tau must be positive");
  const auto k = static_cast<Eigen::Index>(engine.k());
  const auto d = static_cast<Eigen::Index>(engine.map().dim());
  SkewReport r;
  r.resolution = resolution;
  r.certified = k == 1;
  r.ceiling = engine.ceiling() + tol * (1.0 + engine.A_norm() / tau);
  r.argmax = Vector::Zero(d);
  dynamics::for_each_grid_point(engine.map().dim(), resolution, [&](const Vector& p) {
    SkewSample s;
    s.x = p.head(k);
    s.y = p.tail(d - k);
    const Vector z = H_inverse(engine, s.x, s.y, tol);
    const HPoint img = H_forward(engine, dynamics::eval_torus(engine.map(), z));
    s.base = img.x;
    s.fiber = img.y;
    s.base_residual = torus_distance(img.x, wrap(Vector(engine.A() * s.x)));
    if (s.base_residual > r.max_base_residual) {
      r.max_base_residual = s.base_residual;
      r.argmax = p;
    }
    r.samples.push_back(std::move(s));
  });
  return r;
}

namespace {

// Central differences of t along every y axis at the points of a coarser grid
// (every `step`-th point of this one), in the coarse lexicographic order.
std::vector<double> central_slopes(const FiberGraph& f, int step) {
  const std::size_t m = f.y.empty() ? 0 : static_cast<std::size_t>(f.y.front().size());
  const auto r = static_cast<std::size_t>(f.resolution);
  const double h = 1.0 / f.resolution;
  std::vector<double> out;
  for (std::size_t i = 0; i < f.t.size(); ++i) {
    bool on_coarse = true;
    std::size_t stride = 1;
    for (std::size_t j = 0; j < m; ++j, stride *= r)
      if ((i / stride) % r % static_cast<std::size_t>(step) != 0) on_coarse = false;
    if (!on_coarse) continue;
    stride = 1;
    for (std::size_t j = 0; j < m; ++j, stride *= r) {
      const std::size_t idx = (i / stride) % r;
      const std::size_t up = idx + 1 < r ? i + stride : i + stride - stride * r;
      const std::size_t dn = idx > 0 ? i - stride : i + stride * (r - 1);
      for (Eigen::Index c = 0; c < f.t[i].size(); ++c) out.push_back((f.t[up][c] - f.t[dn][c]) / (2.0 * h));
    }
  }
  return out;
}

}  // namespace

SmoothnessReport fiber_smoothness_probe(const std::vector<FiberGraph>& fibers, bool dominated) {
  SmoothnessReport rep;
  rep.no_certificate = !dominated;
  for (const auto& f : fibers) rep.resolutions.push_back(f.resolution);
  for (std::size_t l = 0; l + 1 < fibers.size(); ++l) {
    if (fibers[l + 1].resolution != 2 * fibers[l].resolution)
      throw PreconditionError("smoothness probe needs resolutions that double at each level");
    const std::vector<double> coarse = central_slopes(fibers[l], 1);
    const std::vector<double> fine = central_slopes(fibers[l + 1], 2);
    double diff = 0.0;
    for (std::size_t i = 0; i < coarse.size() && i < fine.size(); ++i) diff = std::max(diff, std::abs(coarse[i] - fine[i]));
    rep.slope_differences.push_back(diff);
  }
  rep.decreasing = rep.slope_differences.size() >= 2;
  for (std::size_t i = 1; i < rep.slope_differences.size(); ++i)
    if (!(rep.slope_differences[i] < rep.slope_differences[i - 1])) rep.decreasing = false;
  return rep;
}

void write_fiber_csv(const FiberGraph& fiber, std::ostream& out) {
  const Eigen::Index m = fiber.y.empty() ? 0 : fiber.y.front().size();
  const Eigen::Index k = fiber.x0.size();
  for (Eigen::Index i = 0; i < m; ++i) out << "y_" << i + 1 << ',';
  for (Eigen::Index i = 0; i < k; ++i) out << "t_" << i + 1 << ',';
  out << "residual\n";
  out.precision(17);
  for (std::size_t p = 0; p < fiber.t.size(); ++p) {
    for (Eigen::Index i = 0; i < m; ++i) out << fiber.y[p][i] << ',';
    for (Eigen::Index i = 0; i < k; ++i) out << fiber.t[p][i] << ',';
    out << fiber.residuals[p] << '\n';
  }
}

void write_skew_csv(const SkewReport& report, std::ostream& out) {
  if (report.samples.empty()) return;
  const Eigen::Index k = report.samples.front().x.size();
  const Eigen::Index m = report.samples.front().y.size();
  for (Eigen::Index i = 0; i < k; ++i) out << "x_" << i + 1 << ',';
  for (Eigen::Index i = 0; i < m; ++i) out << "y_" << i + 1 << ',';
  for (Eigen::Index i = 0; i < k; ++i) out << "base_" << i + 1 << ',';
  for (Eigen::Index i = 0; i < m; ++i) out << "fiber_" << i + 1 << ',';
  out << "base_residual\n";
  out.precision(17);
  for (const auto& s : report.samples) {
    for (Eigen::Index i = 0; i < k; ++i) out << s.x[i] << ',';
    for (Eigen::Index i = 0; i < m; ++i) out << s.y[i] << ',';
    for (Eigen::Index i = 0; i < k; ++i) out << s.base[i] << ',';
    for (Eigen::Index i = 0; i < m; ++i) out << s.fiber[i] << ',';
    out << s.base_residual << '\n';
  }
}

}  // namespace torusconj::conjmap

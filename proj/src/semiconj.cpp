#include "torusconj/semiconj.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace torusconj::semiconj {

using dynamics::operator_norm;
using dynamics::wrap;

std::string to_string(Mode m) { return m == Mode::expanding ? "expanding" : "hyperbolic"; }

namespace {

constexpr double kUnitTol = 1e-9;

// Orthonormal basis of the dominant m-dimensional invariant subspace of B,
// by orthogonal iteration. Requires a spectral gap after the m-th eigenvalue.
Matrix dominant_subspace(const Matrix& b, Eigen::Index m) {
  const Eigen::Index n = b.rows();
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  Matrix q(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) q(i, j) = normal(rng);
  const double scale = std::max(operator_norm(b), 1.0);
  for (int it = 0; it < 100000; ++it) {
    Matrix z = b * q;
    Eigen::HouseholderQR<Matrix> qr(z);
    q = qr.householderQ() * Matrix::Identity(n, m);
    if (it % 8 == 7) {
      Matrix bq = b * q;
      if ((bq - q * (q.transpose() * bq)).norm() < 1e-14 * scale) return q;
    }
  }
  throw NumericalError("hyperbolic splitting did not converge (spectral gap too small)");
}

// Bound for sum_{n >= hi+1} |V B^n P|; `head` sums the norms for n in [lo, hi].
// `family` receives V B^n P for n = 0, 1, 2, ...
TailBound semigroup_tail(const Matrix& v, const Matrix& b, const Matrix& p, int lo, int hi, int max_p,
                         std::vector<Matrix>* family) {
  TailBound tb;
  if (v.cols() == 0) return tb;
  std::vector<double> norms;
  Matrix power = Matrix::Identity(b.rows(), b.cols());
  // Norms are needed up to hi + p; p <= max_p.
  const int last = hi + std::max(max_p, 1);
  for (int n = 0; n <= last; ++n) {
    Matrix qn = v * power * p;
    norms.push_back(operator_norm(qn));
    if (family && n >= lo && n <= hi) family->push_back(std::move(qn));
    power = b * power;
  }
  for (int n = lo; n <= hi; ++n) tb.head += norms[static_cast<std::size_t>(n)];
  for (int q = 1; q <= max_p; ++q) {
    if (norms[static_cast<std::size_t>(q)] < 1.0) {
      tb.p = q;
      break;
    }
  }
  if (tb.p == 0)
    throw NumericalError("no power p <= N with |A^-p| < 1: the block is too close to the unit circle; raise N");
  const double rp = norms[static_cast<std::size_t>(tb.p)];
  tb.rho = std::pow(rp, 1.0 / tb.p);
  double s = 0.0;
  for (int r = 0; r < tb.p; ++r) s += norms[static_cast<std::size_t>(hi + 1 + r)];
  tb.tail = s / (1.0 - rp);
  return tb;
}

}  // namespace

SemiConjEngine build_engine(const specdsl::TorusMapSpec& spec, const intlat::BlockForm& block, int truncation) {
  if (truncation < 1) throw PreconditionError("truncation depth must be >= 1");
  spec.validate();
  if (!(spec.M == block.conjugated))
    throw PreconditionError("spec is not in the block coordinates (M != S^-1 M S); apply change_coordinates first");
  const std::size_t d = spec.dim;
  const std::size_t k = block.k;
  if (k < d && !block.first_coords_are_factor())
    throw PreconditionError("block form has a nonzero top-right block: the first k coordinates are not a factor");

  SemiConjEngine e{dynamics::TorusMap(spec)};
  switch (block.classification) {
    case intlat::Classification::expanding: e.mode_ = Mode::expanding; break;
    case intlat::Classification::hyperbolic: e.mode_ = Mode::hyperbolic; break;
    case intlat::Classification::neither:
      throw PreconditionError("block A is neither expanding nor hyperbolic");
  }
  e.k_ = k;
  e.n_ = truncation;
  e.a_ = block.A.to_double();
  e.a_norm_ = operator_norm(e.a_);
  const auto ki = static_cast<Eigen::Index>(k);

  if (e.mode_ == Mode::hyperbolic) {
    const intlat::Integer det = intlat::determinant(spec.M);
    if (det != 1 && det != -1)
      throw PreconditionError("hyperbolic mode needs an invertible torus map: |det M| = " + intlat::Integer(abs(det)).get_str());
    const double rho = operator_norm(e.map_.M_inv()) * dynamics::norm_bounds(e.map_).g_lip;
    if (rho >= 1.0)
      throw PreconditionError("hyperbolic mode needs |M^-1| Lip(G) < 1 (got " + std::to_string(rho) + ")");
  }

  Eigen::EigenSolver<Matrix> es(e.a_, false);
  Eigen::Index ku = 0;
  for (Eigen::Index i = 0; i < ki; ++i)
    if (std::abs(es.eigenvalues()[i]) > 1.0 + kUnitTol) ++ku;
  if (e.mode_ == Mode::expanding) ku = ki;
  e.k_u_ = static_cast<std::size_t>(ku);
  const Eigen::Index ks = ki - ku;

  if (ks == 0) {
    e.v_u_ = Matrix::Identity(ki, ki);
    e.v_s_ = Matrix(ki, 0);
  } else if (ku == 0) {
    e.v_u_ = Matrix(ki, 0);
    e.v_s_ = Matrix::Identity(ki, ki);
  } else {
    e.v_u_ = dominant_subspace(e.a_, ku);
    e.v_s_ = dominant_subspace(e.a_.inverse(), ks);
  }
  Matrix v(ki, ki);
  v << e.v_u_, e.v_s_;
  const Matrix pi = v.inverse();
  const Matrix pi_u = pi.topRows(ku);
  const Matrix pi_s = pi.bottomRows(ks);
  e.a_u_ = pi_u * e.a_ * e.v_u_;
  e.a_s_ = pi_s * e.a_ * e.v_s_;
  e.p_u_ = e.v_u_ * pi_u;
  e.p_s_ = e.v_s_ * pi_s;

  if (ku > 0)
    e.tail_u_ = semigroup_tail(e.v_u_, e.a_u_.inverse(), pi_u, 1, truncation, truncation, &e.t_u_);
  if (ks > 0)
    e.tail_s_ = semigroup_tail(e.v_s_, e.a_s_, pi_s, 0, truncation - 1, truncation, &e.t_s_);

  e.g_w_ = dynamics::norm_bounds(e.map_, 0, k).g_sup;
  e.eps_u_ = e.g_w_ * e.tail_u_.tail;
  e.eps_s_ = e.g_w_ * e.tail_s_.tail;
  e.inverse_tol_ = e.tail() > 0.0 ? e.tail() / 10.0 : 1e-15;

  const double u = std::numeric_limits<double>::epsilon();
  const double growth = (1.0 + e.a_norm_) * (1.0 + e.a_norm_);
  e.rounding_ = 16.0 * (truncation + 2) * u * growth;
  if (ks > 0) {
    const double g_lip_w = dynamics::norm_bounds(e.map_, 0, k).g_lip;
    e.rounding_ += truncation * e.inverse_tol_ * g_lip_w * e.tail_s_.head * (1.0 + e.a_norm_);
  }
  return e;
}

int default_truncation(const specdsl::TorusMapSpec& spec, const intlat::BlockForm& block) {
  constexpr double target = 1e-9;
  constexpr int max_n = 2000;
  const SemiConjEngine probe = build_engine(spec, block, 256);
  if (probe.rho() > 0.9)
    throw NumericalError("contraction rate " + std::to_string(probe.rho()) +
                         " exceeds 0.9; choose the truncation depth explicitly");
  for (int n = 1; n <= max_n; ++n) {
    try {
      if (build_engine(spec, block, n).tail() < target) return n;
    } catch (const NumericalError&) {
      // No closing power p <= n yet.
    }
  }
  throw NumericalError("no truncation depth up to 2000 reaches the 1e-9 tail target");
}

PhiValue phi_hat(const SemiConjEngine& e, const Vector& z) {
  const dynamics::TorusMap& map = e.map_;
  if (static_cast<std::size_t>(z.size()) != map.dim()) throw PreconditionError("phi_hat: dimension mismatch");
  const auto ki = static_cast<Eigen::Index>(e.k_);
  PhiValue out{z.head(ki), e.tail()};
  const Vector x = wrap(z);
  Vector g(ki);
  if (!e.t_u_.empty()) {
    Vector y = x;
    for (int n = 1; n <= e.n_; ++n) {
      g.setZero();
      map.add_G(y, 0, e.k_, g);
      out.value += e.t_u_[static_cast<std::size_t>(n - 1)] * g;
      if (n < e.n_) y = wrap(dynamics::eval_lift(map, y));
    }
  }
  if (!e.t_s_.empty()) {
    Vector y = x;
    for (int j = 1; j <= e.n_; ++j) {
      y = wrap(dynamics::invert_lift(map, y, e.inverse_tol_).w);
      g.setZero();
      map.add_G(y, 0, e.k_, g);
      out.value -= e.t_s_[static_cast<std::size_t>(j - 1)] * g;
    }
  }
  return out;
}

PhiValue phi_torus(const SemiConjEngine& engine, const Vector& theta) {
  PhiValue v = phi_hat(engine, theta);
  v.value = wrap(v.value);
  return v;
}

ResidualReport semiconjugacy_residual(const SemiConjEngine& engine, int resolution) {
  if (resolution < 1) throw PreconditionError("grid resolution must be positive");
  ResidualReport r;
  r.ceiling = engine.ceiling();
  r.argmax = Vector::Zero(static_cast<Eigen::Index>(engine.map().dim()));
  const Matrix& a = engine.A();
  for_each_grid_point(engine.map().dim(), resolution, [&](const Vector& theta) {
    const Vector image = dynamics::eval_torus(engine.map(), theta);
    const Vector lhs = phi_torus(engine, image).value;
    const Vector rhs = wrap(Vector(a * phi_torus(engine, theta).value));
    const double res = dynamics::torus_distance(lhs, rhs);
    if (res > r.max_residual || r.points == 0) {
      r.max_residual = res;
      r.argmax = theta;
    }
    ++r.points;
  });
  return r;
}

double periodicity_check(const SemiConjEngine& engine, const Vector& z, const Vector& shift) {
  const auto ki = static_cast<Eigen::Index>(engine.k());
  const Vector lhs = phi_hat(engine, z + shift).value;
  const Vector rhs = phi_hat(engine, z).value + shift.head(ki);
  return (lhs - rhs).norm();
}

FiberBoundReport fiber_bound_checks(const SemiConjEngine& engine,
                                    const std::vector<std::pair<Vector, Vector>>& pairs) {
  if (engine.mode() != Mode::expanding) throw PreconditionError("fiber bound checks need expanding mode");
  const auto ki = static_cast<Eigen::Index>(engine.k());
  FiberBoundReport r;
  const double cg = engine.C_A() * engine.g_sup_W();
  r.offset_bound = cg + engine.tail();
  r.reverse_bound = 2.0 * cg + 2.0 * engine.tail();
  for (const auto& [z1, z2] : pairs) {
    const Vector p1 = phi_hat(engine, z1).value;
    const Vector p2 = phi_hat(engine, z2).value;
    const double o1 = (p1 - z1.head(ki)).norm();
    const double o2 = (p2 - z2.head(ki)).norm();
    r.max_offset = std::max({r.max_offset, o1, o2});
    const double rev = std::abs((p1 - p2).norm() - (z1.head(ki) - z2.head(ki)).norm());
    r.max_reverse = std::max(r.max_reverse, rev);
    ++r.pairs;
  }
  r.worst_slack = std::min(r.offset_bound - r.max_offset, r.reverse_bound - r.max_reverse);
  return r;
}

void write_phi_grid_csv(const SemiConjEngine& engine, int resolution, std::ostream& out) {
  const std::size_t d = engine.map().dim();
  for (std::size_t i = 0; i < d; ++i) out << "theta_" << i + 1 << ',';
  for (std::size_t i = 0; i < engine.k(); ++i) out << "phi_" << i + 1 << ',';
  out << "error_bound\n";
  out.precision(17);
  for_each_grid_point(d, resolution, [&](const Vector& theta) {
    const PhiValue v = phi_torus(engine, theta);
    for (Eigen::Index i = 0; i < theta.size(); ++i) out << theta[i] << ',';
    for (Eigen::Index i = 0; i < v.value.size(); ++i) out << v.value[i] << ',';
    out << v.error_bound << '\n';
  });
}

}  // namespace torusconj::semiconj

#include "torusconj/cones.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "torusconj/error.hpp"

namespace torusconj::cones {

using dynamics::operator_norm;

void ConeParams::validate(std::size_t dim) const {
  if (k < 1 || k > dim) throw PreconditionError("cone core dimension must be in 1..d");
  if (!(alpha > 0.0)) throw PreconditionError("cone opening alpha must be positive");
}

bool cone_contains(const ConeParams& params, const Vector& v) {
  if (v.isZero(0.0)) throw PreconditionError("cone_contains: zero vector");
  if (params.infinite()) return true;
  const auto k = static_cast<Eigen::Index>(params.k);
  return v.tail(v.size() - k).norm() <= params.alpha * v.head(k).norm();
}

namespace {

double min_eigenvalue(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

// max over lambda in [0, hi] of the concave function f, by ternary search;
// returns the best value actually evaluated, so the result is attained.
double ternary_max(const std::function<double(double)>& f, double hi) {
  double lo = 0.0;
  double best = std::max(f(0.0), f(hi));
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    const double f1 = f(m1);
    const double f2 = f(m2);
    best = std::max({best, f1, f2});
    if (f1 < f2)
      lo = m1;
    else
      hi = m2;
  }
  return best;
}

}  // namespace

PointwiseCheck pointwise_cone_check(const Matrix& L, const ConeParams& params) {
  const auto d = L.rows();
  params.validate(static_cast<std::size_t>(d));
  const auto k = static_cast<Eigen::Index>(params.k);
  PointwiseCheck out;
  const double l_norm = operator_norm(L);
  const double hi = 1e6 * std::max(l_norm * l_norm, 1.0);

  Matrix p = Matrix::Zero(d, d);
  p.topLeftCorner(k, k).setIdentity();
  const Matrix ltpl = L.transpose() * p * L;

  if (params.infinite() || k == d) {
    out.expansion_factor = std::sqrt(std::max(0.0, min_eigenvalue(ltpl)));
    out.invariance_margin = infinite_alpha;
    return out;
  }

  Vector jd(d);
  jd.head(k).setConstant(params.alpha * params.alpha);
  jd.tail(d - k).setConstant(-1.0);
  const Matrix j = jd.asDiagonal();

  const double e2 = ternary_max([&](double lam) { return min_eigenvalue(ltpl - lam * j); }, hi);
  out.expansion_factor = std::sqrt(std::max(0.0, e2));

  // q bounds (alpha|a'| - |b'|)(alpha|a'| + |b'|) from below on the cone.
  const Matrix ltjl = L.transpose() * j * L;
  const double q = ternary_max([&](double lam) { return min_eigenvalue(ltjl - lam * j); }, hi);
  if (q >= 0.0) {
    out.invariance_margin = l_norm > 0.0 ? q / (std::sqrt(1.0 + params.alpha * params.alpha) * l_norm) : 0.0;
  } else {
    // alpha|a'| + |b'| >= min(alpha, 1) sigma_min(L); the margin is also >= -|L|.
    Eigen::JacobiSVD<Matrix> svd(L);
    const double s_min = svd.singularValues()[d - 1] * std::min(params.alpha, 1.0);
    out.invariance_margin = s_min > 0.0 ? std::max(q / s_min, -l_norm) : -l_norm;
  }
  return out;
}

PointwiseCheck sample_cone_check(const Matrix& L, const ConeParams& params, int rays, std::uint64_t seed) {
  const auto d = L.rows();
  params.validate(static_cast<std::size_t>(d));
  const auto k = static_cast<Eigen::Index>(params.k);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  PointwiseCheck out{infinite_alpha, infinite_alpha};
  Vector v(d);
  for (int i = 0; i < rays; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) v[j] = normal(rng);
    if (!params.infinite() && k < d) {
      v.head(k).normalize();
      v.tail(d - k).normalize();
      // Half of the rays lie on the boundary, where the margin is typically smallest.
      v.tail(d - k) *= params.alpha * (i % 2 == 0 ? 1.0 : unit(rng));
    }
    v.normalize();
    const Vector w = L * v;
    out.expansion_factor = std::min(out.expansion_factor, w.head(k).norm());
    if (!params.infinite() && k < d)
      out.invariance_margin = std::min(out.invariance_margin, params.alpha * w.head(k).norm() - w.tail(d - k).norm());
  }
  return out;
}

double restricted_norm(const Matrix& L, std::size_t k) {
  const auto ki = static_cast<Eigen::Index>(k);
  if (ki >= L.cols()) return 0.0;
  return operator_norm(L.rightCols(L.cols() - ki));
}

namespace {

ConeCertificate certify(const specdsl::TorusMapSpec& spec, const ConeParams& params, int grid_resolution,
                        bool domination) {
  spec.validate();
  params.validate(spec.dim);
  if (!std::isfinite(params.K) || params.K <= 0.0) throw PreconditionError("expansion constant K must be positive");
  if (grid_resolution < 2) throw PreconditionError("cone grid resolution must be >= 2");
  const dynamics::TorusMap map(spec);
  const auto d = static_cast<double>(spec.dim);

  ConeCertificate c;
  c.params = params;
  c.grid_resolution = grid_resolution;
  c.padding = dynamics::norm_bounds(map).dg_lip * std::sqrt(d) / (2.0 * grid_resolution);
  c.invariance_padding = params.infinite() ? 0.0 : std::sqrt(1.0 + params.alpha * params.alpha) * c.padding;
  c.invariance_margin = infinite_alpha;
  c.expansion_factor = infinite_alpha;
  c.max_restricted_norm = -1.0;

  dynamics::for_each_grid_point(
      spec.dim, grid_resolution,
      [&](const Vector& z) {
        const Matrix L = dynamics::jacobian(map, z);
        const PointwiseCheck pc = pointwise_cone_check(L, params);
        if (pc.invariance_margin < c.invariance_margin || c.worst_invariance_cell.size() == 0) {
          c.invariance_margin = pc.invariance_margin;
          c.worst_invariance_cell = z;
        }
        if (pc.expansion_factor < c.expansion_factor || c.worst_expansion_cell.size() == 0) {
          c.expansion_factor = pc.expansion_factor;
          c.worst_expansion_cell = z;
        }
        if (domination) {
          const double rn = restricted_norm(L, params.k);
          if (rn > c.max_restricted_norm) {
            c.max_restricted_norm = rn;
            c.worst_domination_cell = z;
          }
        }
      },
      0.5);

  if (!domination) c.max_restricted_norm = 0.0;
  return with_K(std::move(c), params.K);
}

}  // namespace

ConeCertificate verify_A2(const specdsl::TorusMapSpec& spec, const ConeParams& params, int grid_resolution) {
  return certify(spec, params, grid_resolution, false);
}

ConeCertificate verify_A4(const specdsl::TorusMapSpec& spec, const ConeParams& params, int grid_resolution) {
  return certify(spec, params, grid_resolution, true);
}

ConeCertificate with_K(ConeCertificate c, double K) {
  c.params.K = K;
  c.expansion_margin = c.padded_expansion() - K;
  c.a2_pass = c.padded_invariance() > 0.0 && c.padded_expansion() >= K;
  if (c.worst_domination_cell.size() > 0) {  // domination was measured
    c.domination_margin = K - (c.max_restricted_norm + c.padding);
    c.a4_pass = c.a2_pass && *c.domination_margin > 0.0;
  }
  return c;
}

double tau(const ConeParams& params) {
  if (params.infinite()) throw PreconditionError("tau is undefined for an infinite cone opening");
  if (!(params.alpha > 0.0)) throw PreconditionError("cone opening alpha must be positive");
  return 1.0 / std::sqrt(1.0 + params.alpha * params.alpha);
}

double delta_bound(const intlat::IntMatrix& M, const intlat::Integer& m) {
  if (M.rows() != M.cols()) throw PreconditionError("delta_bound: M must be square");
  if (!(M == M.transpose())) throw PreconditionError("delta_bound: M must be symmetric");
  if (abs(m) <= 1) throw PreconditionError("delta_bound: eigenvalue must satisfy |m| > 1");
  intlat::IntMatrix shifted = M;
  for (std::size_t i = 0; i < M.rows(); ++i) shifted(i, i) -= m;
  if (intlat::determinant(shifted) != 0)
    throw PreconditionError("delta_bound: " + m.get_str() + " is not an eigenvalue of M");
  return 0.5 * (intlat::Integer(abs(m)).get_d() - 1.0);
}

double image_length_ratio(const dynamics::TorusMap& map, const Vector& z, const Vector& direction, double length,
                          int samples) {
  if (!(length > 0.0)) throw PreconditionError("segment length must be positive");
  if (samples < 2) throw PreconditionError("need at least two sample points");
  const Vector u = direction.normalized();
  double total = 0.0;
  Vector prev = dynamics::eval_lift(map, z);
  for (int i = 1; i < samples; ++i) {
    const Vector next = dynamics::eval_lift(map, Vector(z + (length * i / (samples - 1)) * u));
    total += (next - prev).norm();
    prev = next;
  }
  return total / length;
}

}  // namespace torusconj::cones

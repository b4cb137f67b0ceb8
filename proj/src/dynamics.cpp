#include "torusconj/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace torusconj::dynamics {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// 2*pi*(k.z mod 1); reducing first keeps the phase exact under integer shifts.
double reduced_phase(const Vector& k, const Vector& z) {
  double p = k.dot(z);
  p -= std::floor(p);
  return two_pi * p;
}

}  // namespace

TorusMap::TorusMap(specdsl::TorusMapSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  m_ = spec_.M.to_double();
  if (intlat::determinant(spec_.M) != 0) {
    invertible_ = true;
    m_inv_ = m_.fullPivLu().inverse();
  }
  for (const auto& t : spec_.terms) {
    Vector k(static_cast<Eigen::Index>(spec_.dim));
    for (std::size_t j = 0; j < spec_.dim; ++j) k[static_cast<Eigen::Index>(j)] = static_cast<double>(t.frequency[j]);
    terms_.push_back(Term{t.component, t.coefficient, t.kind == specdsl::TrigKind::sin, std::move(k)});
  }
}

void TorusMap::add_G(const Vector& z, std::size_t first, std::size_t count, Eigen::Ref<Vector> out) const {
  for (const auto& t : terms_) {
    if (t.component < first || t.component >= first + count) continue;
    const double ph = reduced_phase(t.frequency, z);
    out[static_cast<Eigen::Index>(t.component - first)] += t.coefficient * (t.is_sin ? std::sin(ph) : std::cos(ph));
  }
}

Vector eval_G(const TorusMap& map, const Vector& z) {
  Vector g = Vector::Zero(static_cast<Eigen::Index>(map.dim()));
  map.add_G(z, 0, map.dim(), g);
  return g;
}

Vector eval_lift(const TorusMap& map, const Vector& z) { return map.M() * z + eval_G(map, z); }

Vector eval_torus(const TorusMap& map, const Vector& theta) { return wrap(eval_lift(map, theta)); }

Matrix jacobian(const TorusMap& map, const Vector& z) {
  Matrix j = map.M();
  for (const auto& t : map.terms_) {
    const double ph = reduced_phase(t.frequency, z);
    const double d = two_pi * t.coefficient * (t.is_sin ? std::cos(ph) : -std::sin(ph));
    j.row(static_cast<Eigen::Index>(t.component)) += d * t.frequency.transpose();
  }
  return j;
}

NormBounds norm_bounds(const TorusMap& map) { return norm_bounds(map, 0, map.dim()); }

NormBounds norm_bounds(const TorusMap& map, std::size_t first, std::size_t count) {
  std::vector<double> sup(count, 0.0), lip(count, 0.0), dlip(count, 0.0);
  for (const auto& t : map.terms_) {
    if (t.component < first || t.component >= first + count) continue;
    const std::size_t i = t.component - first;
    const double c = std::fabs(t.coefficient);
    const double kn = t.frequency.norm();
    sup[i] += c;
    lip[i] += two_pi * c * kn;
    dlip[i] += two_pi * two_pi * c * kn * kn;
  }
  auto euclid = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  return NormBounds{euclid(sup), euclid(lip), euclid(dlip)};
}

InverseLift invert_lift(const TorusMap& map, const Vector& z, double tol) {
  if (!map.invertible()) throw PreconditionError("invert_lift: winding matrix is singular");
  if (!(tol > 0.0)) throw PreconditionError("invert_lift: tolerance must be positive");
  const double rho = operator_norm(map.M_inv()) * norm_bounds(map).g_lip;
  if (rho >= 1.0)
    throw NumericalError("invert_lift: contraction margin violated (|M^-1| Lip(G) = " + std::to_string(rho) +
                         " >= 1); Newton-type inversion is not supported");
  InverseLift out;
  out.rho = rho;
  out.w = map.M_inv() * z;
  if (rho > 0.0) {
    const double scale = 1.0 + out.w.lpNorm<Eigen::Infinity>();
    const double floor_tol = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    const double stop = std::max(tol, floor_tol) * (1.0 - rho) / rho;
    for (out.iterations = 1; out.iterations <= 10000; ++out.iterations) {
      Vector next = map.M_inv() * (z - eval_G(map, out.w));
      const double step = (next - out.w).norm();
      out.w = std::move(next);
      if (step < stop) break;
    }
  }
  out.residual = (eval_lift(map, out.w) - z).norm();
  return out;
}

specdsl::TorusMapSpec change_coordinates(const specdsl::TorusMapSpec& spec, const intlat::UnimodularMatrix& S) {
  spec.validate();
  if (S.dim() != spec.dim) throw PreconditionError("change_coordinates: dimension mismatch");
  const intlat::IntMatrix& s = S.matrix();
  const intlat::IntMatrix s_inv = S.inverse();
  specdsl::TorusMapSpec out;
  out.dim = spec.dim;
  out.M = s_inv * spec.M * s;
  const intlat::IntMatrix st = s.transpose();
  for (const auto& t : spec.terms) {
    intlat::IntVector kappa(spec.dim);
    for (std::size_t j = 0; j < spec.dim; ++j) kappa[j] = static_cast<long>(t.frequency[j]);
    intlat::IntVector freq = st * kappa;
    std::vector<std::int64_t> f(spec.dim);
    for (std::size_t j = 0; j < spec.dim; ++j) {
      if (!freq[j].fits_slong_p()) throw NumericalError("change_coordinates: frequency overflow");
      f[j] = freq[j].get_si();
    }
    for (std::size_t r = 0; r < spec.dim; ++r) {
      const intlat::Integer& w = s_inv(r, t.component);
      if (w == 0) continue;
      out.terms.push_back(specdsl::TrigTerm{r, w.get_d() * t.coefficient, t.kind, f});
    }
  }
  out.canonicalize();
  return out;
}

double wrap(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

Vector wrap(const Vector& z) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = wrap(z[i]);
  return out;
}

double torus_distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double r = wrap(a[i] - b[i]);
    const double d = std::min(r, 1.0 - r);
    s += d * d;
  }
  return std::sqrt(s);
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()[0];
}

}  // namespace torusconj::dynamics

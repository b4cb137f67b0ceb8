#include "torusconj/report.hpp"

#include <cmath>

namespace torusconj::report {

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json vector(const dynamics::Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

json integer(const intlat::Integer& x) {
  if (x.fits_slong_p()) return x.get_si();
  return x.get_str();
}

json int_vector(const intlat::IntVector& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(integer(x));
  return a;
}

json int_matrix(const intlat::IntMatrix& m) {
  json a = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) a.push_back(int_vector(m.row(i)));
  return a;
}

json envelope(const std::string& command, const std::string& spec_path) {
  return json{{"schema_version", schema_version}, {"command", command}, {"spec", spec_path}};
}

json to_json(const dynamics::NormBounds& b) {
  return json{{"g_sup", number(b.g_sup)}, {"g_lip", number(b.g_lip)}, {"dg_lip", number(b.dg_lip)}};
}

json to_json(const intlat::BlockForm& b) {
  return json{{"S", int_matrix(b.S.matrix())},
              {"S_inv", int_matrix(b.S_inv)},
              {"conjugated", int_matrix(b.conjugated)},
              {"k", b.k},
              {"A", int_matrix(b.A)},
              {"classification", intlat::to_string(b.classification)},
              {"shape", intlat::to_string(b.shape)}};
}

json to_json(const intlat::TilingParallelotope& t) {
  return json{{"v", int_vector(t.v)}, {"W", int_matrix(t.W)}, {"det", integer(intlat::determinant(t.W))}};
}

json to_json(const semiconj::SemiConjEngine& e) {
  json j{{"mode", semiconj::to_string(e.mode())},
         {"k", e.k()},
         {"k_u", e.k_u()},
         {"k_s", e.k_s()},
         {"truncation", e.truncation()},
         {"A_norm", number(e.A_norm())},
         {"g_sup_W", number(e.g_sup_W())},
         {"tail", number(e.tail())},
         {"tail_unstable", number(e.tail_unstable())},
         {"tail_stable", number(e.tail_stable())},
         {"rho", number(e.rho())},
         {"rounding_allowance", number(e.rounding_allowance())},
         {"ceiling", number(e.ceiling())}};
  if (e.mode() == semiconj::Mode::expanding) j["C_A"] = number(e.C_A());
  return j;
}

json to_json(const semiconj::ResidualReport& r) {
  return json{{"max_residual", number(r.max_residual)},
              {"argmax", vector(r.argmax)},
              {"ceiling", number(r.ceiling)},
              {"points", r.points},
              {"pass", r.within_ceiling()}};
}

json to_json(const semiconj::FiberBoundReport& r) {
  return json{{"pairs", r.pairs},
              {"max_offset", number(r.max_offset)},
              {"offset_bound", number(r.offset_bound)},
              {"max_reverse", number(r.max_reverse)},
              {"reverse_bound", number(r.reverse_bound)},
              {"worst_slack", number(r.worst_slack)},
              {"pass", r.pass()}};
}

json to_json(const cones::ConeCertificate& c) {
  json j{{"k", c.params.k},
         {"alpha", number(c.params.alpha)},
         {"K", number(c.params.K)},
         {"grid_resolution", c.grid_resolution},
         {"padding", number(c.padding)},
         {"invariance_margin", number(c.invariance_margin)},
         {"invariance_padding", number(c.invariance_padding)},
         {"padded_invariance_margin", number(c.padded_invariance())},
         {"expansion_factor", number(c.expansion_factor)},
         {"padded_expansion_factor", number(c.padded_expansion())},
         {"expansion_margin", number(c.expansion_margin)},
         {"worst_invariance_cell", vector(c.worst_invariance_cell)},
         {"worst_expansion_cell", vector(c.worst_expansion_cell)},
         {"A2", c.a2_pass ? "pass" : "fail"}};
  if (c.domination_margin) {
    j["max_restricted_norm"] = number(c.max_restricted_norm);
    j["domination_margin"] = number(*c.domination_margin);
    j["worst_domination_cell"] = vector(c.worst_domination_cell);
    j["A4"] = *c.a4_pass ? "pass" : "fail";
  }
  return j;
}

json to_json(const conjmap::FiberGraph& f) {
  return json{{"x0", vector(f.x0)},
              {"resolution", f.resolution},
              {"points", f.t.size()},
              {"certified", f.certified},
              {"max_residual", number(f.max_residual)},
              {"monotone_slope", number(f.monotone_slope)},
              {"continuity_constant", number(f.continuity_constant)},
              {"periodicity_error", number(f.periodicity_error)},
              {"periodicity_bound", number(f.periodicity_bound)},
              {"fiber_image_error", number(f.fiber_image_error)},
              {"fiber_image_bound", number(f.fiber_image_bound)}};
}

json to_json(const conjmap::SkewReport& r) {
  return json{{"resolution", r.resolution},
              {"points", r.samples.size()},
              {"certified", r.certified},
              {"max_base_residual", number(r.max_base_residual)},
              {"argmax", vector(r.argmax)},
              {"ceiling", number(r.ceiling)},
              {"pass", r.within_ceiling()}};
}

json to_json(const conjmap::SmoothnessReport& r) {
  json diffs = json::array();
  for (double d : r.slope_differences) diffs.push_back(number(d));
  return json{{"resolutions", r.resolutions},
              {"slope_differences", diffs},
              {"decreasing", r.decreasing},
              {"no_certificate", r.no_certificate}};
}

}  // namespace torusconj::report

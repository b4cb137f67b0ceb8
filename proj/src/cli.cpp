#include "torusconj/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include "torusconj/cones.hpp"
#include "torusconj/conjmap.hpp"
#include "torusconj/error.hpp"
#include "torusconj/report.hpp"
#include "torusconj/semiconj.hpp"
#include "torusconj/specdsl.hpp"

namespace torusconj::cli {

namespace {

using report::json;
using Vector = dynamics::Vector;

// A failed verification that is not an operational error (exit 2).
class VerdictFailure : public Error {
 public:
  VerdictFailure(const std::string& msg, json partial) : Error(msg), partial_(std::move(partial)) {}
  const json& partial() const { return partial_; }

 private:
  json partial_;
};

struct Options {
  std::string command;
  std::string spec_path;
  std::optional<int> trunc;
  std::optional<int> grid;
  std::string alpha;
  std::optional<double> K;
  double tol = 1e-10;
  std::string sublattice;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out_dir;
};

struct Setup {
  specdsl::TorusMapSpec spec;    // as given
  intlat::BlockForm block;
  specdsl::TorusMapSpec coords;  // in the coordinates of block.S
  std::string source;            // how the block was chosen
};

std::vector<double> parse_alphas(const std::string& list) {
  if (list.empty()) return cones::default_alphas();
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf" || item == "infinity") {
      out.push_back(cones::infinite_alpha);
      continue;
    }
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(a > 0.0)) throw PreconditionError("--alpha: '" + item + "' is not a positive number");
    out.push_back(a);
  }
  if (out.empty()) throw PreconditionError("--alpha: empty list");
  return out;
}

std::vector<intlat::IntVector> parse_vectors(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw PreconditionError(what + " must be an array of integer vectors");
  std::vector<intlat::IntVector> out;
  for (const auto& row : arr) {
    if (!row.is_array()) throw PreconditionError(what + " must be an array of integer vectors");
    intlat::IntVector v;
    for (const auto& x : row) {
      if (x.is_number_integer())
        v.emplace_back(x.get<long>());
      else if (x.is_string())
        v.emplace_back(x.get<std::string>());
      else
        throw PreconditionError(what + " entries must be integers");
    }
    out.push_back(std::move(v));
  }
  return out;
}

// Picks the integer eigenvalue of largest modulus (positive on ties).
intlat::Integer dominant_integer_eigenvalue(const std::vector<intlat::Integer>& eig) {
  intlat::Integer best = eig.front();
  for (const auto& m : eig)
    if (abs(m) > abs(best) || (abs(m) == abs(best) && m > best)) best = m;
  return best;
}

intlat::BlockForm block_from_file(const specdsl::TorusMapSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read sublattice file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("sublattice file '" + path + "': " + e.what());
  }
  if (j.is_object() && j.contains("rows")) return intlat::factor_form(spec.M, parse_vectors(j["rows"], "sublattice rows"));
  const json& basis = j.is_object() && j.contains("basis") ? j["basis"] : j;
  return intlat::block_triangularize(spec.M, parse_vectors(basis, "sublattice basis"));
}

Setup choose_coordinates(const specdsl::TorusMapSpec& spec, const std::string& sublattice) {
  std::string source;
  intlat::BlockForm block = [&] {
    if (sublattice == "full") {
      source = "full";
      const intlat::IntMatrix id = intlat::IntMatrix::identity(spec.dim);
      std::vector<intlat::IntVector> basis;
      for (std::size_t i = 0; i < spec.dim; ++i) basis.push_back(id.col(i));
      return intlat::block_triangularize(spec.M, basis);
    }
    if (!sublattice.empty()) {
      source = "file:" + sublattice;
      return block_from_file(spec, sublattice);
    }
    const auto eig = intlat::integer_eigenvalues(spec.M);
    if (eig.empty())
      throw VerdictFailure("no integer eigenvalue: M has no invariant rational line; supply --sublattice",
                           json::object());
    const intlat::Integer m = dominant_integer_eigenvalue(eig);
    source = "eigenvalue " + m.get_str();
    return intlat::factor_form_for_eigenvalue(spec.M, m);
  }();
  specdsl::TorusMapSpec coords = dynamics::change_coordinates(spec, block.S);
  return Setup{spec, std::move(block), std::move(coords), source};
}

json setup_json(const Setup& s) {
  json j = report::to_json(s.block);
  j["source"] = s.source;
  j["spec_in_block_coordinates"] = specdsl::serialize_spec(s.coords);
  return j;
}

void check_grid(std::size_t dim, int resolution) {
  if (resolution < 2) throw PreconditionError("--grid must be >= 2");
  if (std::pow(static_cast<double>(resolution), static_cast<double>(dim)) > 16777216.0)
    throw PreconditionError("--grid " + std::to_string(resolution) + " gives more than 2^24 points in dimension " +
                            std::to_string(dim));
}

semiconj::SemiConjEngine make_engine(const Setup& s, const Options& o) {
  const int n = o.trunc ? *o.trunc : semiconj::default_truncation(s.coords, s.block);
  return semiconj::build_engine(s.coords, s.block, n);
}

Vector random_point(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> u;
  Vector z(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = u(rng);
  return z;
}

Vector random_shift(std::mt19937_64& rng, std::size_t dim, int bound) {
  std::uniform_int_distribution<int> u(-bound, bound);
  Vector m(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = u(rng);
  return m;
}

void write_file(const Options& o, const std::string& name, const std::string& content) {
  if (o.out_dir.empty()) return;
  std::filesystem::create_directories(o.out_dir);
  std::ofstream f(std::filesystem::path(o.out_dir) / name);
  if (!f) throw Error("cannot write '" + (std::filesystem::path(o.out_dir) / name).string() + "'");
  f << content;
}

std::string verdict(bool pass) { return pass ? "pass" : "fail"; }

// ---------------------------------------------------------------- commands

bool cmd_validate(const Options& o, const specdsl::TorusMapSpec& spec, json& rep) {
  const dynamics::TorusMap map(spec);
  std::mt19937_64 rng(o.seed);
  double max_err = 0.0;
  constexpr int points = 10;
  for (int i = 0; i < points; ++i) {
    const Vector z = random_point(rng, spec.dim);
    const Vector m = random_shift(rng, spec.dim, 3);
    const Vector lhs = dynamics::eval_lift(map, z + m);
    const Vector rhs = dynamics::eval_lift(map, z) + map.M() * m;
    max_err = std::max(max_err, (lhs - rhs).norm());
  }
  const bool pass = max_err <= 1e-9;
  rep["dim"] = spec.dim;
  rep["M"] = report::int_matrix(spec.M);
  rep["terms"] = spec.terms.size();
  rep["canonical"] = specdsl::serialize_spec(spec);
  rep["norm_bounds"] = report::to_json(dynamics::norm_bounds(map));
  rep["equivariance"] = json{{"points", points}, {"max_error", max_err}, {"bound", 1e-9}, {"pass", pass}};
  return pass;
}

bool cmd_analyze(const Options& o, const specdsl::TorusMapSpec& spec, json& rep) {
  const auto eig = intlat::integer_eigenvalues(spec.M);
  json cp = json::array();
  for (const auto& c : intlat::characteristic_polynomial(spec.M)) cp.push_back(report::integer(c));
  rep["characteristic_polynomial"] = cp;
  json list = json::array();
  for (const auto& m : eig) {
    json e{{"eigenvalue", report::integer(m)}};
    const intlat::IntVector v = intlat::left_eigenvector_integer(spec.M, m);
    const intlat::IntVector u = intlat::derive_invariant_line(spec.M, m);
    e["left_eigenvector"] = report::int_vector(v);
    e["invariant_line"] = report::int_vector(u);
    e["tiling"] = report::to_json(intlat::tiling_parallelotope(v));
    e["block_form"] = report::to_json(intlat::block_triangularize(spec.M, {u}));
    e["factor_form"] = report::to_json(intlat::factor_form_for_eigenvalue(spec.M, m));
    list.push_back(std::move(e));
  }
  rep["integer_eigenvalues"] = list;
  if (!o.sublattice.empty()) {
    rep["selected"] = setup_json(choose_coordinates(spec, o.sublattice));
  } else if (eig.empty()) {
    throw VerdictFailure(
        "no integer eigenvalue: the characteristic polynomial has no integer root, so M has no invariant rational "
        "line; supply --sublattice",
        rep);
  } else {
    rep["selected"] = setup_json(choose_coordinates(spec, ""));
  }
  return true;
}

bool cmd_phi(const Options& o, const specdsl::TorusMapSpec& spec, json& rep, std::string& table) {
  const Setup s = choose_coordinates(spec, o.sublattice);
  const auto engine = make_engine(s, o);
  const int r = o.grid.value_or(64);
  check_grid(spec.dim, r);
  std::ostringstream csv;
  semiconj::write_phi_grid_csv(engine, r, csv);
  table = csv.str();
  write_file(o, "phi_grid.csv", table);
  rep["coordinates"] = setup_json(s);
  rep["engine"] = report::to_json(engine);
  rep["grid_resolution"] = r;
  return true;
}

bool cmd_verify_semiconj(const Options& o, const specdsl::TorusMapSpec& spec, json& rep) {
  const Setup s = choose_coordinates(spec, o.sublattice);
  const auto engine = make_engine(s, o);
  const int r = o.grid.value_or(64);
  check_grid(spec.dim, r);
  rep["coordinates"] = setup_json(s);
  rep["engine"] = report::to_json(engine);

  const auto res = semiconj::semiconjugacy_residual(engine, r);
  rep["residual"] = report::to_json(res);
  bool pass = res.within_ceiling();

  std::mt19937_64 rng(o.seed);
  constexpr int samples = 1000;
  double per = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vector z = random_point(rng, spec.dim);
    per = std::max(per, semiconj::periodicity_check(engine, z, random_shift(rng, spec.dim, 5)));
  }
  const double per_bound = 2.0 * engine.tail() + engine.rounding_allowance();
  rep["periodicity"] = json{{"samples", samples}, {"max_error", per}, {"bound", per_bound}, {"pass", per <= per_bound}};
  pass = pass && per <= per_bound;

  if (engine.mode() == semiconj::Mode::expanding) {
    std::vector<std::pair<Vector, Vector>> pairs;
    for (int i = 0; i < samples; ++i) {
      const Vector a = random_point(rng, spec.dim) + random_shift(rng, spec.dim, 5);
      const Vector b = random_point(rng, spec.dim) + random_shift(rng, spec.dim, 5);
      pairs.emplace_back(a, b);
    }
    const auto fb = semiconj::fiber_bound_checks(engine, pairs);
    rep["offset_bounds"] = report::to_json(fb);
    pass = pass && fb.pass();
  }
  return pass;
}

struct ConeSearch {
  std::vector<cones::ConeCertificate> certs;
  std::optional<std::size_t> best;        // largest certified K among passes
  std::optional<std::size_t> narrowest;   // smallest alpha among passes
};

ConeSearch search_cones(const Options& o, const Setup& s, int r, std::mt19937_64& rng, json& rep) {
  const std::size_t k = s.block.k;
  ConeSearch cs;
  json list = json::array();
  const dynamics::TorusMap map(s.coords);
  for (double a : parse_alphas(o.alpha)) {
    cones::ConeCertificate c = cones::verify_A4(s.coords, cones::ConeParams{k, a, o.K.value_or(2.0)}, r);
    if (!o.K) {
      // Judge against the certified constant itself; it must exceed 1.
      c = cones::with_K(std::move(c), c.padded_expansion());
      c.a2_pass = c.a2_pass && c.params.K > 1.0;
      c.a4_pass = c.a2_pass && *c.domination_margin > 0.0;
    }
    json cj = report::to_json(c);
    // Cross-check the worst cells against ray sampling.
    for (const Vector* cell : {&c.worst_invariance_cell, &c.worst_expansion_cell}) {
      const auto L = dynamics::jacobian(map, *cell);
      const auto cert = cones::pointwise_cone_check(L, c.params);
      const auto smp = cones::sample_cone_check(L, c.params, 10000, rng());
      if (cert.expansion_factor > smp.expansion_factor + 1e-9 || cert.invariance_margin > smp.invariance_margin + 1e-9)
        throw NumericalError("cone certificate exceeds ray sampling at a worst cell");
    }
    cj["sampling_cross_check"] = "consistent";
    list.push_back(std::move(cj));
    cs.certs.push_back(std::move(c));
    const std::size_t i = cs.certs.size() - 1;
    if (cs.certs[i].a2_pass) {
      if (!cs.best || cs.certs[i].padded_expansion() > cs.certs[*cs.best].padded_expansion()) cs.best = i;
      if (!cs.narrowest || cs.certs[i].params.alpha < cs.certs[*cs.narrowest].params.alpha) cs.narrowest = i;
    }
  }
  rep["certificates"] = list;
  if (cs.best) {
    const auto& b = cs.certs[*cs.best];
    rep["best"] = json{{"alpha", report::number(b.params.alpha)}, {"K", report::number(b.params.K)},
                       {"A4", b.a4_pass.value_or(false) ? "pass" : "fail"}};
  }
  return cs;
}

bool cmd_verify_cones(const Options& o, const specdsl::TorusMapSpec& spec, json& rep) {
  const Setup s = choose_coordinates(spec, o.sublattice);
  const int r = o.grid.value_or(64);
  check_grid(spec.dim, r);
  rep["coordinates"] = setup_json(s);
  std::mt19937_64 rng(o.seed);
  const ConeSearch cs = search_cones(o, s, r, rng, rep);
  return cs.best.has_value();
}

bool cmd_conjugacy(const Options& o, const specdsl::TorusMapSpec& spec, json& rep, std::string& table) {
  const Setup s = choose_coordinates(spec, o.sublattice);
  const auto engine = make_engine(s, o);
  const int r = o.grid.value_or(64);
  check_grid(spec.dim, r);
  rep["coordinates"] = setup_json(s);
  rep["engine"] = report::to_json(engine);
  if (engine.mode() != semiconj::Mode::expanding) throw PreconditionError("conjugacy needs an expanding block");

  std::mt19937_64 rng(o.seed);
  json cones_rep;
  const ConeSearch cs = search_cones(o, s, r, rng, cones_rep);
  rep["cones"] = cones_rep;
  if (!cs.narrowest)
    throw VerdictFailure("no cone opening in the list certifies an invariant expanding cone field; H is not certified",
                         rep);
  const auto& cert = cs.certs[*cs.narrowest];
  const double tau = cones::tau(cert.params);
  rep["tau"] = tau;
  rep["alpha"] = cert.params.alpha;

  const std::size_t d = spec.dim;
  const std::size_t k = engine.k();
  const auto ki = static_cast<Eigen::Index>(k);
  const auto di = static_cast<Eigen::Index>(d);
  constexpr int samples = 1000;
  double fwd_inv = 0.0, inv_fwd = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vector z = random_point(rng, d);
    const auto h = conjmap::H_forward(engine, z);
    fwd_inv = std::max(fwd_inv, dynamics::torus_distance(conjmap::H_inverse(engine, h.x, h.y, o.tol), z));
    const Vector p = random_point(rng, d);
    const Vector w = conjmap::H_inverse(engine, p.head(ki), p.tail(di - ki), o.tol);
    const auto hw = conjmap::H_forward(engine, w);
    Vector both(di);
    both << hw.x, hw.y;
    inv_fwd = std::max(inv_fwd, dynamics::torus_distance(both, p));
  }
  const double rt_tol = conjmap::round_trip_tolerance(engine, o.tol, tau);
  const double hh_tol = o.tol + engine.rounding_allowance();
  rep["round_trip"] = json{{"samples", samples},
                           {"H_inverse_after_H", fwd_inv},
                           {"H_inverse_after_H_tolerance", rt_tol},
                           {"H_after_H_inverse", inv_fwd},
                           {"H_after_H_inverse_tolerance", hh_tol},
                           {"pass", fwd_inv <= rt_tol && inv_fwd <= hh_tol}};
  bool pass = fwd_inv <= rt_tol && inv_fwd <= hh_tol;

  const auto skew = conjmap::skew_product_residual(engine, r, o.tol, tau);
  rep["skew_product"] = report::to_json(skew);
  std::ostringstream skew_csv;
  conjmap::write_skew_csv(skew, skew_csv);
  table = skew_csv.str();
  write_file(o, "skew.csv", table);
  pass = pass && skew.within_ceiling();

  const Vector theta0 = Vector::Constant(ki, 0.25);
  const std::size_t m = d - k;
  const int fiber_r = m == 0 ? 2 : r;
  const auto fiber = conjmap::trace_fiber(engine, theta0, fiber_r, o.tol);
  rep["fiber"] = report::to_json(fiber);
  std::ostringstream fiber_csv;
  conjmap::write_fiber_csv(fiber, fiber_csv);
  write_file(o, "fiber.csv", fiber_csv.str());
  pass = pass && fiber.pass(o.tol);

  if (m > 0 && std::pow(4.0 * r, static_cast<double>(m)) <= 1e5) {
    std::vector<conjmap::FiberGraph> levels{fiber};
    levels.push_back(conjmap::trace_fiber(engine, theta0, 2 * r, o.tol));
    levels.push_back(conjmap::trace_fiber(engine, theta0, 4 * r, o.tol));
    rep["smoothness"] = report::to_json(conjmap::fiber_smoothness_probe(levels, cert.a4_pass.value_or(false)));
  } else {
    rep["smoothness"] = m == 0 ? json("no fiber directions") : json("skipped: fiber grid too large");
  }
  return pass;
}

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [key, val] : j.items()) flatten(val, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else {
    std::string v = j.is_string() ? j.get<std::string>() : j.dump();
    if (v.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      v = q + "\"";
    }
    out << prefix << ',' << v << '\n';
  }
}

void emit(const Options& o, const json& rep, const std::string& table, std::ostream& out) {
  write_file(o, o.command + ".json", rep.dump(2) + "\n");
  if (o.format == "json") {
    out << rep.dump(2) << '\n';
  } else if (!table.empty()) {
    out << table;
  } else {
    out << "key,value\n";
    flatten(rep, "", out);
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Semi-conjugacies and skew-product conjugacies of torus maps F(z) = Mz + G(z) mod 1", "torusconj"};
  app.add_option("command", o.command, "validate | analyze | phi | verify-semiconj | verify-cones | conjugacy")
      ->required()
      ->check(CLI::IsMember({"validate", "analyze", "phi", "verify-semiconj", "verify-cones", "conjugacy"}));
  app.add_option("spec", o.spec_path, "map specification file")->required();
  app.add_option("--trunc", o.trunc, "truncation depth N (default: smallest N with tail < 1e-9)")
      ->check(CLI::PositiveNumber);
  app.add_option("--grid", o.grid, "grid resolution per axis (default 64)")->check(CLI::Range(2, 1 << 24));
  app.add_option("--alpha", o.alpha, "comma-separated cone openings (default 0.25,0.5,1,2,4,8; 'inf' allowed)");
  app.add_option("--K", o.K, "claimed expansion constant (default: report the certified one)")
      ->check(CLI::Range(1.0, std::numeric_limits<double>::max()));
  app.add_option("--tol", o.tol, "solver tolerance (default 1e-10)")->check(CLI::PositiveNumber);
  app.add_option("--sublattice", o.sublattice, "JSON basis file for an invariant sublattice, or 'full'");
  app.add_option("--seed", o.seed, "seed for randomized spot checks (default 0)");
  app.add_option("--format", o.format, "csv | json (default json)")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("-o", o.out_dir, "directory for the JSON report and CSV tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_pass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
  if (o.K && !(*o.K > 1.0)) {
    err << "error: --K must be > 1\n";
    return exit_error;
  }

  json rep = report::envelope(o.command, o.spec_path);
  std::string table;
  try {
    const specdsl::TorusMapSpec spec = specdsl::load_spec(o.spec_path);
    bool pass = false;
    if (o.command == "validate")
      pass = cmd_validate(o, spec, rep);
    else if (o.command == "analyze")
      pass = cmd_analyze(o, spec, rep);
    else if (o.command == "phi")
      pass = cmd_phi(o, spec, rep, table);
    else if (o.command == "verify-semiconj")
      pass = cmd_verify_semiconj(o, spec, rep);
    else if (o.command == "verify-cones")
      pass = cmd_verify_cones(o, spec, rep);
    else
      pass = cmd_conjugacy(o, spec, rep, table);
    rep["verdict"] = verdict(pass);
    emit(o, rep, table, out);
    return pass ? exit_pass : exit_verdict_fail;
  } catch (const VerdictFailure& e) {
    json partial = e.partial().is_object() && !e.partial().empty() ? e.partial() : rep;
    partial["verdict"] = "fail";
    partial["reason"] = e.what();
    emit(o, partial, "", out);
    err << o.command << ": " << e.what() << '\n';
    return exit_verdict_fail;
  } catch (const specdsl::ParseError& e) {
    err << "error: " << o.spec_path << ": " << e.what() << '\n';
    return exit_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
}

}  // namespace torusconj::cli

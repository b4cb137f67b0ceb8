#pragma once

// JSON views of the analysis objects. Every report carries "schema_version": "1".

#include <nlohmann/json.hpp>
#include <string>

#include "torusconj/cones.hpp"
#include "torusconj/conjmap.hpp"
#include "torusconj/dynamics.hpp"
#include "torusconj/intlat.hpp"
#include "torusconj/semiconj.hpp"

namespace torusconj::report {

using nlohmann::json;

inline constexpr const char* schema_version = "1";

/// Finite numbers as JSON numbers; infinities and NaN as strings.
json number(double x);
json vector(const dynamics::Vector& v);
json integer(const intlat::Integer& x);
json int_vector(const intlat::IntVector& v);
json int_matrix(const intlat::IntMatrix& m);

json envelope(const std::string& command, const std::string& spec_path);

json to_json(const dynamics::NormBounds& b);
json to_json(const intlat::BlockForm& b);
json to_json(const intlat::TilingParallelotope& t);
json to_json(const semiconj::SemiConjEngine& e);
json to_json(const semiconj::ResidualReport& r);
json to_json(const semiconj::FiberBoundReport& r);
json to_json(const cones::ConeCertificate& c);
/// Summary without the per-point arrays.
json to_json(const conjmap::FiberGraph& f);
json to_json(const conjmap::SkewReport& r);
json to_json(const conjmap::SmoothnessReport& r);

}  // namespace torusconj::report

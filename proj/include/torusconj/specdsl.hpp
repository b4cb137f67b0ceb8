#pragma once

// Text format for torus maps F(z) = Mz + G(z) mod 1, where G is a finite
// trigonometric sum with integer frequencies:
//
//   dim=2
//   M=[[2,1],[0,1]]
//   G[1]=0.05*sin(2*pi*(z1+z2)) - 0.01*cos(2*pi*(2*z1-z2))   # comment
//
// Each G[i] line adds terms to component i (1-based); lines may repeat.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "torusconj/error.hpp"
#include "torusconj/intlat.hpp"

namespace torusconj::specdsl {

enum class TrigKind { sin, cos };

struct TrigTerm {
  std::size_t component = 0;  // 0-based index into G
  double coefficient = 0.0;
  TrigKind kind = TrigKind::sin;
  std::vector<std::int64_t> frequency;

  friend bool operator==(const TrigTerm&, const TrigTerm&) = default;
};

struct TorusMapSpec {
  std::size_t dim = 0;
  intlat::IntMatrix M;
  std::vector<TrigTerm> terms;

  /// Sorts terms, makes the first nonzero frequency positive, merges duplicates
  /// and drops terms that vanish identically.
  void canonicalize();
  /// Throws PreconditionError when a structural invariant is violated.
  void validate() const;
  bool has_periodic_part() const { return !terms.empty(); }

  friend bool operator==(const TorusMapSpec&, const TorusMapSpec&) = default;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

TorusMapSpec parse_spec(std::string_view text);
TorusMapSpec load_spec(const std::string& path);
std::string serialize_spec(const TorusMapSpec& spec);

/// Shortest decimal text that reads back to exactly `x`.
std::string format_double(double x);

}  // namespace torusconj::specdsl

#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "strataform/stratify.hpp"

namespace strataform {
namespace io {

// Parse error with position and the token kinds that would have been valid.
struct ParseError : std::runtime_error {
  int line;
  int column;
  std::vector<std::string> expected;
  ParseError(const std::string& msg, int line_, int column_, std::vector<std::string> expected_)
      : std::runtime_error(msg + " at " + std::to_string(line_) + ":" + std::to_string(column_)),
        line(line_),
        column(column_),
        expected(std::move(expected_)) {}
};

// A parsed field value: scalar, differential form, or multivector field.
using FieldValue = std::variant<Poly, PolyForm, PolyMVec>;

struct FormEntry {
  PolyForm form;
  bool declared_closed = false;
};

struct TubeEntry {
  std::vector<std::string> fiber_names;
  Rat scale = Rat(1);
};

struct Manifest {
  std::map<std::string, ChartPtr> charts;
  std::map<std::string, std::pair<std::string, FormEntry>> forms;    // name -> (chart, entry)
  std::map<std::string, std::pair<std::string, Poly>> scalars;
  std::map<std::string, std::pair<std::string, std::vector<PolyMVec>>> frames;
  std::map<std::string, std::pair<std::string, PolyMVec>> vectors;
  std::map<std::string, std::pair<std::string, RatVec>> points;
  std::map<std::string, std::pair<std::string, TubeEntry>> tubes;
  std::map<std::string, std::string> params;

  const ChartPtr& chart(const std::string& name) const;
  stratify::FormField form_field(const std::string& name) const;
};

// Text manifest:
//   manifest v1
//   chart M (x1, x2) [fibers (p1, p2)]
//   form omega on M = x1*dx1^dx2 + dx3^dx4 [, closed]
//   scalar f on M = x1^2 - 1/2
//   frame F on M = [ d/dx3, x1*d/dx1 ]
//   vector X on M = d/dx1 + x2*d/dx3
//   point p0 on M = (0, 1/2)
//   tube T on M = (fibers: x1; scale: 1)
//   param key = value
Manifest parse_manifest(const std::string& text);

// Canonical printers; parse(print(x)) == x.
std::string print_poly(const Poly& p, const ChartPtr& chart);
std::string print_form(const PolyForm& f);
std::string print_mvec(const PolyMVec& v);

// Expression-only entry points used by round-trip tests.
Poly parse_scalar_expr(const std::string& text, const ChartPtr& chart);
PolyForm parse_form_expr(const std::string& text, const ChartPtr& chart);
PolyMVec parse_vector_expr(const std::string& text, const ChartPtr& chart);

}  // namespace io
}  // namespace strataform

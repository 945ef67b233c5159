#pragma once

#include <map>
#include <string>

#include "bracket_reach/expr.hpp"

namespace bracket_reach::fields {

/// Parses an infix expression over x1..x<dim>, named constants and the
/// functions sin, cos, exp, sqrt, abs and bump(r1, r2, expr).  Exponents
/// after '^' must be constant.  `line` and `column` locate the text in its
/// source for error messages.
Expr parse_expression(const std::string& text, int dim,
                      const std::map<std::string, double>& constants = {}, int line = 1,
                      int column = 1);

}  // namespace bracket_reach::fields

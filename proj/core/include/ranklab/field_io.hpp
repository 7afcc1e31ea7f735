#pragma once

#include "ranklab/field.hpp"

#include <string>

namespace ranklab {

// Polynomial file: one line per monomial, `e1 ... en coefficient`, graded-lex
// order on write; an optional `center c1 ... cn` line; `#` starts a comment.
// Grid file: header `n h d1 ... dn [o1 ... on]` (origin defaults to 0), then the
// d1*...*dn values in row-major order (last axis fastest).
// Numbers are written with 17 significant digits, so both formats round-trip.

Polynomial parse_polynomial(const std::string& text);
std::string format_polynomial(const Polynomial& p);
Polynomial read_polynomial_file(const std::string& path);
void write_polynomial_file(const Polynomial& p, const std::string& path);

GridField parse_grid(const std::string& text);
std::string format_grid(const GridField& g);
GridField read_grid_file(const std::string& path);
void write_grid_file(const GridField& g, const std::string& path);

/// %.17g formatting shared by every text output.
std::string format_double(double v);

}  // namespace ranklab

#pragma once

// Reports are built once as JSON with every number rounded to 12 significant
// digits; the text form is rendered from that same document.

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "qsplit/numkit.hpp"

namespace qsplit::cli {

using nlohmann::json;

double round12(double x);
json number(double x);
json real_matrix(const RealMatrix& m);
json complex_number(Complex z);
json complex_matrix(const Matrix& m);
/// Frames to 15 significant digits.
json basis(const Matrix& frame);

std::string format_number(const json& v);
void render_text(const json& report, std::ostream& out);

}  // namespace qsplit::cli

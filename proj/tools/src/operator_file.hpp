#pragma once

// JSON operator files.
//
//   {"dim": 3, "operators": [{"name": "T1", "matrix": [[[re, im], ...], ...]}, ...],
//    "q": [[[re, im], ...], ...], "meta": {...}}
//
// or, with symbolic shift slots,
//
//   {"slots": [{"kind": "dense", "dim": 2}, {"kind": "shift_slot", "multiplicity": 1}],
//    "operators": [{"name": "T1", "block": [{"kind": "dense", "matrix": ...},
//                                           {"kind": "shift", "c": [1, 0]}]}]}
//
// Slot block kinds: shift (c), phase_diag (p), scalar (c). "Q" replaces "q"
// with an n x n array of matrices (dense files only).

#include <string>
#include <vector>

#include "json.hpp"
#include "qsplit/opmodel.hpp"

namespace qsplit::cli {

using nlohmann::json;

struct OperatorFile {
  OperatorTuple tuple;
  std::vector<std::string> names;
  /// q was absent and has been fitted with infer_phase.
  bool q_inferred = false;
  json meta = json::object();
};

/// Throws Error(InvalidArg / InvalidMatrix / DimMismatch) with a JSON-pointer location.
OperatorFile parse_operator_file(const json& doc, const Tolerance& tol = {});
OperatorFile read_operator_file(const std::string& path, const Tolerance& tol = {});

json complex_to_json(Complex z);
json matrix_to_json(const Matrix& m);
json tuple_to_json(const OperatorTuple& tuple, const std::vector<std::string>& names,
                   const json& meta = json::object());
std::vector<std::string> default_names(std::size_t n);

}  // namespace qsplit::cli

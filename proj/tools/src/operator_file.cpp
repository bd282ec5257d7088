#include "operator_file.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qsplit/error.hpp"

namespace qsplit::cli {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& where, const std::string& what) {
  throw Error(kind, "at " + (where.empty() ? std::string("/") : where) + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(ErrorKind::InvalidArg, where, "missing key \"" + key + "\"");
  return obj.at(key);
}

std::size_t count_at(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(ErrorKind::InvalidArg, where, "expected a count");
  return static_cast<std::size_t>(v.get<long long>());
}

Complex complex_at(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(ErrorKind::InvalidArg, where, "expected [re, im]");
  }
  const Complex z(v[0].get<double>(), v[1].get<double>());
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) fail(ErrorKind::InvalidMatrix, where, "non-finite entry");
  return z;
}

Matrix matrix_at(const json& v, const std::string& where, std::size_t side) {
  if (!v.is_array() || v.size() != side) {
    fail(ErrorKind::DimMismatch, where, "expected " + std::to_string(side) + " rows");
  }
  const auto n = static_cast<Eigen::Index>(side);
  Matrix m(n, n);
  for (std::size_t i = 0; i < side; ++i) {
    const std::string row_where = where + "/" + std::to_string(i);
    const json& row = v[i];
    if (!row.is_array() || row.size() != side) {
      fail(ErrorKind::DimMismatch, row_where, "expected " + std::to_string(side) + " entries");
    }
    for (std::size_t j = 0; j < side; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          complex_at(row[j], row_where + "/" + std::to_string(j));
    }
  }
  return m;
}

struct LayoutEntry {
  bool dense = true;
  std::size_t size = 0;
};

std::vector<LayoutEntry> parse_layout(const json& slots) {
  if (!slots.is_array() || slots.empty()) fail(ErrorKind::InvalidArg, "/slots", "expected a non-empty array");
  std::vector<LayoutEntry> layout;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const std::string where = "/slots/" + std::to_string(s);
    const std::string kind = member(slots[s], "kind", where).is_string() ? slots[s]["kind"].get<std::string>() : "";
    if (kind == "dense") {
      layout.push_back({true, count_at(member(slots[s], "dim", where), where + "/dim")});
    } else if (kind == "shift_slot") {
      const std::size_t m = count_at(member(slots[s], "multiplicity", where), where + "/multiplicity");
      if (m == 0) fail(ErrorKind::InvalidArg, where + "/multiplicity", "must be positive");
      layout.push_back({false, m});
    } else {
      fail(ErrorKind::InvalidArg, where + "/kind", "expected \"dense\" or \"shift_slot\"");
    }
  }
  return layout;
}

StructuredOperator parse_structured(const json& block, const std::vector<LayoutEntry>& layout,
                                    const std::string& where) {
  if (!block.is_array() || block.size() != layout.size()) {
    fail(ErrorKind::DimMismatch, where, "expected " + std::to_string(layout.size()) + " slot blocks");
  }
  std::vector<Slot> slots;
  for (std::size_t s = 0; s < layout.size(); ++s) {
    const std::string w = where + "/" + std::to_string(s);
    const json& b = block[s];
    const json& kind_v = member(b, "kind", w);
    const std::string kind = kind_v.is_string() ? kind_v.get<std::string>() : "";
    if (layout[s].dense) {
      if (kind != "dense") fail(ErrorKind::DimMismatch, w + "/kind", "slot is dense");
      slots.emplace_back(matrix_at(member(b, "matrix", w), w + "/matrix", layout[s].size));
      continue;
    }
    const std::size_t m = layout[s].size;
    try {
      if (kind == "shift") {
        slots.emplace_back(ShiftSlotBlock::shift(complex_at(member(b, "c", w), w + "/c"), m));
      } else if (kind == "phase_diag") {
        slots.emplace_back(ShiftSlotBlock::phase_diag(complex_at(member(b, "p", w), w + "/p"), m));
      } else if (kind == "scalar") {
        slots.emplace_back(ShiftSlotBlock::scalar(complex_at(member(b, "c", w), w + "/c"), m));
      } else {
        fail(ErrorKind::InvalidArg, w + "/kind", "expected shift, phase_diag or scalar");
      }
    } catch (const Error& e) {
      if (std::string(e.what()).rfind(std::string(to_string(e.kind())) + ": at ", 0) == 0) throw;
      fail(e.kind(), w, e.what());
    }
  }
  return StructuredOperator(std::move(slots));
}

CommutationData infer_commutation(const std::vector<StructuredOperator>& ops, const Tolerance& tol) {
  const std::size_t n = ops.size();
  const auto k = static_cast<Eigen::Index>(n);
  Matrix q = Matrix::Ones(k, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Complex fit(1.0, 0.0);
      if (ops[i].dense_dim() > 0) {
        const auto inferred = infer_phase(ops[i].dense_part(), ops[j].dense_part(), tol);
        if (inferred && std::abs(*inferred) > 1e-6) fit = *inferred;
      }
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fit;
      q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0 / fit;
    }
  }
  return CommutationData::scalar(std::move(q));
}

}  // namespace

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("T" + std::to_string(i + 1));
  return names;
}

OperatorFile parse_operator_file(const json& doc, const Tolerance& tol) {
  if (!doc.is_object()) fail(ErrorKind::InvalidArg, "", "expected a JSON object");
  const bool has_dim = doc.contains("dim");
  const bool has_slots = doc.contains("slots");
  if (has_dim == has_slots) fail(ErrorKind::InvalidArg, "", "exactly one of \"dim\" and \"slots\" is required");

  const json& ops_v = member(doc, "operators", "");
  if (!ops_v.is_array() || ops_v.empty()) fail(ErrorKind::InvalidArg, "/operators", "expected a non-empty array");

  OperatorFile file;
  std::vector<StructuredOperator> ops;
  std::size_t dim = 0;
  std::vector<LayoutEntry> layout;
  if (has_dim) {
    dim = count_at(doc["dim"], "/dim");
  } else {
    layout = parse_layout(doc["slots"]);
  }

  for (std::size_t i = 0; i < ops_v.size(); ++i) {
    const std::string where = "/operators/" + std::to_string(i);
    const json& entry = ops_v[i];
    if (!entry.is_object()) fail(ErrorKind::InvalidArg, where, "expected an object");
    std::string name = "T" + std::to_string(i + 1);
    if (entry.contains("name")) {
      if (!entry["name"].is_string()) fail(ErrorKind::InvalidArg, where + "/name", "expected a string");
      name = entry["name"].get<std::string>();
    }
    file.names.push_back(name);
    if (has_dim) {
      ops.push_back(StructuredOperator::dense(matrix_at(member(entry, "matrix", where), where + "/matrix", dim)));
    } else {
      ops.push_back(parse_structured(member(entry, "block", where), layout, where + "/block"));
    }
  }
  const std::size_t n = ops.size();

  if (doc.contains("q") && doc.contains("Q")) fail(ErrorKind::InvalidArg, "", "give either \"q\" or \"Q\", not both");
  CommutationData comm;
  if (doc.contains("q")) {
    const json& qv = doc["q"];
    if (!qv.is_array() || qv.size() != n) fail(ErrorKind::DimMismatch, "/q", "expected " + std::to_string(n) + " rows");
    Matrix q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::string w = "/q/" + std::to_string(i);
      if (!qv[i].is_array() || qv[i].size() != n) fail(ErrorKind::DimMismatch, w, "expected " + std::to_string(n) + " entries");
      for (std::size_t j = 0; j < n; ++j) {
        q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = complex_at(qv[i][j], w + "/" + std::to_string(j));
      }
    }
    try {
      comm = CommutationData::scalar(std::move(q));
    } catch (const Error& e) {
      fail(e.kind(), "/q", e.what());
    }
  } else if (doc.contains("Q")) {
    if (!has_dim) fail(ErrorKind::InvalidArg, "/Q", "operator-valued Q requires a dense file");
    const json& qv = doc["Q"];
    if (!qv.is_array() || qv.size() != n) fail(ErrorKind::DimMismatch, "/Q", "expected " + std::to_string(n) + " rows");
    std::vector<Matrix> family;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string w = "/Q/" + std::to_string(i);
      if (!qv[i].is_array() || qv[i].size() != n) fail(ErrorKind::DimMismatch, w, "expected " + std::to_string(n) + " entries");
      for (std::size_t j = 0; j < n; ++j) family.push_back(matrix_at(qv[i][j], w + "/" + std::to_string(j), dim));
    }
    try {
      comm = CommutationData::unitary_family(std::move(family), n);
    } catch (const Error& e) {
      fail(e.kind(), "/Q", e.what());
    }
  } else {
    comm = infer_commutation(ops, tol);
    file.q_inferred = n > 1;
  }

  if (doc.contains("meta")) {
    if (!doc["meta"].is_object()) fail(ErrorKind::InvalidArg, "/meta", "expected an object");
    file.meta = doc["meta"];
  }
  file.tuple = OperatorTuple(std::move(ops), std::move(comm));
  return file;
}

OperatorFile read_operator_file(const std::string& path, const Tolerance& tol) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArg, "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidArg, path + ": byte " + std::to_string(e.byte) + ": malformed JSON");
  }
  return parse_operator_file(doc, tol);
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json tuple_to_json(const OperatorTuple& tuple, const std::vector<std::string>& names, const json& meta) {
  json doc = json::object();
  const std::size_t n = tuple.size();
  const bool plain_dense = tuple.is_dense() && tuple.op(0).slots().size() <= 1;

  json ops = json::array();
  if (plain_dense) {
    doc["dim"] = tuple.dense_dim();
    for (std::size_t i = 0; i < n; ++i) ops.push_back({{"name", names.at(i)}, {"matrix", matrix_to_json(tuple.dense_part(i))}});
  } else {
    json slots = json::array();
    for (const auto& shape : tuple.layout()) {
      if (shape.dense) {
        slots.push_back({{"kind", "dense"}, {"dim", shape.size}});
      } else {
        slots.push_back({{"kind", "shift_slot"}, {"multiplicity", shape.size}});
      }
    }
    doc["slots"] = std::move(slots);
    for (std::size_t i = 0; i < n; ++i) {
      json block = json::array();
      for (const auto& slot : tuple.op(i).slots()) {
        if (const auto* m = std::get_if<Matrix>(&slot)) {
          block.push_back({{"kind", "dense"}, {"matrix", matrix_to_json(*m)}});
          continue;
        }
        const auto& b = std::get<ShiftSlotBlock>(slot);
        const char* key = b.kind == ShiftSlotBlock::Kind::PhaseDiag ? "p" : "c";
        block.push_back({{"kind", std::string(to_string(b.kind))}, {key, complex_to_json(b.value)}});
      }
      ops.push_back({{"name", names.at(i)}, {"block", std::move(block)}});
    }
  }
  doc["operators"] = std::move(ops);

  const CommutationData& comm = tuple.commutation();
  if (comm.is_scalar()) {
    json q = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < n; ++j) row.push_back(complex_to_json(comm.q(i, j)));
      q.push_back(std::move(row));
    }
    doc["q"] = std::move(q);
  } else {
    json qs = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < n; ++j) row.push_back(matrix_to_json(comm.Q(i, j)));
      qs.push_back(std::move(row));
    }
    doc["Q"] = std::move(qs);
  }
  if (!meta.empty()) doc["meta"] = meta;
  return doc;
}

}  // namespace qsplit::cli

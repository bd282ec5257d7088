#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace qsplit::cli {

namespace {

double round_to(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return std::stod(buf);
}

std::string complex_text(const json& z) {
  const double re = z[0].get<double>();
  const double im = z[1].get<double>();
  std::string s = format_number(z[0]);
  s += im < 0 ? " - " : " + ";
  s += format_number(json(std::abs(im))) + "i";
  if (im == 0.0) s = format_number(json(re));
  return s;
}

void matrix_text(const json& m, std::ostream& out, const std::string& indent) {
  for (const auto& row : m) {
    out << indent;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << "  ";
      out << (row[j].is_array() ? complex_text(row[j]) : format_number(row[j]));
    }
    out << '\n';
  }
}

std::string flags_text(const json& op) {
  std::string s;
  for (const char* key : {"unitary", "cnu", "isometry", "pure_isometry", "cni"}) {
    if (op.value(key, false)) s += std::string(s.empty() ? "" : ",") + key;
  }
  return s.empty() ? "-" : s;
}

void operators_text(const json& report, std::ostream& out) {
  out << "operators:\n";
  for (const auto& op : report["operators"]) {
    out << "  " << op["name"].get<std::string>() << ": norm " << format_number(op["norm"]);
    if (!op["contraction"].get<bool>()) {
      out << ", not a contraction\n";
      continue;
    }
    out << ", " << flags_text(op) << ", atom " << op["label"].get<std::string>();
    if (op.contains("atom_B")) out << "/" << op["atom_B"].get<std::string>();
    out << '\n';
  }
}

void verify_text(const json& r, std::ostream& out) {
  out << "mode: " << r["mode"].get<std::string>() << '\n';
  out << "q" << (r["q_inferred"].get<bool>() ? " (inferred)" : "") << ":\n";
  if (r.contains("q")) matrix_text(r["q"], out, "  ");
  if (r.contains("Q_commutator")) {
    out << "Q commutator residuals:\n";
    matrix_text(r["Q_commutator"], out, "  ");
  }
  for (const auto& [mode, m] : r["residuals"].items()) {
    out << mode << " residuals:\n";
    matrix_text(m, out, "  ");
  }
  out << "threshold: " << format_number(r["threshold"]) << '\n';
  operators_text(r, out);
  if (!r["offending_pairs"].empty()) {
    out << "offending pairs:";
    for (const auto& p : r["offending_pairs"]) out << " (" << p[0] << "," << p[1] << ")";
    out << '\n';
  }
  out << "result: " << (r["passed"].get<bool>() ? "PASS" : "FAIL") << '\n';
}

void decompose_text(const json& r, std::ostream& out) {
  out << "mode: " << r["mode"].get<std::string>() << '\n';
  for (const auto& w : r["warnings"]) out << "warning: " << w.get<std::string>() << '\n';
  out << "parts:\n";
  for (const auto& p : r["parts"]) {
    out << "  " << p["signature"].get<std::string>() << ": dim " << p["dim"];
    if (!p["shift_slots"].empty()) {
      out << ", shift slots";
      for (const auto& s : p["shift_slots"]) out << ' ' << s;
    }
    if (!p["labels"].empty()) {
      out << ", labels";
      for (const auto& l : p["labels"]) out << ' ' << l.get<std::string>();
    }
    out << ", reduction residual " << format_number(p["reduction_residual"]) << '\n';
    if (p.contains("basis")) {
      out << "    basis:\n";
      matrix_text(p["basis"], out, "      ");
    }
  }
  const json& d = r["diagnostics"];
  out << "diagnostics:\n";
  for (const char* key : {"max_reduction_residual", "completeness_residual", "orthogonality_residual",
                          "q_unitarity_residual"}) {
    out << "  " << key << ": " << format_number(d[key]) << '\n';
  }
  out << "  iterations: " << d["iterations"] << '\n';
}

void generate_text(const json& r, std::ostream& out) {
  out << "family: " << r["family"].get<std::string>() << ", seed " << r["seed"] << ", dim " << r["dim"]
      << ", operators " << r["n"] << '\n';
  if (r.contains("out")) out << "wrote " << r["out"].get<std::string>() << '\n';
  if (r.contains("ground_truth")) {
    out << "ground truth:\n";
    for (const auto& [sig, dim] : r["ground_truth"].items()) out << "  " << sig << ": dim " << dim << '\n';
  }
}

}  // namespace

double round12(double x) { return round_to(x, 12); }

json number(double x) { return round12(x); }

json real_matrix(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json complex_number(Complex z) { return json::array({number(z.real()), number(z.imag())}); }

json complex_matrix(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json basis(const Matrix& frame) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < frame.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < frame.cols(); ++j) {
      row.push_back(json::array({round_to(frame(i, j).real(), 15), round_to(frame(i, j).imag(), 15)}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_number(const json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v.get<double>());
  return buf;
}

void render_text(const json& report, std::ostream& out) {
  const std::string command = report["command"].get<std::string>();
  if (command == "verify") {
    verify_text(report, out);
  } else if (command == "decompose") {
    decompose_text(report, out);
  } else if (command == "classify") {
    operators_text(report, out);
  } else if (command == "generate") {
    generate_text(report, out);
  }
}

}  // namespace qsplit::cli

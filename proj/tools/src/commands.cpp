#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "operator_file.hpp"
#include "qsplit/qsplit.hpp"
#include "report.hpp"

namespace qsplit::cli {

namespace {

constexpr const char* kFiniteIsometryWarning = "finite-dimensional isometries are unitary";

struct Common {
  std::string file;
  double tol = 1e-10;
  bool json_out = false;
};

Tolerance tolerance(double rel) {
  Tolerance tol;
  tol.rel = rel;
  validate(tol);
  return tol;
}

void emit(const json& report, bool as_json, std::ostream& out) {
  if (as_json) {
    out << report.dump(2) << '\n';
  } else {
    render_text(report, out);
  }
}

json classification_json(const std::string& name, const StructuredOperator& op, const Tolerance& tol) {
  const ContractionReport contraction = verify_contraction(op, tol);
  json j = {{"name", name}, {"norm", number(contraction.norm)}, {"contraction", contraction.ok}};
  if (!contraction.ok) return j;
  const Classification c = classify(op, tol);
  j["unitary"] = c.unitary;
  j["cnu"] = c.cnu;
  j["isometry"] = c.isometry;
  j["pure_isometry"] = c.pure_isometry;
  j["cni"] = c.cni;
  j["label"] = c.atom_A ? std::string(to_string(*c.atom_A)) : std::string("non-atom");
  if (c.atom_B) j["atom_B"] = std::string(to_string(*c.atom_B));
  return j;
}

json q_json(const OperatorTuple& tuple) {
  const CommutationData& comm = tuple.commutation();
  const std::size_t n = tuple.size();
  Matrix q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = comm.q(i, j);
  }
  return complex_matrix(q);
}

int cmd_verify(const Common& c, const std::string& mode, std::ostream& out) {
  if (mode != "plain" && mode != "doubly") throw Error(ErrorKind::InvalidArg, "--mode must be plain or doubly");
  const Tolerance tol = tolerance(c.tol);
  const OperatorFile file = read_operator_file(c.file, tol);
  const OperatorTuple& tuple = file.tuple;
  const bool doubly = mode == "doubly";

  if (doubly) require_unimodular(tuple.commutation());
  require_q_commutes(tuple, tol);

  json report = {{"command", "verify"}, {"mode", mode}, {"file", c.file}, {"n", tuple.size()},
                 {"dim", tuple.dense_dim()}, {"q_inferred", file.q_inferred}};
  if (tuple.commutation().is_scalar()) report["q"] = q_json(tuple);

  const RelationReport plain = relation_residual(tuple, RelationMode::Plain, tol);
  std::vector<RealMatrix> checked = {plain.residual};
  report["residuals"] = json::object();
  report["residuals"]["plain"] = real_matrix(plain.residual);
  if (plain.q_commutator.size() > 0) report["Q_commutator"] = real_matrix(plain.q_commutator);
  if (doubly) {
    const RelationReport dbl = relation_residual(tuple, RelationMode::Doubly, tol);
    report["residuals"]["doubly"] = real_matrix(dbl.residual);
    checked.push_back(dbl.residual);
  }
  report["threshold"] = number(plain.threshold);

  json offending = json::array();
  const auto n = static_cast<Eigen::Index>(tuple.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const bool bad = std::any_of(checked.begin(), checked.end(), [&](const RealMatrix& r) {
        return std::max(r(i, j), r(j, i)) > plain.threshold;
      });
      if (bad) offending.push_back({i + 1, j + 1});
    }
  }
  const bool passed = offending.empty();
  report["offending_pairs"] = offending;

  json ops = json::array();
  for (std::size_t i = 0; i < tuple.size(); ++i) ops.push_back(classification_json(file.names[i], tuple.op(i), tol));
  report["operators"] = ops;
  report["passed"] = passed;
  report["exit_status"] = passed ? 0 : 1;
  emit(report, c.json_out, out);
  return passed ? 0 : 1;
}

json part_json(const Part& part, const OperatorTuple& tuple, const std::vector<std::string>& names, bool bases) {
  json p = {{"signature", part.signature}, {"dim", part.dim()}, {"shift_slots", part.shift_slots},
            {"labels", part.labels}, {"reduction_residual", number(part.reduction_residual)}};
  if (bases) {
    p["basis"] = basis(part.subspace.frame());
    p["restriction"] = tuple_to_json(restrict_to(tuple, part), names);
  }
  return p;
}

void require_isometries(const OperatorTuple& tuple, const Tolerance& tol) {
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const StructuredOperator& op = tuple.op(i);
    const Matrix& d = op.dense_part();
    bool ok = d.rows() == 0 || spectral_norm(d.adjoint() * d - identity(static_cast<std::size_t>(d.rows()))) <= 10 * tol.rel;
    for (std::size_t s : op.shift_slot_indices()) ok = ok && op.shift_block(s).is_isometry();
    if (!ok) throw Error(ErrorKind::NotIsometry, "operator " + std::to_string(i + 1) + " is not an isometry");
  }
}

int cmd_decompose(const Common& c, const std::string& mode, bool bases, std::ostream& out, std::ostream& err) {
  const Tolerance tol = tolerance(c.tol);
  const OperatorFile file = read_operator_file(c.file, tol);
  const OperatorTuple& tuple = file.tuple;
  json warnings = json::array();

  DecompositionResult result;
  if (mode == "canonical") {
    if (tuple.size() != 1) throw Error(ErrorKind::InvalidArg, "canonical mode takes a single operator");
    result = canonical_decomposition(tuple.op(0), tol);
  } else if (mode == "levan") {
    result = tuple.size() == 1 ? levan_decomposition(tuple.op(0), tol) : cnu_tuple_decomposition(tuple, tol);
  } else if (mode == "tuple") {
    result = tuple_decomposition(tuple, tol);
  } else if (mode == "wold") {
    require_isometries(tuple, tol);
    if (tuple.dense_dim() > 0) warnings.push_back(kFiniteIsometryWarning);
    result = tuple_decomposition(tuple, tol);
  } else if (mode == "split") {
    if (!verify_q_commuting(tuple, tol)) {
      err << "error: the tuple is not q-commuting\n";
      return 1;
    }
    result = unitary_cnu_split(tuple, tol);
  } else {
    throw Error(ErrorKind::InvalidArg, "--mode must be canonical, tuple, levan, split or wold");
  }
  for (const auto& w : warnings) err << "warning: " << w.get<std::string>() << '\n';

  json parts = json::array();
  for (const auto& part : result.parts) parts.push_back(part_json(part, tuple, file.names, bases));
  const Diagnostics& d = result.diagnostics;
  json report = {{"command", "decompose"},
                 {"mode", mode},
                 {"file", c.file},
                 {"n", tuple.size()},
                 {"dim", tuple.dense_dim()},
                 {"warnings", warnings},
                 {"parts", parts},
                 {"diagnostics",
                  {{"max_reduction_residual", number(d.max_reduction_residual)},
                   {"completeness_residual", number(d.completeness_residual)},
                   {"orthogonality_residual", number(d.orthogonality_residual)},
                   {"q_unitarity_residual", number(d.q_unitarity_residual)},
                   {"iterations", d.iterations}}},
                 {"exit_status", 0}};
  emit(report, c.json_out, out);
  return 0;
}

int cmd_classify(const Common& c, std::ostream& out) {
  const Tolerance tol = tolerance(c.tol);
  const OperatorFile file = read_operator_file(c.file, tol);
  json ops = json::array();
  for (std::size_t i = 0; i < file.tuple.size(); ++i) {
    json j = classification_json(file.names[i], file.tuple.op(i), tol);
    if (!j["contraction"].get<bool>()) {
      throw Error(ErrorKind::NotAContraction, file.names[i] + " has norm " + format_number(j["norm"]));
    }
    ops.push_back(std::move(j));
  }
  emit({{"command", "classify"}, {"file", c.file}, {"operators", ops}, {"exit_status", 0}}, c.json_out, out);
  return 0;
}

struct GenerateOptions {
  std::string family;
  std::size_t dim = 4;
  std::size_t n = 2;
  std::size_t block = 3;
  std::size_t merely = 3;
  std::string signatures;
  double scale = 1.0;
  double phase = -1.0;
  std::uint64_t seed = 0;
  std::string out_path;
  bool json_out = false;
};

SignatureDims parse_signatures(const std::string& text) {
  SignatureDims dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::InvalidArg, "signature entry '" + item + "' is not SIG=DIM");
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item.substr(eq + 1), &used);
      if (v < 0 || used != item.size() - eq - 1) throw std::invalid_argument("bad");
      dims[item.substr(0, eq)] = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArg, "signature entry '" + item + "' has a bad dimension");
    }
  }
  return dims;
}

SignatureDims default_signatures(std::size_t n, std::size_t block) {
  SignatureDims dims;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::string sig;
    for (std::size_t i = 0; i < n; ++i) sig.push_back((mask >> (n - 1 - i)) & 1 ? 'c' : 'u');
    dims[sig] = block;
  }
  return dims;
}

int cmd_generate(const GenerateOptions& g, std::ostream& out) {
  OperatorTuple tuple;
  json meta = {{"family", g.family}, {"seed", g.seed}};
  json truth_dims = json::object();
  json truth_bases = json::object();
  auto record = [&](const PlantedTuple& p) {
    tuple = p.tuple;
    for (const auto& [sig, s] : p.ground_truth) {
      truth_dims[sig] = s.dim();
      truth_bases[sig] = basis(s.frame());
    }
  };

  if (g.family == "clock-shift") {
    tuple = clock_shift(g.dim);
    meta["dim"] = g.dim;
  } else if (g.family == "shift-phase") {
    const double turns = g.phase < 0.0 ? 1.0 / static_cast<double>(std::max<std::size_t>(g.dim, 1)) : g.phase;
    tuple = shift_phase_pair(g.dim, std::polar(1.0, 2.0 * std::numbers::pi * turns), g.scale);
    meta["dim"] = g.dim;
    meta["phase"] = turns;
    meta["scale"] = g.scale;
  } else if (g.family == "planted") {
    const SignatureDims dims = g.signatures.empty() ? default_signatures(g.n, g.block) : parse_signatures(g.signatures);
    record(planted_tuple(g.n, g.block, dims, g.seed));
    meta["n"] = g.n;
    meta["block"] = g.block;
  } else if (g.family == "planted-dc") {
    const SignatureDims dims = g.signatures.empty() ? default_signatures(2, g.block) : parse_signatures(g.signatures);
    record(planted_dc_tuple(g.block, dims, g.merely, g.seed));
    meta["block"] = g.block;
    meta["merely"] = g.merely;
  } else if (g.family == "planted-q") {
    const SignatureDims dims = g.signatures.empty() ? default_signatures(2, g.block) : parse_signatures(g.signatures);
    record(planted_q_tuple(g.block, dims, g.seed));
    meta["block"] = g.block;
  } else if (g.family == "random") {
    tuple = OperatorTuple::dense({random_contraction(g.dim, g.seed)});
    meta["dim"] = g.dim;
  } else {
    throw Error(ErrorKind::InvalidArg, "unknown family '" + g.family +
                                           "' (clock-shift, shift-phase, planted, planted-dc, planted-q, random)");
  }
  if (!truth_dims.empty()) meta["ground_truth"] = truth_bases;

  const std::string text = tuple_to_json(tuple, default_names(tuple.size()), meta).dump(2) + "\n";
  json report = {{"command", "generate"}, {"family", g.family}, {"seed", g.seed},
                 {"dim", tuple.dense_dim()}, {"n", tuple.size()}, {"exit_status", 0}};
  if (!truth_dims.empty()) report["ground_truth"] = truth_dims;

  if (g.out_path.empty()) {
    out << text;
    return 0;
  }
  std::ofstream file(g.out_path, std::ios::binary);
  if (!file) throw Error(ErrorKind::InvalidArg, "cannot write " + g.out_path);
  file << text;
  if (!file) throw Error(ErrorKind::InvalidArg, "cannot write " + g.out_path);
  report["out"] = g.out_path;
  emit(report, g.json_out, out);
  return 0;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("file", c.file, "operator file (JSON)")->required();
  sub->add_option("--tol", c.tol, "relative tolerance")->check(CLI::PositiveNumber);
  sub->add_flag("--json", c.json_out, "machine-readable report");
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArg:
    case ErrorKind::InvalidMatrix:
    case ErrorKind::DimMismatch:
    case ErrorKind::UnsupportedSignature:
      return 2;
    case ErrorKind::NonUnimodularQ:
      return 3;
    case ErrorKind::NotAContraction:
    case ErrorKind::NotCNU:
    case ErrorKind::NotPSD:
    case ErrorKind::NotHermitian:
    case ErrorKind::NotIsometry:
    case ErrorKind::QNotCommutingWithOperators:
      return 4;
    case ErrorKind::NotDoublyCommuting:
      return 5;
    case ErrorKind::InternalError:
      return 6;
  }
  return 6;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Canonical, Wold and Levan decompositions of q-commuting contraction tuples", "qsplit"};
  app.require_subcommand(1);

  Common common;
  std::string verify_mode = "plain";
  auto* verify = app.add_subcommand("verify", "check the q-commuting relations of a tuple");
  add_common(verify, common);
  verify->add_option("--mode", verify_mode, "plain or doubly")->check(CLI::IsMember({"plain", "doubly"}));

  std::string decompose_mode = "tuple";
  bool emit_bases = false;
  auto* decompose = app.add_subcommand("decompose", "split the space into reducing parts");
  add_common(decompose, common);
  decompose->add_option("--mode", decompose_mode, "canonical, tuple, levan, split or wold")
      ->check(CLI::IsMember({"canonical", "tuple", "levan", "split", "wold"}));
  decompose->add_flag("--emit-bases", emit_bases, "include orthonormal frames and restricted tuples");

  auto* classify_cmd = app.add_subcommand("classify", "classify each operator");
  add_common(classify_cmd, common);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "write a generated operator file");
  generate->add_option("family", gen.family, "clock-shift, shift-phase, planted, planted-dc, planted-q or random")->required();
  generate->add_option("--dim", gen.dim, "dimension (clock-shift, shift-phase, random)");
  generate->add_option("--n", gen.n, "number of operators (planted)");
  generate->add_option("--block", gen.block, "block dimension d_block (planted families)");
  generate->add_option("--signatures", gen.signatures, "e.g. uu=3,uc=3 (planted families)");
  generate->add_option("--merely", gen.merely, "merely commuting block dimension (planted-dc)");
  generate->add_option("--scale", gen.scale, "shift scale (shift-phase)");
  generate->add_option("--phase", gen.phase, "q = exp(2 pi i phase) (shift-phase; default 1/dim)");
  generate->add_option("--seed", gen.seed, "random seed");
  generate->add_option("--out", gen.out_path, "output path (stdout when omitted)");
  generate->add_flag("--json", gen.json_out, "machine-readable summary");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify) return cmd_verify(common, verify_mode, out);
    if (*decompose) return cmd_decompose(common, decompose_mode, emit_bases, out, err);
    if (*classify_cmd) return cmd_classify(common, out);
    if (*generate) return cmd_generate(gen, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: InternalError: " << e.what() << '\n';
    return exit_code(ErrorKind::InternalError);
  }
  return 2;
}

}  // namespace qsplit::cli

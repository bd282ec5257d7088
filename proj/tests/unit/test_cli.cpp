#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "helpers.hpp"
#include "operator_file.hpp"
#include "report.hpp"

using namespace qsplit;
using namespace qsplit::test;
using qsplit::cli::json;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome qsplit_run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("qsplit_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const json& doc) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << doc.dump();
  return p.string();
}

std::string write_tuple(const std::string& name, const OperatorTuple& t) {
  return write_file(name, cli::tuple_to_json(t, cli::default_names(t.size())));
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes are a total function of the error class") {
  CHECK(cli::exit_code(ErrorKind::InvalidArg) == 2);
  CHECK(cli::exit_code(ErrorKind::InvalidMatrix) == 2);
  CHECK(cli::exit_code(ErrorKind::DimMismatch) == 2);
  CHECK(cli::exit_code(ErrorKind::UnsupportedSignature) == 2);
  CHECK(cli::exit_code(ErrorKind::NonUnimodularQ) == 3);
  CHECK(cli::exit_code(ErrorKind::NotAContraction) == 4);
  CHECK(cli::exit_code(ErrorKind::NotCNU) == 4);
  CHECK(cli::exit_code(ErrorKind::NotIsometry) == 4);
  CHECK(cli::exit_code(ErrorKind::QNotCommutingWithOperators) == 4);
  CHECK(cli::exit_code(ErrorKind::NotDoublyCommuting) == 5);
  CHECK(cli::exit_code(ErrorKind::InternalError) == 6);
}

TEST_CASE("verify examples") {
  const std::string cs = write_tuple("cs3.json", clock_shift(3));
  const Outcome ok = qsplit_run({"verify", cs, "--mode", "doubly", "--json"});
  CHECK(ok.code == 0);
  const json r = json::parse(ok.out);
  for (const auto& row : r["residuals"]["doubly"]) {
    for (const auto& v : row) CHECK(v.get<double>() <= 1e-12);
  }

  const OperatorTuple zx = clock_shift(3);
  const std::string commuting = write_tuple("zx_q1.json", OperatorTuple::dense({zx.dense_part(0), zx.dense_part(1)}));
  const Outcome bad = qsplit_run({"verify", commuting, "--json"});
  CHECK(bad.code == 1);
  CHECK(json::parse(bad.out)["offending_pairs"] == json::array({json::array({1, 2})}));

  const std::string big_q = write_tuple("bigq.json", OperatorTuple::dense({identity(2), identity(2)}, pair_q(2.0)));
  CHECK(qsplit_run({"verify", big_q, "--mode", "doubly"}).code == 3);
  CHECK(qsplit_run({"verify", big_q, "--mode", "plain"}).code == 1);
}

TEST_CASE("verify infers q when omitted") {
  json doc = cli::tuple_to_json(clock_shift(4), {"Z", "X"});
  doc.erase("q");
  const Outcome r = qsplit_run({"verify", write_file("noq.json", doc), "--mode", "doubly", "--json"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["q_inferred"].get<bool>());
  CHECK(std::abs(j["q"][0][1][0].get<double>()) < 1e-12);
  CHECK(j["q"][0][1][1].get<double>() == doctest::Approx(1.0));
  CHECK(j["operators"][0]["name"] == "Z");
}

TEST_CASE("decompose examples") {
  const std::string planted = write_tuple("planted.json", planted_tuple(2, 3, {{"uu", 3}, {"uc", 3}, {"cu", 3}, {"cc", 3}}, 7).tuple);
  const Outcome r = qsplit_run({"decompose", planted, "--mode", "tuple", "--json"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j["parts"].size() == 4);
  for (const auto& p : j["parts"]) CHECK(p["dim"] == 3);

  const std::string j3 = write_tuple("j3.json", OperatorTuple::dense({truncated_shift(3)}));
  const json c = json::parse(qsplit_run({"decompose", j3, "--mode", "canonical", "--json"}).out);
  CHECK(c["parts"][0]["signature"] == "u");
  CHECK(c["parts"][0]["dim"] == 0);
  CHECK(c["parts"][1]["dim"] == 3);

  const std::string iso = write_tuple("iso.json", OperatorTuple::dense({random_unitary(4, 1), identity(4)}));
  const Outcome w = qsplit_run({"decompose", iso, "--mode", "wold", "--json"});
  CHECK(w.code == 0);
  const json wj = json::parse(w.out);
  CHECK(wj["warnings"][0] == "finite-dimensional isometries are unitary");
  CHECK(w.err.find("finite-dimensional isometries are unitary") != std::string::npos);
  for (const auto& p : wj["parts"]) CHECK(p["dim"] == (p["signature"] == "uu" ? 4 : 0));

  CHECK(qsplit_run({"decompose", j3, "--mode", "wold"}).code == 4);
}

TEST_CASE("decompose precondition failures map to exit codes") {
  const std::string mixed = write_tuple("mixed.json", OperatorTuple::dense({diag({1.0, 0.5})}));
  CHECK(qsplit_run({"decompose", mixed, "--mode", "levan"}).code == 4);
  const std::string jj = write_tuple("jj.json", OperatorTuple::dense({truncated_shift(2), truncated_shift(2)}));
  CHECK(qsplit_run({"decompose", jj, "--mode", "tuple"}).code == 5);
  CHECK(qsplit_run({"decompose", jj, "--mode", "split"}).code == 0);
  const std::string zx = write_tuple("zx1.json", OperatorTuple::dense({clock_shift(3).dense_part(0), clock_shift(3).dense_part(1)}));
  CHECK(qsplit_run({"decompose", zx, "--mode", "split"}).code == 1);
  CHECK(qsplit_run({"decompose", jj, "--mode", "canonical"}).code == 2);
  CHECK(qsplit_run({"decompose", jj, "--mode", "bogus"}).code == 2);
}

TEST_CASE("classify examples") {
  const std::string dq = write_tuple("dq.json", OperatorTuple::dense({phase_diagonal(3, omega(3))}));
  CHECK(json::parse(qsplit_run({"classify", dq, "--json"}).out)["operators"][0]["label"] == "A1");
  const json j3 = json::parse(qsplit_run({"classify", write_tuple("j3c.json", OperatorTuple::dense({truncated_shift(3)})), "--json"}).out);
  CHECK(j3["operators"][0]["label"] == "A2");
  CHECK(j3["operators"][0]["cni"].get<bool>());
  const json mixed = json::parse(qsplit_run({"classify", write_tuple("d.json", OperatorTuple::dense({diag({1.0, 0.5})})), "--json"}).out);
  CHECK(mixed["operators"][0]["label"] == "non-atom");
  const std::string loud = write_tuple("loud.json", OperatorTuple::dense({Matrix(2.0 * identity(2))}));
  CHECK(qsplit_run({"classify", loud}).code == 4);
}

TEST_CASE("generate examples") {
  const std::string cs = (scratch() / "gen_cs4.json").string();
  CHECK(qsplit_run({"generate", "clock-shift", "--dim", "4", "--out", cs}).code == 0);
  const Outcome v = qsplit_run({"verify", cs, "--mode", "doubly", "--json"});
  CHECK(v.code == 0);
  const json q = json::parse(v.out)["q"][0][1];
  CHECK(std::abs(q[0].get<double>()) < 1e-12);
  CHECK(q[1].get<double>() == doctest::Approx(1.0));

  const std::string a = (scratch() / "gen_a.json").string();
  const std::string b = (scratch() / "gen_b.json").string();
  CHECK(qsplit_run({"generate", "planted", "--n", "2", "--block", "3", "--seed", "7", "--out", a}).code == 0);
  CHECK(qsplit_run({"generate", "planted", "--n", "2", "--block", "3", "--seed", "7", "--out", b}).code == 0);
  CHECK(read_all(a) == read_all(b));

  const std::string r = (scratch() / "gen_r.json").string();
  CHECK(qsplit_run({"generate", "random", "--dim", "6", "--seed", "1", "--out", r}).code == 0);
  const cli::OperatorFile f = cli::read_operator_file(r);
  CHECK(verify_contraction(f.tuple.op(0)).ok);

  CHECK(qsplit_run({"generate", "nonsense"}).code == 2);
  CHECK(qsplit_run({"generate", "planted", "--signatures", "uu=2"}).code == 2);
  CHECK(qsplit_run({"generate", "shift-phase", "--dim", "3", "--scale", "2"}).code == 2);
}

TEST_CASE("parse errors carry a location") {
  json doc = cli::tuple_to_json(clock_shift(2), {"A", "B"});
  doc["operators"][1]["matrix"][1][0] = json::array({1.0});
  const Outcome r = qsplit_run({"verify", write_file("bad.json", doc)});
  CHECK(r.code == 2);
  CHECK(r.err.find("/operators/1/matrix/1/0") != std::string::npos);

  json wrong_dim = cli::tuple_to_json(clock_shift(2), {"A", "B"});
  wrong_dim["dim"] = 3;
  CHECK(qsplit_run({"verify", write_file("dim.json", wrong_dim)}).code == 2);

  const fs::path garbage = scratch() / "garbage.json";
  std::ofstream(garbage) << "{\"dim\": 2, \"operators\": [NaN]}";
  CHECK(qsplit_run({"verify", garbage.string()}).code == 2);
  CHECK(qsplit_run({"verify", (scratch() / "missing.json").string()}).code == 2);
  CHECK(qsplit_run({"verify"}).code == 2);
  CHECK(qsplit_run({}).code == 2);
  CHECK(qsplit_run({"--help"}).code == 0);
}

TEST_CASE("structured operator files round trip") {
  const Complex w = omega(3);
  const StructuredOperator t1({ShiftSlotBlock::shift(1.0), Matrix(truncated_shift(2))});
  const StructuredOperator t2({ShiftSlotBlock::phase_diag(std::conj(w)), Matrix(phase_diagonal(2, std::conj(w)))});
  const OperatorTuple t({t1, t2}, pair_q(w));
  const json doc = cli::tuple_to_json(t, {"A", "B"});
  CHECK(doc.contains("slots"));
  const cli::OperatorFile back = cli::parse_operator_file(doc);
  CHECK(back.tuple.layout() == t.layout());
  CHECK(back.tuple.op(1).shift_block(0).kind == ShiftSlotBlock::Kind::PhaseDiag);

  const std::string path = write_file("structured.json", doc);
  CHECK(qsplit_run({"verify", path, "--mode", "doubly"}).code == 0);
  const json r = json::parse(qsplit_run({"decompose", path, "--mode", "tuple", "--json"}).out);
  for (const auto& p : r["parts"]) {
    if (p["signature"] == "cu") {
      CHECK(p["shift_slots"] == json::array({0}));
      CHECK(p["dim"] == 2);
    }
  }
  json bad = doc;
  bad["operators"][0]["block"][0] = {{"kind", "shift"}, {"c", json::array({2.0, 0.0})}};
  const Outcome e = qsplit_run({"verify", write_file("badslot.json", bad)});
  CHECK(e.code == 2);
  CHECK(e.err.find("/operators/0/block/0") != std::string::npos);
}

TEST_CASE("text and json reports carry identical numbers") {
  const std::string p = write_tuple("tj.json", planted_tuple(2, 2, {{"uu", 2}, {"cc", 3}}, 3).tuple);
  const json j = json::parse(qsplit_run({"decompose", p, "--json"}).out);
  const std::string text = qsplit_run({"decompose", p}).out;
  for (const auto& part : j["parts"]) {
    CHECK(text.find(cli::format_number(part["reduction_residual"])) != std::string::npos);
  }
  CHECK(text.find(cli::format_number(j["diagnostics"]["completeness_residual"])) != std::string::npos);
  // Residuals in the report equal the library's values to 12 digits.
  const DecompositionResult lib = tuple_decomposition(cli::read_operator_file(p).tuple);
  for (std::size_t k = 0; k < lib.parts.size(); ++k) {
    CHECK(j["parts"][k]["reduction_residual"].get<double>() == cli::round12(lib.parts[k].reduction_residual));
  }
}

TEST_CASE("emitted restrictions re-verify") {
  const std::string p = write_tuple("emit.json", planted_q_tuple(3, {{"uu", 3}, {"cu", 2}}, 5).tuple);
  const json j = json::parse(qsplit_run({"decompose", p, "--emit-bases", "--json"}).out);
  for (const auto& part : j["parts"]) {
    if (part["dim"] == 0) continue;
    CHECK(part["basis"].size() == 5);
    const std::string sub = write_file("emit_" + part["signature"].get<std::string>() + ".json", part["restriction"]);
    CHECK(qsplit_run({"verify", sub, "--mode", "doubly"}).code == 0);
  }
}

}

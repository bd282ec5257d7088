#include "helpers.hpp"

using namespace qsplit;
using namespace qsplit::test;

namespace {

bool identical(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

TEST_SUITE("genlab") {

TEST_CASE("clock_shift examples") {
  const OperatorTuple t2 = clock_shift(2);
  CHECK(spectral_norm(t2.dense_part(0) - diag({1.0, -1.0})) < 1e-15);
  CHECK(spectral_norm(t2.dense_part(1) - mat({{0.0, 1.0}, {1.0, 0.0}})) < 1e-15);
  CHECK(std::abs(t2.commutation().q(0, 1) + 1.0) < 1e-15);
  const Matrix& z = t2.dense_part(0);
  const Matrix& x = t2.dense_part(1);
  CHECK(spectral_norm(z * x + x * z) < 1e-15);

  const OperatorTuple t3 = clock_shift(3);
  CHECK(relation_residual(t3, RelationMode::Plain).residual.maxCoeff() < 1e-15);
  CHECK(classify(t3.dense_part(0)).atom_A == AtomA::A1);
  CHECK(classify(t3.dense_part(1)).atom_A == AtomA::A1);
  CHECK(verify_doubly(t3));
  CHECK(error_of([] { (void)clock_shift(1); }) == ErrorKind::InvalidArg);
}

TEST_CASE("shift_phase_pair examples") {
  const Complex w = omega(3);
  const OperatorTuple t = shift_phase_pair(3, w);
  CHECK(std::abs(t.commutation().q(0, 1) - std::conj(w)) < 1e-15);
  CHECK(relation_residual(t, RelationMode::Doubly).residual.maxCoeff() < 1e-15);
  CHECK(dist(tuple_decomposition(t).at("cu").subspace, Subspace::full(3)) < 1e-12);
  CHECK(classify(t.dense_part(0)).atom_A == AtomA::A2);
  CHECK(classify(t.dense_part(1)).atom_A == AtomA::A1);
  const Classification half = classify(shift_phase_pair(4, omega(4), 0.5).dense_part(0));
  CHECK((half.cnu && half.cni));
  CHECK(error_of([] { (void)shift_phase_pair(3, 1.1); }) == ErrorKind::NonUnimodularQ);
  CHECK(error_of([] { (void)shift_phase_pair(1, 1.0); }) == ErrorKind::InvalidArg);
  CHECK(error_of([] { (void)shift_phase_pair(3, 1.0, 1.5); }) == ErrorKind::InvalidArg);
}

TEST_CASE("truncated shift and phase diagonal intertwine") {
  for (std::size_t d = 2; d <= 6; ++d) {
    const Complex q = omega(d + 1);
    const Matrix s = truncated_shift(d);
    const Matrix dq = phase_diagonal(d, q);
    CHECK(spectral_norm(dq * s - q * s * dq) < 1e-14);
    CHECK(spectral_norm(s * dq.adjoint() - q * dq.adjoint() * s) < 1e-14);
  }
}

TEST_CASE("planted_tuple examples") {
  const PlantedTuple p = planted_tuple(2, 3, {{"uu", 3}, {"uc", 3}, {"cu", 3}, {"cc", 3}}, 7);
  CHECK(p.tuple.dense_dim() == 12);
  CHECK(p.ground_truth.size() == 4);
  const DecompositionResult r = tuple_decomposition(p.tuple);
  for (const auto& [sig, truth] : p.ground_truth) {
    CHECK(truth.dim() == 3);
    CHECK(r.at(sig).dim() == 3);
  }

  const PlantedTuple one = planted_tuple(1, 2, {{"u", 2}, {"c", 2}}, 3);
  const DecompositionResult c = canonical_decomposition(one.tuple.dense_part(0));
  CHECK(c.at("u").dim() == 2);
  CHECK(c.at("c").dim() == 2);

  const PlantedTuple again = planted_tuple(2, 3, {{"uu", 3}, {"uc", 3}, {"cu", 3}, {"cc", 3}}, 7);
  for (std::size_t i = 0; i < 2; ++i) CHECK(identical(p.tuple.dense_part(i), again.tuple.dense_part(i)));
  CHECK(identical(p.conjugator, again.conjugator));
}

TEST_CASE("planted_tuple invariants") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 1 + seed % 3;
    SignatureDims dims;
    if (n == 1) dims = {{"u", 2}, {"c", 3}};
    if (n == 2) dims = {{"uu", 4}, {"cu", 1}, {"cc", 2}};
    if (n == 3) dims = {{"uuc", 2}, {"cuc", 3}, {"ccu", 1}};
    const PlantedTuple p = planted_tuple(n, 2, dims, seed);
    CHECK(spectral_norm(p.conjugator.adjoint() * p.conjugator - identity(p.tuple.dense_dim())) <= 1e-12);
    for (auto a = p.ground_truth.begin(); a != p.ground_truth.end(); ++a) {
      for (auto b = std::next(a); b != p.ground_truth.end(); ++b) {
        CHECK(spectral_norm(a->second.frame().adjoint() * b->second.frame()) <= 1e-12);
      }
    }
    if (n >= 2) {
      CHECK(relation_residual(p.tuple, RelationMode::Plain).residual.maxCoeff() <= 1e-12);
      CHECK(relation_residual(p.tuple, RelationMode::Doubly).residual.maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("planted_tuple errors") {
  CHECK(error_of([] { (void)planted_tuple(2, 3, {{"uu", 2}}, 1); }) == ErrorKind::UnsupportedSignature);
  CHECK(error_of([] { (void)planted_tuple(2, 3, {{"ux", 2}}, 1); }) == ErrorKind::UnsupportedSignature);
  CHECK(error_of([] { (void)planted_tuple(2, 3, {{"uuu", 2}}, 1); }) == ErrorKind::UnsupportedSignature);
  CHECK(error_of([] { (void)planted_tuple(4, 3, {{"uuuu", 3}}, 1); }) == ErrorKind::InvalidArg);
  CHECK(error_of([] { (void)planted_tuple(2, 1, {{"uu", 2}}, 1); }) == ErrorKind::InvalidArg);
  CHECK(error_of([] { (void)planted_tuple(2, 3, {}, 1); }) == ErrorKind::InvalidArg);
}

TEST_CASE("planted_dc_tuple and planted_q_tuple") {
  const PlantedTuple dc = planted_dc_tuple(3, {{"uu", 3}, {"cc", 2}}, 3, 4);
  CHECK(dc.tuple.dense_dim() == 8);
  CHECK(dc.ground_truth.at("dc").dim() == 5);
  CHECK(dc.ground_truth.at("merely").dim() == 3);
  CHECK(verify_q_commuting(dc.tuple));
  CHECK_FALSE(verify_doubly(dc.tuple));
  CHECK(error_of([] { (void)planted_dc_tuple(3, {{"uu", 3}}, 1, 1); }) == ErrorKind::InvalidArg);

  const PlantedTuple q = planted_q_tuple(3, {{"uu", 3}, {"uc", 2}}, 4);
  CHECK_FALSE(q.tuple.commutation().is_scalar());
  CHECK(verify_doubly(q.tuple));
  const Matrix& q12 = q.tuple.commutation().Q(0, 1);
  CHECK(spectral_norm(q12 - q12(0, 0) * identity(5)) > 0.1);
}

TEST_CASE("random generators") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t d = 1 + seed % 8;
    CHECK(verify_contraction(random_contraction(8, seed)).ok);
    const Matrix u = random_unitary(d, seed);
    CHECK(spectral_norm(u.adjoint() * u - identity(d)) <= 1e-12);
    CHECK(identical(u, random_unitary(d, seed)));
  }
  std::size_t strict = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix t = random_contraction(1 + seed % 8, seed);
    if (spectral_norm(t) < 1.0 - 1e-9) {
      ++strict;
      CHECK(unitary_part(t).dim() == 0);
    }
  }
  CHECK(strict >= 95);
  CHECK(error_of([] { (void)random_unitary(0, 1); }) == ErrorKind::InvalidArg);
}

TEST_CASE("rng is pinned") {
  Rng a(123);
  Rng b(123);
  for (int k = 0; k < 100; ++k) CHECK(a.uniform() == b.uniform());
  Rng c(5);
  double sum = 0.0;
  double sq = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const double x = c.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / 20000) < 0.05);
  CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
}

}

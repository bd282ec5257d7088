#include "qsplit/genlab.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "qsplit/error.hpp"

namespace qsplit {

namespace {

constexpr double kBuildResidual = 1e-12;
constexpr double kUnimodular = 1e-12;

Complex root_of_unity(std::size_t d, std::size_t k = 1) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k % d) / static_cast<double>(d));
}

Matrix clock(std::size_t d, std::size_t power) {
  Matrix z = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    z(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = root_of_unity(d, k * power);
  }
  return z;
}

Matrix cyclic_shift(std::size_t d) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    x(static_cast<Eigen::Index>((k + 1) % d), static_cast<Eigen::Index>(k)) = 1.0;
  }
  return x;
}

Matrix kron_identity(std::size_t copies, const Matrix& m) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(copies) * m.rows(),
                            static_cast<Eigen::Index>(copies) * m.cols());
  for (std::size_t c = 0; c < copies; ++c) {
    out.block(static_cast<Eigen::Index>(c) * m.rows(), static_cast<Eigen::Index>(c) * m.cols(),
              m.rows(), m.cols()) = m;
  }
  return out;
}

struct Block {
  std::string name;
  std::vector<Matrix> ops;
};

// A pair realizing `sig` with T1 T2 = w^k T2 T1, w = e^(2 pi i/d_block).
std::vector<Matrix> pair_recipe(const std::string& sig, std::size_t m, std::size_t d_block,
                                std::size_t k) {
  const Complex p = root_of_unity(d_block, k);
  if (sig == "uu") {
    if (m % d_block != 0) {
      throw Error(ErrorKind::UnsupportedSignature,
                  "a uu block needs a dimension divisible by " + std::to_string(d_block));
    }
    return {kron_identity(m / d_block, clock(d_block, k)), kron_identity(m / d_block, cyclic_shift(d_block))};
  }
  if (sig == "uc") return {phase_diagonal(m, p), truncated_shift(m)};
  if (sig == "cu") return {truncated_shift(m), phase_diagonal(m, std::conj(p))};
  if (sig == "cc") return {truncated_shift(m), 0.5 * phase_diagonal(m, std::conj(p))};
  throw Error(ErrorKind::UnsupportedSignature, "no pair recipe for signature '" + sig + "'");
}

void require_signature(const std::string& sig, std::size_t n) {
  if (sig.size() != n || sig.find_first_not_of("uc") != std::string::npos) {
    throw Error(ErrorKind::UnsupportedSignature,
                "signature '" + sig + "' is not a word of length " + std::to_string(n) + " over {u,c}");
  }
}

std::vector<Matrix> recipe(const std::string& sig, std::size_t m, std::size_t d_block, Rng& rng) {
  if (sig.size() == 1) {
    if (sig == "c") return {0.5 * truncated_shift(m)};
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = rng.phase();
    return {u};
  }
  std::vector<Matrix> ops = pair_recipe(sig.substr(0, 2), m, d_block, 1);
  if (sig.size() == 3) {
    const Complex lambda = sig[2] == 'u' ? rng.phase() : Complex(0.5, 0.0);
    ops.push_back(lambda * identity(m));
  }
  return ops;
}

Matrix block_diagonal(const std::vector<Block>& blocks, std::size_t op) {
  Matrix out(0, 0);
  for (const auto& b : blocks) out = direct_sum(out, b.ops[op]);
  return out;
}

PlantedTuple assemble(std::vector<Block> blocks, const CommutationData& comm,
                      std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> extra_truth,
                      Rng& rng, std::uint64_t seed) {
  if (blocks.empty()) throw Error(ErrorKind::InvalidArg, "no blocks requested");
  const std::size_t n = blocks.front().ops.size();
  std::size_t total = 0;
  for (const auto& b : blocks) total += static_cast<std::size_t>(b.ops.front().rows());

  PlantedTuple out;
  out.seed = seed;
  out.conjugator = random_unitary(total, rng);
  const Matrix& w = out.conjugator;

  std::vector<Matrix> ops;
  for (std::size_t i = 0; i < n; ++i) ops.push_back(w * block_diagonal(blocks, i) * w.adjoint());

  std::size_t offset = 0;
  for (const auto& b : blocks) {
    const auto m = static_cast<std::size_t>(b.ops.front().rows());
    out.ground_truth.emplace(b.name, Subspace::orthonormalized(w * Subspace::coordinate(total, offset, m).frame()));
    offset += m;
  }
  for (const auto& [name, range] : extra_truth) {
    out.ground_truth.emplace(
        name, Subspace::orthonormalized(w * Subspace::coordinate(total, range.first, range.second).frame()));
  }

  if (!comm.is_scalar()) {
    std::vector<Matrix> family;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) family.push_back(w * comm.Q(i, j) * w.adjoint());
    }
    out.tuple = OperatorTuple::dense(std::move(ops), CommutationData::unitary_family(std::move(family), n));
  } else {
    out.tuple = OperatorTuple::dense(std::move(ops), comm);
  }
  return out;
}

void check_built(const OperatorTuple& tuple, bool doubly) {
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (!verify_contraction(tuple.op(i)).ok) {
      throw Error(ErrorKind::InternalError, "generated operator is not a contraction");
    }
  }
  if (tuple.size() < 2) return;
  const Tolerance tol;
  auto worst = [](const RelationReport& r) {
    double w = r.residual.maxCoeff();
    if (r.q_commutator.size() > 0) w = std::max(w, r.q_commutator.maxCoeff());
    return w;
  };
  const double plain = worst(relation_residual(tuple, RelationMode::Plain, tol));
  const double dbl = doubly ? worst(relation_residual(tuple, RelationMode::Doubly, tol)) : 0.0;
  if (plain > kBuildResidual || dbl > kBuildResidual) {
    throw Error(ErrorKind::InternalError, "generated tuple misses its relations (plain " +
                                              std::to_string(plain) + ", doubly " + std::to_string(dbl) + ")");
  }
}

Matrix pair_phases(Complex q12, std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  Matrix q = Matrix::Ones(k, k);
  if (n >= 2) {
    q(0, 1) = q12;
    q(1, 0) = std::conj(q12);
  }
  return q;
}

void require_block_size(std::size_t d_block) {
  if (d_block < 2) throw Error(ErrorKind::InvalidArg, "d_block must be at least 2");
}

std::vector<Block> signature_blocks(std::size_t n, std::size_t d_block, const SignatureDims& dims,
                                    Rng& rng) {
  std::vector<Block> blocks;
  for (const auto& [sig, m] : dims) {
    require_signature(sig, n);
    if (m == 0) continue;
    blocks.push_back({sig, recipe(sig, m, d_block, rng)});
  }
  return blocks;
}

}  // namespace

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

Complex Rng::phase() { return std::polar(1.0, 2.0 * std::numbers::pi * uniform()); }

Matrix Rng::gaussian(std::size_t rows, std::size_t cols) {
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = complex_normal();
  }
  return g;
}

Matrix truncated_shift(std::size_t d) {
  Matrix s = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k + 1 < d; ++k) s(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k)) = 1.0;
  return s;
}

Matrix phase_diagonal(std::size_t d, Complex q) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Complex power(1.0, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = power;
    power *= q;
  }
  return m;
}

OperatorTuple clock_shift(std::size_t d) {
  if (d < 2) throw Error(ErrorKind::InvalidArg, "clock_shift needs d >= 2");
  OperatorTuple tuple = OperatorTuple::dense({clock(d, 1), cyclic_shift(d)},
                                             CommutationData::scalar(pair_phases(root_of_unity(d), 2)));
  check_built(tuple, true);
  return tuple;
}

OperatorTuple shift_phase_pair(std::size_t d, Complex q, double scale) {
  if (d < 2) throw Error(ErrorKind::InvalidArg, "shift_phase_pair needs d >= 2");
  if (std::abs(std::abs(q) - 1.0) > kUnimodular) {
    throw Error(ErrorKind::NonUnimodularQ, "|q| = " + std::to_string(std::abs(q)));
  }
  if (!(scale > 0.0 && scale <= 1.0)) throw Error(ErrorKind::InvalidArg, "scale must lie in (0, 1]");
  OperatorTuple tuple = OperatorTuple::dense({scale * truncated_shift(d), phase_diagonal(d, q)},
                                             CommutationData::scalar(pair_phases(std::conj(q), 2)));
  check_built(tuple, true);
  return tuple;
}

Matrix random_unitary(std::size_t d, Rng& rng) {
  if (d < 1) throw Error(ErrorKind::InvalidArg, "dimension must be at least 1");
  const Matrix g = rng.gaussian(d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Rotating each column by the phase of R_kk makes the factorization unique.
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

Matrix random_unitary(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return random_unitary(d, rng);
}

Matrix random_contraction(std::size_t d, Rng& rng) {
  if (d < 1) throw Error(ErrorKind::InvalidArg, "dimension must be at least 1");
  const Matrix g = rng.gaussian(d, d);
  const double u = rng.uniform();
  return g / (spectral_norm(g) * (1.0 + u));
}

Matrix random_contraction(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return random_contraction(d, rng);
}

PlantedTuple planted_tuple(std::size_t n, std::size_t d_block, const SignatureDims& signature_dims,
                           std::uint64_t seed) {
  if (n < 1 || n > 3) throw Error(ErrorKind::InvalidArg, "planted tuples have 1 to 3 operators");
  require_block_size(d_block);
  Rng rng(seed);
  std::vector<Block> blocks = signature_blocks(n, d_block, signature_dims, rng);
  const CommutationData comm = n == 1 ? CommutationData::commuting(1)
                                      : CommutationData::scalar(pair_phases(root_of_unity(d_block), n));
  PlantedTuple out = assemble(std::move(blocks), comm, {}, rng, seed);
  check_built(out.tuple, true);
  return out;
}

PlantedTuple planted_contraction(std::size_t a, std::size_t b, std::uint64_t seed) {
  if (a + b == 0) throw Error(ErrorKind::InvalidArg, "empty planted contraction");
  Rng rng(seed);
  std::vector<Block> blocks;
  if (a > 0) blocks.push_back({"u", {random_unitary(a, rng)}});
  if (b > 0) {
    const Matrix g = rng.gaussian(b, b);
    const double target = 0.1 + 0.8 * rng.uniform();
    blocks.push_back({"c", {g * (target / spectral_norm(g))}});
  }
  PlantedTuple out = assemble(std::move(blocks), CommutationData::commuting(1), {}, rng, seed);
  if (a == 0) out.ground_truth.emplace("u", Subspace::zero(a + b));
  if (b == 0) out.ground_truth.emplace("c", Subspace::zero(a + b));
  check_built(out.tuple, true);
  return out;
}

PlantedTuple planted_dc_tuple(std::size_t d_block, const SignatureDims& signature_dims,
                              std::size_t merely_dim, std::uint64_t seed) {
  require_block_size(d_block);
  if (merely_dim < 2) throw Error(ErrorKind::InvalidArg, "the merely commuting block needs dimension >= 2");
  Rng rng(seed);
  std::vector<Block> blocks = signature_blocks(2, d_block, signature_dims, rng);
  std::size_t doubly_dim = 0;
  for (const auto& b : blocks) doubly_dim += static_cast<std::size_t>(b.ops.front().rows());

  const Complex w = root_of_unity(d_block);
  const Matrix s = truncated_shift(merely_dim);
  blocks.push_back({"merely", {s, phase_diagonal(merely_dim, std::conj(w)) * s}});

  PlantedTuple out = assemble(std::move(blocks), CommutationData::scalar(pair_phases(w, 2)),
                              {{"dc", {0, doubly_dim}}}, rng, seed);
  check_built(out.tuple, false);
  return out;
}

PlantedTuple planted_q_tuple(std::size_t d_block, const SignatureDims& signature_dims,
                             std::uint64_t seed) {
  require_block_size(d_block);
  Rng rng(seed);
  std::vector<Block> blocks;
  Matrix q(0, 0);
  std::size_t k = 1;
  for (const auto& [sig, m] : signature_dims) {
    require_signature(sig, 2);
    if (m == 0) continue;
    blocks.push_back({sig, pair_recipe(sig, m, d_block, k)});
    q = direct_sum(q, root_of_unity(d_block, k) * identity(m));
    ++k;
  }
  if (blocks.empty()) throw Error(ErrorKind::InvalidArg, "no blocks requested");
  const auto d = static_cast<std::size_t>(q.rows());
  const CommutationData local =
      CommutationData::unitary_family({identity(d), q, q.adjoint(), identity(d)}, 2);
  PlantedTuple out = assemble(std::move(blocks), local, {}, rng, seed);
  check_built(out.tuple, true);
  return out;
}

}  // namespace qsplit

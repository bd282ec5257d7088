#pragma once

// Seeded generators with known ground truth.
//
// Sampling is pinned so other implementations can reproduce suites
// statistically: std::mt19937_64 seeded with the given value, uniforms as
// (x >> 11) * 2^-53, standard normals by Box-Muller, complex normals with
// independent N(0, 1/2) parts. Draws happen in row-major order.

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "qsplit/numkit.hpp"
#include "qsplit/opmodel.hpp"

namespace qsplit {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  double normal();
  Complex complex_normal();
  /// e^(2 pi i u), u uniform.
  Complex phase();
  /// rows x cols complex Gaussian matrix, row-major draws.
  Matrix gaussian(std::size_t rows, std::size_t cols);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Z = diag(w^0..w^(d-1)), X: e_k -> e_(k+1 mod d), w = e^(2 pi i/d); stores q_12 = w.
OperatorTuple clock_shift(std::size_t d);

/// (scale J_d, D_q): truncated shift e_k -> e_(k+1) and D_q = diag(1, q, ..., q^(d-1)).
/// Stores q_12 = conj(q).
OperatorTuple shift_phase_pair(std::size_t d, Complex q, double scale = 1.0);

/// Truncated shift e_k -> e_(k+1) on C^d.
Matrix truncated_shift(std::size_t d);
/// diag(1, q, ..., q^(d-1)).
Matrix phase_diagonal(std::size_t d, Complex q);

Matrix random_unitary(std::size_t d, std::uint64_t seed);
Matrix random_unitary(std::size_t d, Rng& rng);
/// G / (sigma_max(G) (1 + u)), u uniform on [0, 1).
Matrix random_contraction(std::size_t d, std::uint64_t seed);
Matrix random_contraction(std::size_t d, Rng& rng);

struct PlantedTuple {
  OperatorTuple tuple;
  /// Signature (or block name) -> W-image of its coordinate block.
  std::map<std::string, Subspace> ground_truth;
  Matrix conjugator;
  std::uint64_t seed = 0;
};

using SignatureDims = std::map<std::string, std::size_t>;

/// Direct sum of recipe blocks, one per requested signature over {u,c}^n, conjugated
/// by a seeded unitary. Every block shares q_12 = e^(2 pi i/d_block); extra
/// operators (n = 3) are scalar multiples of I with q = 1. A "uu" block needs a
/// dimension divisible by d_block. Zero dimensions are skipped.
PlantedTuple planted_tuple(std::size_t n, std::size_t d_block, const SignatureDims& signature_dims,
                           std::uint64_t seed);

/// Random unitary of dimension a plus a strict contraction (norm <= 0.9) of
/// dimension b, conjugated. Ground truth keys "u" and "c".
PlantedTuple planted_contraction(std::size_t a, std::size_t b, std::uint64_t seed);

/// planted_tuple(2, ...) plus a block of dimension `merely_dim` that is q-commuting
/// with the same q_12 but has no doubly commuting reducing subspace. Ground truth keys:
/// the signatures, "dc" (all doubly blocks) and "merely".
PlantedTuple planted_dc_tuple(std::size_t d_block, const SignatureDims& signature_dims,
                              std::size_t merely_dim, std::uint64_t seed);

/// Pair tuple with operator-valued Q(1,2) = W (sum_k w^(k+1) I_k) W*, w = e^(2 pi i/d_block),
/// one phase per signature block in map order.
PlantedTuple planted_q_tuple(std::size_t d_block, const SignatureDims& signature_dims,
                             std::uint64_t seed);

}  // namespace qsplit

#pragma once

// Canonical, Wold and Levan decompositions.
//
// Everything here is built on max_reducing_in: the largest subspace inside W
// that reduces every given operator, found as a greatest fixed point. The
// unitary part, the isometric part and the doubly-commuting part of a tuple
// are all "largest reducing subspace inside some kernel".
//
// For structured operators the dense slots are handled numerically on their
// block-diagonal sum, and symbolic shift slots are atoms that move as a whole.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsplit/numkit.hpp"
#include "qsplit/opmodel.hpp"

namespace qsplit {

/// A subspace of a structured space: a subspace of the dense portion plus whole shift slots.
struct SlotSubspace {
  Subspace dense;
  std::vector<std::size_t> shift_slots;
};

struct Part {
  std::string signature;
  /// Subspace of the dense portion.
  Subspace subspace;
  /// Shift slots (indices into the operator layout) carried whole by this part.
  std::vector<std::size_t> shift_slots;
  /// One per tuple operator, in the basis of subspace.frame().
  std::vector<StructuredOperator> restrictions;
  /// Row-major n*n compressions of Q(i,j); operator-valued commutation only.
  std::vector<Matrix> q_blocks;
  /// Atom type of each operator on this part (A1/A2 or B1/B2).
  std::vector<std::string> labels;
  /// max reduction residual against every operator and every Q(i,j).
  double reduction_residual = 0.0;

  std::size_t dim() const { return subspace.dim(); }
};

struct Diagnostics {
  double max_reduction_residual = 0.0;
  /// ||sum_g P_g - I|| over the dense portion.
  double completeness_residual = 0.0;
  /// max_{g != h} ||B_g* B_h||.
  double orthogonality_residual = 0.0;
  /// max ||Q_k(i,j)* Q_k(i,j) - I|| over reported Q blocks.
  double q_unitarity_residual = 0.0;
  std::size_t iterations = 0;
};

struct DecompositionResult {
  std::vector<Part> parts;
  Diagnostics diagnostics;

  const Part* find(std::string_view signature) const;
  /// Throws InvalidArg when absent.
  const Part& at(std::string_view signature) const;
};

/// Largest K inside w with T K in K and T* K in K for every T in ops.
/// `iterations`, when given, receives the number of fixed-point sweeps.
Subspace max_reducing_in(std::span<const Matrix> ops, const Subspace& w, const Tolerance& tol = {},
                         std::size_t* iterations = nullptr);

/// Maximal reducing subspace on which T is unitary.
Subspace unitary_part(const Matrix& t, const Tolerance& tol = {});

/// Intersection of Ker D_T(n) and Ker D_T(-n) for n = 1..max_n (0 means the dimension),
/// stopping once two consecutive intersections agree. Independent of max_reducing_in.
Subspace defect_kernel_unitary_part(const Matrix& t, std::size_t max_n = 0,
                                    const Tolerance& tol = {});

/// Maximal reducing subspace on which T is an isometry.
Subspace isometric_part(const Matrix& t, const Tolerance& tol = {});
SlotSubspace isometric_part(const StructuredOperator& t, const Tolerance& tol = {});

/// Parts "u" (unitary) and "c" (completely non-unitary).
DecompositionResult canonical_decomposition(const Matrix& t, const Tolerance& tol = {});
DecompositionResult canonical_decomposition(const StructuredOperator& t, const Tolerance& tol = {});

/// Parts "p" (pure isometry) and "n" (completely non-isometric); throws NotCNU.
DecompositionResult levan_decomposition(const Matrix& t, const Tolerance& tol = {});
DecompositionResult levan_decomposition(const StructuredOperator& t, const Tolerance& tol = {});

inline constexpr std::size_t kMaxTupleSize = 8;

/// 2^n parts over {u,c}^n for a doubly q- or Q-commuting tuple.
/// Throws NonUnimodularQ, QNotCommutingWithOperators, NotDoublyCommuting.
DecompositionResult tuple_decomposition(const OperatorTuple& tuple, const Tolerance& tol = {});

/// 2^n parts over {p,n}^n for a doubly commuting tuple of cnu contractions. Throws NotCNU.
DecompositionResult cnu_tuple_decomposition(const OperatorTuple& tuple, const Tolerance& tol = {});

/// Maximal joint reducing subspace on which the tuple is doubly commuting.
SlotSubspace dc_part(const OperatorTuple& tuple, const Tolerance& tol = {});

/// Parts "u...u" (maximal joint unitary part) and "cnu-tuple" (its complement).
DecompositionResult unitary_cnu_split(const OperatorTuple& tuple, const Tolerance& tol = {});

inline constexpr std::string_view kCnuTupleSignature = "cnu-tuple";

/// The tuple restricted to a part, with q or the Q blocks carried along.
OperatorTuple restrict_to(const OperatorTuple& tuple, const Part& part);

}  // namespace qsplit

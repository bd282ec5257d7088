#pragma once

// Operators, tuples and their commutation data.
//
// Relation convention, used by every generator and check in the library:
//
//   plain:   T_i T_j  = q_ij T_j T_i        (operator form: Q(i,j) T_j T_i)
//   doubly:  T_i T_j* = conj(q_ij) T_j* T_i (operator form: Q(i,j)* T_j* T_i)
//
// with q_ii = 1 and q_ji = 1 / q_ij (resp. Q(i,i) = I, Q(j,i) = Q(i,j)*).

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qsplit/numkit.hpp"

namespace qsplit {

using DenseOperator = Matrix;

/// A symbolic block on l^2(N) (x) C^m. Shift(c) is c times the unilateral
/// shift e_k -> e_(k+1); PhaseDiag(p) is diag(p^0, p^1, ...); Scalar(c) is c I.
struct ShiftSlotBlock {
  enum class Kind { Shift, PhaseDiag, Scalar };

  Kind kind = Kind::Scalar;
  Complex value{1.0, 0.0};
  std::size_t multiplicity = 1;

  static ShiftSlotBlock shift(Complex c, std::size_t multiplicity = 1);
  static ShiftSlotBlock phase_diag(Complex p, std::size_t multiplicity = 1);
  static ShiftSlotBlock scalar(Complex c, std::size_t multiplicity = 1);

  /// Throws InvalidArg unless |c| <= 1 (Shift, Scalar) or |p| = 1 (PhaseDiag) within 1e-12.
  void validate() const;

  double norm() const;
  bool is_unitary() const;
  bool is_isometry() const;
  /// Whether the block has a nonzero reducing subspace on which it is unitary.
  bool has_unitary_part() const { return is_unitary(); }
  bool has_isometric_part() const { return is_isometry(); }
};

std::string_view to_string(ShiftSlotBlock::Kind kind);

using Slot = std::variant<Matrix, ShiftSlotBlock>;

struct SlotShape {
  bool dense = true;
  std::size_t size = 0;  // side for dense slots, multiplicity for shift slots

  bool operator==(const SlotShape&) const = default;
};

/// Finite direct sum of dense blocks and symbolic shift-slot blocks.
class StructuredOperator {
 public:
  StructuredOperator() = default;
  explicit StructuredOperator(std::vector<Slot> slots);
  static StructuredOperator dense(Matrix m);

  const std::vector<Slot>& slots() const { return slots_; }
  std::vector<SlotShape> layout() const;
  /// No shift slots: the operator is the dense matrix dense_part().
  bool is_dense() const { return shift_slot_count_ == 0; }
  std::size_t dense_dim() const { return static_cast<std::size_t>(dense_.rows()); }
  /// Block-diagonal sum of the dense slots, in slot order.
  const Matrix& dense_part() const { return dense_; }
  std::vector<std::size_t> shift_slot_indices() const;
  const ShiftSlotBlock& shift_block(std::size_t slot) const;

 private:
  std::vector<Slot> slots_;
  Matrix dense_ = Matrix(0, 0);
  std::size_t shift_slot_count_ = 0;
};

/// Scalar phases q_ij or a family of unitaries Q(i,j).
class CommutationData {
 public:
  CommutationData() = default;

  static CommutationData commuting(std::size_t n);
  /// Validates q_ii = 1 and q_ij q_ji = 1 within 1e-12.
  static CommutationData scalar(Matrix q);
  /// `family` is row-major n*n; validates Q(i,i) = I, Q(j,i) = Q(i,j)*, unitarity within 1e-10.
  static CommutationData unitary_family(std::vector<Matrix> family, std::size_t n);

  bool is_scalar() const { return family_.empty(); }
  std::size_t size() const { return n_; }
  Complex q(std::size_t i, std::size_t j) const;
  const Matrix& phases() const { return phases_; }
  const Matrix& Q(std::size_t i, std::size_t j) const;
  /// Q(i,j) in operator form on a space of dimension `dim` (q_ij I in the scalar case).
  Matrix operator_form(std::size_t i, std::size_t j, std::size_t dim) const;
  /// The same data as the family q_ij I on C^dim.
  CommutationData as_unitary_family(std::size_t dim) const;
  /// Largest ||q_ij| - 1| (scalar case), 0 for operator data.
  double max_modulus_defect() const;
  CommutationData permuted(const std::vector<std::size_t>& order) const;

 private:
  std::size_t n_ = 0;
  Matrix phases_ = Matrix(0, 0);
  std::vector<Matrix> family_;
};

class OperatorTuple {
 public:
  OperatorTuple() = default;
  /// Throws DimMismatch on differing slot layouts or commutation size.
  OperatorTuple(std::vector<StructuredOperator> operators, CommutationData commutation);
  static OperatorTuple dense(std::vector<Matrix> operators, CommutationData commutation);
  static OperatorTuple dense(std::vector<Matrix> operators);

  std::size_t size() const { return operators_.size(); }
  bool is_dense() const;
  std::size_t dense_dim() const;
  std::vector<SlotShape> layout() const;
  std::vector<std::size_t> shift_slot_indices() const;

  const StructuredOperator& op(std::size_t i) const { return operators_.at(i); }
  const Matrix& dense_part(std::size_t i) const { return operators_.at(i).dense_part(); }
  const std::vector<StructuredOperator>& operators() const { return operators_; }
  const CommutationData& commutation() const { return commutation_; }

  /// Every Q(i,j) with i != j in operator form on the dense portion (empty in scalar mode).
  std::vector<Matrix> q_operators() const;
  double max_norm() const;

  /// Operator a of the result is operator order[a] of this tuple; phases follow.
  OperatorTuple permuted(const std::vector<std::size_t>& order) const;

 private:
  std::vector<StructuredOperator> operators_;
  CommutationData commutation_;
};

struct ContractionReport {
  double norm = 0.0;
  bool ok = false;
};

ContractionReport verify_contraction(const Matrix& t, const Tolerance& tol = {});
ContractionReport verify_contraction(const StructuredOperator& t, const Tolerance& tol = {});

enum class RelationMode { Plain, Doubly };

struct RelationReport {
  RealMatrix residual;
  /// (i,j): max(||Q(i,j)T_i - T_iQ(i,j)||, ||Q(i,j)T_j - T_jQ(i,j)||); empty for scalar data.
  RealMatrix q_commutator;
  double threshold = 0.0;
};

RelationReport relation_residual(const OperatorTuple& tuple, RelationMode mode,
                                 const Tolerance& tol = {});

/// Exact residual of one shift-slot pair (A = block of T_i, B = block of T_j) under phase q.
double slot_relation_residual(const ShiftSlotBlock& a, const ShiftSlotBlock& b, Complex q,
                              RelationMode mode);

/// Residuals are accepted when <= tol.rel * (1 + max operator norm).
double relation_threshold(const OperatorTuple& tuple, const Tolerance& tol);

/// Throws QNotCommutingWithOperators when operator-valued Q fails its hypothesis.
bool verify_q_commuting(const OperatorTuple& tuple, const Tolerance& tol = {});
/// Additionally throws NonUnimodularQ when some scalar |q_ij| differs from 1 by more than 1e-8.
bool verify_doubly(const OperatorTuple& tuple, const Tolerance& tol = {});

void require_unimodular(const CommutationData& commutation);
void require_q_commutes(const OperatorTuple& tuple, const Tolerance& tol);

Matrix matrix_power(const Matrix& t, unsigned n);

/// I - T*^n T^n for n >= 0, I - T^|n| T*^|n| for n < 0.
Matrix defect_squared(const Matrix& t, int n);
/// (defect_squared)^(1/2); propagates NotPSD when ||T|| > 1.
Matrix defect(const Matrix& t, int n, const Tolerance& tol = {});

enum class AtomA { A1, A2 };
enum class AtomB { B1, B2 };
std::string_view to_string(AtomA a);
std::string_view to_string(AtomB b);

struct Classification {
  bool unitary = false;
  bool cnu = false;
  bool isometry = false;
  bool pure_isometry = false;
  bool cni = false;
  std::optional<AtomA> atom_A;
  std::optional<AtomB> atom_B;
};

/// Throws NotAContraction. Uses the decomposition kernels for the cnu/cni flags.
Classification classify(const Matrix& t, const Tolerance& tol = {});
Classification classify(const ShiftSlotBlock& block);
Classification classify(const StructuredOperator& t, const Tolerance& tol = {});

/// Least-squares q with T1 T2 ~ q T2 T1; nullopt when ||T2 T1||_F <= abs_floor.
std::optional<Complex> infer_phase(const Matrix& t1, const Matrix& t2, const Tolerance& tol = {});

}  // namespace qsplit

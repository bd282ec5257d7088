#include "qsplit/opmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qsplit/decomp.hpp"
#include "qsplit/error.hpp"

namespace qsplit {

namespace {

constexpr double kBlockConstraint = 1e-12;
constexpr double kPhaseConstraint = 1e-12;
constexpr double kFamilyConstraint = 1e-10;
constexpr double kUnimodularGate = 1e-8;

// For symbolic blocks A, B of one shift slot: A B = q_true B A with ||B A|| = product_norm.
struct SlotPairRelation {
  Complex q_true{1.0, 0.0};
  double product_norm = 0.0;
  bool both_shifts = false;
};

SlotPairRelation slot_pair_relation(const ShiftSlotBlock& a, const ShiftSlotBlock& b) {
  using Kind = ShiftSlotBlock::Kind;
  SlotPairRelation rel;
  rel.product_norm = a.norm() * b.norm();
  if (a.kind == Kind::Scalar || b.kind == Kind::Scalar) return rel;
  if (a.kind == Kind::Shift && b.kind == Kind::Shift) {
    rel.both_shifts = true;
    return rel;
  }
  if (a.kind == Kind::PhaseDiag && b.kind == Kind::PhaseDiag) return rel;
  // D_p S = p S D_p, so S D_p = conj(p) D_p S for unimodular p.
  if (a.kind == Kind::PhaseDiag) {
    rel.q_true = a.value;
  } else {
    rel.q_true = std::conj(b.value);
  }
  return rel;
}

}  // namespace

double slot_relation_residual(const ShiftSlotBlock& a, const ShiftSlotBlock& b, Complex q,
                              RelationMode mode) {
  const SlotPairRelation rel = slot_pair_relation(a, b);
  if (rel.product_norm == 0.0) return 0.0;
  if (mode == RelationMode::Doubly && rel.both_shifts) {
    // a conj(b) (S S* - conj(q) I): S S* is a projection with both eigenvalues 0 and 1.
    return rel.product_norm * std::max(std::abs(1.0 - q), std::abs(q));
  }
  return std::abs(rel.q_true - q) * rel.product_norm;
}

namespace {

Classification vacuous_unitary() {
  Classification c;
  c.unitary = true;
  c.isometry = true;
  c.atom_A = AtomA::A1;
  return c;
}

void assign_atoms(Classification& c) {
  c.pure_isometry = c.isometry && c.cnu;
  c.atom_A.reset();
  c.atom_B.reset();
  if (c.unitary) c.atom_A = AtomA::A1;
  if (c.cnu) c.atom_A = AtomA::A2;
  if (c.pure_isometry) {
    c.atom_B = AtomB::B1;
  } else if (c.cnu && c.cni) {
    c.atom_B = AtomB::B2;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ShiftSlotBlock

ShiftSlotBlock ShiftSlotBlock::shift(Complex c, std::size_t multiplicity) {
  ShiftSlotBlock b{Kind::Shift, c, multiplicity};
  b.validate();
  return b;
}

ShiftSlotBlock ShiftSlotBlock::phase_diag(Complex p, std::size_t multiplicity) {
  ShiftSlotBlock b{Kind::PhaseDiag, p, multiplicity};
  b.validate();
  return b;
}

ShiftSlotBlock ShiftSlotBlock::scalar(Complex c, std::size_t multiplicity) {
  ShiftSlotBlock b{Kind::Scalar, c, multiplicity};
  b.validate();
  return b;
}

void ShiftSlotBlock::validate() const {
  if (multiplicity == 0) throw Error(ErrorKind::InvalidArg, "shift slot multiplicity must be positive");
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    throw Error(ErrorKind::InvalidMatrix, "shift slot parameter is not finite");
  }
  const double mod = std::abs(value);
  if (kind == Kind::PhaseDiag) {
    if (std::abs(mod - 1.0) > kBlockConstraint) {
      throw Error(ErrorKind::InvalidArg, "PhaseDiag parameter must be unimodular");
    }
  } else if (mod > 1.0 + kBlockConstraint) {
    throw Error(ErrorKind::InvalidArg, std::string(to_string(kind)) + " parameter exceeds modulus 1");
  }
}

double ShiftSlotBlock::norm() const {
  return kind == Kind::PhaseDiag ? 1.0 : std::abs(value);
}

bool ShiftSlotBlock::is_isometry() const {
  return kind == Kind::PhaseDiag || std::abs(std::abs(value) - 1.0) <= kBlockConstraint;
}

bool ShiftSlotBlock::is_unitary() const {
  return kind != Kind::Shift && is_isometry();
}

std::string_view to_string(ShiftSlotBlock::Kind kind) {
  switch (kind) {
    case ShiftSlotBlock::Kind::Shift: return "shift";
    case ShiftSlotBlock::Kind::PhaseDiag: return "phase_diag";
    case ShiftSlotBlock::Kind::Scalar: return "scalar";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// StructuredOperator

StructuredOperator::StructuredOperator(std::vector<Slot> slots) : slots_(std::move(slots)) {
  Eigen::Index dense_dim = 0;
  for (const auto& slot : slots_) {
    if (const auto* m = std::get_if<Matrix>(&slot)) {
      require_square(*m, "dense slot");
      require_finite(*m, "dense slot");
      dense_dim += m->rows();
    } else {
      std::get<ShiftSlotBlock>(slot).validate();
      ++shift_slot_count_;
    }
  }
  dense_ = Matrix::Zero(dense_dim, dense_dim);
  Eigen::Index offset = 0;
  for (const auto& slot : slots_) {
    if (const auto* m = std::get_if<Matrix>(&slot)) {
      dense_.block(offset, offset, m->rows(), m->cols()) = *m;
      offset += m->rows();
    }
  }
}

StructuredOperator StructuredOperator::dense(Matrix m) {
  std::vector<Slot> slots;
  slots.emplace_back(std::move(m));
  return StructuredOperator(std::move(slots));
}

std::vector<SlotShape> StructuredOperator::layout() const {
  std::vector<SlotShape> shapes;
  shapes.reserve(slots_.size());
  for (const auto& slot : slots_) {
    if (const auto* m = std::get_if<Matrix>(&slot)) {
      shapes.push_back({true, static_cast<std::size_t>(m->rows())});
    } else {
      shapes.push_back({false, std::get<ShiftSlotBlock>(slot).multiplicity});
    }
  }
  return shapes;
}

std::vector<std::size_t> StructuredOperator::shift_slot_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (std::holds_alternative<ShiftSlotBlock>(slots_[s])) out.push_back(s);
  }
  return out;
}

const ShiftSlotBlock& StructuredOperator::shift_block(std::size_t slot) const {
  const auto* block = std::get_if<ShiftSlotBlock>(&slots_.at(slot));
  if (block == nullptr) throw Error(ErrorKind::InvalidArg, "slot " + std::to_string(slot) + " is dense");
  return *block;
}

// ---------------------------------------------------------------------------
// CommutationData

CommutationData CommutationData::commuting(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return scalar(Matrix::Ones(k, k));
}

CommutationData CommutationData::scalar(Matrix q) {
  require_square(q, "phase matrix");
  require_finite(q, "phase matrix");
  const auto n = static_cast<std::size_t>(q.rows());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    if (std::abs(q(i, i) - 1.0) > kPhaseConstraint) {
      throw Error(ErrorKind::InvalidArg, "q_ii must equal 1 (index " + std::to_string(i + 1) + ")");
    }
    for (Eigen::Index j = i + 1; j < q.cols(); ++j) {
      if (q(i, j) == 0.0 || std::abs(q(i, j) * q(j, i) - 1.0) > kPhaseConstraint) {
        throw Error(ErrorKind::InvalidArg, "q_ji must equal 1/q_ij (pair " + std::to_string(i + 1) +
                                               "," + std::to_string(j + 1) + ")");
      }
    }
  }
  CommutationData data;
  data.n_ = n;
  data.phases_ = std::move(q);
  return data;
}

CommutationData CommutationData::unitary_family(std::vector<Matrix> family, std::size_t n) {
  if (family.size() != n * n) {
    throw Error(ErrorKind::DimMismatch, "Q family must hold n*n matrices");
  }
  if (n == 0) throw Error(ErrorKind::InvalidArg, "Q family is empty");
  const Eigen::Index d = family.front().rows();
  for (const auto& m : family) {
    require_square(m, "Q(i,j)");
    require_finite(m, "Q(i,j)");
    if (m.rows() != d) throw Error(ErrorKind::DimMismatch, "Q(i,j) blocks differ in size");
  }
  const Matrix id = Matrix::Identity(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Matrix& qij = family[i * n + j];
      const std::string where = "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      if (spectral_norm(qij.adjoint() * qij - id) > kFamilyConstraint) {
        throw Error(ErrorKind::InvalidArg, "Q" + where + " is not unitary");
      }
      if (i == j && spectral_norm(qij - id) > kFamilyConstraint) {
        throw Error(ErrorKind::InvalidArg, "Q" + where + " must be the identity");
      }
      if (spectral_norm(family[j * n + i] - qij.adjoint()) > kFamilyConstraint) {
        throw Error(ErrorKind::InvalidArg, "Q(j,i) must equal Q(i,j)* at " + where);
      }
    }
  }
  CommutationData data;
  data.n_ = n;
  data.family_ = std::move(family);
  return data;
}

Complex CommutationData::q(std::size_t i, std::size_t j) const {
  if (!is_scalar()) throw Error(ErrorKind::InvalidArg, "commutation data is operator-valued");
  return phases_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

const Matrix& CommutationData::Q(std::size_t i, std::size_t j) const {
  if (is_scalar()) throw Error(ErrorKind::InvalidArg, "commutation data is scalar");
  return family_.at(i * n_ + j);
}

Matrix CommutationData::operator_form(std::size_t i, std::size_t j, std::size_t dim) const {
  if (is_scalar()) return q(i, j) * identity(dim);
  const Matrix& m = Q(i, j);
  if (static_cast<std::size_t>(m.rows()) != dim) {
    throw Error(ErrorKind::DimMismatch, "Q(i,j) does not act on the requested space");
  }
  return m;
}

CommutationData CommutationData::as_unitary_family(std::size_t dim) const {
  if (!is_scalar()) return *this;
  std::vector<Matrix> family;
  family.reserve(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) family.push_back(q(i, j) * identity(dim));
  }
  return unitary_family(std::move(family), n_);
}

double CommutationData::max_modulus_defect() const {
  if (!is_scalar()) return 0.0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < phases_.rows(); ++i) {
    for (Eigen::Index j = 0; j < phases_.cols(); ++j) {
      worst = std::max(worst, std::abs(std::abs(phases_(i, j)) - 1.0));
    }
  }
  return worst;
}

CommutationData CommutationData::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != n_) throw Error(ErrorKind::DimMismatch, "permutation size differs from tuple size");
  if (is_scalar()) {
    Matrix q(phases_.rows(), phases_.cols());
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = 0; b < n_; ++b) {
        q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = this->q(order[a], order[b]);
      }
    }
    return scalar(std::move(q));
  }
  std::vector<Matrix> family;
  family.reserve(n_ * n_);
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = 0; b < n_; ++b) family.push_back(Q(order[a], order[b]));
  }
  return unitary_family(std::move(family), n_);
}

// ---------------------------------------------------------------------------
// OperatorTuple

OperatorTuple::OperatorTuple(std::vector<StructuredOperator> operators, CommutationData commutation)
    : operators_(std::move(operators)), commutation_(std::move(commutation)) {
  if (operators_.empty()) throw Error(ErrorKind::InvalidArg, "operator tuple is empty");
  if (commutation_.size() == 0) commutation_ = CommutationData::commuting(operators_.size());
  if (commutation_.size() != operators_.size()) {
    throw Error(ErrorKind::DimMismatch, "commutation data is " + std::to_string(commutation_.size()) +
                                            "x" + std::to_string(commutation_.size()) + " for " +
                                            std::to_string(operators_.size()) + " operators");
  }
  const auto shape = operators_.front().layout();
  for (std::size_t i = 1; i < operators_.size(); ++i) {
    if (operators_[i].layout() != shape) {
      throw Error(ErrorKind::DimMismatch,
                  "operator " + std::to_string(i + 1) + " has a different slot layout");
    }
  }
  if (!commutation_.is_scalar()) {
    if (!is_dense()) {
      throw Error(ErrorKind::InvalidArg, "operator-valued Q requires dense operators");
    }
    if (static_cast<std::size_t>(commutation_.Q(0, 0).rows()) != dense_dim()) {
      throw Error(ErrorKind::DimMismatch, "Q(i,j) size differs from the operator size");
    }
  }
}

OperatorTuple OperatorTuple::dense(std::vector<Matrix> operators, CommutationData commutation) {
  std::vector<StructuredOperator> ops;
  ops.reserve(operators.size());
  for (auto& m : operators) ops.push_back(StructuredOperator::dense(std::move(m)));
  return OperatorTuple(std::move(ops), std::move(commutation));
}

OperatorTuple OperatorTuple::dense(std::vector<Matrix> operators) {
  const std::size_t n = operators.size();
  return dense(std::move(operators), CommutationData::commuting(n));
}

bool OperatorTuple::is_dense() const { return operators_.front().is_dense(); }

std::size_t OperatorTuple::dense_dim() const { return operators_.front().dense_dim(); }

std::vector<SlotShape> OperatorTuple::layout() const { return operators_.front().layout(); }

std::vector<std::size_t> OperatorTuple::shift_slot_indices() const {
  return operators_.front().shift_slot_indices();
}

std::vector<Matrix> OperatorTuple::q_operators() const {
  std::vector<Matrix> out;
  if (commutation_.is_scalar()) return out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      if (i != j) out.push_back(commutation_.Q(i, j));
    }
  }
  return out;
}

double OperatorTuple::max_norm() const {
  double worst = 0.0;
  for (const auto& op : operators_) worst = std::max(worst, verify_contraction(op).norm);
  return worst;
}

OperatorTuple OperatorTuple::permuted(const std::vector<std::size_t>& order) const {
  std::vector<std::size_t> check = order;
  std::sort(check.begin(), check.end());
  for (std::size_t k = 0; k < check.size(); ++k) {
    if (check[k] != k) throw Error(ErrorKind::InvalidArg, "not a permutation");
  }
  std::vector<StructuredOperator> ops;
  ops.reserve(order.size());
  for (std::size_t idx : order) ops.push_back(operators_.at(idx));
  return OperatorTuple(std::move(ops), commutation_.permuted(order));
}

// ---------------------------------------------------------------------------
// Verification

ContractionReport verify_contraction(const Matrix& t, const Tolerance& tol) {
  require_square(t, "operator");
  require_finite(t, "operator");
  ContractionReport report;
  report.norm = spectral_norm(t);
  report.ok = report.norm <= 1.0 + 10.0 * tol.rel;
  return report;
}

ContractionReport verify_contraction(const StructuredOperator& t, const Tolerance& tol) {
  ContractionReport report = verify_contraction(t.dense_part(), tol);
  for (std::size_t s : t.shift_slot_indices()) {
    report.norm = std::max(report.norm, t.shift_block(s).norm());
  }
  report.ok = report.norm <= 1.0 + 10.0 * tol.rel;
  return report;
}

double relation_threshold(const OperatorTuple& tuple, const Tolerance& tol) {
  return tol.threshold(1.0 + tuple.max_norm());
}

RelationReport relation_residual(const OperatorTuple& tuple, RelationMode mode, const Tolerance& tol) {
  const std::size_t n = tuple.size();
  const std::size_t d = tuple.dense_dim();
  const CommutationData& comm = tuple.commutation();
  const auto nn = static_cast<Eigen::Index>(n);

  RelationReport report;
  report.residual = RealMatrix::Zero(nn, nn);
  report.threshold = relation_threshold(tuple, tol);
  if (!comm.is_scalar()) report.q_commutator = RealMatrix::Zero(nn, nn);

  const auto shift_slots = tuple.shift_slot_indices();
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& ti = tuple.dense_part(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Matrix& tj = tuple.dense_part(j);
      double r = 0.0;
      if (d > 0) {
        const Matrix qij = comm.operator_form(i, j, d);
        if (mode == RelationMode::Plain) {
          r = spectral_norm(ti * tj - qij * tj * ti);
        } else {
          r = spectral_norm(ti * tj.adjoint() - qij.adjoint() * tj.adjoint() * ti);
        }
        if (!comm.is_scalar()) {
          const double ci = spectral_norm(qij * ti - ti * qij);
          const double cj = spectral_norm(qij * tj - tj * qij);
          report.q_commutator(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              std::max(ci, cj);
        }
      }
      for (std::size_t s : shift_slots) {
        r = std::max(r, slot_relation_residual(tuple.op(i).shift_block(s), tuple.op(j).shift_block(s),
                                           comm.q(i, j), mode));
      }
      report.residual(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
    }
  }
  return report;
}

void require_unimodular(const CommutationData& commutation) {
  const double defect = commutation.max_modulus_defect();
  if (defect > kUnimodularGate) {
    throw Error(ErrorKind::NonUnimodularQ,
                "some |q_ij| differs from 1 by " + std::to_string(defect));
  }
}

void require_q_commutes(const OperatorTuple& tuple, const Tolerance& tol) {
  if (tuple.commutation().is_scalar()) return;
  const RelationReport report = relation_residual(tuple, RelationMode::Plain, tol);
  const double worst = report.q_commutator.maxCoeff();
  if (worst > report.threshold) {
    throw Error(ErrorKind::QNotCommutingWithOperators,
                "||[Q(i,j), T]|| reaches " + std::to_string(worst));
  }
}

bool verify_q_commuting(const OperatorTuple& tuple, const Tolerance& tol) {
  validate(tol);
  require_q_commutes(tuple, tol);
  const RelationReport report = relation_residual(tuple, RelationMode::Plain, tol);
  return report.residual.size() == 0 || report.residual.maxCoeff() <= report.threshold;
}

bool verify_doubly(const OperatorTuple& tuple, const Tolerance& tol) {
  validate(tol);
  require_unimodular(tuple.commutation());
  if (!verify_q_commuting(tuple, tol)) return false;
  const RelationReport report = relation_residual(tuple, RelationMode::Doubly, tol);
  return report.residual.size() == 0 || report.residual.maxCoeff() <= report.threshold;
}

// ---------------------------------------------------------------------------
// Defects

Matrix matrix_power(const Matrix& t, unsigned n) {
  require_square(t, "operator");
  Matrix result = Matrix::Identity(t.rows(), t.cols());
  Matrix base = t;
  while (n > 0) {
    if (n & 1U) result = result * base;
    n >>= 1U;
    if (n > 0) base = base * base;
  }
  return result;
}

Matrix defect_squared(const Matrix& t, int n) {
  const Matrix p = matrix_power(t, static_cast<unsigned>(std::abs(n)));
  const Matrix id = Matrix::Identity(t.rows(), t.cols());
  if (n >= 0) return id - p.adjoint() * p;
  return id - p * p.adjoint();
}

Matrix defect(const Matrix& t, int n, const Tolerance& tol) { return psd_sqrt(defect_squared(t, n), tol); }

// ---------------------------------------------------------------------------
// Classification

std::string_view to_string(AtomA a) { return a == AtomA::A1 ? "A1" : "A2"; }
std::string_view to_string(AtomB b) { return b == AtomB::B1 ? "B1" : "B2"; }

Classification classify(const Matrix& t, const Tolerance& tol) {
  validate(tol);
  const ContractionReport contraction = verify_contraction(t, tol);
  if (!contraction.ok) {
    throw Error(ErrorKind::NotAContraction, "operator norm " + std::to_string(contraction.norm));
  }
  if (t.rows() == 0) return vacuous_unitary();

  Classification c;
  if (contraction.norm <= 1.0 - tol.rel) {
    c.cnu = true;
    c.cni = true;
    assign_atoms(c);
    return c;
  }

  const double gate = 10.0 * tol.rel;
  const Matrix id = Matrix::Identity(t.rows(), t.cols());
  c.isometry = spectral_norm(t.adjoint() * t - id) <= gate;
  c.unitary = c.isometry && spectral_norm(t * t.adjoint() - id) <= gate;
  if (!c.unitary) {
    c.cnu = unitary_part(t, tol).empty();
    c.cni = isometric_part(t, tol).empty();
  }
  assign_atoms(c);
  return c;
}

Classification classify(const ShiftSlotBlock& block) {
  block.validate();
  Classification c;
  c.isometry = block.is_isometry();
  c.unitary = block.is_unitary();
  c.cnu = !block.has_unitary_part();
  c.cni = !block.has_isometric_part();
  assign_atoms(c);
  return c;
}

Classification classify(const StructuredOperator& t, const Tolerance& tol) {
  const ContractionReport contraction = verify_contraction(t, tol);
  if (!contraction.ok) {
    throw Error(ErrorKind::NotAContraction, "operator norm " + std::to_string(contraction.norm));
  }
  const auto shift_slots = t.shift_slot_indices();
  if (t.dense_dim() == 0 && shift_slots.empty()) return vacuous_unitary();

  Classification c;
  c.unitary = c.isometry = c.cnu = c.cni = true;
  if (t.dense_dim() > 0) {
    const Classification dense = classify(t.dense_part(), tol);
    c.unitary = dense.unitary;
    c.isometry = dense.isometry;
    c.cnu = dense.cnu;
    c.cni = dense.cni;
  }
  for (std::size_t s : shift_slots) {
    const ShiftSlotBlock& block = t.shift_block(s);
    c.unitary = c.unitary && block.is_unitary();
    c.isometry = c.isometry && block.is_isometry();
    c.cnu = c.cnu && !block.has_unitary_part();
    c.cni = c.cni && !block.has_isometric_part();
  }
  assign_atoms(c);
  return c;
}

std::optional<Complex> infer_phase(const Matrix& t1, const Matrix& t2, const Tolerance& tol) {
  require_square(t1, "T1");
  require_square(t2, "T2");
  if (t1.rows() != t2.rows()) throw Error(ErrorKind::DimMismatch, "infer_phase operands differ in size");
  const Matrix forward = t1 * t2;
  const Matrix backward = t2 * t1;
  const double denom = backward.squaredNorm();
  if (std::sqrt(denom) <= tol.abs_floor) return std::nullopt;
  // <backward, forward>_F = tr(backward* forward).
  const Complex inner = (backward.conjugate().cwiseProduct(forward)).sum();
  return inner / denom;
}

}  // namespace qsplit

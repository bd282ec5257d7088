#include "qsplit/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsplit/error.hpp"

namespace qsplit {

namespace {

double operator_scale(std::span<const Matrix> ops) {
  double scale = 1.0;
  for (const auto& op : ops) scale = std::max(scale, spectral_norm(op));
  return scale;
}

Matrix stack_rows(const std::vector<Matrix>& blocks, Eigen::Index cols) {
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    out.middleRows(offset, b.rows()) = b;
    offset += b.rows();
  }
  return out;
}

void require_contraction(const Matrix& t, const Tolerance& tol) {
  const ContractionReport report = verify_contraction(t, tol);
  if (!report.ok) {
    throw Error(ErrorKind::NotAContraction, "operator norm " + std::to_string(report.norm));
  }
}

void require_contractions(const OperatorTuple& tuple, const Tolerance& tol) {
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const ContractionReport report = verify_contraction(tuple.op(i), tol);
    if (!report.ok) {
      throw Error(ErrorKind::NotAContraction,
                  "operator " + std::to_string(i + 1) + " has norm " + std::to_string(report.norm));
    }
  }
}

// {x : ||T x|| = ||x|| = ||T* x||}, for a contraction T.
Subspace unitary_kernel(const Matrix& t, const Tolerance& tol) {
  const Matrix id = identity(static_cast<std::size_t>(t.rows()));
  return null_space_scaled(stack_rows({id - t.adjoint() * t, id - t * t.adjoint()}, t.cols()), 1.0,
                           tol);
}

Subspace unitary_part_counted(const Matrix& t, const Tolerance& tol, std::size_t* iterations) {
  validate(tol);
  require_contraction(t, tol);
  const auto d = static_cast<std::size_t>(t.rows());
  if (d == 0) return Subspace::zero(0);

  const Matrix ops[] = {t};
  Subspace part = max_reducing_in(ops, unitary_kernel(t, tol), tol, iterations);

  if (!part.empty()) {
    const Matrix r = compress(t, part);
    const Matrix id = identity(part.dim());
    const double err = std::max(spectral_norm(r.adjoint() * r - id), spectral_norm(r * r.adjoint() - id));
    if (err > 10.0 * tol.threshold(1.0)) {
      throw Error(ErrorKind::InternalError,
                  "restriction to the unitary part deviates from unitary by " + std::to_string(err));
    }
  }
  return part;
}

Subspace isometric_part_counted(const Matrix& t, const Tolerance& tol, std::size_t* iterations) {
  validate(tol);
  require_contraction(t, tol);
  const auto d = static_cast<std::size_t>(t.rows());
  if (d == 0) return Subspace::zero(0);

  const Matrix ops[] = {t};
  return max_reducing_in(ops, null_space_scaled(identity(d) - t.adjoint() * t, 1.0, tol), tol,
                         iterations);
}

std::string label_for(char c) {
  switch (c) {
    case 'u': return "A1";
    case 'c': return "A2";
    case 'p': return "B1";
    case 'n': return "B2";
    default: return "?";
  }
}

std::string atom_label(const Classification& c) {
  if (c.atom_A) return std::string(to_string(*c.atom_A));
  return "non-atom";
}

Part make_part(const OperatorTuple& tuple, std::string signature, Subspace subspace,
               std::vector<std::size_t> shift_slots) {
  Part part;
  part.signature = std::move(signature);
  part.shift_slots = std::move(shift_slots);

  for (std::size_t i = 0; i < tuple.size(); ++i) {
    std::vector<Slot> slots;
    if (!subspace.empty() || part.shift_slots.empty()) {
      slots.emplace_back(compress(tuple.dense_part(i), subspace));
    }
    for (std::size_t s : part.shift_slots) slots.emplace_back(tuple.op(i).shift_block(s));
    part.restrictions.emplace_back(std::move(slots));
    part.reduction_residual =
        std::max(part.reduction_residual, reduction_residual(tuple.dense_part(i), subspace));
  }

  const CommutationData& comm = tuple.commutation();
  if (!comm.is_scalar()) {
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      for (std::size_t j = 0; j < tuple.size(); ++j) {
        part.q_blocks.push_back(compress(comm.Q(i, j), subspace));
        part.reduction_residual =
            std::max(part.reduction_residual, reduction_residual(comm.Q(i, j), subspace));
      }
    }
  }

  if (part.signature.find_first_not_of("ucpn") == std::string::npos) {
    for (char c : part.signature) part.labels.push_back(label_for(c));
  }
  part.subspace = std::move(subspace);
  return part;
}

void finalize(DecompositionResult& result, const OperatorTuple& tuple, std::size_t iterations) {
  Diagnostics& diag = result.diagnostics;
  diag.iterations = iterations;

  const std::size_t d = tuple.dense_dim();
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const auto& part : result.parts) {
    sum += part.subspace.projector();
    diag.max_reduction_residual = std::max(diag.max_reduction_residual, part.reduction_residual);
    for (const auto& q : part.q_blocks) {
      const Matrix id = identity(static_cast<std::size_t>(q.rows()));
      diag.q_unitarity_residual =
          std::max({diag.q_unitarity_residual, spectral_norm(q.adjoint() * q - id),
                    spectral_norm(q * q.adjoint() - id)});
    }
  }
  diag.completeness_residual = spectral_norm(sum - identity(d));

  for (std::size_t g = 0; g < result.parts.size(); ++g) {
    for (std::size_t h = g + 1; h < result.parts.size(); ++h) {
      const auto& a = result.parts[g].subspace;
      const auto& b = result.parts[h].subspace;
      if (a.empty() || b.empty()) continue;
      diag.orthogonality_residual =
          std::max(diag.orthogonality_residual, spectral_norm(a.frame().adjoint() * b.frame()));
    }
  }

  std::vector<int> seen(tuple.layout().size(), 0);
  for (const auto& part : result.parts) {
    for (std::size_t s : part.shift_slots) ++seen[s];
  }
  for (std::size_t s : tuple.shift_slot_indices()) {
    if (seen[s] != 1) {
      throw Error(ErrorKind::InternalError, "shift slot " + std::to_string(s) + " assigned " +
                                                std::to_string(seen[s]) + " times");
    }
  }
}

OperatorTuple single(const StructuredOperator& t) {
  return OperatorTuple({t}, CommutationData::commuting(1));
}

OperatorTuple single(const Matrix& t) { return single(StructuredOperator::dense(t)); }

enum class Splitter { Unitary, Isometric };

void require_cnu(const OperatorTuple& tuple, const Tolerance& tol) {
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const std::string who = "operator " + std::to_string(i + 1);
    if (tuple.dense_dim() > 0 && !unitary_part(tuple.dense_part(i), tol).empty()) {
      throw Error(ErrorKind::NotCNU, who + " has a nonzero unitary part");
    }
    for (std::size_t s : tuple.shift_slot_indices()) {
      if (tuple.op(i).shift_block(s).has_unitary_part()) {
        throw Error(ErrorKind::NotCNU, who + " is unitary on shift slot " + std::to_string(s));
      }
    }
  }
}

// Splits every leaf by the canonical (or Levan) decomposition of each operator
// in turn, checking that both halves keep reducing the whole tuple.
DecompositionResult split_tuple(const OperatorTuple& tuple, const Tolerance& tol, Splitter splitter) {
  const std::size_t n = tuple.size();
  if (n > kMaxTupleSize) {
    throw Error(ErrorKind::InvalidArg, "tuples are limited to " + std::to_string(kMaxTupleSize) +
                                           " operators");
  }
  const char keep = splitter == Splitter::Unitary ? 'u' : 'p';
  const char rest = splitter == Splitter::Unitary ? 'c' : 'n';
  const std::size_t d = tuple.dense_dim();

  std::vector<Matrix> guards;
  for (std::size_t i = 0; i < n; ++i) guards.push_back(tuple.dense_part(i));
  for (auto& q : tuple.q_operators()) guards.push_back(std::move(q));
  const double base = tol.threshold(1.0 + tuple.max_norm());

  struct Leaf {
    std::string signature;
    Subspace space;
  };
  std::vector<Leaf> leaves{{"", Subspace::full(d)}};
  std::size_t iterations = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const double level_threshold = base * std::pow(10.0, static_cast<double>(i + 1));
    std::vector<Leaf> next;
    next.reserve(2 * leaves.size());
    for (const auto& leaf : leaves) {
      const Matrix local_op = compress(tuple.dense_part(i), leaf.space);
      std::size_t its = 0;
      const Subspace local = splitter == Splitter::Unitary
                                 ? unitary_part_counted(local_op, tol, &its)
                                 : isometric_part_counted(local_op, tol, &its);
      iterations += its;
      Leaf kept{leaf.signature + keep, embed(leaf.space, local)};
      Leaf other{leaf.signature + rest, embed(leaf.space, complement(local))};
      for (const Leaf* half : {&kept, &other}) {
        for (std::size_t g = 0; g < guards.size(); ++g) {
          const double r = reduction_residual(guards[g], half->space);
          if (r > level_threshold) {
            throw Error(ErrorKind::NotDoublyCommuting,
                        "part " + half->signature + " fails to reduce " +
                            (g < n ? "T" + std::to_string(g + 1) : std::string("a Q(i,j)")) +
                            " (residual " + std::to_string(r) + ")");
          }
        }
      }
      next.push_back(std::move(kept));
      next.push_back(std::move(other));
    }
    leaves = std::move(next);
  }

  std::vector<std::string> slot_signatures;
  const auto shift_slots = tuple.shift_slot_indices();
  for (std::size_t s : shift_slots) {
    std::string sig;
    for (std::size_t i = 0; i < n; ++i) {
      const ShiftSlotBlock& block = tuple.op(i).shift_block(s);
      const bool kept = splitter == Splitter::Unitary ? block.is_unitary() : block.is_isometry();
      sig.push_back(kept ? keep : rest);
    }
    slot_signatures.push_back(std::move(sig));
  }

  DecompositionResult result;
  for (auto& leaf : leaves) {
    std::vector<std::size_t> slots;
    for (std::size_t k = 0; k < shift_slots.size(); ++k) {
      if (slot_signatures[k] == leaf.signature) slots.push_back(shift_slots[k]);
    }
    result.parts.push_back(make_part(tuple, leaf.signature, std::move(leaf.space), std::move(slots)));
  }
  finalize(result, tuple, iterations);
  return result;
}

void require_doubly(const OperatorTuple& tuple, const Tolerance& tol) {
  require_unimodular(tuple.commutation());
  require_q_commutes(tuple, tol);
  if (!verify_doubly(tuple, tol)) {
    throw Error(ErrorKind::NotDoublyCommuting, "tuple fails the doubly commuting relations");
  }
}

}  // namespace

const Part* DecompositionResult::find(std::string_view signature) const {
  for (const auto& part : parts) {
    if (part.signature == signature) return &part;
  }
  return nullptr;
}

const Part& DecompositionResult::at(std::string_view signature) const {
  const Part* part = find(signature);
  if (part == nullptr) {
    throw Error(ErrorKind::InvalidArg, "no part with signature " + std::string(signature));
  }
  return *part;
}

Subspace max_reducing_in(std::span<const Matrix> ops, const Subspace& w, const Tolerance& tol,
                         std::size_t* iterations) {
  validate(tol);
  const std::size_t d = w.ambient_dim();
  for (const auto& op : ops) {
    require_square(op, "operator");
    if (static_cast<std::size_t>(op.rows()) != d) {
      throw Error(ErrorKind::DimMismatch, "operator does not act on the subspace's ambient space");
    }
  }
  const double scale = operator_scale(ops);

  Subspace k = w;
  for (std::size_t sweep = 1; sweep <= d + 1; ++sweep) {
    if (iterations != nullptr) *iterations = sweep;
    if (k.empty()) return k;

    // y with B y in K such that T B y and T* B y stay in K: kill (I - P) T B and (I - P) T* B.
    const Matrix& b = k.frame();
    std::vector<Matrix> leaks;
    leaks.reserve(2 * ops.size());
    for (const auto& op : ops) {
      const Matrix tb = op * b;
      const Matrix tsb = op.adjoint() * b;
      leaks.push_back(tb - b * (b.adjoint() * tb));
      leaks.push_back(tsb - b * (b.adjoint() * tsb));
    }
    if (leaks.empty()) return k;
    const Subspace keep = null_space_scaled(stack_rows(leaks, b.cols()), scale, tol);
    if (keep.dim() == k.dim()) {
      const double limit = 10.0 * tol.threshold(scale);
      for (const auto& op : ops) {
        if (reduction_residual(op, k) > limit) {
          throw Error(ErrorKind::InternalError, "fixed point does not reduce an operator");
        }
      }
      if (containment_residual(k, w) > limit) {
        throw Error(ErrorKind::InternalError, "fixed point left the starting subspace");
      }
      return k;
    }
    k = embed(k, keep);
  }
  throw Error(ErrorKind::InternalError, "reducing-subspace iteration did not stabilize within " +
                                            std::to_string(d + 1) + " sweeps");
}

Subspace unitary_part(const Matrix& t, const Tolerance& tol) {
  return unitary_part_counted(t, tol, nullptr);
}

Subspace defect_kernel_unitary_part(const Matrix& t, std::size_t max_n, const Tolerance& tol) {
  validate(tol);
  require_contraction(t, tol);
  const auto d = static_cast<std::size_t>(t.rows());
  if (d == 0) return Subspace::zero(0);
  if (max_n == 0) max_n = d;

  // Ker D = Ker D^2: the kernels are taken on the squared defects, where the
  // rank decision is not blurred by the square root.
  Subspace k = Subspace::full(d);
  for (std::size_t n = 1; n <= max_n; ++n) {
    const int power = static_cast<int>(n);
    const Subspace forward = null_space_scaled(defect_squared(t, power), 1.0, tol);
    const Subspace backward = null_space_scaled(defect_squared(t, -power), 1.0, tol);
    const Subspace next = intersect(intersect(k, forward, tol), backward, tol);
    const bool stable = next.dim() == k.dim();
    k = next;
    if (stable || k.empty()) break;
  }
  return k;
}

Subspace isometric_part(const Matrix& t, const Tolerance& tol) {
  return isometric_part_counted(t, tol, nullptr);
}

SlotSubspace isometric_part(const StructuredOperator& t, const Tolerance& tol) {
  const ContractionReport report = verify_contraction(t, tol);
  if (!report.ok) {
    throw Error(ErrorKind::NotAContraction, "operator norm " + std::to_string(report.norm));
  }
  SlotSubspace out{isometric_part(t.dense_part(), tol), {}};
  for (std::size_t s : t.shift_slot_indices()) {
    if (t.shift_block(s).is_isometry()) out.shift_slots.push_back(s);
  }
  return out;
}

DecompositionResult canonical_decomposition(const Matrix& t, const Tolerance& tol) {
  std::size_t iterations = 0;
  Subspace u = unitary_part_counted(t, tol, &iterations);
  Subspace c = complement(u);
  const OperatorTuple tuple = single(t);
  DecompositionResult result;
  result.parts.push_back(make_part(tuple, "u", std::move(u), {}));
  result.parts.push_back(make_part(tuple, "c", std::move(c), {}));
  finalize(result, tuple, iterations);
  return result;
}

DecompositionResult canonical_decomposition(const StructuredOperator& t, const Tolerance& tol) {
  std::size_t iterations = 0;
  Subspace u = unitary_part_counted(t.dense_part(), tol, &iterations);
  Subspace c = complement(u);
  std::vector<std::size_t> u_slots;
  std::vector<std::size_t> c_slots;
  for (std::size_t s : t.shift_slot_indices()) {
    (t.shift_block(s).is_unitary() ? u_slots : c_slots).push_back(s);
  }
  const OperatorTuple tuple = single(t);
  DecompositionResult result;
  result.parts.push_back(make_part(tuple, "u", std::move(u), std::move(u_slots)));
  result.parts.push_back(make_part(tuple, "c", std::move(c), std::move(c_slots)));
  finalize(result, tuple, iterations);
  return result;
}

DecompositionResult levan_decomposition(const Matrix& t, const Tolerance& tol) {
  return levan_decomposition(StructuredOperator::dense(t), tol);
}

DecompositionResult levan_decomposition(const StructuredOperator& t, const Tolerance& tol) {
  validate(tol);
  const OperatorTuple tuple = single(t);
  require_contractions(tuple, tol);
  require_cnu(tuple, tol);

  std::size_t iterations = 0;
  Subspace p = isometric_part_counted(t.dense_part(), tol, &iterations);
  Subspace n = complement(p);
  std::vector<std::size_t> p_slots;
  std::vector<std::size_t> n_slots;
  for (std::size_t s : t.shift_slot_indices()) {
    (t.shift_block(s).is_isometry() ? p_slots : n_slots).push_back(s);
  }
  DecompositionResult result;
  result.parts.push_back(make_part(tuple, "p", std::move(p), std::move(p_slots)));
  result.parts.push_back(make_part(tuple, "n", std::move(n), std::move(n_slots)));
  finalize(result, tuple, iterations);
  return result;
}

DecompositionResult tuple_decomposition(const OperatorTuple& tuple, const Tolerance& tol) {
  validate(tol);
  require_contractions(tuple, tol);
  require_doubly(tuple, tol);
  return split_tuple(tuple, tol, Splitter::Unitary);
}

DecompositionResult cnu_tuple_decomposition(const OperatorTuple& tuple, const Tolerance& tol) {
  validate(tol);
  require_contractions(tuple, tol);
  require_cnu(tuple, tol);
  require_doubly(tuple, tol);
  return split_tuple(tuple, tol, Splitter::Isometric);
}

SlotSubspace dc_part(const OperatorTuple& tuple, const Tolerance& tol) {
  validate(tol);
  require_contractions(tuple, tol);
  require_unimodular(tuple.commutation());
  require_q_commutes(tuple, tol);

  const std::size_t n = tuple.size();
  const std::size_t d = tuple.dense_dim();
  const CommutationData& comm = tuple.commutation();

  SlotSubspace out;
  if (d == 0) {
    out.dense = Subspace::zero(0);
  } else {
    std::vector<Matrix> kernels;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const Matrix& ti = tuple.dense_part(i);
        const Matrix& tj = tuple.dense_part(j);
        kernels.push_back(ti * tj.adjoint() -
                          comm.operator_form(i, j, d).adjoint() * tj.adjoint() * ti);
      }
    }
    const Subspace w = kernels.empty()
                           ? Subspace::full(d)
                           : null_space_scaled(stack_rows(kernels, static_cast<Eigen::Index>(d)),
                                               1.0 + tuple.max_norm(), tol);
    std::vector<Matrix> ops;
    for (std::size_t i = 0; i < n; ++i) ops.push_back(tuple.dense_part(i));
    for (auto& q : tuple.q_operators()) ops.push_back(std::move(q));
    out.dense = max_reducing_in(ops, w, tol);
  }

  const double threshold = relation_threshold(tuple, tol);
  for (std::size_t s : tuple.shift_slot_indices()) {
    bool doubly = true;
    for (std::size_t i = 0; i < n && doubly; ++i) {
      for (std::size_t j = 0; j < n && doubly; ++j) {
        if (i == j) continue;
        doubly = slot_relation_residual(tuple.op(i).shift_block(s), tuple.op(j).shift_block(s),
                                        comm.q(i, j), RelationMode::Doubly) <= threshold;
      }
    }
    if (doubly) out.shift_slots.push_back(s);
  }
  return out;
}

DecompositionResult unitary_cnu_split(const OperatorTuple& tuple, const Tolerance& tol) {
  validate(tol);
  const SlotSubspace dc = dc_part(tuple, tol);
  const std::size_t n = tuple.size();
  const std::size_t d = tuple.dense_dim();
  std::size_t iterations = 0;

  Subspace h1 = Subspace::zero(d);
  if (d > 0) {
    std::vector<Matrix> kernels;
    std::vector<Matrix> ops;
    const Matrix id = identity(d);
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix& t = tuple.dense_part(i);
      kernels.push_back(id - t.adjoint() * t);
      kernels.push_back(id - t * t.adjoint());
      ops.push_back(t);
    }
    const Subspace all_unitary =
        null_space_scaled(stack_rows(kernels, static_cast<Eigen::Index>(d)), 1.0, tol);
    h1 = max_reducing_in(ops, intersect(dc.dense, all_unitary, tol), tol, &iterations);

    const double limit = 10.0 * tol.threshold(1.0 + tuple.max_norm());
    for (const auto& q : tuple.q_operators()) {
      const double r = reduction_residual(q, h1);
      if (r > limit) {
        throw Error(ErrorKind::QNotCommutingWithOperators,
                    "Q(i,j) does not reduce the unitary part (residual " + std::to_string(r) + ")");
      }
    }
  }

  std::vector<std::size_t> u_slots;
  std::vector<std::size_t> c_slots;
  for (std::size_t s : tuple.shift_slot_indices()) {
    bool unitary = std::find(dc.shift_slots.begin(), dc.shift_slots.end(), s) != dc.shift_slots.end();
    for (std::size_t i = 0; i < n && unitary; ++i) unitary = tuple.op(i).shift_block(s).is_unitary();
    (unitary ? u_slots : c_slots).push_back(s);
  }

  Subspace rest = complement(h1);
  DecompositionResult result;
  result.parts.push_back(make_part(tuple, std::string(n, 'u'), std::move(h1), std::move(u_slots)));
  Part cnu = make_part(tuple, std::string(kCnuTupleSignature), std::move(rest), std::move(c_slots));
  for (const auto& r : cnu.restrictions) cnu.labels.push_back(atom_label(classify(r, tol)));
  result.parts.push_back(std::move(cnu));
  finalize(result, tuple, iterations);
  return result;
}

OperatorTuple restrict_to(const OperatorTuple& tuple, const Part& part) {
  if (part.restrictions.size() != tuple.size()) {
    throw Error(ErrorKind::DimMismatch, "part does not belong to this tuple");
  }
  if (tuple.commutation().is_scalar()) return OperatorTuple(part.restrictions, tuple.commutation());
  return OperatorTuple(part.restrictions,
                       CommutationData::unitary_family(part.q_blocks, tuple.size()));
}

}  // namespace qsplit

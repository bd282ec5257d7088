#pragma once

// Dense complex linear-algebra kernels used by every decomposition.
//
// Rank decisions are made on singular values: sigma counts as zero iff
// sigma <= max(rel * sigma_ref, abs_floor). The plain entry points use the
// largest singular value of the argument as sigma_ref; the *_scaled variants
// take it from the caller, which is what the fixed-point loops need when the
// matrix being tested is itself nearly zero.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qsplit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

struct Tolerance {
  double rel = 1e-10;
  double abs_floor = 1e-13;

  /// Zero threshold for singular values of a matrix whose reference scale is `scale`.
  double threshold(double scale) const;
};

void validate(const Tolerance& tol);

/// A closed subspace of C^d, held as a d x k frame with orthonormal columns.
class Subspace {
 public:
  Subspace() = default;

  /// Throws InvalidMatrix unless frame* frame = I within 1e-12.
  explicit Subspace(Matrix frame);

  static Subspace zero(std::size_t ambient_dim);
  static Subspace full(std::size_t ambient_dim);
  /// Orthonormalizes the columns of `spanning`; columns are assumed independent.
  static Subspace orthonormalized(const Matrix& spanning);
  /// span{e_first, ..., e_(first+count-1)} in C^ambient_dim.
  static Subspace coordinate(std::size_t ambient_dim, std::size_t first, std::size_t count);

  std::size_t ambient_dim() const { return static_cast<std::size_t>(frame_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(frame_.cols()); }
  bool empty() const { return frame_.cols() == 0; }
  const Matrix& frame() const { return frame_; }
  Matrix projector() const;

 private:
  Matrix frame_;
};

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const char* what);
void require_square(const Matrix& m, const char* what);

double spectral_norm(const Matrix& m);
Matrix identity(std::size_t d);

/// Makes each column's largest-magnitude entry real and positive.
void fix_column_phases(Matrix& frame);

Subspace null_space(const Matrix& m, const Tolerance& tol = {});
/// Null space with sigma_ref fixed by the caller.
Subspace null_space_scaled(const Matrix& m, double scale, const Tolerance& tol = {});

/// Unique PSD square root via Hermitian eigendecomposition.
Matrix psd_sqrt(const Matrix& h, const Tolerance& tol = {});

Subspace intersect(const Subspace& a, const Subspace& b, const Tolerance& tol = {});
Subspace complement(const Subspace& s);

/// ||P_a - P_b||_2.
double principal_angle_distance(const Subspace& a, const Subspace& b);

/// ||(I - P_outer) B_inner||_2: 0 iff inner is contained in outer.
double containment_residual(const Subspace& inner, const Subspace& outer);

/// B* T B.
Matrix compress(const Matrix& t, const Subspace& s);

/// max(||(I-P) T P||, ||(I-P) T* P||).
double reduction_residual(const Matrix& t, const Subspace& s);

/// The subspace spanned by outer.frame * inner.frame (inner lives in outer's coordinates).
Subspace embed(const Subspace& outer, const Subspace& inner);

/// Direct sum of mutually orthogonal subspaces of one ambient space.
Subspace orthogonal_sum(const Subspace& a, const Subspace& b);

/// Block-diagonal direct sum.
Matrix direct_sum(const Matrix& a, const Matrix& b);

}  // namespace qsplit

#include "qsplit/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "qsplit/error.hpp"

namespace qsplit {

namespace {

constexpr double kFrameOrthonormality = 1e-12;

void require_same_ambient(const Subspace& a, const Subspace& b, const char* what) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw Error(ErrorKind::DimMismatch,
                std::string(what) + ": ambient dimensions " + std::to_string(a.ambient_dim()) +
                    " and " + std::to_string(b.ambient_dim()));
  }
}

void require_acts_on(const Matrix& t, const Subspace& s, const char* what) {
  require_square(t, what);
  if (static_cast<std::size_t>(t.rows()) != s.ambient_dim()) {
    throw Error(ErrorKind::DimMismatch, std::string(what) + ": operator of side " +
                                            std::to_string(t.rows()) + " on subspace of C^" +
                                            std::to_string(s.ambient_dim()));
  }
}

Subspace null_space_with_threshold(const Matrix& m, double threshold) {
  const auto cols = static_cast<std::size_t>(m.cols());
  if (cols == 0) return Subspace::zero(0);
  if (m.rows() == 0) return Subspace::full(cols);

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > threshold) ++rank;

  Matrix frame = svd.matrixV().rightCols(m.cols() - rank);
  fix_column_phases(frame);
  return Subspace(std::move(frame));
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::InvalidArg: return "InvalidArg";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::NotAContraction: return "NotAContraction";
    case ErrorKind::NotCNU: return "NotCNU";
    case ErrorKind::NotIsometry: return "NotIsometry";
    case ErrorKind::NonUnimodularQ: return "NonUnimodularQ";
    case ErrorKind::QNotCommutingWithOperators: return "QNotCommutingWithOperators";
    case ErrorKind::NotDoublyCommuting: return "NotDoublyCommuting";
    case ErrorKind::UnsupportedSignature: return "UnsupportedSignature";
    case ErrorKind::InternalError: return "InternalError";
  }
  return "Unknown";
}

double Tolerance::threshold(double scale) const { return std::max(rel * scale, abs_floor); }

void validate(const Tolerance& tol) {
  if (!(tol.rel > 0.0) || !(tol.abs_floor > 0.0) || !std::isfinite(tol.rel) ||
      !std::isfinite(tol.abs_floor)) {
    throw Error(ErrorKind::InvalidArg, "tolerance components must be positive and finite");
  }
}

Subspace::Subspace(Matrix frame) : frame_(std::move(frame)) {
  require_finite(frame_, "subspace frame");
  if (frame_.cols() > frame_.rows()) {
    throw Error(ErrorKind::InvalidMatrix, "frame has more columns than rows");
  }
  if (frame_.cols() > 0) {
    const Matrix gram = frame_.adjoint() * frame_;
    const double err = spectral_norm(gram - Matrix::Identity(frame_.cols(), frame_.cols()));
    if (err > kFrameOrthonormality) {
      throw Error(ErrorKind::InvalidMatrix,
                  "frame columns are not orthonormal (error " + std::to_string(err) + ")");
    }
  }
}

Subspace Subspace::zero(std::size_t ambient_dim) {
  return Subspace(Matrix(static_cast<Eigen::Index>(ambient_dim), 0));
}

Subspace Subspace::full(std::size_t ambient_dim) { return Subspace(identity(ambient_dim)); }

Subspace Subspace::orthonormalized(const Matrix& spanning) {
  if (spanning.cols() == 0) return zero(static_cast<std::size_t>(spanning.rows()));
  Eigen::HouseholderQR<Matrix> qr(spanning);
  Matrix q = qr.householderQ() * Matrix::Identity(spanning.rows(), spanning.cols());
  fix_column_phases(q);
  return Subspace(std::move(q));
}

Subspace Subspace::coordinate(std::size_t ambient_dim, std::size_t first, std::size_t count) {
  if (first + count > ambient_dim) {
    throw Error(ErrorKind::DimMismatch, "coordinate block exceeds ambient dimension");
  }
  Matrix frame = Matrix::Zero(static_cast<Eigen::Index>(ambient_dim),
                              static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    frame(static_cast<Eigen::Index>(first + k), static_cast<Eigen::Index>(k)) = 1.0;
  }
  return Subspace(std::move(frame));
}

Matrix Subspace::projector() const { return frame_ * frame_.adjoint(); }

bool all_finite(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    }
  }
  return true;
}

void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) {
    throw Error(ErrorKind::InvalidMatrix, std::string(what) + " has non-finite entries");
  }
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::DimMismatch, std::string(what) + " is not square (" +
                                            std::to_string(m.rows()) + "x" +
                                            std::to_string(m.cols()) + ")");
  }
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix identity(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return Matrix::Identity(n, n);
}

void fix_column_phases(Matrix& frame) {
  for (Eigen::Index j = 0; j < frame.cols(); ++j) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < frame.rows(); ++i) {
      const double mag = std::abs(frame(i, j));
      // Ties within rounding go to the first index so the choice is stable.
      if (mag > best + 1e-12) {
        best = mag;
        pivot = i;
      }
    }
    if (best > 0.0) frame.col(j) *= std::conj(frame(pivot, j)) / best;
  }
}

Subspace null_space(const Matrix& m, const Tolerance& tol) {
  validate(tol);
  require_finite(m, "null_space input");
  return null_space_with_threshold(m, tol.threshold(spectral_norm(m)));
}

Subspace null_space_scaled(const Matrix& m, double scale, const Tolerance& tol) {
  validate(tol);
  require_finite(m, "null_space input");
  return null_space_with_threshold(m, tol.threshold(scale));
}

Matrix psd_sqrt(const Matrix& h, const Tolerance& tol) {
  validate(tol);
  require_finite(h, "psd_sqrt input");
  require_square(h, "psd_sqrt input");
  if (h.size() == 0) return h;

  const double norm = spectral_norm(h);
  const double cutoff = tol.threshold(norm);
  const double asym = spectral_norm(h - h.adjoint());
  if (asym > cutoff) {
    throw Error(ErrorKind::NotHermitian,
                "psd_sqrt input deviates from Hermitian by " + std::to_string(asym));
  }

  const Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -cutoff) {
      throw Error(ErrorKind::NotPSD, "eigenvalue " + std::to_string(lambda(i)) + " is negative");
    }
    lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
  }
  const Matrix& v = eig.eigenvectors();
  return v * lambda.cast<Complex>().asDiagonal() * v.adjoint();
}

Subspace intersect(const Subspace& a, const Subspace& b, const Tolerance& tol) {
  require_same_ambient(a, b, "intersect");
  const std::size_t d = a.ambient_dim();
  if (a.empty() || b.empty()) return Subspace::zero(d);

  const auto n = static_cast<Eigen::Index>(d);
  Matrix stacked(2 * n, n);
  stacked.topRows(n) = identity(d) - a.projector();
  stacked.bottomRows(n) = identity(d) - b.projector();
  return null_space(stacked, tol);
}

Subspace complement(const Subspace& s) {
  const std::size_t d = s.ambient_dim();
  const std::size_t k = s.dim();
  if (k == 0) return Subspace::full(d);
  if (k == d) return Subspace::zero(d);

  // frame* has exactly k unit singular values, so the trailing d-k right
  // singular vectors span the complement without any rank decision.
  Eigen::JacobiSVD<Matrix> svd(s.frame().adjoint(), Eigen::ComputeFullV);
  Matrix frame = svd.matrixV().rightCols(static_cast<Eigen::Index>(d - k));
  fix_column_phases(frame);
  return Subspace::orthonormalized(frame);
}

double principal_angle_distance(const Subspace& a, const Subspace& b) {
  require_same_ambient(a, b, "principal_angle_distance");
  if (a.ambient_dim() == 0) return 0.0;
  return spectral_norm(a.projector() - b.projector());
}

double containment_residual(const Subspace& inner, const Subspace& outer) {
  require_same_ambient(inner, outer, "containment_residual");
  if (inner.empty()) return 0.0;
  return spectral_norm(inner.frame() - outer.frame() * (outer.frame().adjoint() * inner.frame()));
}

Matrix compress(const Matrix& t, const Subspace& s) {
  require_acts_on(t, s, "compress");
  return s.frame().adjoint() * t * s.frame();
}

double reduction_residual(const Matrix& t, const Subspace& s) {
  require_acts_on(t, s, "reduction_residual");
  if (s.empty()) return 0.0;
  const Matrix& b = s.frame();
  const Matrix tb = t * b;
  const Matrix tsb = t.adjoint() * b;
  const double forward = spectral_norm(tb - b * (b.adjoint() * tb));
  const double backward = spectral_norm(tsb - b * (b.adjoint() * tsb));
  return std::max(forward, backward);
}

Subspace embed(const Subspace& outer, const Subspace& inner) {
  if (inner.ambient_dim() != outer.dim()) {
    throw Error(ErrorKind::DimMismatch, "embed: inner subspace does not live in outer's coordinates");
  }
  return Subspace::orthonormalized(outer.frame() * inner.frame());
}

Subspace orthogonal_sum(const Subspace& a, const Subspace& b) {
  require_same_ambient(a, b, "orthogonal_sum");
  Matrix joined(static_cast<Eigen::Index>(a.ambient_dim()),
                static_cast<Eigen::Index>(a.dim() + b.dim()));
  joined << a.frame(), b.frame();
  return Subspace::orthonormalized(joined);
}

Matrix direct_sum(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace qsplit

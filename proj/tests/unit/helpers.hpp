#pragma once

#include <cmath>
#include <initializer_list>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "qsplit/qsplit.hpp"

namespace qsplit::test {

inline Matrix mat(std::initializer_list<std::initializer_list<Complex>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (const auto& v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Matrix diag(std::initializer_list<Complex> entries) {
  const auto n = static_cast<Eigen::Index>(entries.size());
  Matrix m = Matrix::Zero(n, n);
  Eigen::Index i = 0;
  for (const auto& v : entries) {
    m(i, i) = v;
    ++i;
  }
  return m;
}

inline Complex omega(std::size_t d, std::size_t k = 1) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(d));
}

inline Subspace span(const Matrix& columns) { return Subspace::orthonormalized(columns); }

inline Subspace basis_span(std::size_t d, std::initializer_list<std::size_t> indices) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(indices.size()));
  Eigen::Index c = 0;
  for (auto i : indices) m(static_cast<Eigen::Index>(i), c++) = 1.0;
  return Subspace(m);
}

inline double dist(const Subspace& a, const Subspace& b) { return principal_angle_distance(a, b); }

inline Matrix phases(std::size_t n, std::initializer_list<std::pair<std::pair<std::size_t, std::size_t>, Complex>> entries) {
  const auto k = static_cast<Eigen::Index>(n);
  Matrix q = Matrix::Ones(k, k);
  for (const auto& [ij, v] : entries) {
    q(static_cast<Eigen::Index>(ij.first), static_cast<Eigen::Index>(ij.second)) = v;
    q(static_cast<Eigen::Index>(ij.second), static_cast<Eigen::Index>(ij.first)) = 1.0 / v;
  }
  return q;
}

inline CommutationData pair_q(Complex q12) { return CommutationData::scalar(phases(2, {{{0, 1}, q12}})); }

template <class F>
ErrorKind error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InternalError;
}

}  // namespace qsplit::test

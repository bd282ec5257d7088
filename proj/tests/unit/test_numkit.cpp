#include <limits>

#include "helpers.hpp"

using namespace qsplit;
using namespace qsplit::test;

TEST_SUITE("numkit") {

TEST_CASE("null_space on small examples") {
  CHECK(null_space(identity(2)).dim() == 0);
  CHECK(dist(null_space(diag({1.0, 0.0})), basis_span(2, {1})) < 1e-14);
  CHECK(dist(null_space(mat({{0.0, 1.0}, {0.0, 0.0}})), basis_span(2, {0})) < 1e-14);
}

TEST_CASE("null_space edge shapes and rank threshold") {
  CHECK(null_space(Matrix::Zero(3, 3)).dim() == 3);
  CHECK(null_space(Matrix(0, 4)).dim() == 4);
  CHECK(null_space(Matrix(2, 0)).ambient_dim() == 0);
  // 1e-12 is below rel * sigma_max = 1e-10 and so counts as zero.
  CHECK(null_space(diag({1.0, 1e-12})).dim() == 1);
  CHECK(null_space(diag({1.0, 1e-8})).dim() == 0);
  // Tiny uniform scale keeps rank under the relative rule, until the absolute floor.
  CHECK(null_space(diag({1e-6, 1e-7})).dim() == 0);
  CHECK(null_space(diag({1e-14, 1e-14})).dim() == 2);
}

TEST_CASE("null_space rejects non-finite input") {
  Matrix m = identity(2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(error_of([&] { (void)null_space(m); }) == ErrorKind::InvalidMatrix);
  m(0, 1) = std::numeric_limits<double>::infinity();
  CHECK(error_of([&] { (void)null_space(m); }) == ErrorKind::InvalidMatrix);
}

TEST_CASE("null_space property sweep") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const std::size_t d = 2 + seed % 11;
    const std::size_t r = seed % d;
    const Matrix m = rng.gaussian(d, r) * rng.gaussian(r, d);
    const Subspace ns = null_space(m);
    CHECK(ns.dim() == d - r);
    const Matrix& b = ns.frame();
    if (!ns.empty()) {
      CHECK(spectral_norm(m * b) <= 10 * 1e-10 * spectral_norm(m));
      CHECK(spectral_norm(b.adjoint() * b - identity(ns.dim())) <= 1e-12);
    }
  }
}

TEST_CASE("psd_sqrt examples") {
  CHECK(spectral_norm(psd_sqrt(diag({4.0, 9.0})) - diag({2.0, 3.0})) < 1e-14);
  const Matrix p = mat({{0.5, 0.5}, {0.5, 0.5}});
  CHECK(spectral_norm(psd_sqrt(p) - p) < 1e-14);
  const Matrix j = mat({{0.0, 1.0}, {0.0, 0.0}});
  CHECK(spectral_norm(psd_sqrt(identity(2) - j.adjoint() * j) - diag({1.0, 0.0})) < 1e-14);
}

TEST_CASE("psd_sqrt errors and clamping") {
  CHECK(error_of([] { (void)psd_sqrt(diag({1.0, -0.5})); }) == ErrorKind::NotPSD);
  CHECK(error_of([] { (void)psd_sqrt(mat({{1.0, 1.0}, {0.0, 1.0}})); }) == ErrorKind::NotHermitian);
  CHECK(error_of([] { (void)psd_sqrt(Matrix::Zero(2, 3)); }) == ErrorKind::DimMismatch);
  const Matrix r = psd_sqrt(diag({1.0, -1e-13}));
  CHECK(spectral_norm(r - diag({1.0, 0.0})) < 1e-14);
}

TEST_CASE("psd_sqrt recovers random PSD roots") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t d = 1 + seed % 9;
    const Matrix g = rng.gaussian(d, d);
    const Matrix r = psd_sqrt(g * g.adjoint());
    const Matrix root = psd_sqrt(r * r);
    CHECK(spectral_norm(root - r) <= 1e-9 * (1.0 + spectral_norm(r)));
    CHECK(spectral_norm(r * r - g * g.adjoint()) <= 1e-10 * (1.0 + spectral_norm(g * g.adjoint())));
  }
}

TEST_CASE("intersect examples") {
  const Subspace a = basis_span(3, {0, 1});
  const Subspace b = basis_span(3, {1, 2});
  CHECK(dist(intersect(a, b), basis_span(3, {1})) < 1e-14);
  CHECK(dist(intersect(a, a), a) < 1e-14);
  CHECK(intersect(basis_span(2, {0}), basis_span(2, {1})).dim() == 0);
  CHECK(error_of([&] { (void)intersect(a, basis_span(2, {0})); }) == ErrorKind::DimMismatch);
}

TEST_CASE("intersect is commutative and respects the dimension bound") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t d = 4 + seed % 6;
    const Matrix shared = rng.gaussian(d, 1);
    Matrix a(static_cast<Eigen::Index>(d), 3);
    a << shared, rng.gaussian(d, 2);
    Matrix b(static_cast<Eigen::Index>(d), 3);
    b << shared, rng.gaussian(d, 2);
    const Subspace sa = span(a);
    const Subspace sb = span(b);
    const Subspace ab = intersect(sa, sb);
    const Subspace ba = intersect(sb, sa);
    CHECK(ab.dim() >= 1);
    CHECK(ab.dim() + d >= sa.dim() + sb.dim());
    CHECK(dist(ab, ba) <= 1e-10);
    CHECK(dist(intersect(sa, sa), sa) <= 1e-10);
  }
}

TEST_CASE("complement examples and sweep") {
  CHECK(dist(complement(basis_span(2, {0})), basis_span(2, {1})) < 1e-14);
  CHECK(complement(Subspace::full(3)).dim() == 0);
  CHECK(complement(Subspace::zero(3)).dim() == 3);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t d = 1 + seed % 10;
    const std::size_t k = seed % (d + 1);
    const Subspace s = span(rng.gaussian(d, k));
    const Subspace c = complement(s);
    CHECK(s.dim() + c.dim() == d);
    if (!s.empty() && !c.empty()) CHECK(spectral_norm(s.frame().adjoint() * c.frame()) <= 1e-12);
  }
}

TEST_CASE("principal_angle_distance examples") {
  const Subspace e1 = basis_span(2, {0});
  CHECK(dist(e1, e1) == doctest::Approx(0.0));
  CHECK(dist(e1, basis_span(2, {1})) == doctest::Approx(1.0));
  const Subspace diag_line = span(mat({{1.0}, {1.0}}));
  CHECK(dist(e1, diag_line) == doctest::Approx(std::sin(std::numbers::pi / 4)).epsilon(1e-12));
  CHECK(dist(e1, Subspace::full(2)) == doctest::Approx(1.0));
  CHECK(error_of([&] { (void)dist(e1, Subspace::full(3)); }) == ErrorKind::DimMismatch);
}

TEST_CASE("compress examples") {
  const Matrix t = mat({{1.0, 2.0}, {Complex(0, 1), 3.0}});
  CHECK(spectral_norm(compress(t, Subspace::full(2)) - t) < 1e-15);
  CHECK(std::abs(compress(diag({1.0, 0.5}), basis_span(2, {0}))(0, 0) - 1.0) < 1e-15);
  const Matrix w = random_unitary(2, 11);
  const Matrix c = compress(w * diag({0.3, 0.8}) * w.adjoint(), span(w.col(0)));
  CHECK(std::abs(c(0, 0) - 0.3) < 1e-14);
  CHECK(error_of([&] { (void)compress(identity(3), Subspace::full(2)); }) == ErrorKind::DimMismatch);
}

TEST_CASE("compression is contractive") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t d = 2 + seed % 8;
    const Matrix t = rng.gaussian(d, d);
    const Subspace s = span(rng.gaussian(d, 1 + seed % d));
    CHECK(spectral_norm(compress(t, s)) <= spectral_norm(t) + 1e-12);
  }
}

TEST_CASE("reduction_residual examples") {
  CHECK(reduction_residual(diag({1.0, 2.0}), basis_span(2, {0})) == 0.0);
  CHECK(reduction_residual(mat({{0.0, 1.0}, {0.0, 0.0}}), basis_span(2, {0})) == doctest::Approx(1.0));
  CHECK(reduction_residual(random_contraction(4, 3), Subspace::full(4)) < 1e-15);
}

TEST_CASE("subspace frames are validated and phase-fixed") {
  CHECK(error_of([] { Subspace s(mat({{1.0}, {1.0}})); }) == ErrorKind::InvalidMatrix);
  CHECK(error_of([] { Subspace s(Matrix::Identity(2, 3)); }) == ErrorKind::InvalidMatrix);
  const Subspace s = span(mat({{Complex(0, -2)}, {1.0}}));
  CHECK(s.frame()(0, 0).imag() == doctest::Approx(0.0));
  CHECK(s.frame()(0, 0).real() > 0.0);
}

TEST_CASE("tolerance validation") {
  CHECK(error_of([] { (void)null_space(identity(2), Tolerance{0.0, 1e-13}); }) == ErrorKind::InvalidArg);
  CHECK(error_of([] { (void)null_space(identity(2), Tolerance{1e-10, -1.0}); }) == ErrorKind::InvalidArg);
}

}

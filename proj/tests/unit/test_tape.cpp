#include <doctest.h>

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfp/common.hpp"
#include "mfp/rng.hpp"
#include "mfp/tape.hpp"

using namespace mfp;
using ad::Tape;
using ad::Var;

namespace {

// Central finite differences of a scalar graph w.r.t. one leaf.
template <typename BuildFn>
Mat fd_leaf_grad(const Mat& leaf_value, const BuildFn& build, double h = 1e-6) {
  Mat g(leaf_value.rows(), leaf_value.cols());
  for (Eigen::Index j = 0; j < leaf_value.cols(); ++j) {
    for (Eigen::Index i = 0; i < leaf_value.rows(); ++i) {
      Mat up = leaf_value, down = leaf_value;
      up(i, j) += h;
      down(i, j) -= h;
      g(i, j) = (build(up) - build(down)) / (2 * h);
    }
  }
  return g;
}

void check_close(const Mat& a, const Mat& b, double tol) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  CHECK((a - b).cwiseAbs().maxCoeff() <= tol);
}

}  // namespace

TEST_CASE("tape: forward values of primitives") {
  Tape t;
  Mat a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0.5, -1, 2, 0;
  Var va = t.leaf(a), vb = t.leaf(b);
  CHECK(t.value(t.add(va, vb))(1, 0) == 5.0);
  CHECK(t.value(t.sub(va, vb))(0, 1) == 3.0);
  CHECK(t.value(t.mul(va, vb))(1, 0) == 6.0);
  CHECK(t.value(t.scale(va, -2))(0, 0) == -2.0);
  CHECK(t.value(t.square(va))(1, 1) == 16.0);
  CHECK(t.value(t.sum(va))(0, 0) == 10.0);
  CHECK(t.value(t.mean(va))(0, 0) == 2.5);
  CHECK(t.value(t.colsum(va))(0, 1) == 6.0);
  CHECK(t.value(t.colmean(va))(0, 0) == 2.0);
  CHECK(t.value(t.rowsum(va))(1, 0) == 7.0);
  CHECK(t.value(t.transpose(va))(0, 1) == 3.0);
  auto [s, c] = t.sincos(va);
  CHECK(t.value(s)(0, 0) == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  CHECK(t.value(c)(1, 1) == doctest::Approx(std::cos(4.0)).epsilon(1e-15));
}

TEST_CASE("tape: matmul_nt computes A * B^T") {
  Tape t;
  Mat A(2, 3), B(4, 3);
  A.setRandom();
  B.setRandom();
  Var r = t.matmul_nt(t.leaf(A), t.leaf(B));
  check_close(t.value(r), A * B.transpose(), 1e-14);
}

TEST_CASE("tape: block_colmean and repeat_rows round trip shapes") {
  Tape t;
  Mat a(6, 2);
  a << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  Var m = t.block_colmean(t.leaf(a), 3);
  CHECK(t.value(m).rows() == 2);
  CHECK(t.value(m)(0, 0) == 3.0);   // mean of 1,3,5
  CHECK(t.value(m)(1, 1) == 10.0);  // mean of 8,10,12
  Var r = t.repeat_rows(m, 3);
  CHECK(t.value(r).rows() == 6);
  CHECK(t.value(r)(2, 0) == 3.0);
  CHECK(t.value(r)(3, 0) == 9.0);
}

TEST_CASE("tape: gradients of every primitive match finite differences") {
  RngStream rng(99, 0);
  const Mat A0 = rng.normal_matrix(4, 3);
  const Mat B0 = rng.normal_matrix(5, 3);
  const Mat V0 = rng.normal_matrix(1, 5);
  const Mat U0 = rng.normal_matrix(4, 1);

  // A composite scalar touching every op once.
  auto value_of = [&](const Mat& A, const Mat& B, const Mat& V, const Mat& U) {
    Tape t;
    Var a = t.leaf(A), b = t.leaf(B), v = t.leaf(V), u = t.leaf(U);
    Var z = t.add_row(t.matmul_nt(a, b), v);
    auto [s, c] = t.sincos(z);
    Var w = t.mul(t.tanh_(z), t.add(s, c));
    Var w2 = t.mul_row(w, t.scale(v, 0.3));
    Var w3 = t.mul_col(w2, t.recip(t.add_scalar(t.square(u), 1.0)));
    Var q = t.sqrt_(t.add_scalar(t.square(w3), 0.5));
    Var bm = t.block_colmean(q, 2);
    Var rep = t.repeat_rows(bm, 2);
    Var red = t.add(t.colmean(rep), t.colsum(t.scale(q, 0.05)));
    Var tot = t.add(t.sum(red), t.mean(t.sub(q, t.scale(q, 0.25))));
    return t.value(tot)(0, 0);
  };

  Tape t;
  Var a = t.leaf(A0, true), b = t.leaf(B0, true), v = t.leaf(V0, true), u = t.leaf(U0, true);
  Var z = t.add_row(t.matmul_nt(a, b), v);
  auto [s, c] = t.sincos(z);
  Var w = t.mul(t.tanh_(z), t.add(s, c));
  Var w2 = t.mul_row(w, t.scale(v, 0.3));
  Var w3 = t.mul_col(w2, t.recip(t.add_scalar(t.square(u), 1.0)));
  Var q = t.sqrt_(t.add_scalar(t.square(w3), 0.5));
  Var bm = t.block_colmean(q, 2);
  Var rep = t.repeat_rows(bm, 2);
  Var red = t.add(t.colmean(rep), t.colsum(t.scale(q, 0.05)));
  Var tot = t.add(t.sum(red), t.mean(t.sub(q, t.scale(q, 0.25))));
  t.backward(tot);

  check_close(t.grad(a),
              fd_leaf_grad(A0, [&](const Mat& m) { return value_of(m, B0, V0, U0); }), 2e-8);
  check_close(t.grad(b),
              fd_leaf_grad(B0, [&](const Mat& m) { return value_of(A0, m, V0, U0); }), 2e-8);
  check_close(t.grad(v),
              fd_leaf_grad(V0, [&](const Mat& m) { return value_of(A0, B0, m, U0); }), 2e-8);
  check_close(t.grad(u),
              fd_leaf_grad(U0, [&](const Mat& m) { return value_of(A0, B0, V0, m); }), 2e-8);
}

TEST_CASE("tape: sin/cos without sincos partner still differentiate") {
  Mat x0(1, 3);
  x0 << 0.3, -1.2, 2.0;
  auto value_of = [&](const Mat& x) {
    Tape t;
    Var v = t.leaf(x);
    return t.value(t.sum(t.mul(t.sin_(v), t.cos_(t.scale(v, 2.0)))))(0, 0);
  };
  Tape t;
  Var v = t.leaf(x0, true);
  Var loss = t.sum(t.mul(t.sin_(v), t.cos_(t.scale(v, 2.0))));
  t.backward(loss);
  check_close(t.grad(v), fd_leaf_grad(x0, value_of), 1e-8);
}

TEST_CASE("tape: grad accumulates across shared subexpressions") {
  Mat x0(1, 1);
  x0 << 0.7;
  Tape t;
  Var v = t.leaf(x0, true);
  Var y = t.mul(v, v);          // x^2 with both inputs aliased
  Var loss = t.sum(t.add(y, y));  // 2 x^2
  t.backward(loss);
  CHECK(t.grad(v)(0, 0) == doctest::Approx(4 * 0.7).epsilon(1e-14));
}

TEST_CASE("tape: shape mismatches throw") {
  Tape t;
  Var a = t.leaf(Mat::Zero(2, 3));
  Var b = t.leaf(Mat::Zero(3, 2));
  CHECK_THROWS_AS(t.add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.matmul_nt(a, t.leaf(Mat::Zero(2, 4))), std::invalid_argument);
  CHECK_THROWS_AS(t.block_colmean(a, 4), std::invalid_argument);
  CHECK_THROWS_AS(t.backward(a), std::invalid_argument);  // non-scalar root
}

TEST_CASE("tape: elementwise kernels are bit-identical across thread counts") {
  RngStream rng(5, 0);
  const Mat Z = 4.0 * rng.normal_matrix(257, 129);  // above the parallel cutoff
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  Tape t1;
  auto [s1, c1] = t1.sincos(t1.leaf(Z));
  Mat S1 = t1.value(s1), C1 = t1.value(c1);
#ifdef _OPENMP
  omp_set_num_threads(2);
#endif
  Tape t2;
  auto [s2, c2] = t2.sincos(t2.leaf(Z));
  CHECK((t2.value(s2) - S1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t2.value(c2) - C1).cwiseAbs().maxCoeff() == 0.0);
#ifdef _OPENMP
  omp_set_num_threads(0 /* restore default */);
  omp_set_num_threads(omp_get_num_procs());
#endif
}

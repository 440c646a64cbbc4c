#pragma once

// Shared elementwise kernels. Parallel loops write disjoint entries, so
// results are bit-identical for any thread count.

#include <Eigen/Dense>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mfp::detail {

inline constexpr Eigen::Index kParallelCutoff = 1 << 14;

template <typename F>
void par_index(Eigen::Index n, F&& f) {
#ifdef _OPENMP
  if (n >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) f(i);
    return;
  }
#endif
  for (Eigen::Index i = 0; i < n; ++i) f(i);
}

inline void sincos_matrix(const Eigen::MatrixXd& z, Eigen::MatrixXd& s, Eigen::MatrixXd& c) {
  s.resize(z.rows(), z.cols());
  c.resize(z.rows(), z.cols());
  const double* zp = z.data();
  double* sp = s.data();
  double* cp = c.data();
  par_index(z.size(), [&](Eigen::Index i) {
#if defined(__GLIBC__)
    ::sincos(zp[i], &sp[i], &cp[i]);
#else
    sp[i] = std::sin(zp[i]);
    cp[i] = std::cos(zp[i]);
#endif
  });
}

inline Eigen::MatrixXd map_unary(const Eigen::MatrixXd& x, double (*f)(double)) {
  Eigen::MatrixXd y(x.rows(), x.cols());
  const double* xp = x.data();
  double* yp = y.data();
  par_index(x.size(), [&](Eigen::Index i) { yp[i] = f(xp[i]); });
  return y;
}

}  // namespace mfp::detail

#include <doctest.h>

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfp/mlp.hpp"
#include "mfp/optim.hpp"

using namespace mfp;

TEST_CASE("init_params: biases zero, deterministic, bounded") {
  MlpSpec tiny{1, {1}, 1};
  MlpParams p = init_params(tiny, 77);
  CHECK(p.bias(0)(0) == 0.0);
  CHECK(p.bias(1)(0) == 0.0);

  MlpParams q = init_params(tiny, 77);
  CHECK((p.flat() - q.flat()).cwiseAbs().maxCoeff() == 0.0);  // bit-identical

  MlpSpec s{8, {16}, 2};
  MlpParams r = init_params(s, 3);
  const double bound0 = std::sqrt(1.0 / 8.0);
  CHECK(r.weight(0).cwiseAbs().maxCoeff() <= bound0);
}

TEST_CASE("param_count matches the (fan_in+1)*fan_out formula") {
  // 8 -> [128,128,128] -> 2: (8+1)*128 + 2*(128+1)*128 + (128+1)*2
  MlpSpec big{8, {128, 128, 128}, 2};
  CHECK(big.param_count() == (8 + 1) * 128 + 2 * (128 + 1) * 128 + (128 + 1) * 2);
  CHECK(big.param_count() == 34434);
  // The compact 20-d architecture: 30 -> [64,64] -> 20.
  MlpSpec compact{30, {64, 64}, 20};
  CHECK(compact.param_count() == 7444);
  CHECK(MlpParams(big).size() == big.param_count());
}

TEST_CASE("flat and structured views alias the same storage") {
  MlpSpec s{2, {3}, 1};
  MlpParams p = init_params(s, 1);
  p.weight(0)(1, 0) = 42.0;
  CHECK(p.flat()(p.weight_offset(0) + 1 * 2 + 0) == 42.0);
  p.flat()(p.bias_offset(1)) = -7.0;
  CHECK(p.bias(1)(0) == -7.0);
}

TEST_CASE("forward: zero network, identity affine, tanh chain") {
  MlpSpec s{2, {3}, 2};
  MlpParams zero(s);
  Vec x(2);
  x << 0.4, -0.9;
  CHECK(forward(zero, x).cwiseAbs().maxCoeff() == 0.0);

  // Single affine layer with W = I, b = 0.
  MlpSpec id{2, {}, 2};
  MlpParams pid(id);
  pid.weight(0).setIdentity();
  Vec y = forward(pid, (Vec(2) << 0.3, -0.2).finished());
  CHECK(y(0) == 0.3);
  CHECK(y(1) == -0.2);

  // 1 -> [1] -> 1 with unit weights: tanh(0.5).
  MlpSpec chain{1, {1}, 1};
  MlpParams pc(chain);
  pc.weight(0)(0, 0) = 1.0;
  pc.weight(1)(0, 0) = 1.0;
  CHECK(forward(pc, Vec::Constant(1, 0.5))(0) ==
        doctest::Approx(0.46211715726000974).epsilon(1e-14));

  CHECK_THROWS_AS(forward(pc, Vec::Zero(2)), std::invalid_argument);
}

TEST_CASE("forward_batch: rowwise equality, vacuous batch, purity") {
  MlpSpec s{3, {8, 8}, 2};
  MlpParams p = init_params(s, 5);
  RngStream rng(2, 0);
  const Mat X = rng.normal_matrix(7, 3);
  const Mat Y = forward_batch(p, X);
  for (int i = 0; i < 7; ++i) {
    const Vec yi = forward(p, X.row(i).transpose());
    CHECK((Y.row(i).transpose() - yi).cwiseAbs().maxCoeff() == 0.0);  // exact
  }

  const Mat empty = forward_batch(p, Mat(0, 3));
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 2);

  Mat same(3, 3);
  same << X.row(0), X.row(0), X.row(0);
  const Mat Ys = forward_batch(p, same);
  CHECK((Ys.row(0) - Ys.row(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((Ys.row(1) - Ys.row(2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward_batch is thread-count invariant") {
  MlpSpec s{4, {16}, 3};
  MlpParams p = init_params(s, 9);
  RngStream rng(3, 0);
  const Mat X = rng.normal_matrix(512, 4);
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  const Mat Y1 = forward_batch(p, X);
#ifdef _OPENMP
  omp_set_num_threads(2);
#endif
  const Mat Y2 = forward_batch(p, X);
  CHECK((Y1 - Y2).cwiseAbs().maxCoeff() == 0.0);
#ifdef _OPENMP
  omp_set_num_threads(omp_get_num_procs());
#endif
}

TEST_CASE("value_and_grad: quadratic, constant, FD oracle on composite loss") {
  MlpSpec s{3, {4}, 2};  // (3+1)*4 + (4+1)*2 = 26 params
  MlpParams p = init_params(s, 21);

  // loss = sum params^2 -> grad = 2 p.
  auto quad = [](ad::Tape& t, const MlpBinding& b) {
    ad::Var acc = t.sum(t.square(b.W[0]));
    acc = t.add(acc, t.sum(t.square(b.b[0])));
    acc = t.add(acc, t.sum(t.square(b.W[1])));
    return t.add(acc, t.sum(t.square(b.b[1])));
  };
  auto [v, g] = value_and_grad(s, p, quad);
  CHECK(v == doctest::Approx(p.flat().squaredNorm()).epsilon(1e-14));
  CHECK((g - 2.0 * p.flat()).cwiseAbs().maxCoeff() <= 1e-12);

  // constant loss -> zero gradient.
  auto constant = [](ad::Tape& t, const MlpBinding& b) {
    return t.add_scalar(t.scale(t.sum(b.W[0]), 0.0), 3.0);
  };
  auto [vc, gc] = value_and_grad(s, p, constant);
  CHECK(vc == 3.0);
  CHECK(gc.cwiseAbs().maxCoeff() == 0.0);

  // Composite loss using every declared differentiable primitive vs central
  // finite differences (step 1e-6), the mandatory pre-build check.
  RngStream rng(4, 0);
  const Mat X = rng.normal_matrix(6, 3);
  auto composite = [&](ad::Tape& t, const MlpBinding& b) {
    ad::Var h = mlp_forward(t, s, b, t.leaf(X));
    auto [sn, cn] = t.sincos(h);
    ad::Var prod = t.mul(sn, cn);
    ad::Var sq = t.sqrt_(t.add_scalar(t.square(h), 1.0));
    return t.add(t.mean(prod), t.sum(t.scale(t.colmean(t.mul(sq, t.tanh_(h))), 0.5)));
  };
  auto [v0, ad_grad] = value_and_grad(s, p, composite);
  (void)v0;

  Vec fd(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    MlpParams pp = p;
    pp.flat()(i) += 1e-6;
    ad::Tape t1;
    MlpBinding b1 = bind_params(t1, pp, false);
    const double up = t1.value(composite(t1, b1))(0, 0);
    pp.flat()(i) -= 2e-6;
    ad::Tape t2;
    MlpBinding b2 = bind_params(t2, pp, false);
    const double down = t2.value(composite(t2, b2))(0, 0);
    fd(i) = (up - down) / 2e-6;
  }
  double worst = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    worst = std::max(worst,
                     std::abs(ad_grad(i) - fd(i)) /
                         std::max({std::abs(ad_grad(i)), std::abs(fd(i)), 1e-4}));
  CHECK(worst < 1e-5);
}

TEST_CASE("value_and_grad rejects non-finite losses") {
  MlpSpec s{1, {}, 1};
  MlpParams p(s);
  auto bad = [](ad::Tape& t, const MlpBinding& b) {
    return t.recip(t.sum(t.square(b.W[0])));  // 1/0 at zero params
  };
  CHECK_THROWS_AS(value_and_grad(s, p, bad), NumericError);
}

TEST_CASE("adam_step: zero grad no-op, hand-computed first step, determinism") {
  Vec p = Vec::Constant(3, 1.5);
  AdamState st(3);
  const Vec p0 = p;
  adam_step(p, Vec::Zero(3), st, 1e-3);
  CHECK((p - p0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(st.step == 1);

  // One bias-corrected step by hand: m = 0.1, v = 1e-3, mhat = 1, vhat = 1,
  // delta = -lr / (1 + eps).
  Vec q = Vec::Constant(1, 0.0);
  AdamState st1(1);
  adam_step(q, Vec::Constant(1, 1.0), st1, 1e-3);
  const double m = 0.1, v = 1e-3;
  const double mhat = m / (1.0 - 0.9), vhat = v / (1.0 - 0.999);
  const double expected = -1e-3 * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(q(0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(q(0) == doctest::Approx(-9.9999999e-4).epsilon(1e-7));

  // Identical calls from identical states give identical results.
  Vec a = Vec::Constant(4, 0.3), b = a;
  AdamState sa(4), sb(4);
  Vec g(4);
  g << 1.0, -2.0, 0.5, 0.0;
  for (int i = 0; i < 3; ++i) {
    adam_step(a, g, sa, 1e-2);
    adam_step(b, g, sb, 1e-2);
  }
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  Vec nan_grad = Vec::Constant(4, std::nan(""));
  CHECK_THROWS_AS(adam_step(a, nan_grad, sa, 1e-2), NumericError);
  CHECK_THROWS_AS(adam_step(a, Vec::Zero(2), sa, 1e-2), std::invalid_argument);
}

TEST_CASE("sgd_ascent_step: definition and inverse") {
  Vec eta(2);
  eta << 1.0, 2.0;
  Vec g(2);
  g << 1.0, -1.0;
  sgd_ascent_step(eta, g, 0.01);
  CHECK(eta(0) == doctest::Approx(1.01).epsilon(1e-15));
  CHECK(eta(1) == doctest::Approx(1.99).epsilon(1e-15));

  Vec eta0 = eta;
  sgd_ascent_step(eta, Vec::Zero(2), 0.01);
  CHECK((eta - eta0).cwiseAbs().maxCoeff() == 0.0);

  sgd_ascent_step(eta, g, 0.01);
  sgd_ascent_step(eta, g, -0.01);  // descent of the same grad restores eta
  CHECK((eta - eta0).cwiseAbs().maxCoeff() <= 1e-16);
}

TEST_CASE("gradient correctness: random small nets vs finite differences") {
  RngStream data_rng(17, 0);
  for (std::uint64_t trial = 0; trial < 4; ++trial) {
    MlpSpec s{2, {trial % 2 == 0 ? 3 : 5}, 2};  // <= 64 params
    MlpParams p = init_params(s, 100 + trial);
    const Mat X = data_rng.normal_matrix(5, 2);
    auto loss = [&](ad::Tape& t, const MlpBinding& b) {
      ad::Var h = mlp_forward(t, s, b, t.leaf(X));
      auto [sn, cn] = t.sincos(h);
      ad::Var term = t.mul(t.add(sn, t.square(h)), cn);
      return t.add(t.mean(term), t.sum(t.square(t.colmean(h))));
    };
    auto [v, ad_grad] = value_and_grad(s, p, loss);
    (void)v;
    double worst = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      MlpParams pp = p;
      pp.flat()(i) += 1e-6;
      ad::Tape t1;
      MlpBinding b1 = bind_params(t1, pp, false);
      const double up = t1.value(loss(t1, b1))(0, 0);
      pp.flat()(i) -= 2e-6;
      ad::Tape t2;
      MlpBinding b2 = bind_params(t2, pp, false);
      const double down = t2.value(loss(t2, b2))(0, 0);
      const double fd = (up - down) / 2e-6;
      worst = std::max(worst, std::abs(ad_grad(i) - fd) /
                                  std::max({std::abs(ad_grad(i)), std::abs(fd), 1e-4}));
    }
    CHECK(worst < 1e-5);
  }
}

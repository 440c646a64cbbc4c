#include <doctest.h>

#include <cmath>

#include "mfp/pushforward.hpp"

using namespace mfp;

TEST_CASE("sample_base: support, CLT mean bound, determinism") {
  BaseDist cube{BaseDistType::UniformUnitCube, 3};
  const Mat U = sample_base(cube, 5000, std::uint64_t{11});
  CHECK(U.minCoeff() >= 0.0);
  CHECK(U.maxCoeff() < 1.0);

  BaseDist gauss{BaseDistType::StandardGaussian, 2};
  const Mat G = sample_base(gauss, 100000, std::uint64_t{12});
  CHECK(G.colwise().mean().cwiseAbs().maxCoeff() <= 0.02);  // 3/sqrt(M) ~ 0.0095

  const Mat G2 = sample_base(gauss, 100000, std::uint64_t{12});
  CHECK((G - G2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("push_stationary: zero map, single-row consistency") {
  MlpSpec net{3, {5}, 2};
  BaseDist base{BaseDistType::UniformUnitCube, 3};
  StationaryMap map(net, base, 21);
  map.params.flat().setZero();
  RngStream rng(3, 0);
  const Mat R = rng.uniform_matrix(10, 3);
  CHECK(push_stationary(map, R).cwiseAbs().maxCoeff() == 0.0);

  StationaryMap live(net, base, 22);
  const Mat one = push_stationary(live, R.topRows(1));
  CHECK((one.row(0).transpose() - forward(live.params, R.row(0).transpose()))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("push_time: exact initial condition and sqrt(t) scaling") {
  MlpSpec net{1 + 4, {6}, 2};
  BaseDist base{BaseDistType::StandardGaussian, 4};
  TimeMap map(net, base, 2, false, 31);

  RngStream rng(5, 0);
  const int M = 16;
  const Mat X0 = rng.normal_matrix(M, 2);
  const Mat R = rng.normal_matrix(M, 4);

  // t = 0 returns X0 bit-exactly for any parameter values.
  const Mat at0 = push_time(map, Vec::Zero(M), X0, R);
  CHECK((at0 - X0).cwiseAbs().maxCoeff() == 0.0);

  // Zero parameters: x = x0 at every t.
  TimeMap zero = map;
  zero.params.flat().setZero();
  CHECK((push_time(zero, Vec::Constant(M, 1.0), X0, R) - X0).cwiseAbs().maxCoeff() == 0.0);

  // Linear (no hidden layer) map: doubling the parameters doubles the
  // displacement at fixed t = 4.
  MlpSpec lin{1 + 4, {}, 2};
  TimeMap lmap(lin, base, 2, false, 32);
  TimeMap lmap2 = lmap;
  lmap2.params.flat() *= 2.0;
  const Vec t4 = Vec::Constant(M, 4.0);
  const Mat d1 = push_time(lmap, t4, X0, R) - X0;
  const Mat d2 = push_time(lmap2, t4, X0, R) - X0;
  CHECK((d2 - 2.0 * d1).cwiseAbs().maxCoeff() <= 1e-14);

  // Negative time is an error.
  CHECK_THROWS_AS(push_time(map, Vec::Constant(M, -0.1), X0, R), std::invalid_argument);
}

TEST_CASE("push_time with x0 as network input still honors t = 0") {
  MlpSpec net{1 + 2 + 4, {6}, 2};
  BaseDist base{BaseDistType::StandardGaussian, 4};
  TimeMap map(net, base, 2, true, 33);
  RngStream rng(6, 0);
  const Mat X0 = rng.normal_matrix(8, 2);
  const Mat R = rng.normal_matrix(8, 4);
  CHECK((push_time(map, Vec::Zero(8), X0, R) - X0).cwiseAbs().maxCoeff() == 0.0);
  const Mat at1 = push_time(map, Vec::Constant(8, 1.0), X0, R);
  CHECK((at1 - X0).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("gradients of a pushed-sample statistic match finite differences") {
  MlpSpec net{1 + 3, {5}, 2};  // 45 params
  BaseDist base{BaseDistType::StandardGaussian, 3};
  TimeMap map(net, base, 2, false, 41);
  RngStream rng(7, 0);
  const int M = 12;
  const Mat X0 = rng.normal_matrix(M, 2);
  const Mat R = rng.normal_matrix(M, 3);
  Vec t(M);
  for (int i = 0; i < M; ++i) t(i) = rng.uniform(0.0, 1.0);

  auto statistic = [&](const MlpParams& params) {
    ad::Tape tape;
    TimeMap m = map;
    m.params = params;
    MlpBinding b = bind_params(tape, params, false);
    ad::Var X = build_push_time(tape, m, b, t, X0, R);
    return tape.value(tape.mean(tape.square(X)))(0, 0);
  };

  ad::Tape tape;
  MlpBinding b = bind_params(tape, map.params, true);
  ad::Var X = build_push_time(tape, map, b, t, X0, R);
  ad::Var loss = tape.mean(tape.square(X));
  tape.backward(loss);
  const Vec ad_grad = gather_grad(tape, net, b);

  double worst = 0;
  for (Eigen::Index i = 0; i < map.params.size(); ++i) {
    MlpParams p = map.params;
    p.flat()(i) += 1e-6;
    const double up = statistic(p);
    p.flat()(i) -= 2e-6;
    const double down = statistic(p);
    const double fd = (up - down) / 2e-6;
    worst = std::max(worst, std::abs(ad_grad(i) - fd) /
                                std::max({std::abs(ad_grad(i)), std::abs(fd), 1e-4}));
  }
  CHECK(worst < 1e-5);
}

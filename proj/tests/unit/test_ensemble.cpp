#include <doctest.h>

#include <cmath>

#include "mfp/ensemble.hpp"
#include "mfp/problem.hpp"
#include "mfp/pushforward.hpp"
#include "mfp/stationary.hpp"

using namespace mfp;

TEST_CASE("default_frequency_scale follows sqrt(2 lambda)/(sigma sqrt(n))") {
  CHECK(default_frequency_scale(2.0, 1.0, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(default_frequency_scale(2.0, 1.0, 20) == doctest::Approx(0.4472135954999579).epsilon(1e-12));
  CHECK(default_frequency_scale(0.5, 1.0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(default_frequency_scale(-1.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(default_frequency_scale(1.0, 0.0, 2), std::invalid_argument);
}

TEST_CASE("init_ensemble: frequency scale statistics, phases, determinism") {
  PlaneWaveEnsemble ens = init_ensemble(2000, 2, 2.0, BiasMode::UniformPhase, std::nullopt, 7);
  CHECK(ens.size() == 2000);
  CHECK(ens.dim() == 2);
  CHECK_FALSE(ens.time_dependent());
  const double sample_std =
      std::sqrt(ens.W.array().square().sum() / static_cast<double>(ens.W.size()));
  CHECK(sample_std >= 1.8);
  CHECK(sample_std <= 2.2);
  CHECK(ens.b.minCoeff() >= 0.0);
  CHECK(ens.b.maxCoeff() < 2.0 * M_PI);

  // Near-zero frequency scale: near-constant test functions.
  PlaneWaveEnsemble flat_ens = init_ensemble(50, 2, 1e-9, BiasMode::UniformPhase, std::nullopt, 7);
  RngStream rng(1, 0);
  const Mat X = rng.normal_matrix(20, 2);
  const StationaryEval ev = eval_stationary(flat_ens, X);
  for (int k = 0; k < 50; ++k) {
    const double spread = ev.f.row(k).maxCoeff() - ev.f.row(k).minCoeff();
    CHECK(spread <= 1e-7);
  }

  PlaneWaveEnsemble again = init_ensemble(2000, 2, 2.0, BiasMode::UniformPhase, std::nullopt, 7);
  CHECK((again.W - ens.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.b - ens.b).cwiseAbs().maxCoeff() == 0.0);

  PlaneWaveEnsemble timed = init_ensemble(10, 3, 1.0, BiasMode::ZeroPhase, 0.5, 9);
  CHECK(timed.time_dependent());
  CHECK(timed.b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eval_stationary: closed-form points") {
  PlaneWaveEnsemble ens;
  ens.W = Mat(2, 2);
  ens.W << 1, 0, 1, 0;
  ens.b = Vec(2);
  ens.b << 0.0, M_PI / 2.0;

  Mat X = Mat::Zero(1, 2);
  const StationaryEval ev = eval_stationary(ens, X);
  // w=(1,0), b=0 at origin: f=0, grad=(1,0), lap=0.
  CHECK(ev.f(0, 0) == 0.0);
  CHECK(ev.grad[0](0, 0) == 1.0);
  CHECK(ev.grad[1](0, 0) == 0.0);
  CHECK(ev.lap(0, 0) == 0.0);
  // b = pi/2: f=1, grad=(0,0) up to cos(pi/2), lap=-1.
  CHECK(ev.f(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(ev.grad[0](1, 0)) <= 1e-15);
  CHECK(ev.lap(1, 0) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("eval_stationary: laplacian equals trace of numeric Hessian") {
  PlaneWaveEnsemble ens = init_ensemble(6, 3, 1.4, BiasMode::UniformPhase, std::nullopt, 33);
  RngStream rng(8, 0);
  const Mat X = rng.normal_matrix(4, 3);
  const StationaryEval ev = eval_stationary(ens, X);
  const double h = 1e-4;
  for (int k = 0; k < 6; ++k) {
    for (int m = 0; m < 4; ++m) {
      double trace = 0;
      for (int j = 0; j < 3; ++j) {
        Vec xp = X.row(m), xm = X.row(m);
        xp(j) += h;
        xm(j) -= h;
        const double fp = std::sin(ens.W.row(k).dot(xp) + ens.b(k));
        const double fm = std::sin(ens.W.row(k).dot(xm) + ens.b(k));
        const double f0 = ev.f(k, m);
        trace += (fp - 2 * f0 + fm) / (h * h);
      }
      CHECK(std::abs(trace - ev.lap(k, m)) <= 1e-6);
    }
  }
}

TEST_CASE("eval_spacetime: constant function, kappa-only, FD in time") {
  PlaneWaveEnsemble ens;
  ens.W = Mat::Zero(2, 2);
  ens.b = Vec(2);
  ens.b << M_PI / 2.0, 0.0;
  ens.kappa = Vec(2);
  ens.kappa << 0.0, 1.0;

  Vec t(1);
  t << M_PI / 2.0;
  Mat X = Mat::Zero(1, 2);
  const SpacetimeEval ev = eval_spacetime(ens, t, X);
  // w=0, kappa=0, b=pi/2: psi == 1, all derivatives 0.
  CHECK(ev.psi(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ev.dpsi_dt(0, 0) == 0.0);
  CHECK(ev.grad_x[0](0, 0) == 0.0);
  CHECK(ev.lap_x(0, 0) == 0.0);
  // kappa=1, w=0, b=0, t=pi/2: psi=1, dpsi/dt=0.
  CHECK(ev.psi(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(ev.dpsi_dt(1, 0)) <= 1e-15);

  // Random inputs: dpsi/dt matches a central difference in t.
  PlaneWaveEnsemble r = init_ensemble(5, 2, 1.1, BiasMode::UniformPhase, 0.9, 13);
  RngStream rng(14, 0);
  const Mat Xr = rng.normal_matrix(3, 2);
  Vec tr(3);
  tr << 0.2, 0.5, 0.9;
  const SpacetimeEval evr = eval_spacetime(r, tr, Xr);
  const double h = 1e-5;
  for (int k = 0; k < 5; ++k)
    for (int m = 0; m < 3; ++m) {
      const double up = std::sin(r.W.row(k).dot(Xr.row(m)) + r.kappa(k) * (tr(m) + h) + r.b(k));
      const double dn = std::sin(r.W.row(k).dot(Xr.row(m)) + r.kappa(k) * (tr(m) - h) + r.b(k));
      CHECK(std::abs((up - dn) / (2 * h) - evr.dpsi_dt(k, m)) <= 1e-6);
    }
}

TEST_CASE("flat adversary vector round-trips exactly") {
  PlaneWaveEnsemble ens = init_ensemble(7, 3, 0.8, BiasMode::UniformPhase, 0.4, 19);
  const Vec eta = ens.flat();
  CHECK(eta.size() == 7 * 3 + 7 + 7);
  PlaneWaveEnsemble copy = ens;
  copy.W.setZero();
  copy.b.setZero();
  copy.kappa.setZero();
  copy.set_flat(eta);
  CHECK((copy.W - ens.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK((copy.b - ens.b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((copy.kappa - ens.kappa).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(copy.set_flat(Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("adversary ascent increases the loss on a frozen generator") {
  ProblemSpec spec;
  spec.n = 2;
  spec.theta = 1.0;
  spec.sigma = 1.0;

  MlpSpec net{3, {8}, 2};
  BaseDist base{BaseDistType::UniformUnitCube, 3};
  StationaryMap map(net, base, 55);
  PlaneWaveEnsemble ens = init_ensemble(32, 2, 1.5, BiasMode::UniformPhase, std::nullopt, 56);
  RngStream rng(57, stream_id::base_interior);
  const Mat R = sample_base(base, 64, rng);

  auto loss_of = [&](const PlaneWaveEnsemble& e) {
    ad::Tape t;
    MlpBinding mb = bind_params(t, map.params, false);
    EnsembleBinding eb = bind_ensemble(t, e, false);
    return t.value(build_stationary_loss(t, map, mb, eb, spec, R))(0, 0);
  };

  ad::Tape t;
  MlpBinding mb = bind_params(t, map.params, false);
  EnsembleBinding eb = bind_ensemble(t, ens, true);
  ad::Var loss = build_stationary_loss(t, map, mb, eb, spec, R);
  const double before = t.value(loss)(0, 0);
  t.backward(loss);
  const Vec g = gather_grad_ensemble(t, ens, eb);
  REQUIRE(g.norm() > 1e-10);

  const double lr = 1e-4;
  PlaneWaveEnsemble stepped = ens;
  stepped.set_flat(ens.flat() + lr * g);
  const double after = loss_of(stepped);
  // First-order gain lr |g|^2 with a 50% margin for curvature.
  CHECK(after - before >= 0.5 * lr * g.squaredNorm());
}

#include "mfp/pushforward.hpp"

#include <cmath>

namespace mfp {

Mat sample_base(const BaseDist& dist, int M, RngStream& rng) {
  if (dist.d < 1) throw std::invalid_argument("sample_base: base dimension must be >= 1");
  switch (dist.type) {
    case BaseDistType::UniformUnitCube:
      return rng.uniform_matrix(M, dist.d);
    case BaseDistType::StandardGaussian:
      return rng.normal_matrix(M, dist.d);
  }
  throw std::logic_error("sample_base: unknown base distribution");
}

Mat sample_base(const BaseDist& dist, int M, std::uint64_t seed) {
  RngStream rng(seed, stream_id::evaluation);
  return sample_base(dist, M, rng);
}

StationaryMap::StationaryMap(MlpSpec s, BaseDist bd, std::uint64_t seed)
    : spec(std::move(s)), base(bd), params(init_params(spec, seed)) {
  if (spec.input_dim != base.d)
    throw std::invalid_argument("StationaryMap: spec.input_dim != base dimension");
}

TimeMap::TimeMap(MlpSpec s, BaseDist bd, int n_, bool include_x0, std::uint64_t seed)
    : spec(std::move(s)), base(bd), n(n_), include_x0_input(include_x0),
      params(init_params(spec, seed)) {
  if (spec.input_dim != expected_input_dim())
    throw std::invalid_argument("TimeMap: spec.input_dim != 1 [+ n] + base dimension");
  if (spec.output_dim != n)
    throw std::invalid_argument("TimeMap: spec.output_dim != n");
}

Mat push_stationary(const StationaryMap& map, const Mat& R) {
  return forward_batch(map.params, R);
}

Mat time_map_input(const TimeMap& map, const Vec& t, const Mat& X0, const Mat& R) {
  const Eigen::Index M = t.size();
  if (X0.rows() != M || R.rows() != M || X0.cols() != map.n || R.cols() != map.base.d)
    throw std::invalid_argument("time_map_input: shape mismatch");
  if ((t.array() < 0).any()) throw std::invalid_argument("push_time: negative time");
  Mat input(M, map.expected_input_dim());
  input.col(0) = t;
  if (map.include_x0_input) {
    input.middleCols(1, map.n) = X0;
    input.rightCols(map.base.d) = R;
  } else {
    input.rightCols(map.base.d) = R;
  }
  return input;
}

Mat push_time(const TimeMap& map, const Vec& t, const Mat& X0, const Mat& R) {
  const Mat input = time_map_input(map, t, X0, R);
  Mat F = forward_batch(map.params, input);
  F.array().colwise() *= t.array().sqrt();
  return X0 + F;
}

ad::Var build_push_stationary(ad::Tape& tape, const StationaryMap& map,
                              const MlpBinding& binding, const Mat& R) {
  ad::Var input = tape.leaf(R, false);
  return mlp_forward(tape, map.spec, binding, input);
}

ad::Var build_push_time(ad::Tape& tape, const TimeMap& map, const MlpBinding& binding,
                        const Vec& t, const Mat& X0, const Mat& R) {
  ad::Var input = tape.leaf(time_map_input(map, t, X0, R), false);
  ad::Var f = mlp_forward(tape, map.spec, binding, input);
  return tape.add_const(tape.scale_rows(f, t.array().sqrt()), X0);
}

}  // namespace mfp

#pragma once

#include <cstdint>

#include "mfp/mlp.hpp"
#include "mfp/rng.hpp"

namespace mfp {

enum class BaseDistType { UniformUnitCube, StandardGaussian };

struct BaseDist {
  BaseDistType type = BaseDistType::StandardGaussian;
  int d = 1;
};

/// M i.i.d. base samples (rows). Deterministic given the stream state.
Mat sample_base(const BaseDist& dist, int M, RngStream& rng);
/// Convenience overload with a dedicated evaluation stream for (seed).
Mat sample_base(const BaseDist& dist, int M, std::uint64_t seed);

/// Stationary sampler: x = F(r), r ~ base.
struct StationaryMap {
  MlpSpec spec;
  BaseDist base;
  MlpParams params;

  StationaryMap(MlpSpec s, BaseDist bd, std::uint64_t seed);
  int n() const { return spec.output_dim; }
};

/// Time-dependent sampler: x = x0 + sqrt(t) * F~(t [, x0], r). The sqrt(t)
/// factor is exactly zero at t = 0, so the initial condition holds bit-exactly
/// for any parameter values.
struct TimeMap {
  MlpSpec spec;
  BaseDist base;
  int n = 1;
  bool include_x0_input = false;
  MlpParams params;

  TimeMap(MlpSpec s, BaseDist bd, int n, bool include_x0, std::uint64_t seed);
  int expected_input_dim() const { return 1 + (include_x0_input ? n : 0) + base.d; }
};

Mat push_stationary(const StationaryMap& map, const Mat& R);
/// Throws on negative t.
Mat push_time(const TimeMap& map, const Vec& t, const Mat& X0, const Mat& R);

/// Network input rows [t | x0? | r] for the time-dependent map.
Mat time_map_input(const TimeMap& map, const Vec& t, const Mat& X0, const Mat& R);

// ---- tape integration ----

ad::Var build_push_stationary(ad::Tape& tape, const StationaryMap& map,
                              const MlpBinding& binding, const Mat& R);
ad::Var build_push_time(ad::Tape& tape, const TimeMap& map, const MlpBinding& binding,
                        const Vec& t, const Mat& X0, const Mat& R);

}  // namespace mfp

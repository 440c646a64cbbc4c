#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace mfp {

/// Deterministic random stream. Streams are derived from (seed, stream id)
/// so that consumers with dedicated ids never perturb each other: changing
/// how much one stream draws cannot shift another stream's sequence.
///
/// Uniform and normal variates are generated portably from the raw 64-bit
/// engine output (no std::*_distribution), so a (seed, id) pair pins the
/// exact sequence independent of the standard library.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Uniform on [0, 1), 53-bit mantissa.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  Eigen::MatrixXd uniform_matrix(int rows, int cols);
  Eigen::MatrixXd normal_matrix(int rows, int cols);
  Eigen::VectorXd normal_vector(int n);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0;
  bool has_cached_ = false;
};

/// Fixed stream ids for the training loops. Dedicated streams keep the
/// terminal/initial batches independent of interior batch sizes.
namespace stream_id {
inline constexpr std::uint64_t params = 1;
inline constexpr std::uint64_t ensemble = 2;
inline constexpr std::uint64_t base_interior = 3;
inline constexpr std::uint64_t base_terminal = 4;
inline constexpr std::uint64_t initial_batch = 5;
inline constexpr std::uint64_t base_interaction = 6;
inline constexpr std::uint64_t x0_interior = 7;
inline constexpr std::uint64_t x0_terminal = 8;
inline constexpr std::uint64_t x0_interaction = 9;
inline constexpr std::uint64_t time_interaction = 10;
inline constexpr std::uint64_t particles = 11;
inline constexpr std::uint64_t evaluation = 12;
}  // namespace stream_id

}  // namespace mfp

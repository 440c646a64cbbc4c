#pragma once

#include <cstdint>
#include <vector>

#include "mfp/common.hpp"
#include "mfp/rng.hpp"
#include "mfp/tape.hpp"

namespace mfp {

enum class Activation { Tanh };

/// Architecture of a feedforward network: affine-activation chain with an
/// affine (no activation) output layer.
struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_widths;
  int output_dim = 1;
  Activation activation = Activation::Tanh;

  int layer_count() const { return static_cast<int>(hidden_widths.size()) + 1; }
  int fan_in(int layer) const;
  int fan_out(int layer) const;
  /// Total trainable scalars: sum over layers of (fan_in + 1) * fan_out.
  long param_count() const;
  void validate() const;

  bool operator==(const MlpSpec&) const = default;
};

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// All trainable weights and biases, stored as one flat vector. The
/// structured per-layer views alias the same storage (no copies), so
/// optimizer steps on the flat vector are immediately visible to forward().
///
/// Flat layout, layer by layer: weight matrix row-major, then bias.
class MlpParams {
 public:
  explicit MlpParams(const MlpSpec& spec);  // zero-initialized

  const MlpSpec& spec() const { return spec_; }
  Eigen::Index size() const { return flat_.size(); }

  Vec& flat() { return flat_; }
  const Vec& flat() const { return flat_; }

  Eigen::Map<RowMat> weight(int layer);
  Eigen::Map<const RowMat> weight(int layer) const;
  Eigen::Map<Vec> bias(int layer);
  Eigen::Map<const Vec> bias(int layer) const;

  Eigen::Index weight_offset(int layer) const;
  Eigen::Index bias_offset(int layer) const;

 private:
  MlpSpec spec_;
  std::vector<Eigen::Index> offsets_;  // per layer, start of weight block
  Vec flat_;
};

/// Weights uniform on [-sqrt(1/fan_in), +sqrt(1/fan_in)) per layer, biases
/// zero. Deterministic given seed.
MlpParams init_params(const MlpSpec& spec, std::uint64_t seed);

/// Single-input forward pass (affine-activation chain, affine last layer).
Vec forward(const MlpParams& params, const Vec& x);

/// Row-wise forward. May run rows in parallel; each row uses the identical
/// per-row arithmetic, so results are bit-equal to sequential application.
Mat forward_batch(const MlpParams& params, const Mat& X);

// ---- tape integration ----

/// Per-layer leaves on a tape (weights as fan_out x fan_in, biases as 1 x fan_out).
struct MlpBinding {
  std::vector<ad::Var> W;
  std::vector<ad::Var> b;
};

MlpBinding bind_params(ad::Tape& tape, const MlpParams& params, bool requires_grad);

/// Batch forward on the tape: input is an M x input_dim Var (usually a data leaf).
ad::Var mlp_forward(ad::Tape& tape, const MlpSpec& spec, const MlpBinding& binding, ad::Var input);

/// Gather d(loss)/d(params) into the flat layout after tape.backward().
Vec gather_grad(const ad::Tape& tape, const MlpSpec& spec, const MlpBinding& binding);

/// Reverse-mode value and gradient of a scalar loss built from tape
/// primitives. Throws NumericError (carrying the offending value) if the loss
/// or any gradient entry is non-finite.
using LossBuilder = std::function<ad::Var(ad::Tape&, const MlpBinding&)>;
std::pair<double, Vec> value_and_grad(const MlpSpec& spec, const MlpParams& params,
                                      const LossBuilder& builder);

}  // namespace mfp

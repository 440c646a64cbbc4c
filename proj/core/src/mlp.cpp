#include "mfp/mlp.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mfp {

int MlpSpec::fan_in(int layer) const {
  return layer == 0 ? input_dim : hidden_widths[layer - 1];
}

int MlpSpec::fan_out(int layer) const {
  return layer == layer_count() - 1 ? output_dim : hidden_widths[layer];
}

long MlpSpec::param_count() const {
  long count = 0;
  for (int l = 0; l < layer_count(); ++l)
    count += static_cast<long>(fan_in(l) + 1) * fan_out(l);
  return count;
}

void MlpSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("MlpSpec: input_dim must be >= 1");
  if (output_dim < 1) throw std::invalid_argument("MlpSpec: output_dim must be >= 1");
  for (int w : hidden_widths)
    if (w < 1) throw std::invalid_argument("MlpSpec: hidden width must be >= 1");
}

MlpParams::MlpParams(const MlpSpec& spec) : spec_(spec) {
  spec_.validate();
  Eigen::Index off = 0;
  for (int l = 0; l < spec_.layer_count(); ++l) {
    offsets_.push_back(off);
    off += static_cast<Eigen::Index>(spec_.fan_in(l) + 1) * spec_.fan_out(l);
  }
  flat_ = Vec::Zero(off);
}

Eigen::Index MlpParams::weight_offset(int layer) const { return offsets_[layer]; }

Eigen::Index MlpParams::bias_offset(int layer) const {
  return offsets_[layer] +
         static_cast<Eigen::Index>(spec_.fan_in(layer)) * spec_.fan_out(layer);
}

Eigen::Map<RowMat> MlpParams::weight(int layer) {
  return {flat_.data() + weight_offset(layer), spec_.fan_out(layer), spec_.fan_in(layer)};
}

Eigen::Map<const RowMat> MlpParams::weight(int layer) const {
  return {flat_.data() + weight_offset(layer), spec_.fan_out(layer), spec_.fan_in(layer)};
}

Eigen::Map<Vec> MlpParams::bias(int layer) {
  return {flat_.data() + bias_offset(layer), spec_.fan_out(layer)};
}

Eigen::Map<const Vec> MlpParams::bias(int layer) const {
  return {flat_.data() + bias_offset(layer), spec_.fan_out(layer)};
}

MlpParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  MlpParams p(spec);
  RngStream rng(seed, stream_id::params);
  for (int l = 0; l < spec.layer_count(); ++l) {
    const double bound = std::sqrt(1.0 / spec.fan_in(l));
    auto w = p.weight(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
    // biases stay zero
  }
  return p;
}

namespace {

void forward_into(const MlpParams& params, const Vec& x, Vec& h, Vec& tmp) {
  const MlpSpec& spec = params.spec();
  h = x;
  for (int l = 0; l < spec.layer_count(); ++l) {
    tmp.noalias() = params.weight(l) * h;
    tmp += params.bias(l);
    if (l + 1 < spec.layer_count()) tmp = tmp.array().tanh();
    h.swap(tmp);
  }
}

}  // namespace

Vec forward(const MlpParams& params, const Vec& x) {
  if (x.size() != params.spec().input_dim)
    throw std::invalid_argument("forward: input length != input_dim");
  Vec h, tmp;
  forward_into(params, x, h, tmp);
  return h;
}

Mat forward_batch(const MlpParams& params, const Mat& X) {
  const MlpSpec& spec = params.spec();
  if (X.cols() != spec.input_dim)
    throw std::invalid_argument("forward_batch: input cols != input_dim");
  Mat Y(X.rows(), spec.output_dim);
  const Eigen::Index M = X.rows();
#ifdef _OPENMP
#pragma omp parallel if (M > 256)
  {
    Vec h, tmp, xi;
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < M; ++i) {
      xi = X.row(i).transpose();
      forward_into(params, xi, h, tmp);
      Y.row(i) = h.transpose();
    }
  }
#else
  Vec h, tmp, xi;
  for (Eigen::Index i = 0; i < M; ++i) {
    xi = X.row(i).transpose();
    forward_into(params, xi, h, tmp);
    Y.row(i) = h.transpose();
  }
#endif
  return Y;
}

MlpBinding bind_params(ad::Tape& tape, const MlpParams& params, bool requires_grad) {
  MlpBinding binding;
  const MlpSpec& spec = params.spec();
  for (int l = 0; l < spec.layer_count(); ++l) {
    binding.W.push_back(tape.leaf(params.weight(l), requires_grad));
    binding.b.push_back(tape.leaf(params.bias(l).transpose(), requires_grad));
  }
  return binding;
}

ad::Var mlp_forward(ad::Tape& tape, const MlpSpec& spec, const MlpBinding& binding,
                    ad::Var input) {
  ad::Var h = input;
  for (int l = 0; l < spec.layer_count(); ++l) {
    h = tape.add_row(tape.matmul_nt(h, binding.W[l]), binding.b[l]);
    if (l + 1 < spec.layer_count()) h = tape.tanh_(h);
  }
  return h;
}

Vec gather_grad(const ad::Tape& tape, const MlpSpec& spec, const MlpBinding& binding) {
  Vec g(MlpParams(spec).size());
  Eigen::Index off = 0;
  for (int l = 0; l < spec.layer_count(); ++l) {
    const Mat gw = tape.grad(binding.W[l]);  // fan_out x fan_in
    for (Eigen::Index i = 0; i < gw.rows(); ++i)
      for (Eigen::Index j = 0; j < gw.cols(); ++j) g(off++) = gw(i, j);
    const Mat gb = tape.grad(binding.b[l]);  // 1 x fan_out
    for (Eigen::Index j = 0; j < gb.cols(); ++j) g(off++) = gb(0, j);
  }
  return g;
}

std::pair<double, Vec> value_and_grad(const MlpSpec& spec, const MlpParams& params,
                                      const LossBuilder& builder) {
  ad::Tape tape;
  MlpBinding binding = bind_params(tape, params, true);
  ad::Var loss = builder(tape, binding);
  const double value = tape.value(loss)(0, 0);
  check_finite(value, "loss");
  tape.backward(loss);
  Vec grad = gather_grad(tape, spec, binding);
  check_finite(grad, "gradient");
  return {value, std::move(grad)};
}

}  // namespace mfp

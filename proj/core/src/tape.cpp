#ifndef _GNU_SOURCE
#define _GNU_SOURCE 1
#endif

#include "mfp/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "mfp/detail/kernels.hpp"

namespace mfp::ad {
namespace {

using detail::map_unary;
using detail::sincos_matrix;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Var Tape::push(Node&& n) {
  nodes_.emplace_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Mat value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.val = std::move(value);
  n.rg = requires_grad;
  return push(std::move(n));
}

Var Tape::unary(Op op, Var a) {
  Node n;
  n.op = op;
  n.a = a.id;
  n.rg = node(a.id).rg;
  return push(std::move(n));
}

Var Tape::binary(Op op, Var a, Var b) {
  Node n;
  n.op = op;
  n.a = a.id;
  n.b = b.id;
  n.rg = node(a.id).rg || node(b.id).rg;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  require(va.rows() == vb.rows() && va.cols() == vb.cols(), "add: shape mismatch");
  Var r = binary(Op::Add, a, b);
  node(r.id).val = va + vb;
  return r;
}

Var Tape::sub(Var a, Var b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  require(va.rows() == vb.rows() && va.cols() == vb.cols(), "sub: shape mismatch");
  Var r = binary(Op::Sub, a, b);
  node(r.id).val = va - vb;
  return r;
}

Var Tape::mul(Var a, Var b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  require(va.rows() == vb.rows() && va.cols() == vb.cols(), "mul: shape mismatch");
  Var r = binary(Op::Mul, a, b);
  node(r.id).val = va.cwiseProduct(vb);
  return r;
}

Var Tape::scale(Var a, double c) {
  Var r = unary(Op::Scale, a);
  node(r.id).c = c;
  node(r.id).val = c * value(a);
  return r;
}

Var Tape::add_scalar(Var a, double c) {
  Var r = unary(Op::AddScalar, a);
  node(r.id).c = c;
  node(r.id).val = value(a).array() + c;
  return r;
}

Var Tape::square(Var a) {
  Var r = unary(Op::Square, a);
  node(r.id).val = value(a).cwiseProduct(value(a));
  return r;
}

Var Tape::sqrt_(Var a) {
  Var r = unary(Op::Sqrt, a);
  node(r.id).val = value(a).cwiseSqrt();
  return r;
}

Var Tape::recip(Var a) {
  Var r = unary(Op::Recip, a);
  node(r.id).val = value(a).cwiseInverse();
  return r;
}

Var Tape::tanh_(Var a) {
  Var r = unary(Op::Tanh, a);
  node(r.id).val = map_unary(value(a), [](double x) { return std::tanh(x); });
  return r;
}

Var Tape::sin_(Var a) {
  Var r = unary(Op::Sin, a);
  node(r.id).val = map_unary(value(a), [](double x) { return std::sin(x); });
  return r;
}

Var Tape::cos_(Var a) {
  Var r = unary(Op::Cos, a);
  node(r.id).val = map_unary(value(a), [](double x) { return std::cos(x); });
  return r;
}

std::pair<Var, Var> Tape::sincos(Var a) {
  Mat s, c;
  sincos_matrix(value(a), s, c);
  Var vs = unary(Op::Sin, a);
  node(vs.id).val = std::move(s);
  Var vc = unary(Op::Cos, a);
  node(vc.id).val = std::move(c);
  node(vs.id).partner = vc.id;
  node(vc.id).partner = vs.id;
  return {vs, vc};
}

Var Tape::matmul_nt(Var a, Var b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  require(va.cols() == vb.cols(), "matmul_nt: inner dimension mismatch");
  Var r = binary(Op::MatmulNT, a, b);
  node(r.id).val.noalias() = va * vb.transpose();
  return r;
}

Var Tape::add_row(Var a, Var v) {
  const Mat& va = value(a);
  const Mat& vv = value(v);
  require(vv.rows() == 1 && vv.cols() == va.cols(), "add_row: expected 1 x cols vector");
  Var r = binary(Op::AddRow, a, v);
  node(r.id).val = va.array().rowwise() + vv.row(0).array();
  return r;
}

Var Tape::mul_row(Var a, Var v) {
  const Mat& va = value(a);
  const Mat& vv = value(v);
  require(vv.rows() == 1 && vv.cols() == va.cols(), "mul_row: expected 1 x cols vector");
  Var r = binary(Op::MulRow, a, v);
  node(r.id).val = va.array().rowwise() * vv.row(0).array();
  return r;
}

Var Tape::mul_col(Var a, Var v) {
  const Mat& va = value(a);
  const Mat& vv = value(v);
  require(vv.cols() == 1 && vv.rows() == va.rows(), "mul_col: expected rows x 1 vector");
  Var r = binary(Op::MulCol, a, v);
  node(r.id).val = va.array().colwise() * vv.col(0).array();
  return r;
}

Var Tape::transpose(Var a) {
  Var r = unary(Op::Transpose, a);
  node(r.id).val = value(a).transpose();
  return r;
}

Var Tape::scale_rows(Var a, const Eigen::VectorXd& s) {
  const Mat& va = value(a);
  require(s.size() == va.rows(), "scale_rows: scale length != rows");
  Var r = unary(Op::ScaleRows, a);
  node(r.id).rs = s;
  node(r.id).val = va.array().colwise() * s.array();
  return r;
}

Var Tape::add_const(Var a, Mat c) {
  const Mat& va = value(a);
  require(c.rows() == va.rows() && c.cols() == va.cols(), "add_const: shape mismatch");
  Var r = unary(Op::AddConst, a);
  node(r.id).val = va + c;
  return r;
}

Var Tape::sum(Var a) {
  Var r = unary(Op::Sum, a);
  node(r.id).val = Mat::Constant(1, 1, value(a).sum());
  return r;
}

Var Tape::mean(Var a) {
  require(value(a).size() > 0, "mean: empty matrix");
  Var r = unary(Op::Mean, a);
  node(r.id).val = Mat::Constant(1, 1, value(a).mean());
  return r;
}

Var Tape::colsum(Var a) {
  Var r = unary(Op::ColSum, a);
  node(r.id).val = value(a).colwise().sum();
  return r;
}

Var Tape::colmean(Var a) {
  require(value(a).rows() > 0, "colmean: empty matrix");
  Var r = unary(Op::ColMean, a);
  node(r.id).val = value(a).colwise().mean();
  return r;
}

Var Tape::rowsum(Var a) {
  Var r = unary(Op::RowSum, a);
  node(r.id).val = value(a).rowwise().sum();
  return r;
}

Var Tape::block_colmean(Var a, int block_rows) {
  const Mat& va = value(a);
  require(block_rows > 0 && va.rows() % block_rows == 0,
          "block_colmean: rows not divisible by block size");
  Var r = unary(Op::BlockColMean, a);
  node(r.id).iarg = block_rows;
  const Eigen::Index nb = va.rows() / block_rows;
  Mat out(nb, va.cols());
  for (Eigen::Index i = 0; i < nb; ++i)
    out.row(i) = va.middleRows(i * block_rows, block_rows).colwise().mean();
  node(r.id).val = std::move(out);
  return r;
}

Var Tape::repeat_rows(Var a, int times) {
  require(times > 0, "repeat_rows: times must be positive");
  const Mat& va = value(a);
  Var r = unary(Op::RepeatRows, a);
  node(r.id).iarg = times;
  Mat out(va.rows() * times, va.cols());
  for (Eigen::Index i = 0; i < va.rows(); ++i)
    out.middleRows(i * times, times).rowwise() = va.row(i);
  node(r.id).val = std::move(out);
  return r;
}

const Mat& Tape::value(Var v) const {
  require(v.valid() && v.id < static_cast<int>(nodes_.size()), "invalid Var");
  return node(v.id).val;
}

Mat Tape::grad(Var v) const {
  const Node& n = node(v.id);
  if (n.seen_grad) return n.grad;
  return Mat::Zero(n.val.rows(), n.val.cols());
}

void Tape::accumulate(int target, const Mat& g) { accumulate_expr(target, g); }

template <typename Expr>
void Tape::accumulate_expr(int target, const Expr& g) {
  Node& n = node(target);
  if (!n.rg) return;
  if (!n.seen_grad) {
    n.grad = Mat::Zero(n.val.rows(), n.val.cols());
    n.seen_grad = true;
  }
  n.grad.noalias() += g;
}

void Tape::backward(Var root) {
  require(root.valid() && root.id < static_cast<int>(nodes_.size()), "backward: invalid root");
  require(node(root.id).val.size() == 1, "backward: root must be scalar (1x1)");
  require(node(root.id).rg, "backward: root does not depend on any differentiable leaf");

  // Reset any gradients from a previous sweep on this graph.
  for (auto& n : nodes_) {
    if (n.seen_grad) {
      n.grad.resize(0, 0);
      n.seen_grad = false;
    }
  }

  Node& rn = node(root.id);
  rn.grad = Mat::Constant(1, 1, 1.0);
  rn.seen_grad = true;

  for (int i = root.id; i >= 0; --i) {
    Node& n = node(i);
    if (!n.rg || !n.seen_grad || n.op == Op::Leaf) continue;
    const Mat& g = n.grad;
    Node& na = node(n.a);
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Add:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::Sub:
        accumulate(n.a, g);
        accumulate_expr(n.b, -g);
        break;
      case Op::Mul:
        accumulate_expr(n.a, g.cwiseProduct(node(n.b).val));
        accumulate_expr(n.b, g.cwiseProduct(na.val));
        break;
      case Op::Scale:
        accumulate_expr(n.a, n.c * g);
        break;
      case Op::AddScalar:
        accumulate(n.a, g);
        break;
      case Op::Square:
        accumulate_expr(n.a, 2.0 * g.cwiseProduct(na.val));
        break;
      case Op::Sqrt:
        accumulate_expr(n.a, (0.5 * g.array() / n.val.array()).matrix());
        break;
      case Op::Recip:
        accumulate_expr(n.a, (-g.array() * n.val.array().square()).matrix());
        break;
      case Op::Tanh:
        accumulate_expr(n.a, (g.array() * (1.0 - n.val.array().square())).matrix());
        break;
      case Op::Sin:
        if (n.partner >= 0)
          accumulate_expr(n.a, g.cwiseProduct(node(n.partner).val));
        else
          accumulate_expr(n.a, g.cwiseProduct(na.val.array().cos().matrix()));
        break;
      case Op::Cos:
        if (n.partner >= 0)
          accumulate_expr(n.a, -g.cwiseProduct(node(n.partner).val));
        else
          accumulate_expr(n.a, -g.cwiseProduct(na.val.array().sin().matrix()));
        break;
      case Op::MatmulNT:
        if (na.rg) accumulate_expr(n.a, g * node(n.b).val);
        if (node(n.b).rg) accumulate_expr(n.b, g.transpose() * na.val);
        break;
      case Op::AddRow:
        accumulate(n.a, g);
        accumulate_expr(n.b, g.colwise().sum());
        break;
      case Op::MulRow:
        accumulate_expr(n.a, (g.array().rowwise() * node(n.b).val.row(0).array()).matrix());
        if (node(n.b).rg)
          accumulate_expr(n.b, g.cwiseProduct(na.val).colwise().sum());
        break;
      case Op::MulCol:
        accumulate_expr(n.a, (g.array().colwise() * node(n.b).val.col(0).array()).matrix());
        if (node(n.b).rg)
          accumulate_expr(n.b, g.cwiseProduct(na.val).rowwise().sum());
        break;
      case Op::Transpose:
        accumulate_expr(n.a, g.transpose());
        break;
      case Op::ScaleRows:
        accumulate_expr(n.a, (g.array().colwise() * n.rs.array()).matrix());
        break;
      case Op::AddConst:
        accumulate(n.a, g);
        break;
      case Op::Sum:
        accumulate_expr(n.a, Mat::Constant(na.val.rows(), na.val.cols(), g(0, 0)));
        break;
      case Op::Mean:
        accumulate_expr(n.a, Mat::Constant(na.val.rows(), na.val.cols(),
                                           g(0, 0) / static_cast<double>(na.val.size())));
        break;
      case Op::ColSum:
        accumulate_expr(n.a, g.replicate(na.val.rows(), 1));
        break;
      case Op::ColMean:
        accumulate_expr(n.a, (g / static_cast<double>(na.val.rows())).replicate(na.val.rows(), 1));
        break;
      case Op::RowSum:
        accumulate_expr(n.a, g.replicate(1, na.val.cols()));
        break;
      case Op::BlockColMean: {
        if (na.rg) {
          const int br = n.iarg;
          Mat ga = Mat::Zero(na.val.rows(), na.val.cols());
          for (Eigen::Index bi = 0; bi < g.rows(); ++bi)
            ga.middleRows(bi * br, br).rowwise() = g.row(bi) / static_cast<double>(br);
          accumulate(n.a, ga);
        }
        break;
      }
      case Op::RepeatRows: {
        if (na.rg) {
          const int t = n.iarg;
          Mat ga(na.val.rows(), na.val.cols());
          for (Eigen::Index bi = 0; bi < ga.rows(); ++bi)
            ga.row(bi) = g.middleRows(bi * t, t).colwise().sum();
          accumulate(n.a, ga);
        }
        break;
      }
    }
    // Interior gradients are complete once visited; free them.
    n.grad.resize(0, 0);
    n.seen_grad = false;
  }
}

}  // namespace mfp::ad

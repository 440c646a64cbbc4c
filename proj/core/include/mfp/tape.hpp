#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

namespace mfp::ad {

using Mat = Eigen::MatrixXd;

/// Handle into a Tape. Cheap to copy; valid until Tape::clear().
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode differentiation over a fixed set of matrix primitives.
///
/// Every value is a dense real matrix (scalars are 1x1). The graph is built
/// eagerly: each builder computes its value immediately and records the node.
/// backward() then runs one reverse sweep from a scalar root, accumulating
/// exact gradients into every leaf created with requires_grad=true.
///
/// This is deliberately not a general autodiff for arbitrary user code: the
/// losses in this project compose exclusively from the primitives below
/// (affine maps, tanh/sin/cos/sqrt/square, products, sums and means), which
/// keeps every adjoint rule closed-form and testable against finite
/// differences.
///
/// Deterministic by construction: evaluation and accumulation order is fixed
/// by node creation order. Elementwise transcendentals may run data-parallel;
/// writes are disjoint so the results are bit-identical for any thread count.
class Tape {
 public:
  // ---- leaves ----
  Var leaf(Mat value, bool requires_grad = false);

  // ---- elementwise algebra ----
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);            // Hadamard product
  Var scale(Var a, double c);       // c * a
  Var add_scalar(Var a, double c);  // a + c (entrywise)
  Var square(Var a);
  Var sqrt_(Var a);
  Var recip(Var a);  // 1/a entrywise
  Var tanh_(Var a);
  Var sin_(Var a);
  Var cos_(Var a);
  /// sin and cos of the same argument in one pass; the two nodes share their
  /// values during backward so neither transcendental is recomputed.
  std::pair<Var, Var> sincos(Var a);

  // ---- linear algebra / broadcasting ----
  Var matmul_nt(Var a, Var b);  // A (r x k) * B^T (k x c), B is (c x k)
  Var add_row(Var a, Var v);    // a (r x c) + broadcast of v (1 x c)
  Var mul_row(Var a, Var v);    // a (r x c) .* broadcast of v (1 x c)
  Var mul_col(Var a, Var v);    // a (r x c) .* broadcast of v (r x 1)
  Var transpose(Var a);
  Var scale_rows(Var a, const Eigen::VectorXd& s);  // row i scaled by s(i); s is data
  Var add_const(Var a, Mat c);                      // a + c; c is data

  // ---- reductions / shape ----
  Var sum(Var a);      // 1x1
  Var mean(Var a);     // 1x1
  Var colsum(Var a);   // 1 x c
  Var colmean(Var a);  // 1 x c
  Var rowsum(Var a);   // r x 1
  /// Mean over each consecutive block of `block_rows` rows: (r x c) -> (r/block_rows x c).
  Var block_colmean(Var a, int block_rows);
  /// Repeat each row `times` times consecutively: (r x c) -> (r*times x c).
  Var repeat_rows(Var a, int times);

  // ---- execution ----
  /// Reverse sweep from a 1x1 root. Interior gradients are freed as the sweep
  /// passes them; leaf gradients persist until clear().
  void backward(Var root);

  const Mat& value(Var v) const;
  /// Gradient of the last backward() root w.r.t. leaf v (zeros if untouched).
  Mat grad(Var v) const;
  bool requires_grad(Var v) const { return node(v.id).rg; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Drop the whole graph (handles become invalid).
  void clear() { nodes_.clear(); }

 private:
  enum class Op : std::uint8_t {
    Leaf, Add, Sub, Mul, Scale, AddScalar, Square, Sqrt, Recip, Tanh, Sin, Cos,
    MatmulNT, AddRow, MulRow, MulCol, Transpose, ScaleRows, AddConst,
    Sum, Mean, ColSum, ColMean, RowSum, BlockColMean, RepeatRows,
  };

  struct Node {
    Op op = Op::Leaf;
    int a = -1, b = -1;
    int partner = -1;  // sibling sin/cos node sharing the argument
    int iarg = 0;      // block size / repeat count
    double c = 0;      // scalar constant
    Mat val;
    Mat grad;            // lazily allocated during backward
    Eigen::VectorXd rs;  // constant row scales (ScaleRows)
    bool rg = false;
    bool seen_grad = false;
  };

  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  Var push(Node&& n);
  Var unary(Op op, Var a);
  Var binary(Op op, Var a, Var b);
  void accumulate(int target, const Mat& g);
  template <typename Expr>
  void accumulate_expr(int target, const Expr& g);

  // deque: growing the arena never invalidates value/grad references held by
  // the op builders and the backward sweep.
  std::deque<Node> nodes_;
};

}  // namespace mfp::ad

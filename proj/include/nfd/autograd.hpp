#pragma once

// Reverse-mode differentiation over small dense graphs.
//
// Nodes are evaluated eagerly when created and recorded on a Tape in creation
// order, which is a topological order. Every primitive's vector-Jacobian
// product is itself built from primitives, so `gradients(..., create_graph =
// true)` yields gradient nodes that can be differentiated again. Gradient
// matching relies on this: its loss compares classifier gradients and is
// differentiated with respect to the synthetic inputs.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

namespace nfd::ag {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& s);

struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> d);
  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  /// Value of a one-element tensor.
  double item() const;
  bool operator==(const Tensor&) const = default;
};

enum class Op : std::uint8_t {
  leaf,
  add,
  sub,
  mul,
  mul_scalar,
  scale,
  add_scalar,
  sin,
  cos,
  relu,
  matmul,
  add_bias,
  reduce_axis,
  broadcast_axis,
  sum,
  fill,
  reshape,
  concat,
  slice,
  pad,
  conv2d,
  conv2d_input,
  conv2d_weight,
  avg_pool2,
  unpool2,
  spatial_mean,
  rsqrt,
  softmax,
  cross_entropy,
  gather,
  scatter_add,
};

struct Node {
  Op op = Op::leaf;
  std::vector<std::uint32_t> inputs;
  Tensor value;
  bool requires_grad = false;
  // op attributes; meaning depends on `op`
  double scalar = 0.0;
  std::size_t axis = 0;
  std::size_t offset = 0;
  std::size_t pad = 0;
  bool trans_a = false;
  bool trans_b = false;
  Shape aux_shape;
  std::shared_ptr<const std::vector<std::int64_t>> index;
};

class Tape;

/// Handle to a node on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable input; gradients are reported for these.
  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  const Node& node(std::uint32_t id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  /// While disabled, new nodes never require grad (first-order backward).
  bool grad_enabled() const { return grad_enabled_; }
  void set_grad_enabled(bool on) { grad_enabled_ = on; }

  /// Records an evaluated node; requires_grad is derived from the inputs.
  Var push(Node node);

 private:
  std::deque<Node> nodes_;
  bool grad_enabled_ = true;
};

/// Scoped grad-mode switch.
class GradMode {
 public:
  GradMode(Tape& t, bool enabled) : tape_(t), saved_(t.grad_enabled()) { t.set_grad_enabled(enabled); }
  ~GradMode() { tape_.set_grad_enabled(saved_); }
  GradMode(const GradMode&) = delete;
  GradMode& operator=(const GradMode&) = delete;

 private:
  Tape& tape_;
  bool saved_;
};

// ---- primitives -----------------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// x * s for a one-element node s.
Var mul_scalar(Var x, Var s);
Var scale(Var x, double c);
Var add_scalar(Var x, double c);
Var sin(Var x);
Var cos(Var x);
Var relu(Var x);
/// op(a) * op(b) for rank-2 nodes.
Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);
/// Adds b (length shape[axis]) along `axis`, broadcasting over the others.
Var add_bias(Var x, Var b, std::size_t axis);
/// Sums every axis except `axis`; result has length shape[axis].
Var reduce_axis(Var x, std::size_t axis);
/// Adjoint of reduce_axis: repeats v along every axis except `axis`.
Var broadcast_axis(Var v, const Shape& shape, std::size_t axis);
Var sum(Var x);
/// Broadcasts a one-element node to `shape`.
Var fill(Var s, const Shape& shape);
Var reshape(Var x, const Shape& shape);
/// Concatenation along axis 0.
Var concat(std::span<const Var> parts);
/// Rows [offset, offset+len) along axis 0.
Var slice(Var x, std::size_t offset, std::size_t len);
/// Places x at rows [offset, ...) of a zero tensor with `total` rows.
Var pad_rows(Var x, std::size_t offset, std::size_t total);
/// NCHW convolution with weight [Cout, Cin, k, k], stride 1, zero padding.
Var conv2d(Var x, Var w, std::size_t pad);
Var conv2d_input(Var gy, Var w, std::size_t pad, const Shape& input_shape);
Var conv2d_weight(Var x, Var gy, std::size_t pad, std::size_t kernel);
Var avg_pool2(Var x);
Var unpool2(Var g, const Shape& input_shape);
/// Replaces every HxW plane of an NCHW tensor by its mean (self-adjoint).
Var spatial_mean(Var x);
/// (x + eps)^(-1/2), elementwise.
Var rsqrt(Var x, double eps);
/// Row-wise softmax of a [N, C] node.
Var softmax(Var logits);
/// Mean over rows of -log softmax(logits)[label].
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels);
/// out[i] = index[i] >= 0 ? x[index[i]] : 0, with output `shape`.
Var gather(Var x, std::shared_ptr<const std::vector<std::int64_t>> index, const Shape& shape);
/// Adjoint of gather: out[index[i]] += u[i], output `shape`.
Var scatter_add(Var u, std::shared_ptr<const std::vector<std::int64_t>> index, const Shape& shape);

// ---- composites -----------------------------------------------------------

Var square(Var x);
Var mean(Var x);
/// Mean over axis 0 of a [N, F] node.
Var mean_rows(Var x);
/// Per-sample, per-channel normalization of an NCHW node.
Var instance_norm(Var x, double eps = 1e-5);
/// Cosine similarity of two same-shape nodes, flattened; a zero vector on
/// either side yields the constant 0.
Var cosine_similarity(Var a, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

// ---- differentiation ------------------------------------------------------

/// Gradients of a one-element `root` with respect to `wrt`. Inputs the root
/// does not depend on get zero tensors. With `create_graph`, the returned
/// nodes are differentiable.
std::vector<Var> gradients(Var root, std::span<const Var> wrt, bool create_graph = false);

/// Gradients of `root` for every leaf that requires grad, keyed by node id.
std::unordered_map<std::uint32_t, Tensor> backward(Var root);

/// `build(tape, params)` returns a one-element node. Returns the max over all
/// parameter entries of |analytic - central difference| /
/// max(1, |central difference|).
template <typename F>
double grad_check(F&& build, const std::vector<Tensor>& point, double h = 1e-5);

}  // namespace nfd::ag

#include "nfd/autograd_check.inl"

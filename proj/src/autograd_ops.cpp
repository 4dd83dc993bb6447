#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "autograd_internal.hpp"
#include "nfd/errors.hpp"
#include "nfd/kernels.hpp"

namespace nfd::ag {

namespace {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

Tape& same_tape(std::initializer_list<Var> vars) {
  Tape* t = nullptr;
  for (const Var& v : vars) {
    if (!v.valid()) throw InvalidArgument("operation on an empty handle");
    if (t && &v.tape() != t) throw InvalidArgument("operands live on different tapes");
    t = &v.tape();
  }
  return *t;
}

Node make(Op op, std::initializer_list<Var> inputs) {
  Node n;
  n.op = op;
  for (const Var& v : inputs) n.inputs.push_back(v.id());
  return n;
}

void require_same_shape(Var a, Var b, const char* what) {
  if (a.shape() != b.shape())
    throw InvalidArgument(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                          shape_str(b.shape()));
}

void require_rank(Var x, std::size_t rank, const char* what) {
  if (x.shape().size() != rank)
    throw InvalidArgument(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                          shape_str(x.shape()));
}

template <typename F>
Var unary(Op op, Var x, F f, double scalar = 0.0) {
  Tape& t = same_tape({x});
  Node n = make(op, {x});
  n.scalar = scalar;
  const Tensor& xv = x.value();
  n.value = Tensor(xv.shape);
  for (std::size_t i = 0; i < xv.size(); ++i) n.value.data[i] = f(xv.data[i]);
  return t.push(std::move(n));
}

template <typename F>
Var binary(Op op, Var a, Var b, const char* what, F f) {
  Tape& t = same_tape({a, b});
  require_same_shape(a, b, what);
  Node n = make(op, {a, b});
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  n.value = Tensor(av.shape);
  for (std::size_t i = 0; i < av.size(); ++i) n.value.data[i] = f(av.data[i], bv.data[i]);
  return t.push(std::move(n));
}

// View of a shape as [outer, shape[axis], inner].
struct AxisView {
  std::size_t outer = 1, mid = 1, inner = 1;
};

AxisView axis_view(const Shape& s, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= s[i];
  v.mid = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) v.inner *= s[i];
  return v;
}

std::size_t row_size(const Shape& s) {
  std::size_t r = 1;
  for (std::size_t i = 1; i < s.size(); ++i) r *= s[i];
  return r;
}

kernels::ConvShape conv_shape(const Shape& x, const Shape& w, std::size_t pad) {
  kernels::ConvShape cs;
  cs.batch = x[0];
  cs.in_channels = x[1];
  cs.height = x[2];
  cs.width = x[3];
  cs.out_channels = w[0];
  cs.kernel = w[2];
  cs.pad = pad;
  return cs;
}

}  // namespace

Var add(Var a, Var b) { return binary(Op::add, a, b, "add", [](double x, double y) { return x + y; }); }
Var sub(Var a, Var b) { return binary(Op::sub, a, b, "sub", [](double x, double y) { return x - y; }); }
Var mul(Var a, Var b) { return binary(Op::mul, a, b, "mul", [](double x, double y) { return x * y; }); }

Var mul_scalar(Var x, Var s) {
  Tape& t = same_tape({x, s});
  if (s.value().size() != 1) throw InvalidArgument("mul_scalar: scale must have one element");
  Node n = make(Op::mul_scalar, {x, s});
  const double c = s.value().data[0];
  n.value = Tensor(x.shape());
  const auto& xv = x.value().data;
  for (std::size_t i = 0; i < xv.size(); ++i) n.value.data[i] = xv[i] * c;
  return t.push(std::move(n));
}

Var scale(Var x, double c) { return unary(Op::scale, x, [c](double a) { return a * c; }, c); }

Var add_scalar(Var x, double c) { return unary(Op::add_scalar, x, [c](double a) { return a + c; }, c); }

Var sin(Var x) { return unary(Op::sin, x, [](double a) { return std::sin(a); }); }
Var cos(Var x) { return unary(Op::cos, x, [](double a) { return std::cos(a); }); }
Var relu(Var x) { return unary(Op::relu, x, [](double a) { return a > 0.0 ? a : 0.0; }); }

Var matmul(Var a, Var b, bool trans_a, bool trans_b) {
  Tape& t = same_tape({a, b});
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t M = trans_a ? a.shape()[1] : a.shape()[0];
  const std::size_t K = trans_a ? a.shape()[0] : a.shape()[1];
  const std::size_t Kb = trans_b ? b.shape()[1] : b.shape()[0];
  const std::size_t N = trans_b ? b.shape()[0] : b.shape()[1];
  if (K != Kb)
    throw InvalidArgument("matmul: inner dimensions differ " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  Node n = make(Op::matmul, {a, b});
  n.trans_a = trans_a;
  n.trans_b = trans_b;
  n.value = Tensor(Shape{M, N});
  kernels::gemm(trans_a, trans_b, M, N, K, a.value().data.data(), b.value().data.data(), n.value.data.data());
  return t.push(std::move(n));
}

Var add_bias(Var x, Var b, std::size_t axis) {
  Tape& t = same_tape({x, b});
  if (axis >= x.shape().size()) throw InvalidArgument("add_bias: axis out of range");
  const AxisView v = axis_view(x.shape(), axis);
  if (b.value().size() != v.mid)
    throw InvalidArgument("add_bias: bias length " + std::to_string(b.value().size()) + " != axis size " +
                          std::to_string(v.mid));
  Node n = make(Op::add_bias, {x, b});
  n.axis = axis;
  n.value = x.value();
  const auto& bv = b.value().data;
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t m = 0; m < v.mid; ++m) {
      double* p = n.value.data.data() + (o * v.mid + m) * v.inner;
      for (std::size_t i = 0; i < v.inner; ++i) p[i] += bv[m];
    }
  return t.push(std::move(n));
}

Var reduce_axis(Var x, std::size_t axis) {
  Tape& t = same_tape({x});
  if (axis >= x.shape().size()) throw InvalidArgument("reduce_axis: axis out of range");
  const AxisView v = axis_view(x.shape(), axis);
  Node n = make(Op::reduce_axis, {x});
  n.axis = axis;
  n.value = Tensor(Shape{v.mid});
  const auto& xv = x.value().data;
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t m = 0; m < v.mid; ++m) {
      const double* p = xv.data() + (o * v.mid + m) * v.inner;
      double acc = 0.0;
      for (std::size_t i = 0; i < v.inner; ++i) acc += p[i];
      n.value.data[m] += acc;
    }
  return t.push(std::move(n));
}

Var broadcast_axis(Var x, const Shape& shape, std::size_t axis) {
  Tape& t = same_tape({x});
  if (axis >= shape.size()) throw InvalidArgument("broadcast_axis: axis out of range");
  const AxisView v = axis_view(shape, axis);
  if (x.value().size() != v.mid) throw InvalidArgument("broadcast_axis: length mismatch");
  Node n = make(Op::broadcast_axis, {x});
  n.axis = axis;
  n.aux_shape = shape;
  n.value = Tensor(shape);
  const auto& xv = x.value().data;
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t m = 0; m < v.mid; ++m) {
      double* p = n.value.data.data() + (o * v.mid + m) * v.inner;
      std::fill(p, p + v.inner, xv[m]);
    }
  return t.push(std::move(n));
}

Var sum(Var x) {
  Tape& t = same_tape({x});
  Node n = make(Op::sum, {x});
  double acc = 0.0;
  for (double v : x.value().data) acc += v;
  n.value = Tensor::scalar(acc);
  return t.push(std::move(n));
}

Var fill(Var s, const Shape& shape) {
  Tape& t = same_tape({s});
  if (s.value().size() != 1) throw InvalidArgument("fill: source must have one element");
  Node n = make(Op::fill, {s});
  n.aux_shape = shape;
  n.value = Tensor(shape, s.value().data[0]);
  return t.push(std::move(n));
}

Var reshape(Var x, const Shape& shape) {
  Tape& t = same_tape({x});
  if (shape_size(shape) != x.value().size())
    throw InvalidArgument("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape) + " changes size");
  Node n = make(Op::reshape, {x});
  n.value = Tensor(shape, x.value().data);
  return t.push(std::move(n));
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat: no inputs");
  Tape& t = same_tape({parts[0]});
  Shape out = parts[0].shape();
  if (out.empty()) throw InvalidArgument("concat: inputs must have rank >= 1");
  Node n;
  n.op = Op::concat;
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (&p.tape() != &t) throw InvalidArgument("concat: operands live on different tapes");
    const Shape& s = p.shape();
    if (s.size() != out.size() || !std::equal(s.begin() + 1, s.end(), out.begin() + 1))
      throw InvalidArgument("concat: trailing shapes differ");
    rows += s[0];
    n.inputs.push_back(p.id());
  }
  out[0] = rows;
  n.value = Tensor(out);
  std::size_t pos = 0;
  for (const Var& p : parts) {
    const auto& d = p.value().data;
    std::copy(d.begin(), d.end(), n.value.data.begin() + static_cast<std::ptrdiff_t>(pos));
    pos += d.size();
  }
  return t.push(std::move(n));
}

Var slice(Var x, std::size_t offset, std::size_t len) {
  Tape& t = same_tape({x});
  if (x.shape().empty() || offset + len > x.shape()[0]) throw InvalidArgument("slice: rows out of range");
  Node n = make(Op::slice, {x});
  n.offset = offset;
  Shape s = x.shape();
  s[0] = len;
  const std::size_t rs = row_size(s);
  const auto& d = x.value().data;
  n.value = Tensor(s, std::vector<double>(d.begin() + static_cast<std::ptrdiff_t>(offset * rs),
                                          d.begin() + static_cast<std::ptrdiff_t>((offset + len) * rs)));
  return t.push(std::move(n));
}

Var pad_rows(Var x, std::size_t offset, std::size_t total) {
  Tape& t = same_tape({x});
  if (x.shape().empty() || offset + x.shape()[0] > total) throw InvalidArgument("pad_rows: rows out of range");
  Node n = make(Op::pad, {x});
  n.offset = offset;
  Shape s = x.shape();
  s[0] = total;
  n.value = Tensor(s);
  const auto& d = x.value().data;
  std::copy(d.begin(), d.end(), n.value.data.begin() + static_cast<std::ptrdiff_t>(offset * row_size(s)));
  return t.push(std::move(n));
}

Var conv2d(Var x, Var w, std::size_t pad) {
  Tape& t = same_tape({x, w});
  require_rank(x, 4, "conv2d input");
  require_rank(w, 4, "conv2d weight");
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  if (ws[1] != xs[1] || ws[2] != ws[3]) throw InvalidArgument("conv2d: weight " + shape_str(ws) + " vs input " + shape_str(xs));
  if (xs[2] + 2 * pad < ws[2] || xs[3] + 2 * pad < ws[2]) throw InvalidArgument("conv2d: kernel larger than padded input");
  const auto cs = conv_shape(xs, ws, pad);
  Node n = make(Op::conv2d, {x, w});
  n.pad = pad;
  n.value = Tensor(Shape{cs.batch, cs.out_channels, cs.out_height(), cs.out_width()});
  kernels::conv2d_forward(cs, x.value().data.data(), w.value().data.data(), n.value.data.data());
  return t.push(std::move(n));
}

Var conv2d_input(Var gy, Var w, std::size_t pad, const Shape& input_shape) {
  Tape& t = same_tape({gy, w});
  const auto cs = conv_shape(input_shape, w.shape(), pad);
  if (gy.shape() != Shape{cs.batch, cs.out_channels, cs.out_height(), cs.out_width()})
    throw InvalidArgument("conv2d_input: gradient shape mismatch");
  Node n = make(Op::conv2d_input, {gy, w});
  n.pad = pad;
  n.aux_shape = input_shape;
  n.value = Tensor(input_shape);
  kernels::conv2d_backward_input(cs, gy.value().data.data(), w.value().data.data(), n.value.data.data());
  return t.push(std::move(n));
}

Var conv2d_weight(Var x, Var gy, std::size_t pad, std::size_t kernel) {
  Tape& t = same_tape({x, gy});
  const Shape& xs = x.shape();
  const Shape ws{gy.shape()[1], xs[1], kernel, kernel};
  const auto cs = conv_shape(xs, ws, pad);
  if (gy.shape() != Shape{cs.batch, cs.out_channels, cs.out_height(), cs.out_width()})
    throw InvalidArgument("conv2d_weight: gradient shape mismatch");
  Node n = make(Op::conv2d_weight, {x, gy});
  n.pad = pad;
  n.aux_shape = ws;
  n.value = Tensor(ws);
  kernels::conv2d_backward_weight(cs, x.value().data.data(), gy.value().data.data(), n.value.data.data());
  return t.push(std::move(n));
}

Var avg_pool2(Var x) {
  Tape& t = same_tape({x});
  require_rank(x, 4, "avg_pool2");
  const Shape& s = x.shape();
  if (s[2] < 2 || s[3] < 2) throw InvalidArgument("avg_pool2: spatial size must be >= 2");
  Node n = make(Op::avg_pool2, {x});
  n.value = Tensor(Shape{s[0], s[1], s[2] / 2, s[3] / 2});
  kernels::avg_pool2(s[0] * s[1], s[2], s[3], x.value().data.data(), n.value.data.data());
  return t.push(std::move(n));
}

Var unpool2(Var g, const Shape& input_shape) {
  Tape& t = same_tape({g});
  if (input_shape.size() != 4 ||
      g.shape() != Shape{input_shape[0], input_shape[1], input_shape[2] / 2, input_shape[3] / 2})
    throw InvalidArgument("unpool2: shape mismatch");
  Node n = make(Op::unpool2, {g});
  n.aux_shape = input_shape;
  n.value = Tensor(input_shape);
  kernels::unpool2(input_shape[0] * input_shape[1], input_shape[2], input_shape[3], g.value().data.data(),
                   n.value.data.data());
  return t.push(std::move(n));
}

Var spatial_mean(Var x) {
  Tape& t = same_tape({x});
  require_rank(x, 4, "spatial_mean");
  const Shape& s = x.shape();
  const std::size_t plane = s[2] * s[3];
  Node n = make(Op::spatial_mean, {x});
  n.value = Tensor(s);
  const auto& xv = x.value().data;
  for (std::size_t p = 0; p < s[0] * s[1]; ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += xv[p * plane + i];
    std::fill(n.value.data.begin() + static_cast<std::ptrdiff_t>(p * plane),
              n.value.data.begin() + static_cast<std::ptrdiff_t>((p + 1) * plane), acc / static_cast<double>(plane));
  }
  return t.push(std::move(n));
}

Var rsqrt(Var x, double eps) {
  return unary(Op::rsqrt, x, [eps](double a) { return 1.0 / std::sqrt(a + eps); }, eps);
}

Var softmax(Var z) {
  Tape& t = same_tape({z});
  require_rank(z, 2, "softmax");
  const std::size_t rows = z.shape()[0], cols = z.shape()[1];
  Node n = make(Op::softmax, {z});
  n.value = Tensor(z.shape());
  const auto& zv = z.value().data;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = zv.data() + r * cols;
    double* out = n.value.data.data() + r * cols;
    const double mx = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += out[c] = std::exp(in[c] - mx);
    for (std::size_t c = 0; c < cols; ++c) out[c] /= total;
  }
  return t.push(std::move(n));
}

Var softmax_cross_entropy(Var z, std::span<const std::size_t> labels) {
  Tape& t = same_tape({z});
  require_rank(z, 2, "softmax_cross_entropy");
  const std::size_t rows = z.shape()[0], cols = z.shape()[1];
  if (labels.size() != rows) throw InvalidArgument("softmax_cross_entropy: label count != rows");
  auto idx = std::make_shared<std::vector<std::int64_t>>(rows);
  const auto& zv = z.value().data;
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] >= cols) throw InvalidArgument("softmax_cross_entropy: label out of range");
    (*idx)[r] = static_cast<std::int64_t>(labels[r]);
    const double* in = zv.data() + r * cols;
    const double mx = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(in[c] - mx);
    loss += mx + std::log(total) - in[labels[r]];
  }
  Node n = make(Op::cross_entropy, {z});
  n.index = std::move(idx);
  n.value = Tensor::scalar(loss / static_cast<double>(rows));
  return t.push(std::move(n));
}

Var gather(Var x, std::shared_ptr<const std::vector<std::int64_t>> index, const Shape& shape) {
  Tape& t = same_tape({x});
  if (!index || index->size() != shape_size(shape)) throw InvalidArgument("gather: index size != output size");
  Node n = make(Op::gather, {x});
  n.value = Tensor(shape);
  const auto& xv = x.value().data;
  for (std::size_t i = 0; i < index->size(); ++i) {
    const auto j = (*index)[i];
    if (j >= static_cast<std::int64_t>(xv.size())) throw InvalidArgument("gather: index out of range");
    n.value.data[i] = j >= 0 ? xv[static_cast<std::size_t>(j)] : 0.0;
  }
  n.aux_shape = x.shape();
  n.index = std::move(index);
  return t.push(std::move(n));
}

Var scatter_add(Var u, std::shared_ptr<const std::vector<std::int64_t>> index, const Shape& shape) {
  Tape& t = same_tape({u});
  if (!index || index->size() != u.value().size()) throw InvalidArgument("scatter_add: index size != input size");
  Node n = make(Op::scatter_add, {u});
  n.value = Tensor(shape);
  const auto& uv = u.value().data;
  for (std::size_t i = 0; i < index->size(); ++i) {
    const auto j = (*index)[i];
    if (j >= static_cast<std::int64_t>(n.value.size())) throw InvalidArgument("scatter_add: index out of range");
    if (j >= 0) n.value.data[static_cast<std::size_t>(j)] += uv[i];
  }
  n.aux_shape = u.shape();
  n.index = std::move(index);
  return t.push(std::move(n));
}

// ---- composites -----------------------------------------------------------

Var square(Var x) { return mul(x, x); }

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var mean_rows(Var x) {
  require_rank(x, 2, "mean_rows");
  return scale(reduce_axis(x, 1), 1.0 / static_cast<double>(x.shape()[0]));
}

Var instance_norm(Var x, double eps) {
  Var centered = sub(x, spatial_mean(x));
  Var var = spatial_mean(mul(centered, centered));
  return mul(centered, rsqrt(var, eps));
}

Var cosine_similarity(Var a, Var b) {
  Tape& t = same_tape({a, b});
  require_same_shape(a, b, "cosine_similarity");
  double na = 0.0, nb = 0.0;
  for (double v : a.value().data) na += v * v;
  for (double v : b.value().data) nb += v * v;
  if (na == 0.0 || nb == 0.0) return t.constant(Tensor::scalar(0.0));
  Var dot = sum(mul(a, b));
  return mul(dot, rsqrt(mul(sum(mul(a, a)), sum(mul(b, b))), 0.0));
}

// ---- vector-Jacobian products ---------------------------------------------

namespace detail {

std::vector<Var> vjp(Tape& tape, std::uint32_t id, Var g) {
  const Node& node = tape.node(id);
  std::vector<Var> out(node.inputs.size());
  auto in = [&](std::size_t i) { return Var(&tape, node.inputs[i]); };
  auto wants = [&](std::size_t i) { return tape.node(node.inputs[i]).requires_grad; };
  const Var self(&tape, id);

  switch (node.op) {
    case Op::leaf:
      break;
    case Op::add:
      if (wants(0)) out[0] = g;
      if (wants(1)) out[1] = g;
      break;
    case Op::sub:
      if (wants(0)) out[0] = g;
      if (wants(1)) out[1] = scale(g, -1.0);
      break;
    case Op::mul:
      if (wants(0)) out[0] = mul(g, in(1));
      if (wants(1)) out[1] = mul(g, in(0));
      break;
    case Op::mul_scalar:
      if (wants(0)) out[0] = mul_scalar(g, in(1));
      if (wants(1)) out[1] = reshape(sum(mul(g, in(0))), in(1).shape());
      break;
    case Op::scale:
      if (wants(0)) out[0] = scale(g, node.scalar);
      break;
    case Op::add_scalar:
      if (wants(0)) out[0] = g;
      break;
    case Op::sin:
      if (wants(0)) out[0] = mul(g, cos(in(0)));
      break;
    case Op::cos:
      if (wants(0)) out[0] = scale(mul(g, sin(in(0))), -1.0);
      break;
    case Op::relu: {
      if (!wants(0)) break;
      Tensor step(in(0).shape());
      const auto& xv = in(0).value().data;
      for (std::size_t i = 0; i < xv.size(); ++i) step.data[i] = xv[i] > 0.0 ? 1.0 : 0.0;
      out[0] = mul(g, tape.constant(std::move(step)));
      break;
    }
    case Op::matmul: {
      const bool ta = node.trans_a, tb = node.trans_b;
      if (wants(0)) out[0] = ta ? matmul(in(1), g, tb, true) : matmul(g, in(1), false, !tb);
      if (wants(1)) out[1] = tb ? matmul(g, in(0), true, ta) : matmul(in(0), g, !ta, false);
      break;
    }
    case Op::add_bias:
      if (wants(0)) out[0] = g;
      if (wants(1)) out[1] = reshape(reduce_axis(g, node.axis), in(1).shape());
      break;
    case Op::reduce_axis:
      if (wants(0)) out[0] = broadcast_axis(g, in(0).shape(), node.axis);
      break;
    case Op::broadcast_axis:
      if (wants(0)) out[0] = reshape(reduce_axis(g, node.axis), in(0).shape());
      break;
    case Op::sum:
      if (wants(0)) out[0] = fill(g, in(0).shape());
      break;
    case Op::fill:
      if (wants(0)) out[0] = reshape(sum(g), in(0).shape());
      break;
    case Op::reshape:
      if (wants(0)) out[0] = reshape(g, in(0).shape());
      break;
    case Op::concat: {
      std::size_t offset = 0;
      for (std::size_t i = 0; i < node.inputs.size(); ++i) {
        const std::size_t rows = in(i).shape()[0];
        if (wants(i)) out[i] = slice(g, offset, rows);
        offset += rows;
      }
      break;
    }
    case Op::slice:
      if (wants(0)) out[0] = pad_rows(g, node.offset, in(0).shape()[0]);
      break;
    case Op::pad:
      if (wants(0)) out[0] = slice(g, node.offset, in(0).shape()[0]);
      break;
    case Op::conv2d: {
      const Var x = in(0), w = in(1);
      if (wants(0)) out[0] = conv2d_input(g, w, node.pad, x.shape());
      if (wants(1)) out[1] = conv2d_weight(x, g, node.pad, w.shape()[2]);
      break;
    }
    case Op::conv2d_input: {
      // value = dPhi/dx for Phi(x, w, gy) = <conv2d(x, w), gy>
      const Var gy = in(0), w = in(1);
      if (wants(0)) out[0] = conv2d(g, w, node.pad);
      if (wants(1)) out[1] = conv2d_weight(g, gy, node.pad, w.shape()[2]);
      break;
    }
    case Op::conv2d_weight: {
      const Var x = in(0), gy = in(1);
      if (wants(0)) out[0] = conv2d_input(gy, g, node.pad, x.shape());
      if (wants(1)) out[1] = conv2d(x, g, node.pad);
      break;
    }
    case Op::avg_pool2:
      if (wants(0)) out[0] = unpool2(g, in(0).shape());
      break;
    case Op::unpool2:
      if (wants(0)) out[0] = avg_pool2(g);
      break;
    case Op::spatial_mean:
      if (wants(0)) out[0] = spatial_mean(g);
      break;
    case Op::rsqrt:
      if (wants(0)) out[0] = mul(g, scale(mul(self, mul(self, self)), -0.5));
      break;
    case Op::softmax: {
      if (!wants(0)) break;
      Var gs = mul(g, self);
      out[0] = sub(gs, mul(self, broadcast_axis(reduce_axis(gs, 0), self.shape(), 0)));
      break;
    }
    case Op::cross_entropy: {
      if (!wants(0)) break;
      const Var z = in(0);
      const std::size_t rows = z.shape()[0], cols = z.shape()[1];
      Tensor onehot(z.shape());
      for (std::size_t r = 0; r < rows; ++r) onehot.data[r * cols + static_cast<std::size_t>((*node.index)[r])] = 1.0;
      Var diff = scale(sub(softmax(z), tape.constant(std::move(onehot))), 1.0 / static_cast<double>(rows));
      out[0] = mul_scalar(diff, g);
      break;
    }
    case Op::gather:
      if (wants(0)) out[0] = scatter_add(g, node.index, node.aux_shape);
      break;
    case Op::scatter_add:
      if (wants(0)) out[0] = gather(g, node.index, node.aux_shape);
      break;
  }
  return out;
}

}  // namespace detail

}  // namespace nfd::ag

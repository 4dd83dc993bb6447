#include "nfd/autograd.hpp"

#include <string>

#include "autograd_internal.hpp"
#include "nfd/errors.hpp"

namespace nfd::ag {

std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)), data(shape_size(shape), fill) {}

Tensor::Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != shape_size(shape))
    throw InvalidArgument("tensor data size " + std::to_string(data.size()) + " does not match shape size " +
                          std::to_string(shape_size(shape)));
}

double Tensor::item() const {
  if (data.size() != 1) throw InvalidArgument("item() needs a one-element tensor, got " + std::to_string(data.size()));
  return data[0];
}

const Tensor& Var::value() const { return tape_->node(id_).value; }
bool Var::requires_grad() const { return tape_->node(id_).requires_grad; }

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::leaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::push(Node node) {
  bool rg = false;
  if (grad_enabled_)
    for (auto in : node.inputs) rg = rg || nodes_[in].requires_grad;
  node.requires_grad = rg;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

std::vector<Var> gradients(Var root, std::span<const Var> wrt, bool create_graph) {
  if (!root.valid()) throw InvalidArgument("gradients of an empty handle");
  if (root.value().size() != 1)
    throw InvalidArgument("backward needs a scalar root, got " + std::to_string(root.value().size()) + " elements");
  Tape& tape = root.tape();
  for (const Var& w : wrt)
    if (&w.tape() != &tape) throw InvalidArgument("gradient target lives on another tape");

  GradMode mode(tape, create_graph);
  std::vector<Var> grad(root.id() + 1);
  grad[root.id()] = tape.constant(Tensor(root.shape(), 1.0));

  for (std::uint32_t id = root.id() + 1; id-- > 0;) {
    if (!grad[id].valid()) continue;
    const Node& node = tape.node(id);
    if (node.op == Op::leaf || !node.requires_grad) continue;
    std::vector<Var> parts = detail::vjp(tape, id, grad[id]);
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      if (!parts[i].valid()) continue;
      const std::uint32_t in = node.inputs[i];
      grad[in] = grad[in].valid() ? add(grad[in], parts[i]) : parts[i];
    }
  }

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (w.id() <= root.id() && grad[w.id()].valid())
      out.push_back(grad[w.id()]);
    else
      out.push_back(tape.constant(Tensor(w.shape(), 0.0)));
  }
  return out;
}

std::unordered_map<std::uint32_t, Tensor> backward(Var root) {
  Tape& tape = root.tape();
  std::vector<Var> leaves;
  for (std::uint32_t id = 0; id <= root.id(); ++id) {
    const Node& n = tape.node(id);
    if (n.op == Op::leaf && n.requires_grad) leaves.emplace_back(&tape, id);
  }
  auto grads = gradients(root, leaves, false);
  std::unordered_map<std::uint32_t, Tensor> out;
  for (std::size_t i = 0; i < leaves.size(); ++i) out.emplace(leaves[i].id(), grads[i].value());
  return out;
}

}  // namespace nfd::ag

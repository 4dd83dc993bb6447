#pragma once

#include <vector>

#include "nfd/autograd.hpp"

namespace nfd::ag::detail {

/// Contribution of node `id` to each of its inputs' gradients, given the
/// gradient `g` flowing into it. Entries are empty for inputs that do not
/// require grad.
std::vector<Var> vjp(Tape& tape, std::uint32_t id, Var g);

}  // namespace nfd::ag::detail

#pragma once

#include <functional>
#include <vector>

#include "mxmclr/tensor.hpp"

namespace mxmclr::ad {

/// Scalar objective over a list of parameter tensors. When `grads` is
/// non-null the callee must fill it with dL/dparam for every tensor, in
/// parameter order.
using Objective = std::function<double(const std::vector<Tensor>&, std::vector<Tensor>*)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_tensor = 0;
    std::size_t worst_entry = 0;
    std::size_t coordinates = 0;
    bool pass = false;
};

/// Central finite differences (f(p+h) - f(p-h)) / 2h per coordinate against
/// the analytic gradient. Relative error uses denominator
/// max(1, |analytic|, |numeric|) so near-zero gradients are compared
/// absolutely.
GradCheckReport finite_diff_check(const Objective& f, std::vector<Tensor> params, double h,
                                  double tol);

}  // namespace mxmclr::ad

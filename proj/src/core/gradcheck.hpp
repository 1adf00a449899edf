#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "params.hpp"

namespace gvpnn {

struct GradCheckResult {
  double max_rel_err = 0.0;
  int coords_checked = 0;
  std::string worst_coord;  // "tensor[index]" of the largest error
};

// Central-difference verification of reverse-mode gradients.
//
// `eval` recomputes the scalar objective from the (possibly perturbed) store;
// `analytic` holds dL/dp from backward(). For each group of parameter tensors
// (grouped by `class_of` applied to the tensor name; identity by default) a
// seeded random subset of at least `coords_per_class` coordinates is probed
// with (f(p+h) - f(p-h)) / 2h and compared as |a-b| / max(|a|,|b|,1e-8).
// Non-finite objective values abort with the offending coordinate.
GradCheckResult finite_diff_check(
    ParamStore& params, const std::function<double()>& eval, const Grads& analytic, double h,
    int coords_per_class, std::uint64_t seed,
    const std::function<std::string(const std::string&)>& class_of = {});

}  // namespace gvpnn

#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "roadbeh/param_store.hpp"

namespace roadbeh {

/// Evaluates a scalar loss at `params`. When `grads` is non-null it must also be
/// filled (same names and shapes as `params`) with the reverse-mode gradient.
using LossFunction = std::function<double(const ParamStore& params, ParamStore* grads)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t entries_checked = 0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Compares every parameter entry's reverse-mode gradient with the central
/// difference (f(θ+h) − f(θ−h)) / 2h. Relative error is
/// |a − n| / max(|a|, |n|, 1e-6). Entries are spread over OpenMP threads, each
/// with a private parameter copy.
GradCheckReport grad_check(const LossFunction& f, const ParamStore& params, double h, double tol);

}  // namespace roadbeh

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace obell {

struct NelderMeadOptions {
  double initial_step = 0.05;
  double f_tolerance = 1e-15;  // spread of simplex values
  double x_tolerance = 1e-12;  // simplex diameter
  std::size_t max_iterations = 20000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
};

/// Derivative-free maximization by the Nelder-Mead simplex method with the
/// standard coefficients (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Deterministic for a given start point.
NelderMeadResult nelder_mead_maximize(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> start,
                                      const NelderMeadOptions& options = {});

}  // namespace obell

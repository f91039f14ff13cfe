#include "obell/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace obell {

NelderMeadResult nelder_mead_maximize(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> start,
                                      const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  // Minimize -f internally.
  auto g = [&](const std::vector<double>& x) { return -f(x); };

  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += options.initial_step;
  std::vector<double> values(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) values[i] = g(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);
  std::size_t iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[dim - (dim > 0 ? 1 : 0)];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i)
      for (std::size_t k = 0; k < dim; ++k)
        diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
    if (values[worst] - values[best] <= options.f_tolerance && diameter <= options.x_tolerance) break;
    if (diameter <= options.x_tolerance * 1e-3) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);

    auto along = [&](double t, std::vector<double>& out) {
      for (std::size_t k = 0; k < dim; ++k)
        out[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
      return g(out);
    };

    const double reflected = along(-1.0, trial);
    if (reflected < values[best]) {
      const double expanded = along(-2.0, trial2);
      if (expanded < reflected) {
        simplex[worst] = trial2;
        values[worst] = expanded;
      } else {
        simplex[worst] = trial;
        values[worst] = reflected;
      }
      continue;
    }
    if (reflected < values[second_worst]) {
      simplex[worst] = trial;
      values[worst] = reflected;
      continue;
    }
    const bool outside = reflected < values[worst];
    const double contracted = along(outside ? -0.5 : 0.5, trial2);
    if (contracted < (outside ? reflected : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = contracted;
      continue;
    }
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < dim; ++k)
        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      values[i] = g(simplex[i]);
    }
  }

  const auto best =
      static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], -values[best], iter};
}

}  // namespace obell

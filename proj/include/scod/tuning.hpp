#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace scod {

struct SircParams {
  double a;
  double b;
};

// Heuristic from ID statistics of s2: a = mean - 3 stddev, b = 1 / stddev
// (unbiased sample standard deviation).
SircParams sirc_plugin_params(std::span<const double> s2_id_values);

// 41 x 41 Cartesian grid around the plugin point: 40 evenly spaced values
// per axis plus the heuristic value itself.
std::vector<SircParams> sirc_grid(std::span<const double> s2_id_values);

// 1600 evenly spaced angles over [0, 2pi] plus {pi/2, pi, 3pi/2}.
std::vector<double> linear_angle_grid();

template <typename Params>
struct TunedResult {
  Params params;
  double objective;
  std::size_t index;
  std::vector<double> all_objectives;  // per-candidate audit table
};

// Exhaustive argmin of the objective over the candidate list; ties resolve
// to the first candidate. The result is test-set-optimized, an upper bound
// rather than a deployable setting.
template <typename Params, typename Objective>
TunedResult<Params> tune_on_eval(const std::vector<Params>& candidates,
                                 Objective&& objective) {
  if (candidates.empty()) throw std::invalid_argument("no tuning candidates");
  TunedResult<Params> best;
  best.all_objectives.reserve(candidates.size());
  best.index = 0;
  best.objective = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double value = objective(candidates[i]);
    best.all_objectives.push_back(value);
    if (value < best.objective) {
      best.objective = value;
      best.index = i;
    }
  }
  best.params = candidates[best.index];
  return best;
}

}  // namespace scod

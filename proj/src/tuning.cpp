#include "scod/tuning.hpp"

#include <cmath>
#include <numbers>

#include "scod/errors.hpp"

namespace scod {

namespace {

struct MeanStd {
  double mean;
  double stddev;
};

MeanStd id_statistics(std::span<const double> values) {
  if (values.size() < 2) {
    throw DataError("need at least two ID values for s2 statistics");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  if (!(stddev > 0.0)) throw DataError("degenerate s2 score: zero standard deviation");
  return MeanStd{mean, stddev};
}

std::vector<double> axis_with_heuristic(double lo, double hi, double heuristic) {
  constexpr int kEven = 40;
  std::vector<double> axis;
  axis.reserve(kEven + 1);
  for (int i = 0; i < kEven; ++i) {
    axis.push_back(lo + (hi - lo) * static_cast<double>(i) / (kEven - 1));
  }
  axis.push_back(heuristic);
  return axis;
}

}  // namespace

SircParams sirc_plugin_params(std::span<const double> s2_id_values) {
  const MeanStd stats = id_statistics(s2_id_values);
  return SircParams{stats.mean - 3.0 * stats.stddev, 1.0 / stats.stddev};
}

std::vector<SircParams> sirc_grid(std::span<const double> s2_id_values) {
  const MeanStd stats = id_statistics(s2_id_values);
  const SircParams plug{stats.mean - 3.0 * stats.stddev, 1.0 / stats.stddev};
  const auto a_axis =
      axis_with_heuristic(plug.a - 3.0 * stats.stddev, plug.a + 3.0 * stats.stddev, plug.a);
  const auto b_axis = axis_with_heuristic(plug.b / 10.0, 10.0 * plug.b, plug.b);
  std::vector<SircParams> grid;
  grid.reserve(a_axis.size() * b_axis.size());
  for (double a : a_axis) {
    for (double b : b_axis) grid.push_back(SircParams{a, b});
  }
  return grid;
}

std::vector<double> linear_angle_grid() {
  constexpr int kEven = 1600;
  std::vector<double> angles;
  angles.reserve(kEven + 3);
  for (int i = 0; i < kEven; ++i) {
    angles.push_back(2.0 * std::numbers::pi * static_cast<double>(i) / (kEven - 1));
  }
  angles.push_back(std::numbers::pi / 2.0);
  angles.push_back(std::numbers::pi);
  angles.push_back(3.0 * std::numbers::pi / 2.0);
  return angles;
}

}  // namespace scod

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scod/metrics.hpp"
#include "scod/poscod.hpp"
#include "scod/table.hpp"

namespace scod {

struct SynthArgs {
  std::string world_path;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  std::size_t n_mixture = 0;
  double pi_o_tr = 0.5;
  std::uint64_t seed = 0;
  std::string out_path;  // CSV file
};

// Samples a synthetic world and writes a SampleTable CSV with feature,
// posterior, r_true, g_true and loss columns.
void cmd_synth(const SynthArgs& args);

struct FitArgs {
  std::string table_path;
  std::vector<std::string> feature_cols;  // empty = every "feat_*" column
  bool standard_sigmoid = false;
  FitConfig fit;
  std::string out_path;  // params JSON
};

nlohmann::json cmd_fit(const FitArgs& args);

struct ScoreRecipe {
  enum class Type { kSingle, kLinear, kSirc };
  Type type = Type::kSingle;
  std::string column;          // single
  std::string r_col, g_col;    // linear
  std::string s1_col, s2_col;  // sirc (native convention: higher = better)
  bool sirc_tuned = false;
  bool s1_negate = false;
  bool s2_negate = false;
};

struct EvalConfig {
  double alpha = 0.5;
  double tpr_min = 0.9;
  ScoreRecipe recipe;
  std::vector<std::string> negate_columns;  // higher-is-better columns, flipped on load
  std::string loss_column = "loss";
  std::uint64_t seed = 0;
  int uniform_grid_points = 0;  // 0 = all achievable empirical TPR levels
};

EvalConfig parse_eval_config(const nlohmann::json& j);

struct MetricSummary {
  double ausrt;
  double aurc;
  std::optional<double> auroc;  // empty when the table has no OOD rows
  double scod_risk_at_tpr_min;
};

// Scores the table per the recipe and computes all summary metrics.
MetricSummary evaluate_table(const SampleTable& table, const EvalConfig& config,
                             std::vector<CurvePoint>* curve_out = nullptr,
                             nlohmann::json* tuning_audit = nullptr);

// Writes summary.json and curve.csv (plus tuning.json for tuned recipes)
// into out_dir.
void cmd_eval(const std::string& table_path, const EvalConfig& config,
              const std::string& out_dir);

struct SweepArgs {
  std::string table_path;
  std::string axis;  // "alpha" or "pi_o_tr"
  std::vector<double> values;
  nlohmann::json base_config;
  std::string out_path;  // long-form CSV
};

void cmd_sweep(const SweepArgs& args);

}  // namespace scod

#include "scod/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "scod/errors.hpp"
#include "scod/rng.hpp"
#include "scod/selectors.hpp"
#include "scod/tuning.hpp"
#include "scod/world.hpp"

namespace scod {

namespace {

std::string row_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%06zu", prefix, i);
  return buf;
}

void append_oracle_row(SampleTable& table, const SyntheticWorld& world,
                       std::string id, Split split, int label,
                       const Eigen::VectorXd& x) {
  SampleTable::Row row;
  row.id = std::move(id);
  row.split = split;
  row.label = label;
  const Eigen::VectorXd post = posterior(world, x);
  const BayesDecision decision = bayes_classify(world, x);
  row.values.reserve(static_cast<std::size_t>(x.size() + post.size()) + 3);
  for (Eigen::Index j = 0; j < x.size(); ++j) row.values.push_back(x[j]);
  for (Eigen::Index k = 0; k < post.size(); ++k) row.values.push_back(post[k]);
  row.values.push_back(decision.conditional_risk);
  row.values.push_back(likelihood_ratio(world, x));
  if (split == Split::kId) {
    row.values.push_back(world.loss()(label, decision.label));
  } else {
    row.values.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  table.rows.push_back(std::move(row));
}

double cell(const SampleTable& table, const SampleTable::Row& row, std::size_t col,
            std::size_t row_index) {
  const double v = row.values[col];
  if (std::isnan(v)) {
    throw DataError("NaN in column '" + table.columns[col] + "' at row " +
                    std::to_string(row_index) + " (" + row.id + ")");
  }
  if (!std::isfinite(v)) {
    throw DataError("non-finite value in column '" + table.columns[col] + "' at row " +
                    std::to_string(row_index) + " (" + row.id + ")");
  }
  return v;
}

std::vector<std::string> feature_columns(const SampleTable& table,
                                         const std::vector<std::string>& requested) {
  if (!requested.empty()) return requested;
  std::vector<std::string> cols;
  for (const auto& name : table.columns) {
    if (name.rfind("feat_", 0) == 0) cols.push_back(name);
  }
  if (cols.empty()) throw DataError("no feature columns (feat_*) found");
  return cols;
}

ScoreRecipe parse_recipe(const nlohmann::json& j) {
  if (!j.contains("type")) throw ConfigError("recipe needs a 'type'");
  const std::string type = j["type"].get<std::string>();
  ScoreRecipe recipe;
  if (type == "single") {
    recipe.type = ScoreRecipe::Type::kSingle;
    recipe.column = j.at("column").get<std::string>();
  } else if (type == "linear") {
    recipe.type = ScoreRecipe::Type::kLinear;
    recipe.r_col = j.at("r_col").get<std::string>();
    recipe.g_col = j.at("g_col").get<std::string>();
  } else if (type == "sirc") {
    recipe.type = ScoreRecipe::Type::kSirc;
    recipe.s1_col = j.at("s1_col").get<std::string>();
    recipe.s2_col = j.at("s2_col").get<std::string>();
    recipe.sirc_tuned = j.value("mode", "plugin") == "tuned";
    recipe.s1_negate = j.value("s1_negate", false);
    recipe.s2_negate = j.value("s2_negate", false);
  } else {
    throw ConfigError("unknown recipe type '" + type + "'");
  }
  return recipe;
}

nlohmann::json recipe_to_json(const ScoreRecipe& r) {
  nlohmann::json j;
  switch (r.type) {
    case ScoreRecipe::Type::kSingle:
      j["type"] = "single";
      j["column"] = r.column;
      break;
    case ScoreRecipe::Type::kLinear:
      j["type"] = "linear";
      j["r_col"] = r.r_col;
      j["g_col"] = r.g_col;
      break;
    case ScoreRecipe::Type::kSirc:
      j["type"] = "sirc";
      j["s1_col"] = r.s1_col;
      j["s2_col"] = r.s2_col;
      j["mode"] = r.sirc_tuned ? "tuned" : "plugin";
      j["s1_negate"] = r.s1_negate;
      j["s2_negate"] = r.s2_negate;
      break;
  }
  return j;
}

struct EvalRow {
  SampleOrigin origin;
  double loss;
  std::size_t table_index;
};

// Origins/losses fixed per table; only scores change across recipes.
std::vector<EvalRow> eval_rows(const SampleTable& table, const EvalConfig& config) {
  std::vector<EvalRow> rows;
  std::size_t loss_col = 0;
  const bool need_loss = table.has_column(config.loss_column);
  if (need_loss) loss_col = table.column_index(config.loss_column);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.split == Split::kUnlabeled) continue;
    EvalRow er{row.split == Split::kId ? SampleOrigin::kId : SampleOrigin::kOod, 0.0, i};
    if (er.origin == SampleOrigin::kId) {
      if (!need_loss) {
        throw DataError("loss column '" + config.loss_column + "' required for ID rows");
      }
      er.loss = cell(table, row, loss_col, i);
    }
    rows.push_back(er);
  }
  if (rows.empty()) throw DataError("table has no ID or OOD rows to evaluate");
  return rows;
}

bool negated(const EvalConfig& config, const std::string& col) {
  return std::find(config.negate_columns.begin(), config.negate_columns.end(), col) !=
         config.negate_columns.end();
}

double loaded_value(const SampleTable& table, const EvalConfig& config,
                    std::size_t col, std::size_t row_index) {
  const double v = cell(table, table.rows[row_index], col, row_index);
  return negated(config, table.columns[col]) ? -v : v;
}

MetricSummary compute_metrics(std::vector<ScoredSample>& samples, const EvalConfig& config,
                              std::vector<CurvePoint>* curve_out) {
  MetricSummary out{};
  const bool has_ood =
      std::any_of(samples.begin(), samples.end(),
                  [](const ScoredSample& s) { return s.origin == SampleOrigin::kOod; });
  if (config.uniform_grid_points > 0) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(config.uniform_grid_points));
    for (int i = 1; i <= config.uniform_grid_points; ++i) {
      grid.push_back(static_cast<double>(i) / config.uniform_grid_points);
    }
    out.ausrt = ausrt(samples, config.alpha, grid);
    if (curve_out) {
      curve_out->clear();
      for (double t : grid) {
        curve_out->push_back(CurvePoint{t, scod_risk_at_tpr(samples, config.alpha, t)});
      }
    }
  } else {
    auto curve = scod_risk_curve(samples, config.alpha);
    out.ausrt = ausrt_from_curve(curve);
    if (curve_out) *curve_out = std::move(curve);
  }
  out.aurc = aurc(samples);
  if (has_ood) out.auroc = auroc(samples);
  out.scod_risk_at_tpr_min = scod_risk_at_tpr(samples, config.alpha, config.tpr_min);
  return out;
}

}  // namespace

void cmd_synth(const SynthArgs& args) {
  const SyntheticWorld world = SyntheticWorld::load(args.world_path);
  SampleTable table;
  for (int j = 0; j < world.dim(); ++j) table.columns.push_back("feat_" + std::to_string(j));
  for (int k = 0; k < world.num_classes(); ++k) {
    table.columns.push_back("post_" + std::to_string(k));
  }
  table.columns.push_back("r_true");
  table.columns.push_back("g_true");
  table.columns.push_back("loss");

  const auto id_samples = sample_id(world, args.n_id, split_seed(args.seed, 1));
  for (std::size_t i = 0; i < id_samples.size(); ++i) {
    append_oracle_row(table, world, row_id("id", i), Split::kId, id_samples[i].label,
                      id_samples[i].features);
  }
  const auto ood_samples = sample_mixture(world, args.n_ood, 1.0, split_seed(args.seed, 2));
  for (std::size_t i = 0; i < ood_samples.size(); ++i) {
    append_oracle_row(table, world, row_id("ood", i), Split::kOod, kOodLabel, ood_samples[i]);
  }
  const auto mixture =
      sample_mixture(world, args.n_mixture, args.pi_o_tr, split_seed(args.seed, 3));
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    append_oracle_row(table, world, row_id("unl", i), Split::kUnlabeled, kOodLabel, mixture[i]);
  }
  write_table_csv(table, args.out_path);
}

nlohmann::json cmd_fit(const FitArgs& args) {
  const SampleTable table = read_table_csv(args.table_path);
  if (table.count(Split::kId) == 0) throw DataError("table has no ID rows");
  if (table.count(Split::kUnlabeled) == 0) throw DataError("table has no UNLABELED rows");

  const auto cols = feature_columns(table, args.feature_cols);
  std::vector<std::size_t> col_idx;
  for (const auto& name : cols) col_idx.push_back(table.column_index(name));

  MixtureDataset data;
  const std::size_t n_rows = table.count(Split::kId) + table.count(Split::kUnlabeled);
  data.features.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(cols.size()));
  data.is_id.reserve(n_rows);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.split == Split::kOod) continue;
    for (std::size_t c = 0; c < col_idx.size(); ++c) {
      data.features(r, static_cast<Eigen::Index>(c)) = cell(table, row, col_idx[c], i);
    }
    data.is_id.push_back(row.split == Split::kId ? 1 : 0);
    ++r;
  }

  FitConfig fit = args.fit;
  fit.fix_a_at_zero = args.standard_sigmoid;
  const CsmParams params = fit_csm(data, fit);
  const double pi_u = data.pi_u();
  const PriorEstimate prior = recover_prior(params.a, pi_u);

  nlohmann::json out;
  out["theta"] = std::vector<double>(params.theta.data(), params.theta.data() + params.theta.size());
  out["a"] = params.a;
  out["pi_u"] = pi_u;
  out["pi_o_tr_hat"] = prior.pi_o_tr;
  out["clamped"] = prior.clamped;
  if (!args.out_path.empty()) {
    std::ofstream file(args.out_path);
    if (!file) throw DataError("cannot write params: " + args.out_path);
    file << out.dump(2) << '\n';
  }
  return out;
}

EvalConfig parse_eval_config(const nlohmann::json& j) {
  EvalConfig config;
  try {
    config.alpha = j.value("alpha", 0.5);
    config.tpr_min = j.value("tpr_min", 0.9);
    if (!j.contains("recipe")) throw ConfigError("eval config needs a 'recipe'");
    config.recipe = parse_recipe(j["recipe"]);
    if (j.contains("negate_columns")) {
      config.negate_columns = j["negate_columns"].get<std::vector<std::string>>();
    }
    config.loss_column = j.value("loss_column", std::string("loss"));
    config.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("grid")) {
      const auto& grid = j["grid"];
      const std::string type = grid.value("type", "achievable");
      if (type == "uniform") {
        config.uniform_grid_points = grid.value("points", 101);
        if (config.uniform_grid_points < 1) throw ConfigError("grid points must be positive");
      } else if (type != "achievable") {
        throw ConfigError("unknown grid type '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad eval config: ") + e.what());
  }
  if (config.alpha < 0.0 || config.alpha > 1.0) throw ConfigError("alpha must lie in [0, 1]");
  if (!(config.tpr_min > 0.0) || !(config.tpr_min < 1.0)) {
    throw ConfigError("tpr_min must lie in (0, 1)");
  }
  return config;
}

MetricSummary evaluate_table(const SampleTable& table, const EvalConfig& config,
                             std::vector<CurvePoint>* curve_out,
                             nlohmann::json* tuning_audit) {
  const auto rows = eval_rows(table, config);
  std::vector<ScoredSample> samples(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    samples[i].origin = rows[i].origin;
    samples[i].loss = rows[i].loss;
  }

  const auto& recipe = config.recipe;
  switch (recipe.type) {
    case ScoreRecipe::Type::kSingle: {
      const std::size_t col = table.column_index(recipe.column);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        samples[i].score = loaded_value(table, config, col, rows[i].table_index);
      }
      break;
    }
    case ScoreRecipe::Type::kLinear: {
      const std::size_t rc = table.column_index(recipe.r_col);
      const std::size_t gc = table.column_index(recipe.g_col);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const double r = loaded_value(table, config, rc, rows[i].table_index);
        const double g = loaded_value(table, config, gc, rows[i].table_index);
        samples[i].score = linear_score(r, g, config.alpha, config.tpr_min);
      }
      break;
    }
    case ScoreRecipe::Type::kSirc: {
      const std::size_t c1 = table.column_index(recipe.s1_col);
      const std::size_t c2 = table.column_index(recipe.s2_col);
      std::vector<double> s1(rows.size());
      std::vector<double> s2(rows.size());
      std::vector<double> s1_id;
      std::vector<double> s2_id;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const double v1 = cell(table, table.rows[rows[i].table_index], c1, rows[i].table_index);
        const double v2 = cell(table, table.rows[rows[i].table_index], c2, rows[i].table_index);
        s1[i] = recipe.s1_negate ? -v1 : v1;
        s2[i] = recipe.s2_negate ? -v2 : v2;
        if (rows[i].origin == SampleOrigin::kId) {
          s1_id.push_back(s1[i]);
          s2_id.push_back(s2[i]);
        }
      }
      if (s1_id.empty()) throw DataError("SIRC needs ID rows to set parameters");
      const double s1_max = *std::max_element(s1_id.begin(), s1_id.end());
      auto apply = [&](const SircParams& p) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
          samples[i].score = -sirc_score(s1[i], s2[i], s1_max, p.a, p.b);
        }
      };
      if (recipe.sirc_tuned) {
        const auto grid = sirc_grid(s2_id);
        const auto tuned = tune_on_eval(grid, [&](const SircParams& p) {
          apply(p);
          return ausrt(samples, config.alpha);
        });
        apply(tuned.params);
        if (tuning_audit) {
          nlohmann::json audit;
          audit["objective"] = "ausrt";
          audit["selected"] = {{"a", tuned.params.a}, {"b", tuned.params.b}};
          audit["selected_index"] = tuned.index;
          nlohmann::json rows_json = nlohmann::json::array();
          for (std::size_t i = 0; i < grid.size(); ++i) {
            rows_json.push_back(
                {{"a", grid[i].a}, {"b", grid[i].b}, {"ausrt", tuned.all_objectives[i]}});
          }
          audit["candidates"] = std::move(rows_json);
          *tuning_audit = std::move(audit);
        }
      } else {
        apply(sirc_plugin_params(s2_id));
      }
      break;
    }
  }
  return compute_metrics(samples, config, curve_out);
}

void cmd_eval(const std::string& table_path, const EvalConfig& config,
              const std::string& out_dir) {
  const SampleTable table = read_table_csv(table_path);
  std::vector<CurvePoint> curve;
  nlohmann::json tuning_audit;
  const MetricSummary metrics = evaluate_table(
      table, config, &curve,
      config.recipe.type == ScoreRecipe::Type::kSirc && config.recipe.sirc_tuned
          ? &tuning_audit
          : nullptr);

  char pct[32];
  nlohmann::json summary;
  summary["alpha"] = config.alpha;
  summary["tpr_min"] = config.tpr_min;
  summary["recipe"] = recipe_to_json(config.recipe);
  summary["seed"] = config.seed;
  summary["metrics"]["ausrt"] = metrics.ausrt;
  summary["metrics"]["aurc"] = metrics.aurc;
  summary["metrics"]["scod_risk_at_tpr_min"] = metrics.scod_risk_at_tpr_min;
  if (metrics.auroc) {
    summary["metrics"]["auroc"] = *metrics.auroc;
  } else {
    summary["metrics"]["auroc"] = nullptr;
    summary["omitted"]["auroc"] = "table has no OOD rows";
  }
  auto percent = [&](double v) {
    std::snprintf(pct, sizeof(pct), "%.2f", 100.0 * v);
    return std::string(pct);
  };
  summary["percent"]["ausrt"] = percent(metrics.ausrt);
  summary["percent"]["aurc"] = percent(metrics.aurc);
  if (metrics.auroc) summary["percent"]["auroc"] = percent(*metrics.auroc);
  summary["metadata"]["ausrt_grid"] =
      config.uniform_grid_points > 0
          ? "uniform-" + std::to_string(config.uniform_grid_points)
          : std::string("achievable-empirical-tpr");
  summary["metadata"]["integration"] = "trapezoid-normalized-by-grid-span";
  summary["metadata"]["rounding"] = "half-even";
  summary["metadata"]["score_convention"] = "accept-if-score<=lambda";

  std::ofstream sfile(out_dir + "/summary.json");
  if (!sfile) throw DataError("cannot write summary into " + out_dir);
  sfile << summary.dump(2) << '\n';

  std::ofstream cfile(out_dir + "/curve.csv");
  if (!cfile) throw DataError("cannot write curve into " + out_dir);
  cfile << "tpr_min,scod_risk\n";
  for (const auto& point : curve) {
    cfile << format_value(point.tpr_min) << ',' << format_value(point.scod_risk) << '\n';
  }

  if (!tuning_audit.is_null()) {
    std::ofstream tfile(out_dir + "/tuning.json");
    tfile << tuning_audit.dump(2) << '\n';
  }
}

void cmd_sweep(const SweepArgs& args) {
  if (args.values.empty()) throw ConfigError("sweep needs a nonempty value list");
  const SampleTable table = read_table_csv(args.table_path);
  const EvalConfig base = parse_eval_config(args.base_config);

  std::ofstream out(args.out_path);
  if (!out) throw DataError("cannot write sweep output: " + args.out_path);
  out << "axis,value,ausrt,aurc,auroc,scod_risk_at_tpr_min\n";

  auto emit = [&](double value, const MetricSummary& m) {
    out << args.axis << ',' << format_value(value) << ',' << format_value(m.ausrt) << ','
        << format_value(m.aurc) << ',' << (m.auroc ? format_value(*m.auroc) : std::string())
        << ',' << format_value(m.scod_risk_at_tpr_min) << '\n';
  };

  if (args.axis == "alpha") {
    for (double value : args.values) {
      EvalConfig config = base;
      config.alpha = value;
      emit(value, evaluate_table(table, config));
    }
  } else if (args.axis == "pi_o_tr") {
    // Refit the likelihood-ratio model per training prior; the evaluation
    // mixture (the table) stays fixed across the sweep.
    if (!args.base_config.contains("refit")) {
      throw ConfigError("pi_o_tr sweep needs a 'refit' block in the config");
    }
    if (base.recipe.type != ScoreRecipe::Type::kLinear) {
      throw ConfigError("pi_o_tr sweep requires a linear recipe (r_col + refitted g)");
    }
    const auto& refit = args.base_config["refit"];
    const SyntheticWorld world = SyntheticWorld::load(refit.at("world").get<std::string>());
    const std::size_t n_id = refit.value("n_id", std::size_t{20000});
    const std::size_t n_mix = refit.value("n_mixture", std::size_t{20000});
    const std::uint64_t seed = refit.value("seed", std::uint64_t{0});
    const bool standard = refit.value("sigmoid", std::string("corrected")) == "standard";

    const auto feat_cols = feature_columns(table, {});
    std::vector<std::size_t> col_idx;
    for (const auto& name : feat_cols) col_idx.push_back(table.column_index(name));
    const std::size_t rc = table.column_index(base.recipe.r_col);

    for (double value : args.values) {
      const auto id_train = sample_id(world, n_id, split_seed(seed, 11));
      const auto mix_train = sample_mixture(world, n_mix, value, split_seed(seed, 13));
      MixtureDataset data;
      data.features.resize(static_cast<Eigen::Index>(id_train.size() + mix_train.size()),
                           static_cast<Eigen::Index>(col_idx.size()));
      for (std::size_t i = 0; i < id_train.size(); ++i) {
        data.features.row(static_cast<Eigen::Index>(i)) = id_train[i].features.transpose();
        data.is_id.push_back(1);
      }
      for (std::size_t i = 0; i < mix_train.size(); ++i) {
        data.features.row(static_cast<Eigen::Index>(id_train.size() + i)) =
            mix_train[i].transpose();
        data.is_id.push_back(0);
      }
      FitConfig fit;
      fit.seed = seed;
      fit.fix_a_at_zero = standard;
      const CsmParams params = fit_csm(data, fit);
      const double pi_u = data.pi_u();
      const PriorEstimate prior = recover_prior(params.a, pi_u);

      const auto rows = eval_rows(table, base);
      std::vector<ScoredSample> samples(rows.size());
      Eigen::VectorXd xb(col_idx.size() + 1);
      xb[static_cast<Eigen::Index>(col_idx.size())] = 1.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = table.rows[rows[i].table_index];
        for (std::size_t c = 0; c < col_idx.size(); ++c) {
          xb[static_cast<Eigen::Index>(c)] = cell(table, row, col_idx[c], rows[i].table_index);
        }
        const double r = loaded_value(table, base, rc, rows[i].table_index);
        const double g = estimate_g(params, pi_u, prior.pi_o_tr, xb);
        samples[i].origin = rows[i].origin;
        samples[i].loss = rows[i].loss;
        samples[i].score = linear_score(r, g, base.alpha, base.tpr_min);
      }
      emit(value, compute_metrics(samples, base, nullptr));
    }
  } else {
    throw ConfigError("unknown sweep axis '" + args.axis + "'");
  }
}

}  // namespace scod

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scod/commands.hpp"
#include "scod/errors.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;
constexpr int kExitNumericalError = 4;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw scod::ConfigError("cannot open config: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw scod::ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective classification with OOD data: synthetic oracles, "
               "POSCOD fitting, selector evaluation"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "Suppress progress output");

  // synth
  scod::SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Sample a synthetic world into a CSV table");
  synth_cmd->add_option("--world", synth.world_path, "World spec JSON")->required();
  synth_cmd->add_option("--n-id", synth.n_id, "Number of labeled ID samples");
  synth_cmd->add_option("--n-ood", synth.n_ood, "Number of OOD samples");
  synth_cmd->add_option("--n-mixture", synth.n_mixture, "Number of unlabeled mixture samples");
  synth_cmd->add_option("--pi-o-tr", synth.pi_o_tr, "OOD fraction in the unlabeled mixture");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--out", synth.out_path, "Output CSV path")->required();

  // fit
  scod::FitArgs fit;
  std::string sigmoid = "corrected";
  std::string fit_config_path;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the likelihood-ratio model on ID + UNLABELED rows");
  fit_cmd->add_option("--table", fit.table_path, "Input table CSV")->required();
  fit_cmd->add_option("--features", fit.feature_cols, "Feature columns (default: feat_*)");
  fit_cmd->add_option("--sigmoid", sigmoid, "corrected|standard")
      ->check(CLI::IsMember({"corrected", "standard"}));
  fit_cmd->add_option("--config", fit_config_path, "Optimizer config JSON");
  fit_cmd->add_option("--seed", fit.fit.seed, "RNG seed");
  fit_cmd->add_option("--out", fit.out_path, "Output params JSON")->required();

  // eval
  std::string eval_table, eval_config_path, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a score recipe on a table");
  eval_cmd->add_option("--table", eval_table, "Input table CSV")->required();
  eval_cmd->add_option("--config", eval_config_path, "Eval config JSON")->required();
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();

  // sweep
  scod::SweepArgs sweep;
  std::string sweep_config_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep alpha or pi_o_tr and emit a long-form CSV");
  sweep_cmd->add_option("--table", sweep.table_path, "Input table CSV")->required();
  sweep_cmd->add_option("--axis", sweep.axis, "alpha|pi_o_tr")
      ->required()
      ->check(CLI::IsMember({"alpha", "pi_o_tr"}));
  sweep_cmd->add_option("--values", sweep.values, "Axis values")->required();
  sweep_cmd->add_option("--config", sweep_config_path, "Base eval config JSON")->required();
  sweep_cmd->add_option("--out", sweep.out_path, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (*synth_cmd) {
      scod::cmd_synth(synth);
      if (!quiet) std::cout << "wrote " << synth.out_path << "\n";
    } else if (*fit_cmd) {
      fit.standard_sigmoid = sigmoid == "standard";
      if (!fit_config_path.empty()) {
        const auto j = load_json(fit_config_path);
        fit.fit.step_size = j.value("step_size", fit.fit.step_size);
        fit.fit.max_epochs = j.value("max_epochs", fit.fit.max_epochs);
        fit.fit.grad_tolerance = j.value("grad_tolerance", fit.fit.grad_tolerance);
        fit.fit.seed = j.value("seed", fit.fit.seed);
      }
      const auto params = scod::cmd_fit(fit);
      if (!quiet) {
        std::cout << "pi_o_tr_hat=" << params["pi_o_tr_hat"].get<double>() << " wrote "
                  << fit.out_path << "\n";
      }
    } else if (*eval_cmd) {
      const auto config = scod::parse_eval_config(load_json(eval_config_path));
      std::filesystem::create_directories(eval_out);
      scod::cmd_eval(eval_table, config, eval_out);
      if (!quiet) std::cout << "wrote " << eval_out << "/summary.json\n";
    } else if (*sweep_cmd) {
      sweep.base_config = load_json(sweep_config_path);
      scod::cmd_sweep(sweep);
      if (!quiet) std::cout << "wrote " << sweep.out_path << "\n";
    }
  } catch (const scod::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const scod::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const scod::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

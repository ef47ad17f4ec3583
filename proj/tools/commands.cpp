#include "commands.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiment.hpp"

namespace cate::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::size_t> runs;
  std::string out;
};

ExperimentConfig load_with_overrides(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) set_seed(cfg, *c.seed);
  if (c.runs) set_runs(cfg, *c.runs);
  if (c.jobs) {
    if (*c.jobs < 1) throw ConfigError("--jobs must be >= 1");
    cfg.jobs = *c.jobs;
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

json surface_json(const ResponseSurface& s) {
  return {{"s0", s.s0}, {"s1", s.s1}, {"overlap", s.overlap()}};
}

int cmd_generate(const Common& c) {
  const ExperimentConfig cfg = load_with_overrides(c);
  const fs::path dir = prepare_dir(cfg.output_dir);
  json manifest = base_manifest("generate", cfg);
  const std::uint64_t data_seed = derive_seed(derive_seed(cfg.seed, 0), 1);
  manifest["data_seed"] = data_seed;

  std::vector<std::optional<double>> settings;
  if (cfg.vary) {
    for (const double v : cfg.vary->values) settings.emplace_back(v);
  } else {
    settings.emplace_back(std::nullopt);
  }
  json files = json::array();
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const RunData rd = make_run_data(dataset_for_setting(cfg, settings[k]), data_seed);
    const std::string name =
        settings.size() == 1 ? "dataset.csv" : "dataset_" + std::to_string(k) + ".csv";
    save_csv(dir / name, rd.generated.data, &rd.generated.truth, rd.feature_names);
    json entry = {{"file", name}, {"rows", rd.generated.data.size()},
                  {"treated", rd.generated.data.treated_count()}};
    if (settings[k]) entry[cfg.vary->parameter] = *settings[k];
    if (rd.surface) {
      entry["surface"] = surface_json(*rd.surface);
      if (settings.size() == 1) manifest["overlap"] = rd.surface->overlap();
    }
    files.push_back(std::move(entry));
  }
  manifest["files"] = std::move(files);
  write_json(dir / "manifest.json", manifest);
  std::cout << "wrote " << settings.size() << " dataset file(s) to " << dir.string() << '\n';
  return kExitOk;
}

int finish_runs(const std::string& command, const RunOutput& out,
                const fs::path& dir, json manifest) {
  manifest["records"] = out.records.size();
  manifest["failures"] = out.failures;
  write_json(dir / "manifest.json", manifest);
  if (out.failures > 0) {
    std::cerr << command << ": " << out.failures << " of " << out.records.size()
              << " learner fits failed; see results.jsonl\n";
    return kExitPartial;
  }
  std::cout << command << ": " << out.records.size() << " records written to " << dir.string()
            << '\n';
  return kExitOk;
}

int cmd_bench(const Common& c) {
  const ExperimentConfig cfg = load_with_overrides(c);
  const fs::path dir = prepare_dir(cfg.output_dir);
  const RunOutput out = run_bench(cfg);
  write_results_jsonl(dir / "results.jsonl", cfg, out.records);
  const auto points = summarize_records(out.records, false);
  write_summary(dir / "summary.csv", cfg, points);
  json manifest = base_manifest("bench", cfg);
  json outputs = {"results.jsonl", "summary.csv"};
  if (cfg.vary) {
    write_vary_curve(dir / "curve.csv", cfg, points);
    outputs.push_back("curve.csv");
  }
  manifest["outputs"] = outputs;
  return finish_runs("bench", out, dir, std::move(manifest));
}

int cmd_sweep(const Common& c) {
  const ExperimentConfig cfg = load_with_overrides(c);
  const fs::path dir = prepare_dir(cfg.output_dir);
  const RunOutput out = run_sweep_lambda(cfg);
  write_results_jsonl(dir / "results.jsonl", cfg, out.records);
  const auto points = summarize_records(out.records, true);
  write_lambda_curve(dir / "lambda_curve.csv", cfg, points);

  // Runs scored at their validation-selected lambda.
  std::vector<ResultRecord> selected;
  for (const auto& r : out.records) {
    if (r.ok && r.selected) {
      ResultRecord s = r;
      s.learner += "@selected";
      s.lambda.reset();
      selected.push_back(std::move(s));
    }
  }
  auto summary = points;
  for (auto& p : summarize_records(selected, false)) summary.push_back(std::move(p));
  write_summary(dir / "summary.csv", cfg, summary);

  json manifest = base_manifest("sweep-lambda", cfg);
  manifest["lambda_grid"] = cfg.lambda_grid;
  manifest["outputs"] = {"results.jsonl", "lambda_curve.csv", "summary.csv"};
  return finish_runs("sweep-lambda", out, dir, std::move(manifest));
}

int cmd_fit(const Common& c, const std::string& learner) {
  const ExperimentConfig cfg = load_with_overrides(c);
  const fs::path dir = prepare_dir(cfg.output_dir);
  const SingleFit fit = fit_single(cfg, learner);
  save_model(dir / "model.json", fit.model);
  save_csv(dir / "train_pseudo.csv", fit.train_raw, &fit.train_truth, fit.feature_names,
           fit.pseudo);
  json manifest = base_manifest("fit", cfg);
  manifest["result"] = to_json(fit.record, cfg.vary ? cfg.vary->parameter : std::string());
  manifest["outputs"] = {"model.json", "train_pseudo.csv"};
  write_json(dir / "manifest.json", manifest);
  std::cout << "fit " << fit.record.learner << ": test sqrt(PEHE) " << fit.record.pehe_out
            << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& out_dir) {
  if (model_path.empty() || data_path.empty()) {
    throw ConfigError("eval needs --model and --data");
  }
  const FittedModel model = load_model(model_path);
  const LoadedDataset loaded = load_csv(data_path);
  const Vector tau_hat = model.predict_tau(loaded.data.x);
  const fs::path dir = prepare_dir(out_dir.empty() ? fs::path("results") : fs::path(out_dir));
  const std::vector<ExtraColumn> extra{{"tau_hat", tau_hat}};
  save_csv(dir / "predictions.csv", loaded.data, loaded.truth ? &*loaded.truth : nullptr,
           loaded.feature_names, extra);
  json report = {{"model", model_path}, {"data", data_path}, {"rows", loaded.data.size()},
                 {"estimator", model.estimator->kind()}};
  if (loaded.truth) {
    const auto p = pehe(tau_hat, loaded.truth->tau);
    report["pehe"] = p.mse;
    report["sqrt_pehe"] = p.root;
    std::cout << "sqrt(PEHE) " << p.root << '\n';
  }
  write_json(dir / "eval.json", report);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Benchmark runner for CATE meta-learners"};
  app.require_subcommand(1);

  Common common;
  std::string learner, model_path, data_path;
  auto add_common = [&](CLI::App* sub, bool runs) {
    sub->add_option("--config", common.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", common.seed, "Master seed override");
    sub->add_option("--jobs", common.jobs, "Worker threads");
    sub->add_option("--out", common.out, "Output directory override");
    if (runs) sub->add_option("--runs", common.runs, "Run count override");
  };

  auto* generate = app.add_subcommand("generate", "Write a generated dataset with ground truth");
  add_common(generate, false);
  auto* bench = app.add_subcommand("bench", "Fit every learner over all runs and summarize");
  add_common(bench, true);
  auto* sweep = app.add_subcommand("sweep-lambda", "Test error of the H-learner across the grid");
  add_common(sweep, true);
  auto* fit = app.add_subcommand("fit", "Fit one learner on run 0 and save the model");
  add_common(fit, false);
  fit->add_option("--learner", learner, "Learner id (default: first in config)");
  auto* eval = app.add_subcommand("eval", "Score a saved model on a CSV dataset");
  eval->add_option("--model", model_path, "Saved model JSON")->required();
  eval->add_option("--data", data_path, "Dataset CSV")->required();
  eval->add_option("--out", common.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(common);
    if (*bench) return cmd_bench(common);
    if (*sweep) return cmd_sweep(common);
    if (*fit) return cmd_fit(common, learner);
    if (*eval) return cmd_eval(model_path, data_path, common.out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace cate::cli

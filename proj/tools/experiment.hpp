#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cate/cate.hpp"

namespace cate::cli {

enum class DatasetKind { Toy, SemiSynthetic, Csv };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::Toy;
  ToyDgpConfig toy;
  SemiSyntheticConfig semi;  // covariates filled from covariates_csv when set
  std::optional<std::filesystem::path> covariates_csv;
  std::filesystem::path csv_path;
  CsvSchema csv_schema;
};

enum class LearnerKind { TLearner, SLearner, Tarnet, TarnetWr, OffsetNet, Direct, HLearner, HZero };

struct LearnerSpec {
  std::string id;
  LearnerKind kind = LearnerKind::Tarnet;
  BaseLearner base = BaseLearner::Mlp;
  double ridge_l2 = 1.0;
  double rho = 1.0;
  PseudoKind pseudo = PseudoKind::X;
  std::optional<double> lambda;  // h learners: fixed value instead of selection

  bool needs_stage1() const;
};

struct VarySpec {
  std::string parameter;  // key inside the active dataset block
  std::vector<double> values;
};

struct ExperimentConfig {
  // Canonical form used for hashing; excludes jobs and output_dir.
  nlohmann::json canonical;
  nlohmann::json dataset_block;

  DatasetSpec dataset;
  std::optional<VarySpec> vary;
  std::vector<LearnerSpec> learners;
  SplitRatios split;
  std::size_t runs = 20;
  std::uint64_t seed = 0;
  std::vector<double> lambda_grid = default_lambda_grid();
  bool standardize_features = true;
  bool standardize_outcome = false;
  NetConfig net;
  NuisanceConfig stage1;
  bool record_wall_time = false;

  std::filesystem::path output_dir = "results";
  int jobs = 1;
};

// Throws ConfigError on unknown keys, bad values or a missing learner list.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// Overrides keep the canonical form in sync.
void set_seed(ExperimentConfig& cfg, std::uint64_t seed);
void set_runs(ExperimentConfig& cfg, std::size_t runs);

// 16 hex digits of FNV-1a over the sorted-key JSON dump.
std::string config_hash(const ExperimentConfig& cfg);

// Dataset spec for one value of the vary parameter.
DatasetSpec dataset_for_setting(const ExperimentConfig& cfg, std::optional<double> setting);

struct RunData {
  GeneratedData generated;
  std::optional<ResponseSurface> surface;
  std::vector<std::string> feature_names;
};

// Dataset for one run; generators draw from `data_seed`.
RunData make_run_data(const DatasetSpec& spec, std::uint64_t data_seed);

struct ResultRecord {
  std::string config_hash;
  std::optional<double> setting;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::string learner;
  std::optional<double> lambda;
  bool selected = false;        // sweep: lambda chosen by the validation criterion
  bool lambda_fallback = false;  // validation arm too small, stage-1 models used
  double pehe_in = 0.0;
  double pehe_out = 0.0;
  bool ok = true;
  std::string error;
  std::optional<double> wall_time_s;
};

nlohmann::json to_json(const ResultRecord& r, const std::string& vary_parameter);

struct RunOutput {
  std::vector<ResultRecord> records;
  std::size_t failures = 0;
};

// Every (setting, run) pair in a fixed order regardless of jobs.
RunOutput run_bench(const ExperimentConfig& cfg);

// One H-learner fit per grid value for every (setting, run); records carry
// the lambda and whether the validation criterion selected it.
RunOutput run_sweep_lambda(const ExperimentConfig& cfg);

struct SingleFit {
  FittedModel model;
  ResultRecord record;
  ObservationalDataset train_raw;
  GroundTruth train_truth;
  std::vector<std::string> feature_names;
  // Stage-1 pseudo-outcomes on the training rows, in outcome units.
  std::vector<ExtraColumn> pseudo;
};

// Run 0 of the first setting with a single learner (default: the first one).
SingleFit fit_single(const ExperimentConfig& cfg, const std::string& learner_id = {});

struct CurvePoint {
  std::optional<double> setting;
  std::string learner;
  std::optional<double> lambda;
  EvaluationReport report;
};

// Groups successful records by (setting, learner, lambda) in first-seen order.
std::vector<CurvePoint> summarize_records(const std::vector<ResultRecord>& records,
                                          bool by_lambda);

void write_results_jsonl(const std::filesystem::path& path, const ExperimentConfig& cfg,
                         const std::vector<ResultRecord>& records);
void write_summary(const std::filesystem::path& path, const ExperimentConfig& cfg,
                   const std::vector<CurvePoint>& points);
// <parameter>,learner,mean_sqrt_pehe,se over test rows.
void write_vary_curve(const std::filesystem::path& path, const ExperimentConfig& cfg,
                      const std::vector<CurvePoint>& points);
// [setting,]lambda,in_mean,in_se,out_mean,out_se,runs
void write_lambda_curve(const std::filesystem::path& path, const ExperimentConfig& cfg,
                        const std::vector<CurvePoint>& points);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

nlohmann::json base_manifest(const std::string& command, const ExperimentConfig& cfg);

}  // namespace cate::cli

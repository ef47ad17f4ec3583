#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "experiment.hpp"

namespace cate::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cate_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

int catebench(const std::string& args) {
  const std::string cmd = std::string(CATEBENCH_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json tiny_toy(double delta = 0.0) {
  return {
      {"spec_version", 1},
      {"seed", 3},
      {"runs", 2},
      {"dataset", {{"kind", "toy"}, {"delta", delta}, {"n", 120}}},
      {"network",
       {{"trunk", {8}}, {"head", {8}}, {"epochs", 5}, {"batch_size", 32}, {"learning_rate", 0.01}}},
      {"learners", {"t_learner", "tarnet", "direct_x", "h_learner_x"}},
      {"lambda_grid", {0.0, 0.5, 1.0}},
  };
}

TEST(Config, ParsesShorthandLearners) {
  const auto cfg = parse_config(tiny_toy());
  ASSERT_EQ(cfg.learners.size(), 4u);
  EXPECT_EQ(cfg.learners[2].kind, LearnerKind::Direct);
  EXPECT_EQ(cfg.learners[2].pseudo, PseudoKind::X);
  EXPECT_EQ(cfg.learners[3].kind, LearnerKind::HLearner);
  EXPECT_EQ(cfg.net.train.epochs, 5);
  EXPECT_EQ(cfg.runs, 2u);
}

TEST(Config, UnknownKeysAreErrors) {
  auto doc = tiny_toy();
  doc["epochs"] = 3;
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = tiny_toy();
  doc["dataset"]["omgea"] = 1.0;
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = tiny_toy();
  doc["learners"] = {{{"kind", "tarnet"}, {"rh0", 1.0}}};
  EXPECT_THROW(parse_config(doc), ConfigError);
}

TEST(Config, InvalidValuesAreErrors) {
  auto doc = tiny_toy();
  doc.erase("spec_version");
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = tiny_toy();
  doc["learners"] = {"no_such_learner"};
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = tiny_toy();
  doc["learners"] = {{{"kind", "h_learner"}, {"lambda", 1.5}}};
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = tiny_toy();
  doc["split"] = {{"train", 0.5}, {"val", 0.5}, {"test", 0.5}};
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = tiny_toy();
  doc["runs"] = 0;
  EXPECT_THROW(parse_config(doc), ConfigError);
}

TEST(Config, HashIgnoresKeyOrderJobsAndOutput) {
  const auto a = parse_config(tiny_toy());
  auto reordered = json::parse(R"({"learners": ["t_learner", "tarnet", "direct_x", "h_learner_x"],
    "lambda_grid": [0.0, 0.5, 1.0],
    "network": {"learning_rate": 0.01, "batch_size": 32, "epochs": 5, "head": [8], "trunk": [8]},
    "dataset": {"n": 120, "delta": 0.0, "kind": "toy"},
    "runs": 2, "seed": 3, "spec_version": 1, "jobs": 4, "output_dir": "elsewhere"})");
  EXPECT_EQ(config_hash(a), config_hash(parse_config(reordered)));
  auto changed = tiny_toy();
  changed["seed"] = 4;
  EXPECT_NE(config_hash(a), config_hash(parse_config(changed)));
  auto overridden = parse_config(tiny_toy());
  set_seed(overridden, 4);
  EXPECT_EQ(config_hash(overridden), config_hash(parse_config(changed)));
}

TEST(Bench, SingleRunHasZeroStandardError) {
  auto doc = tiny_toy();
  doc["runs"] = 1;
  doc["learners"] = {"tarnet"};
  const auto cfg = parse_config(doc);
  const auto out = run_bench(cfg);
  ASSERT_EQ(out.records.size(), 1u);
  const auto points = summarize_records(out.records, false);
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].report.out.se, 0.0);
  EXPECT_EQ(points[0].report.out.mean, out.records[0].pehe_out);
}

TEST(Bench, RecordsCoverEveryLearnerAndRun) {
  const auto cfg = parse_config(tiny_toy());
  const auto out = run_bench(cfg);
  EXPECT_EQ(out.failures, 0u);
  ASSERT_EQ(out.records.size(), 8u);
  std::map<std::string, int> per_learner;
  for (const auto& r : out.records) {
    EXPECT_TRUE(r.ok) << r.error;
    EXPECT_GE(r.pehe_out, 0.0);
    ++per_learner[r.learner];
  }
  for (const auto& [name, count] : per_learner) EXPECT_EQ(count, 2) << name;
}

TEST(Sweep, LinearEndpointsMatchIndirectAndDirectLearners) {
  const double gamma = 0.6;
  json doc = {
      {"spec_version", 1},
      {"seed", 5},
      {"runs", 2},
      {"dataset", {{"kind", "semi_synthetic"}, {"n", 200}, {"d", 8}, {"s_size", 4}}},
      {"stage1", {{"outcome", "t_learner"}, {"base", "ridge"}, {"ridge_l2", 1.0}}},
      {"lambda_grid", {0.0, 1.0}},
      {"learners",
       {{{"kind", "h_learner"}, {"base", "ridge"}, {"ridge_l2", gamma}, {"pseudo", "x"}},
        {{"kind", "t_learner"}, {"base", "ridge"}, {"ridge_l2", gamma}},
        {{"kind", "direct"}, {"base", "ridge"}, {"ridge_l2", gamma / 2}, {"pseudo", "x"}}}},
  };
  const auto cfg = parse_config(doc);
  const auto sweep = run_sweep_lambda(cfg);
  const auto bench = run_bench(cfg);
  ASSERT_EQ(sweep.failures, 0u);
  ASSERT_EQ(bench.failures, 0u);
  auto find = [](const std::vector<ResultRecord>& rs, std::size_t run, const std::string& prefix,
                 std::optional<double> lambda) -> const ResultRecord& {
    for (const auto& r : rs) {
      if (r.run == run && r.learner.rfind(prefix, 0) == 0 && (!lambda || r.lambda == lambda)) {
        return r;
      }
    }
    throw std::runtime_error("record not found: " + prefix);
  };
  for (std::size_t run = 0; run < 2; ++run) {
    const auto& h0 = find(sweep.records, run, "h_learner", 0.0);
    const auto& h1 = find(sweep.records, run, "h_learner", 1.0);
    const auto& t = find(bench.records, run, "t_learner", std::nullopt);
    const auto& d = find(bench.records, run, "direct", std::nullopt);
    EXPECT_NEAR(h0.pehe_out, t.pehe_out, 1e-6);
    EXPECT_NEAR(h0.pehe_in, t.pehe_in, 1e-6);
    EXPECT_NEAR(h1.pehe_out, d.pehe_out, 1e-6);
    EXPECT_NEAR(h1.pehe_in, d.pehe_in, 1e-6);
  }
}

TEST(Sweep, ElevenPointGridGivesElevenCurveRows) {
  auto doc = tiny_toy();
  doc["runs"] = 1;
  doc["learners"] = {{{"kind", "h_learner"}, {"base", "ridge"}}};
  doc["stage1"] = {{"outcome", "t_learner"}, {"base", "ridge"}};
  doc.erase("lambda_grid");
  const auto dir = scratch("sweep11");
  doc["output_dir"] = dir.string();
  ASSERT_EQ(catebench("sweep-lambda --config " + write_config(dir, doc).string()), 0);
  std::ifstream in(dir / "lambda_curve.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 11);
  const std::string summary = slurp(dir / "summary.csv");
  EXPECT_NE(summary.find("@selected"), std::string::npos);
}

TEST(Generate, ManifestRecordsOverlap) {
  const auto dir = scratch("generate_overlap");
  json doc = {{"spec_version", 1},
              {"dataset", {{"kind", "semi_synthetic"}, {"shared_fraction", 0.5}, {"s_size", 10}}},
              {"learners", {"tarnet"}}};
  ASSERT_EQ(catebench("generate --config " + write_config(dir, doc).string() + " --out " +
                      (dir / "out").string()),
            0);
  const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest.at("overlap"), 5);
  EXPECT_EQ(manifest.at("files").at(0).at("surface").at("overlap"), 5);
}

TEST(Generate, ConstantEffectFileAndByteIdenticalReruns) {
  const auto dir = scratch("generate_toy");
  const auto cfg = write_config(dir, tiny_toy(0.0)).string();
  ASSERT_EQ(catebench("generate --config " + cfg + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(catebench("generate --config " + cfg + " --out " + (dir / "b").string()), 0);
  EXPECT_EQ(slurp(dir / "a" / "dataset.csv"), slurp(dir / "b" / "dataset.csv"));
  const auto loaded = load_csv(dir / "a" / "dataset.csv");
  ASSERT_TRUE(loaded.truth);
  EXPECT_EQ(loaded.data.size(), 120);
  EXPECT_LT((loaded.truth->tau.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Generate, VaryWritesOneFilePerSetting) {
  const auto dir = scratch("generate_vary");
  auto doc = tiny_toy();
  doc["vary"] = {{"parameter", "delta"}, {"values", {0.0, 1.0, 2.0}}};
  ASSERT_EQ(catebench("generate --config " + write_config(dir, doc).string() + " --out " +
                      (dir / "out").string()),
            0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_TRUE(fs::exists(dir / "out" / ("dataset_" + std::to_string(k) + ".csv")));
  }
}

TEST(Cli, FitThenEvalReproducesFitScore) {
  const auto dir = scratch("fit_eval");
  auto doc = tiny_toy();
  doc["learners"] = {"t_learner"};
  const auto cfg = write_config(dir, doc).string();
  ASSERT_EQ(catebench("fit --config " + cfg + " --out " + (dir / "fit").string()), 0);
  ASSERT_EQ(catebench("generate --config " + cfg + " --out " + (dir / "gen").string()), 0);
  ASSERT_EQ(catebench("eval --model " + (dir / "fit" / "model.json").string() + " --data " +
                      (dir / "gen" / "dataset.csv").string() + " --out " + (dir / "eval").string()),
            0);
  const json report = json::parse(slurp(dir / "eval" / "eval.json"));
  EXPECT_GE(report.at("sqrt_pehe").get<double>(), 0.0);
  const std::string header = slurp(dir / "fit" / "train_pseudo.csv").substr(0, 200);
  EXPECT_NE(header.find("pseudo_x"), std::string::npos);
  EXPECT_NE(slurp(dir / "eval" / "predictions.csv").find("tau_hat"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit_codes");
  EXPECT_EQ(catebench("bench"), 2);
  EXPECT_EQ(catebench("bench --config " + (dir / "missing.json").string()), 2);

  auto bad = tiny_toy();
  bad["bogus"] = true;
  std::ofstream(dir / "bad.json") << bad.dump();
  EXPECT_EQ(catebench("bench --config " + (dir / "bad.json").string()), 2);

  auto diverging = tiny_toy();
  diverging["runs"] = 1;
  diverging["network"]["learning_rate"] = 1e300;
  diverging["learners"] = {"tarnet"};
  diverging["stage1"] = {{"outcome", "t_learner"}, {"base", "ridge"}};
  diverging["output_dir"] = (dir / "partial").string();
  std::ofstream(dir / "diverging.json") << diverging.dump();
  EXPECT_EQ(catebench("bench --config " + (dir / "diverging.json").string()), 3);
  const std::string results = slurp(dir / "partial" / "results.jsonl");
  EXPECT_NE(results.find("\"status\":\"failed\""), std::string::npos);
}

TEST(Cli, BenchIsByteIdenticalAcrossJobCounts) {
  const auto dir = scratch("determinism");
  auto doc = tiny_toy();
  doc["runs"] = 3;
  const auto cfg = write_config(dir, doc).string();
  ASSERT_EQ(catebench("bench --config " + cfg + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(catebench("bench --config " + cfg + " --out " + (dir / "b").string()), 0);
  ASSERT_EQ(catebench("bench --config " + cfg + " --jobs 4 --out " + (dir / "c").string()), 0);
  const std::string a = slurp(dir / "a" / "results.jsonl");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "results.jsonl"));
  EXPECT_EQ(a, slurp(dir / "c" / "results.jsonl"));
  EXPECT_EQ(slurp(dir / "a" / "summary.csv"), slurp(dir / "c" / "summary.csv"));
}

}  // namespace
}  // namespace cate::cli

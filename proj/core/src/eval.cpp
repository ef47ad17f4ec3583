#include "cate/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cate/error.hpp"
#include "cate/parallel.hpp"

namespace cate {

PeheResult pehe(const Vector& tau_hat, const Vector& tau_true) {
  if (tau_hat.size() != tau_true.size()) throw DimensionError("pehe: length mismatch");
  if (tau_hat.size() == 0) throw DimensionError("pehe: empty input");
  PeheResult r;
  r.mse = (tau_hat - tau_true).squaredNorm() / static_cast<double>(tau_hat.size());
  r.root = std::sqrt(r.mse);
  return r;
}

PeheResult pehe(const CateEstimator& est, const Matrix& x, const Vector& tau_true) {
  return pehe(est.predict_tau(x), tau_true);
}

Vector imputed_effects(const ObservationalDataset& data, const Vector& mu0, const Vector& mu1) {
  if (mu0.size() != data.size() || mu1.size() != data.size()) {
    throw DimensionError("imputed effects: nuisance length mismatch");
  }
  return (data.t.array() * (data.y - mu0).array() +
          (1.0 - data.t.array()) * (mu1 - data.y).array())
      .matrix();
}

double proxy_pehe(const Vector& tau_hat, const ObservationalDataset& val, const Vector& mu0_hat,
                  const Vector& mu1_hat) {
  const Vector target = imputed_effects(val, mu0_hat, mu1_hat);
  if (tau_hat.size() != target.size()) throw DimensionError("proxy pehe: length mismatch");
  if (target.size() == 0) throw DimensionError("proxy pehe: empty validation set");
  return (tau_hat - target).squaredNorm() / static_cast<double>(target.size());
}

double proxy_pehe(const Vector& f0, const Vector& f1, const ObservationalDataset& val,
                  const Vector& mu0_hat, const Vector& mu1_hat) {
  return proxy_pehe(Vector(f1 - f0), val, mu0_hat, mu1_hat);
}

Validation proxy_validation(const ObservationalDataset& val, const Vector& mu0_val,
                            const Vector& mu1_val) {
  Validation v;
  v.data = val;
  const Vector target = imputed_effects(val, mu0_val, mu1_val);
  v.score = [target](const Vector&, const Vector&, const Vector& tau) {
    return (tau - target).squaredNorm() / static_cast<double>(target.size());
  };
  return v;
}

Validation proxy_validation(const ObservationalDataset& val, const NuisanceSet& nuisances) {
  return proxy_validation(val, nuisances.mu0(val.x), nuisances.mu1(val.x));
}

Validation factual_validation(const ObservationalDataset& val) {
  Validation v;
  v.data = val;
  v.needs_outcome_heads = true;
  const Vector t = val.t;
  const Vector y = val.y;
  v.score = [t, y](const Vector& mu0, const Vector& mu1, const Vector&) {
    const Vector pred = (t.array() * mu1.array() + (1.0 - t.array()) * mu0.array()).matrix();
    return (pred - y).squaredNorm() / static_cast<double>(y.size());
  };
  return v;
}

ValidationNuisance fit_validation_nuisance(const ObservationalDataset& val,
                                           const NuisanceConfig& cfg,
                                           const NuisanceSet* stage1_fallback) {
  const Index treated = val.treated_count();
  const Index control = val.size() - treated;
  if (treated == 0 || control == 0) {
    throw PositivityError("validation nuisance: a validation arm is empty");
  }
  ValidationNuisance out;
  if (treated < kMinValidationArmRows || control < kMinValidationArmRows) {
    if (!stage1_fallback) {
      throw PositivityError("validation nuisance: fewer than " +
                            std::to_string(kMinValidationArmRows) +
                            " rows in a validation arm and no fallback");
    }
    out.mu0_check = stage1_fallback->mu0(val.x);
    out.mu1_check = stage1_fallback->mu1(val.x);
    out.fallback = true;
    return out;
  }
  EstimatorPtr model;
  if (cfg.outcome == OutcomeNuisance::Tarnet && cfg.base.kind == BaseLearner::Mlp) {
    model = std::make_shared<TwoHeadEstimator>(fit_tarnet(val, cfg.base.net));
  } else {
    model = fit_t_learner(val, cfg.base);
  }
  out.mu0_check = model->predict_mu0(val.x);
  out.mu1_check = model->predict_mu1(val.x);
  return out;
}

std::size_t argmin_lambda(std::span<const double> grid, std::span<const double> losses) {
  if (grid.empty() || grid.size() != losses.size()) {
    throw ConfigError("lambda selection: grid and losses must be nonempty and aligned");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (losses[k] < losses[best] || (losses[k] == losses[best] && grid[k] < grid[best])) {
      best = k;
    }
  }
  return best;
}

std::vector<double> lambda_criteria(const ObservationalDataset& val, const ValidationNuisance& check,
                                    std::span<const Vector> tau_val) {
  const Vector target = imputed_effects(val, check.mu0_check, check.mu1_check);
  std::vector<double> out;
  out.reserve(tau_val.size());
  for (const auto& tau : tau_val) {
    if (tau.size() != target.size()) throw DimensionError("lambda criterion: length mismatch");
    out.push_back((tau - target).squaredNorm() / static_cast<double>(target.size()));
  }
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(static_cast<double>(k) / 10.0);
  return grid;
}

LambdaSelection select_lambda(const ObservationalDataset& train, const ObservationalDataset& val,
                              std::span<const double> grid, const HLearnerConfig& cfg,
                              const NuisanceSet& stage1, int jobs) {
  if (grid.empty()) throw ConfigError("lambda selection: empty grid");
  for (const double l : grid) {
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("lambda selection: grid value outside [0, 1]");
  }
  const ValidationNuisance check = fit_validation_nuisance(val, cfg.stage1, &stage1);
  const Validation checkpoint = proxy_validation(val, stage1);

  LambdaSelection sel;
  sel.grid.assign(grid.begin(), grid.end());
  sel.fallback = check.fallback;
  sel.estimators.resize(grid.size());
  std::vector<Vector> tau_val(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t k) {
    HLearnerConfig c = cfg;
    c.lambda = grid[k];
    sel.estimators[k] = fit_h_learner(train, c, &stage1, &checkpoint);
    tau_val[k] = sel.estimators[k]->predict_tau(val.x);
  });
  sel.losses = lambda_criteria(val, check, tau_val);
  sel.chosen_index = argmin_lambda(sel.grid, sel.losses);
  sel.chosen = sel.grid[sel.chosen_index];
  return sel;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.runs = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    s.se = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

EvaluationReport aggregate(std::span<const RunPehe> runs) {
  if (runs.empty()) throw ConfigError("aggregate: need at least one run");
  EvaluationReport r;
  for (const auto& run : runs) {
    r.pehe_in.push_back(run.in_sample);
    r.pehe_out.push_back(run.out_sample);
  }
  // Sorting first makes the floating-point sums independent of run order.
  auto sorted_in = r.pehe_in;
  auto sorted_out = r.pehe_out;
  std::sort(sorted_in.begin(), sorted_in.end());
  std::sort(sorted_out.begin(), sorted_out.end());
  r.in = summarize(sorted_in);
  r.out = summarize(sorted_out);
  return r;
}

std::string report_to_json(const std::string& learner, const EvaluationReport& report) {
  nlohmann::json j;
  j["learner"] = learner;
  j["runs"] = report.in.runs;
  j["pehe_in"] = {{"mean", report.in.mean}, {"se", report.in.se}, {"values", report.pehe_in}};
  j["pehe_out"] = {{"mean", report.out.mean}, {"se", report.out.se}, {"values", report.pehe_out}};
  return j.dump(2);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace

void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("summary: cannot write " + path.string());
  out << "learner,in_mean,in_se,out_mean,out_se,runs\n";
  for (const auto& row : rows) {
    out << row.learner << ',' << fmt(row.report.in.mean) << ',' << fmt(row.report.in.se) << ','
        << fmt(row.report.out.mean) << ',' << fmt(row.report.out.se) << ',' << row.report.in.runs
        << '\n';
  }
}

}  // namespace cate

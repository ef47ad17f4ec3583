#include "experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cate/parallel.hpp"

namespace cate::cli {

using nlohmann::json;

namespace {

// Object reader that remembers which keys were consumed, so leftovers can be
// reported as unknown.
class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(raw(key), key);
  }

  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    return as<T>(raw(key), key);
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  template <typename T>
  T as(const json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_unsigned() == false && v.get<long long>() < 0) throw ConfigError("");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(where_ + ": bad value for '" + key + "': " + v.dump());
    }
  }

  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + ": expected a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<Index> width_list(const json& v, const std::string& where) {
  std::vector<Index> out;
  if (!v.is_array()) throw ConfigError(where + ": expected a list of layer widths");
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 1) {
      throw ConfigError(where + ": layer widths must be positive integers");
    }
    out.push_back(e.get<Index>());
  }
  return out;
}

DatasetSpec parse_dataset(const json& block) {
  Reader r(block, "dataset");
  DatasetSpec spec;
  const auto kind = r.require<std::string>("kind");
  if (kind == "toy") {
    spec.kind = DatasetKind::Toy;
    auto& c = spec.toy;
    c.omega = r.get("omega", c.omega);
    c.delta = r.get("delta", c.delta);
    c.beta = r.get("beta", c.beta);
    c.noise_sd = r.get("noise_sd", c.noise_sd);
    c.n = r.get<Index>("n", c.n);
    c.x_low = r.get("x_low", c.x_low);
    c.x_high = r.get("x_high", c.x_high);
    c.treated_prob = r.get("treated_prob", c.treated_prob);
    c.validate();
  } else if (kind == "semi_synthetic") {
    spec.kind = DatasetKind::SemiSynthetic;
    auto& c = spec.semi;
    c.n = r.get<Index>("n", c.n);
    c.d = r.get<Index>("d", c.d);
    c.s_size = r.get<Index>("s_size", c.s_size);
    c.shared_fraction = r.get("shared_fraction", c.shared_fraction);
    c.treated_fraction = r.get("treated_fraction", c.treated_fraction);
    c.alpha = r.get("alpha", c.alpha);
    c.noise_sd = r.get("noise_sd", c.noise_sd);
    const auto inter = r.get<std::string>("interactions", "unordered");
    if (inter == "unordered") {
      c.interactions = InteractionConvention::UnorderedPairs;
    } else if (inter == "ordered") {
      c.interactions = InteractionConvention::OrderedPairs;
    } else {
      throw ConfigError("dataset: interactions must be 'unordered' or 'ordered'");
    }
    if (r.has("covariates_csv")) {
      spec.covariates_csv = r.require<std::string>("covariates_csv");
      c.covariates = load_covariates_csv(*spec.covariates_csv).x;
    }
    c.validate();
  } else if (kind == "csv") {
    spec.kind = DatasetKind::Csv;
    spec.csv_path = r.require<std::string>("path");
    auto& s = spec.csv_schema;
    s.treatment = r.get<std::string>("treatment", s.treatment);
    s.outcome = r.get<std::string>("outcome", s.outcome);
    s.mu0 = r.get<std::string>("mu0", s.mu0);
    s.mu1 = r.get<std::string>("mu1", s.mu1);
    if (r.has("features")) {
      const auto& f = r.raw("features");
      if (!f.is_array()) throw ConfigError("dataset: features must be a list of names");
      for (const auto& name : f) {
        if (!name.is_string()) throw ConfigError("dataset: features must be a list of names");
        s.features.push_back(name.get<std::string>());
      }
    }
  } else {
    throw ConfigError("dataset: unknown kind '" + kind + "' (toy, semi_synthetic, csv)");
  }
  r.finish();
  return spec;
}

struct KindName {
  const char* name;
  LearnerKind kind;
};

constexpr KindName kKinds[] = {
    {"t_learner", LearnerKind::TLearner}, {"s_learner", LearnerKind::SLearner},
    {"tarnet", LearnerKind::Tarnet},      {"tarnet_wr", LearnerKind::TarnetWr},
    {"offsetnet", LearnerKind::OffsetNet}, {"direct", LearnerKind::Direct},
    {"h_learner", LearnerKind::HLearner}, {"h_zero", LearnerKind::HZero},
};

std::optional<LearnerKind> find_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  return std::nullopt;
}

std::string default_id(const LearnerSpec& l) {
  for (const auto& k : kKinds) {
    if (k.kind != l.kind) continue;
    std::string id = k.name;
    if (l.kind == LearnerKind::Direct || l.kind == LearnerKind::HLearner) {
      id += "_" + std::string(to_string(l.pseudo));
    }
    return id;
  }
  return "learner";
}

// "direct_x" and "h_learner_dr" shorthands as well as plain kind names.
void apply_kind_name(LearnerSpec& l, const std::string& name) {
  if (auto k = find_kind(name)) {
    l.kind = *k;
    return;
  }
  for (const std::string prefix : {"direct_", "h_learner_"}) {
    if (name.rfind(prefix, 0) == 0) {
      l.kind = prefix == "direct_" ? LearnerKind::Direct : LearnerKind::HLearner;
      try {
        l.pseudo = parse_pseudo_kind(name.substr(prefix.size()));
      } catch (const Error&) {
        throw ConfigError("learners: unknown learner '" + name + "'");
      }
      return;
    }
  }
  throw ConfigError("learners: unknown learner '" + name + "'");
}

LearnerSpec parse_learner(const json& v, BaseLearner default_base, double default_l2) {
  LearnerSpec l;
  l.base = default_base;
  l.ridge_l2 = default_l2;
  if (v.is_string()) {
    apply_kind_name(l, v.get<std::string>());
    l.id = default_id(l);
    return l;
  }
  Reader r(v, "learners");
  apply_kind_name(l, r.require<std::string>("kind"));
  if (r.has("pseudo")) {
    try {
      l.pseudo = parse_pseudo_kind(r.require<std::string>("pseudo"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("learners: ") + e.what());
    }
  }
  if (r.has("base")) {
    try {
      l.base = parse_base_learner(r.require<std::string>("base"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("learners: ") + e.what());
    }
  }
  l.ridge_l2 = r.get("ridge_l2", l.ridge_l2);
  l.rho = r.get("rho", l.rho);
  if (r.has("lambda")) l.lambda = r.require<double>("lambda");
  l.id = r.get<std::string>("id", default_id(l));
  r.finish();
  if (!(l.ridge_l2 >= 0.0)) throw ConfigError("learners: ridge_l2 must be >= 0");
  if (!(l.rho >= 0.0)) throw ConfigError("learners: rho must be >= 0");
  if (l.lambda && !(*l.lambda >= 0.0 && *l.lambda <= 1.0)) {
    throw ConfigError("learners: lambda must lie in [0, 1]");
  }
  if (l.lambda && l.kind != LearnerKind::HLearner && l.kind != LearnerKind::HZero) {
    throw ConfigError("learners: lambda only applies to h_learner and h_zero");
  }
  return l;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

bool LearnerSpec::needs_stage1() const {
  return kind == LearnerKind::Direct || kind == LearnerKind::HLearner;
}

ExperimentConfig parse_config(const json& doc) {
  Reader r(doc, "config");
  const auto version = r.require<int>("spec_version");
  if (version != kSpecVersion) {
    throw ConfigError("config: unsupported spec_version " + std::to_string(version));
  }
  ExperimentConfig cfg;
  cfg.seed = r.get<std::uint64_t>("seed", cfg.seed);
  const auto runs = r.get<long long>("runs", 20);
  if (runs < 1) throw ConfigError("config: runs must be >= 1");
  cfg.runs = static_cast<std::size_t>(runs);
  cfg.jobs = r.get<int>("jobs", cfg.jobs);
  if (cfg.jobs < 1) throw ConfigError("config: jobs must be >= 1");
  cfg.output_dir = r.get<std::string>("output_dir", cfg.output_dir.string());
  cfg.record_wall_time = r.get("record_wall_time", cfg.record_wall_time);

  cfg.dataset_block = r.require<json>("dataset");
  cfg.dataset = parse_dataset(cfg.dataset_block);

  if (r.has("vary")) {
    Reader v(r.raw("vary"), "vary");
    VarySpec vary;
    vary.parameter = v.require<std::string>("parameter");
    vary.values = number_list(v.raw("values"), "vary.values");
    v.finish();
    if (vary.values.empty()) throw ConfigError("vary: values must be nonempty");
    if (vary.parameter == "kind" || !cfg.dataset_block.contains(vary.parameter)) {
      // Parameters left at their defaults may still be varied.
      json probe = cfg.dataset_block;
      probe[vary.parameter] = vary.values.front();
      parse_dataset(probe);
    }
    cfg.vary = std::move(vary);
    for (const double value : cfg.vary->values) dataset_for_setting(cfg, value);
  }

  if (r.has("split")) {
    Reader s(r.raw("split"), "split");
    cfg.split.train = s.get("train", cfg.split.train);
    cfg.split.val = s.get("val", cfg.split.val);
    cfg.split.test = s.get("test", cfg.split.test);
    s.finish();
    if (cfg.split.train <= 0 || cfg.split.val <= 0 || cfg.split.test <= 0 ||
        std::abs(cfg.split.train + cfg.split.val + cfg.split.test - 1.0) > 1e-9) {
      throw ConfigError("split: ratios must be positive and sum to 1");
    }
  }

  if (r.has("preprocess")) {
    Reader p(r.raw("preprocess"), "preprocess");
    cfg.standardize_features = p.get("standardize_features", cfg.standardize_features);
    cfg.standardize_outcome = p.get("standardize_outcome", cfg.standardize_outcome);
    p.finish();
  }

  if (r.has("network")) {
    Reader n(r.raw("network"), "network");
    if (n.has("trunk")) cfg.net.trunk = width_list(n.raw("trunk"), "network.trunk");
    if (n.has("head")) cfg.net.head = width_list(n.raw("head"), "network.head");
    auto& t = cfg.net.train;
    t.epochs = n.get("epochs", t.epochs);
    t.batch_size = n.get<Index>("batch_size", t.batch_size);
    t.learning_rate = n.get("learning_rate", t.learning_rate);
    t.weight_decay = n.get("weight_decay", t.weight_decay);
    n.finish();
    t.validate();
  }

  double ridge_l2 = 1.0;
  BaseLearner base = BaseLearner::Mlp;
  if (r.has("ridge")) {
    Reader rr(r.raw("ridge"), "ridge");
    ridge_l2 = rr.get("l2", ridge_l2);
    rr.finish();
    if (!(ridge_l2 >= 0.0)) throw ConfigError("ridge: l2 must be >= 0");
  }
  if (r.has("base")) {
    const auto name = r.require<std::string>("base");
    if (name == "ridge") {
      base = BaseLearner::Ridge;
    } else if (name != "mlp") {
      throw ConfigError("config: base must be 'mlp' or 'ridge'");
    }
  }

  cfg.stage1.base.kind = base;
  cfg.stage1.base.ridge.l2 = ridge_l2;
  if (r.has("stage1")) {
    Reader s(r.raw("stage1"), "stage1");
    const auto outcome = s.get<std::string>("outcome", "tarnet");
    if (outcome == "tarnet") {
      cfg.stage1.outcome = OutcomeNuisance::Tarnet;
    } else if (outcome == "t_learner") {
      cfg.stage1.outcome = OutcomeNuisance::TLearner;
    } else {
      throw ConfigError("stage1: outcome must be 'tarnet' or 't_learner'");
    }
    if (s.has("base")) {
      const auto name = s.require<std::string>("base");
      if (name == "ridge") {
        cfg.stage1.base.kind = BaseLearner::Ridge;
      } else if (name == "mlp") {
        cfg.stage1.base.kind = BaseLearner::Mlp;
      } else {
        throw ConfigError("stage1: base must be 'mlp' or 'ridge'");
      }
    }
    cfg.stage1.base.ridge.l2 = s.get("ridge_l2", cfg.stage1.base.ridge.l2);
    cfg.stage1.clip = s.get("clip", cfg.stage1.clip);
    cfg.stage1.propensity.l2 = s.get("propensity_l2", cfg.stage1.propensity.l2);
    s.finish();
  }
  cfg.stage1.base.net = cfg.net;
  cfg.stage1.validate();

  if (r.has("lambda_grid")) {
    cfg.lambda_grid = number_list(r.raw("lambda_grid"), "lambda_grid");
    if (cfg.lambda_grid.empty()) throw ConfigError("lambda_grid: must be nonempty");
    for (const double l : cfg.lambda_grid) {
      if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("lambda_grid: values must lie in [0, 1]");
    }
  }

  const auto& list = r.raw("learners");
  if (!list.is_array() || list.empty()) throw ConfigError("learners: need at least one learner");
  std::set<std::string> ids;
  for (const auto& item : list) {
    cfg.learners.push_back(parse_learner(item, base, ridge_l2));
    if (!ids.insert(cfg.learners.back().id).second) {
      throw ConfigError("learners: duplicate id '" + cfg.learners.back().id + "'");
    }
  }
  r.finish();

  cfg.canonical = doc;
  cfg.canonical.erase("jobs");
  cfg.canonical.erase("output_dir");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

void set_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.canonical["seed"] = seed;
}

void set_runs(ExperimentConfig& cfg, std::size_t runs) {
  if (runs < 1) throw ConfigError("config: runs must be >= 1");
  cfg.runs = runs;
  cfg.canonical["runs"] = runs;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.canonical.dump())));
  return buf;
}

DatasetSpec dataset_for_setting(const ExperimentConfig& cfg, std::optional<double> setting) {
  if (!setting || !cfg.vary) return cfg.dataset;
  json block = cfg.dataset_block;
  const auto& key = cfg.vary->parameter;
  // Integer-valued parameters such as n or s_size.
  const double v = *setting;
  if (std::floor(v) == v && (key == "n" || key == "d" || key == "s_size")) {
    block[key] = static_cast<long long>(v);
  } else {
    block[key] = v;
  }
  return parse_dataset(block);
}

RunData make_run_data(const DatasetSpec& spec, std::uint64_t data_seed) {
  RunData out;
  switch (spec.kind) {
    case DatasetKind::Toy:
      out.generated = generate_toy(spec.toy, data_seed);
      out.feature_names = {"x"};
      break;
    case DatasetKind::SemiSynthetic: {
      SemiSyntheticConfig c = spec.semi;
      c.seed = data_seed;
      auto gen = generate_semi_synthetic(c);
      out.generated = std::move(gen.generated);
      out.surface = std::move(gen.surface);
      if (spec.covariates_csv) {
        out.feature_names = load_covariates_csv(*spec.covariates_csv).names;
      } else {
        out.feature_names = default_feature_names(out.generated.data.dim());
      }
      break;
    }
    case DatasetKind::Csv: {
      auto loaded = load_csv(spec.csv_path, spec.csv_schema);
      if (!loaded.truth) {
        throw ConfigError("dataset: " + spec.csv_path.string() +
                          " has no mu0/mu1 columns, so PEHE cannot be evaluated");
      }
      out.generated.data = std::move(loaded.data);
      out.generated.truth = std::move(*loaded.truth);
      out.feature_names = std::move(loaded.feature_names);
      break;
    }
  }
  return out;
}

json to_json(const ResultRecord& r, const std::string& vary_parameter) {
  json j;
  j["config_hash"] = r.config_hash;
  if (r.setting) j[vary_parameter] = *r.setting;
  j["run"] = r.run;
  j["seed"] = r.seed;
  j["learner"] = r.learner;
  j["lambda"] = r.lambda ? json(*r.lambda) : json(nullptr);
  if (r.selected) j["selected"] = true;
  if (r.lambda_fallback) j["lambda_fallback"] = true;
  if (r.ok) {
    j["status"] = "ok";
    j["pehe_in"] = r.pehe_in;
    j["pehe_out"] = r.pehe_out;
  } else {
    j["status"] = "failed";
    j["error"] = r.error;
  }
  if (r.wall_time_s) j["wall_time_s"] = *r.wall_time_s;
  return j;
}

namespace {

// Everything one run shares across learners.
struct RunContext {
  std::uint64_t run_seed = 0;
  ObservationalDataset train_raw;
  GroundTruth train_truth;
  std::vector<std::string> feature_names;
  ObservationalDataset train, val, test;
  Matrix x_in;  // standardized train + validation rows
  Vector tau_in, tau_out;
  StandardizationStats stats;
  NetConfig net;
  NuisanceConfig stage1_cfg;
  std::optional<NuisanceSet> stage1;
  std::optional<Validation> checkpoint;
};

RunContext prepare_run(const ExperimentConfig& cfg, const DatasetSpec& spec, std::size_t run) {
  RunContext ctx;
  ctx.run_seed = derive_seed(cfg.seed, run);
  const RunData rd = make_run_data(spec, derive_seed(ctx.run_seed, 1));
  const auto& data = rd.generated.data;
  const DataSplit sp = split(data.size(), cfg.split, derive_seed(ctx.run_seed, 2));

  const auto train_raw = data.rows(sp.train);
  ctx.train_raw = train_raw;
  ctx.train_truth = rd.generated.truth.rows(sp.train);
  ctx.feature_names = rd.feature_names;
  ctx.stats = fit_standardization(train_raw, cfg.standardize_outcome);
  if (!cfg.standardize_features) {
    ctx.stats.mean.setZero();
    ctx.stats.sd.setOnes();
  }
  ctx.train = apply_standardization(train_raw, ctx.stats);
  ctx.val = apply_standardization(data.rows(sp.val), ctx.stats);
  ctx.test = apply_standardization(data.rows(sp.test), ctx.stats);
  const auto in_idx = concat(sp.train, sp.val);
  ctx.x_in = ctx.stats.apply(data.rows(in_idx).x);
  ctx.tau_in = rd.generated.truth.rows(in_idx).tau;
  ctx.tau_out = rd.generated.truth.rows(sp.test).tau;

  ctx.net = cfg.net;
  ctx.net.train.seed = derive_seed(ctx.run_seed, 3);
  ctx.stage1_cfg = cfg.stage1;
  ctx.stage1_cfg.base.net.train.seed = derive_seed(ctx.run_seed, 4);
  const Validation factual = factual_validation(ctx.val);
  ctx.stage1 = fit_nuisances(ctx.train, ctx.stage1_cfg, &factual);
  ctx.checkpoint = proxy_validation(ctx.val, *ctx.stage1);
  return ctx;
}

BaseConfig base_for(const LearnerSpec& l, const RunContext& ctx) {
  BaseConfig b;
  b.kind = l.base;
  b.ridge.l2 = l.ridge_l2;
  b.net = ctx.net;
  return b;
}

HLearnerConfig h_config(const LearnerSpec& l, const RunContext& ctx) {
  HLearnerConfig h;
  h.pseudo = l.pseudo;
  h.zero_pseudo = l.kind == LearnerKind::HZero;
  h.base = base_for(l, ctx);
  h.stage1 = ctx.stage1_cfg;
  return h;
}

struct Fit {
  EstimatorPtr estimator;
  std::optional<double> lambda;
  bool fallback = false;
};

Fit fit_learner(const LearnerSpec& l, const RunContext& ctx, const std::vector<double>& grid) {
  const Validation* val = &*ctx.checkpoint;
  const BaseConfig base = base_for(l, ctx);
  Fit f;
  switch (l.kind) {
    case LearnerKind::TLearner:
      f.estimator = fit_t_learner(ctx.train, base, val);
      break;
    case LearnerKind::SLearner:
      f.estimator = fit_s_learner(ctx.train, base, val);
      break;
    case LearnerKind::Tarnet:
      f.estimator = std::make_shared<TwoHeadEstimator>(fit_tarnet(ctx.train, ctx.net, val));
      break;
    case LearnerKind::TarnetWr:
      f.estimator = std::make_shared<TwoHeadEstimator>(
          fit_tarnet_wr(ctx.train, ctx.net, WeightRegConfig{l.rho}, val));
      break;
    case LearnerKind::OffsetNet:
      f.estimator = std::make_shared<TwoHeadEstimator>(fit_offsetnet(ctx.train, ctx.net, val));
      break;
    case LearnerKind::Direct:
      f.estimator = fit_direct(ctx.train, l.pseudo, *ctx.stage1, base, val);
      break;
    case LearnerKind::HLearner:
    case LearnerKind::HZero: {
      HLearnerConfig h = h_config(l, ctx);
      if (l.lambda) {
        h.lambda = *l.lambda;
        f.estimator = fit_h_learner(ctx.train, h, &*ctx.stage1, val);
        f.lambda = *l.lambda;
      } else {
        const auto sel = select_lambda(ctx.train, ctx.val, grid, h, *ctx.stage1, 1);
        f.estimator = sel.chosen_estimator();
        f.lambda = sel.chosen;
        f.fallback = sel.fallback;
      }
      break;
    }
  }
  return f;
}

void score(ResultRecord& rec, const CateEstimator& est, const RunContext& ctx) {
  const Vector in = ctx.stats.invert_effect(est.predict_tau(ctx.x_in));
  const Vector out = ctx.stats.invert_effect(est.predict_tau(ctx.test.x));
  rec.pehe_in = pehe(in, ctx.tau_in).root;
  rec.pehe_out = pehe(out, ctx.tau_out).root;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename Work>
RunOutput run_tasks(const ExperimentConfig& cfg, Work&& work) {
  std::vector<std::optional<double>> settings;
  if (cfg.vary) {
    for (const double v : cfg.vary->values) settings.emplace_back(v);
  } else {
    settings.emplace_back(std::nullopt);
  }
  std::vector<DatasetSpec> specs;
  for (const auto& s : settings) specs.push_back(dataset_for_setting(cfg, s));

  const std::string hash = config_hash(cfg);
  const std::size_t tasks = settings.size() * cfg.runs;
  std::vector<std::vector<ResultRecord>> slots(tasks);
  parallel_for(tasks, cfg.jobs, [&](std::size_t k) {
    const std::size_t s = k / cfg.runs;
    const std::size_t run = k % cfg.runs;
    ResultRecord proto;
    proto.config_hash = hash;
    proto.setting = settings[s];
    proto.run = run;
    proto.seed = derive_seed(cfg.seed, run);
    slots[k] = work(specs[s], run, proto);
  });

  RunOutput out;
  for (auto& slot : slots) {
    for (auto& rec : slot) {
      if (!rec.ok) ++out.failures;
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<ResultRecord> fail_all(const ResultRecord& proto, const std::vector<std::string>& ids,
                                   const std::string& message) {
  std::vector<ResultRecord> out;
  for (const auto& id : ids) {
    ResultRecord r = proto;
    r.learner = id;
    r.ok = false;
    r.error = message;
    out.push_back(std::move(r));
  }
  return out;
}

const LearnerSpec& sweep_learner(const ExperimentConfig& cfg) {
  for (const auto& l : cfg.learners) {
    if (l.kind == LearnerKind::HLearner || l.kind == LearnerKind::HZero) return l;
  }
  throw ConfigError("sweep-lambda: the config needs an h_learner or h_zero learner");
}

}  // namespace

RunOutput run_bench(const ExperimentConfig& cfg) {
  std::vector<std::string> ids;
  for (const auto& l : cfg.learners) ids.push_back(l.id);
  return run_tasks(cfg, [&](const DatasetSpec& spec, std::size_t run, const ResultRecord& proto) {
    std::vector<ResultRecord> records;
    RunContext ctx;
    try {
      ctx = prepare_run(cfg, spec, run);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      return fail_all(proto, ids, e.what());
    }
    for (const auto& l : cfg.learners) {
      ResultRecord rec = proto;
      rec.learner = l.id;
      const auto start = std::chrono::steady_clock::now();
      try {
        const Fit f = fit_learner(l, ctx, cfg.lambda_grid);
        rec.lambda = f.lambda;
        rec.lambda_fallback = f.fallback;
        score(rec, *f.estimator, ctx);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        rec.ok = false;
        rec.error = e.what();
      }
      if (cfg.record_wall_time) rec.wall_time_s = seconds_since(start);
      records.push_back(std::move(rec));
    }
    return records;
  });
}

RunOutput run_sweep_lambda(const ExperimentConfig& cfg) {
  const LearnerSpec& l = sweep_learner(cfg);
  std::vector<std::string> ids(cfg.lambda_grid.size(), l.id);
  return run_tasks(cfg, [&](const DatasetSpec& spec, std::size_t run, const ResultRecord& proto) {
    std::vector<ResultRecord> records;
    for (const double lambda : cfg.lambda_grid) {
      ResultRecord r = proto;
      r.learner = l.id;
      r.lambda = lambda;
      records.push_back(std::move(r));
    }
    const auto fail = [&](const std::string& message) {
      for (auto& r : records) {
        r.ok = false;
        r.error = message;
      }
      return records;
    };
    RunContext ctx;
    try {
      ctx = prepare_run(cfg, spec, run);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      return fail(e.what());
    }
    try {
      const auto start = std::chrono::steady_clock::now();
      const auto sel = select_lambda(ctx.train, ctx.val, cfg.lambda_grid, h_config(l, ctx),
                                     *ctx.stage1, 1);
      const double elapsed = seconds_since(start);
      for (std::size_t k = 0; k < records.size(); ++k) {
        score(records[k], *sel.estimators[k], ctx);
        records[k].selected = k == sel.chosen_index;
        records[k].lambda_fallback = sel.fallback;
        if (cfg.record_wall_time) {
          records[k].wall_time_s = elapsed / static_cast<double>(records.size());
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      return fail(e.what());
    }
    return records;
  });
}

SingleFit fit_single(const ExperimentConfig& cfg, const std::string& learner_id) {
  const LearnerSpec* chosen = &cfg.learners.front();
  if (!learner_id.empty()) {
    const auto it = std::find_if(cfg.learners.begin(), cfg.learners.end(),
                                 [&](const LearnerSpec& l) { return l.id == learner_id; });
    if (it == cfg.learners.end()) throw ConfigError("fit: no learner with id '" + learner_id + "'");
    chosen = &*it;
  }
  const std::optional<double> setting =
      cfg.vary ? std::optional<double>(cfg.vary->values.front()) : std::nullopt;
  const RunContext ctx = prepare_run(cfg, dataset_for_setting(cfg, setting), 0);
  const Fit f = fit_learner(*chosen, ctx, cfg.lambda_grid);

  SingleFit out;
  out.model = {f.estimator, ctx.stats};
  out.record.config_hash = config_hash(cfg);
  out.record.setting = setting;
  out.record.seed = ctx.run_seed;
  out.record.learner = chosen->id;
  out.record.lambda = f.lambda;
  out.record.lambda_fallback = f.fallback;
  score(out.record, *f.estimator, ctx);
  out.train_raw = ctx.train_raw;
  out.train_truth = ctx.train_truth;
  out.feature_names = ctx.feature_names;
  for (const auto kind : {PseudoKind::Ipw, PseudoKind::X, PseudoKind::Dr}) {
    const auto p = construct_pseudo(kind, ctx.train, *ctx.stage1);
    out.pseudo.emplace_back("pseudo_" + std::string(to_string(kind)),
                            ctx.stats.invert_effect(p.values));
  }
  return out;
}

std::vector<CurvePoint> summarize_records(const std::vector<ResultRecord>& records,
                                          bool by_lambda) {
  struct Key {
    std::optional<double> setting;
    std::string learner;
    std::optional<double> lambda;
    bool operator==(const Key& o) const {
      return setting == o.setting && learner == o.learner && lambda == o.lambda;
    }
  };
  std::vector<Key> keys;
  std::vector<std::vector<RunPehe>> runs;
  for (const auto& r : records) {
    if (!r.ok) continue;
    Key key{r.setting, r.learner, by_lambda ? r.lambda : std::nullopt};
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      runs.emplace_back();
      it = keys.end() - 1;
    }
    runs[static_cast<std::size_t>(it - keys.begin())].push_back({r.pehe_in, r.pehe_out});
  }
  std::vector<CurvePoint> out;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    out.push_back({keys[k].setting, keys[k].learner, keys[k].lambda, aggregate(runs[k])});
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_results_jsonl(const std::filesystem::path& path, const ExperimentConfig& cfg,
                         const std::vector<ResultRecord>& records) {
  const std::string param = cfg.vary ? cfg.vary->parameter : std::string();
  std::string text;
  for (const auto& r : records) text += to_json(r, param).dump() + '\n';
  write_text(path, text);
}

void write_summary(const std::filesystem::path& path, const ExperimentConfig& cfg,
                   const std::vector<CurvePoint>& points) {
  std::ostringstream out;
  if (cfg.vary) out << cfg.vary->parameter << ',';
  out << "learner,in_mean,in_se,out_mean,out_se,runs\n";
  for (const auto& p : points) {
    if (cfg.vary) out << format_number(p.setting.value_or(0.0)) << ',';
    std::string name = p.learner;
    if (p.lambda) name += "@" + format_number(*p.lambda);
    out << name << ',' << format_number(p.report.in.mean) << ','
        << format_number(p.report.in.se) << ',' << format_number(p.report.out.mean) << ','
        << format_number(p.report.out.se) << ',' << p.report.out.runs << '\n';
  }
  write_text(path, out.str());
}

void write_vary_curve(const std::filesystem::path& path, const ExperimentConfig& cfg,
                      const std::vector<CurvePoint>& points) {
  if (!cfg.vary) throw ConfigError("curve: config has no vary block");
  std::ostringstream out;
  out << cfg.vary->parameter << ",learner,mean_sqrt_pehe,se\n";
  for (const auto& p : points) {
    out << format_number(p.setting.value_or(0.0)) << ',' << p.learner << ','
        << format_number(p.report.out.mean) << ',' << format_number(p.report.out.se) << '\n';
  }
  write_text(path, out.str());
}

void write_lambda_curve(const std::filesystem::path& path, const ExperimentConfig& cfg,
                        const std::vector<CurvePoint>& points) {
  std::ostringstream out;
  if (cfg.vary) out << cfg.vary->parameter << ',';
  out << "lambda,in_mean,in_se,out_mean,out_se,runs\n";
  for (const auto& p : points) {
    if (cfg.vary) out << format_number(p.setting.value_or(0.0)) << ',';
    out << format_number(p.lambda.value_or(0.0)) << ',' << format_number(p.report.in.mean) << ','
        << format_number(p.report.in.se) << ',' << format_number(p.report.out.mean) << ','
        << format_number(p.report.out.se) << ',' << p.report.out.runs << '\n';
  }
  write_text(path, out.str());
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_text(path, doc.dump(2) + '\n');
}

json base_manifest(const std::string& command, const ExperimentConfig& cfg) {
  json m;
  m["command"] = command;
  m["spec_version"] = kSpecVersion;
  m["config_hash"] = config_hash(cfg);
  m["config"] = cfg.canonical;
  m["master_seed"] = cfg.seed;
  m["runs"] = cfg.runs;
  m["run_seed_rule"] = "run seed k = splitmix-derived(master_seed, k)";
  return m;
}

}  // namespace cate::cli

#include "cate/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cate/error.hpp"

namespace cate {

using nlohmann::json;

namespace {

json vec_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

json layers_to_json(const std::vector<Layer>& layers) {
  json out = json::array();
  for (const auto& l : layers) {
    json rows = json::array();
    for (Index r = 0; r < l.weight.rows(); ++r) rows.push_back(vec_to_json(l.weight.row(r).transpose()));
    out.push_back({{"weight", rows}, {"bias", vec_to_json(l.bias)}});
  }
  return out;
}

std::vector<Layer> layers_from_json(const json& j) {
  std::vector<Layer> layers;
  for (const auto& lj : j) {
    Layer l;
    l.bias = vec_from_json(lj.at("bias"));
    const auto& rows = lj.at("weight");
    const auto r_count = static_cast<Index>(rows.size());
    const Index c_count = r_count > 0 ? static_cast<Index>(rows[0].size()) : 0;
    l.weight.resize(r_count, c_count);
    for (Index r = 0; r < r_count; ++r) {
      const Vector row = vec_from_json(rows[static_cast<std::size_t>(r)]);
      if (row.size() != c_count) throw Error("model json: ragged weight matrix");
      l.weight.row(r) = row.transpose();
    }
    if (l.bias.size() != r_count) throw Error("model json: bias length mismatch");
    layers.push_back(std::move(l));
  }
  return layers;
}

json linear_to_json(const LinearModel& m) {
  return {{"coef", vec_to_json(m.coef)}, {"intercept", m.intercept},
          {"pseudo_solution", m.pseudo_solution}};
}

LinearModel linear_from_json(const json& j) {
  LinearModel m;
  m.coef = vec_from_json(j.at("coef"));
  m.intercept = j.at("intercept").get<double>();
  m.pseudo_solution = j.value("pseudo_solution", false);
  return m;
}

json widths(const std::vector<Index>& w) { return std::vector<long long>(w.begin(), w.end()); }

std::vector<Index> widths_from(const json& j) {
  const auto v = j.get<std::vector<long long>>();
  return {v.begin(), v.end()};
}

json mlp_spec_to_json(const MlpSpec& s) {
  return {{"input_dim", s.input_dim}, {"hidden", widths(s.hidden)}, {"output_dim", s.output_dim},
          {"activation", "elu"}};
}

MlpSpec mlp_spec_from_json(const json& j) {
  MlpSpec s;
  s.input_dim = j.at("input_dim").get<Index>();
  s.hidden = widths_from(j.at("hidden"));
  s.output_dim = j.at("output_dim").get<Index>();
  return s;
}

json estimator_to_json(const CateEstimator& est) {
  json j;
  j["kind"] = est.kind();
  if (const auto* e = dynamic_cast<const LinearTwoModelEstimator*>(&est)) {
    j["class"] = "linear_two_model";
    j["parameters"] = {{"mu0", linear_to_json(e->model0())}, {"mu1", linear_to_json(e->model1())}};
  } else if (const auto* e = dynamic_cast<const LinearSLearnerEstimator*>(&est)) {
    j["class"] = "linear_s_learner";
    j["parameters"] = {{"model", linear_to_json(e->model())}};
  } else if (const auto* e = dynamic_cast<const LinearEffectEstimator*>(&est)) {
    j["class"] = "linear_effect";
    j["parameters"] = {{"model", linear_to_json(e->model())}};
  } else if (const auto* e = dynamic_cast<const TwoHeadEstimator*>(&est)) {
    const auto& s = e->net().spec();
    j["class"] = "two_head";
    j["architecture"] = {{"input_dim", s.input_dim}, {"trunk", widths(s.trunk)},
                         {"head", widths(s.head)}, {"offset", s.offset}, {"activation", "elu"}};
    j["parameters"] = {{"layers", layers_to_json(e->net().params().layers)}};
  } else if (const auto* e = dynamic_cast<const MlpSLearnerEstimator*>(&est)) {
    j["class"] = "mlp_s_learner";
    j["architecture"] = mlp_spec_to_json(e->spec());
    j["parameters"] = {{"layers", layers_to_json(e->params().layers)}};
  } else if (const auto* e = dynamic_cast<const MlpEffectEstimator*>(&est)) {
    j["class"] = "mlp_effect";
    j["architecture"] = mlp_spec_to_json(e->spec());
    j["parameters"] = {{"layers", layers_to_json(e->params().layers)}};
  } else {
    throw Error("model json: cannot serialize estimator of kind " + est.kind());
  }
  return j;
}

EstimatorPtr estimator_from_json(const json& j) {
  const auto cls = j.at("class").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  const auto& p = j.at("parameters");
  if (cls == "linear_two_model") {
    return std::make_shared<LinearTwoModelEstimator>(kind, linear_from_json(p.at("mu0")),
                                                     linear_from_json(p.at("mu1")));
  }
  if (cls == "linear_s_learner") {
    return std::make_shared<LinearSLearnerEstimator>(linear_from_json(p.at("model")));
  }
  if (cls == "linear_effect") {
    return std::make_shared<LinearEffectEstimator>(kind, linear_from_json(p.at("model")));
  }
  if (cls == "two_head") {
    const auto& a = j.at("architecture");
    TwoHeadSpec s;
    s.input_dim = a.at("input_dim").get<Index>();
    s.trunk = widths_from(a.at("trunk"));
    s.head = widths_from(a.at("head"));
    s.offset = a.at("offset").get<bool>();
    ParameterSet params{layers_from_json(p.at("layers"))};
    return std::make_shared<TwoHeadEstimator>(kind, TwoHeadNet(s, std::move(params)));
  }
  if (cls == "mlp_s_learner") {
    return std::make_shared<MlpSLearnerEstimator>(mlp_spec_from_json(j.at("architecture")),
                                                  ParameterSet{layers_from_json(p.at("layers"))});
  }
  if (cls == "mlp_effect") {
    return std::make_shared<MlpEffectEstimator>(kind, mlp_spec_from_json(j.at("architecture")),
                                                ParameterSet{layers_from_json(p.at("layers"))});
  }
  throw Error("model json: unknown estimator class '" + cls + "'");
}

}  // namespace

Vector FittedModel::predict_tau(const Matrix& raw_x) const {
  if (!estimator) throw Error("fitted model: no estimator");
  const Matrix z = stats.mean.size() > 0 ? stats.apply(raw_x) : raw_x;
  return stats.invert_effect(estimator->predict_tau(z));
}

std::string model_to_json(const FittedModel& model) {
  if (!model.estimator) throw Error("model json: no estimator");
  json j;
  j["spec_version"] = kSpecVersion;
  j["estimator"] = estimator_to_json(*model.estimator);
  json st;
  st["mean"] = vec_to_json(model.stats.mean);
  st["sd"] = vec_to_json(model.stats.sd);
  if (model.stats.y_mean) {
    st["y_mean"] = *model.stats.y_mean;
    st["y_sd"] = *model.stats.y_sd;
  }
  j["standardization"] = st;
  return j.dump(1);
}

FittedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model json: parse error: ") + e.what());
  }
  try {
    const int version = j.at("spec_version").get<int>();
    if (version != kSpecVersion) {
      throw Error("model json: unsupported spec_version " + std::to_string(version));
    }
    FittedModel m;
    m.estimator = estimator_from_json(j.at("estimator"));
    const auto& st = j.at("standardization");
    m.stats.mean = vec_from_json(st.at("mean"));
    m.stats.sd = vec_from_json(st.at("sd"));
    if (st.contains("y_mean")) {
      m.stats.y_mean = st.at("y_mean").get<double>();
      m.stats.y_sd = st.at("y_sd").get<double>();
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("model json: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const FittedModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("model: cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("model: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace cate

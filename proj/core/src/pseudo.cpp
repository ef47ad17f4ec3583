#include "cate/pseudo.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "cate/error.hpp"
#include "cate/metalearners.hpp"

namespace cate {

std::string_view to_string(PseudoKind kind) noexcept {
  switch (kind) {
    case PseudoKind::Ipw: return "ipw";
    case PseudoKind::X: return "x";
    case PseudoKind::Dr: return "dr";
  }
  return "x";
}

PseudoKind parse_pseudo_kind(std::string_view name) {
  if (name == "ipw" || name == "IPW") return PseudoKind::Ipw;
  if (name == "x" || name == "X") return PseudoKind::X;
  if (name == "dr" || name == "DR") return PseudoKind::Dr;
  throw ConfigError("unknown pseudo-outcome kind '" + std::string(name) + "'");
}

Vector NuisanceSet::clipped_propensity(const Matrix& x) const {
  if (!propensity) throw ConfigError("nuisances: no propensity model");
  Vector p = propensity(x);
  if (clip > 0.0) p = p.cwiseMax(clip).cwiseMin(1.0 - clip);
  return p;
}

NuisanceSet NuisanceSet::oracle(Predictor propensity, Predictor mu0, Predictor mu1, double clip) {
  NuisanceSet n;
  n.propensity = std::move(propensity);
  n.mu0 = std::move(mu0);
  n.mu1 = std::move(mu1);
  n.provenance = NuisanceProvenance::Oracle;
  n.clip = clip;
  return n;
}

void NuisanceConfig::validate() const {
  if (!(clip >= 0.0 && clip < 0.5)) throw ConfigError("nuisances: clip must be in [0, 0.5)");
}

NuisanceSet fit_nuisances(const ObservationalDataset& data, const NuisanceConfig& cfg,
                          const Validation* val) {
  cfg.validate();
  const Index treated = data.treated_count();
  if (treated == 0 || treated == data.size()) {
    throw PositivityError("nuisances: both treatment arms must be nonempty");
  }

  auto propensity = std::make_shared<const PropensityModel>(
      fit_logistic(data.x, data.t, cfg.propensity));

  EstimatorPtr outcome;
  if (cfg.outcome == OutcomeNuisance::Tarnet && cfg.base.kind == BaseLearner::Mlp) {
    outcome = std::make_shared<TwoHeadEstimator>(fit_tarnet(data, cfg.base.net, val));
  } else {
    outcome = fit_t_learner(data, cfg.base, val);
  }

  NuisanceSet n;
  n.propensity = [propensity](const Matrix& x) { return propensity->predict_proba(x); };
  n.mu0 = [outcome](const Matrix& x) { return outcome->predict_mu0(x); };
  n.mu1 = [outcome](const Matrix& x) { return outcome->predict_mu1(x); };
  n.provenance = NuisanceProvenance::Fitted;
  n.clip = cfg.clip;
  return n;
}

double pseudo_outcome(PseudoKind kind, double t, double y, double pi, double mu0, double mu1) {
  switch (kind) {
    case PseudoKind::Ipw:
      return (t - pi) / (pi * (1.0 - pi)) * y;
    case PseudoKind::X:
      return t * (y - mu0) + (1.0 - t) * (mu1 - y);
    case PseudoKind::Dr: {
      const double mu_t = t > 0.5 ? mu1 : mu0;
      return (t - pi) / (pi * (1.0 - pi)) * (y - mu_t) + mu1 - mu0;
    }
  }
  return 0.0;
}

PseudoOutcomes construct_pseudo(PseudoKind kind, const ObservationalDataset& data,
                                const NuisanceSet& nuisances) {
  const Index n = data.size();
  Vector pi = Vector::Constant(n, 0.5);
  Vector mu0 = Vector::Zero(n);
  Vector mu1 = Vector::Zero(n);
  if (kind != PseudoKind::X) {
    pi = nuisances.clipped_propensity(data.x);
    for (Index i = 0; i < n; ++i) {
      if (!(pi[i] > 0.0 && pi[i] < 1.0)) {
        throw Error("pseudo-outcomes: propensity " + std::to_string(pi[i]) + " at row " +
                    std::to_string(i) + " is outside (0, 1)");
      }
    }
  }
  if (kind != PseudoKind::Ipw) {
    if (!nuisances.mu0 || !nuisances.mu1) throw ConfigError("pseudo-outcomes: missing outcome models");
    mu0 = nuisances.mu0(data.x);
    mu1 = nuisances.mu1(data.x);
  }
  if (pi.size() != n || mu0.size() != n || mu1.size() != n) {
    throw DimensionError("pseudo-outcomes: nuisance predictions have the wrong length");
  }

  PseudoOutcomes out;
  out.kind = kind;
  out.values.resize(n);
  for (Index i = 0; i < n; ++i) {
    out.values[i] = pseudo_outcome(kind, data.t[i], data.y[i], pi[i], mu0[i], mu1[i]);
  }
  return out;
}

}  // namespace cate

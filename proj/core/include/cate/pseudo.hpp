#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "cate/data.hpp"
#include "cate/learner_config.hpp"
#include "cate/logistic.hpp"
#include "cate/types.hpp"

namespace cate {

enum class PseudoKind { Ipw, X, Dr };

std::string_view to_string(PseudoKind kind) noexcept;
PseudoKind parse_pseudo_kind(std::string_view name);

using Predictor = std::function<Vector(const Matrix&)>;

enum class NuisanceProvenance { Fitted, Oracle };

// Estimated (or known) propensity and outcome surfaces phi = (pi, mu0, mu1).
// Predictors are immutable closures and may be shared across threads.
struct NuisanceSet {
  Predictor propensity;
  Predictor mu0;
  Predictor mu1;
  NuisanceProvenance provenance = NuisanceProvenance::Fitted;
  double clip = 0.01;

  // Propensity clipped to [clip, 1 - clip].
  Vector clipped_propensity(const Matrix& x) const;

  // Wraps known functions without fitting anything. clip = 0 keeps oracle
  // propensities untouched.
  static NuisanceSet oracle(Predictor propensity, Predictor mu0, Predictor mu1, double clip = 0.0);
};

enum class OutcomeNuisance { Tarnet, TLearner };

struct NuisanceConfig {
  OutcomeNuisance outcome = OutcomeNuisance::Tarnet;
  BaseConfig base;  // TLearner base; Tarnet uses base.net
  LogisticConfig propensity;
  double clip = 0.01;

  void validate() const;
};

// Fits pi by penalized logistic regression and mu0/mu1 with the configured
// outcome learner. `val`, when given, drives checkpoint selection of the
// outcome networks. Throws PositivityError when an arm is empty.
NuisanceSet fit_nuisances(const ObservationalDataset& data, const NuisanceConfig& cfg,
                          const Validation* val = nullptr);

struct PseudoOutcomes {
  Vector values;
  PseudoKind kind = PseudoKind::X;
};

// Single-row pseudo-outcome for the given nuisance values.
double pseudo_outcome(PseudoKind kind, double t, double y, double pi, double mu0, double mu1);

PseudoOutcomes construct_pseudo(PseudoKind kind, const ObservationalDataset& data,
                                const NuisanceSet& nuisances);

}  // namespace cate

#include "cate/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cate/error.hpp"
#include "cate/logistic.hpp"
#include "cate/random.hpp"

namespace cate {

void ToyDgpConfig::validate() const {
  if (!(noise_sd >= 0.0)) throw ConfigError("toy: noise_sd must be >= 0");
  if (n < 2) throw ConfigError("toy: n must be >= 2");
  if (!(x_low < x_high)) throw ConfigError("toy: x_low must be < x_high");
  if (!(treated_prob > 0.0 && treated_prob < 1.0)) {
    throw ConfigError("toy: treated_prob must lie in (0, 1)");
  }
}

double toy_mu0(const ToyDgpConfig& cfg, double x) noexcept { return std::sin(cfg.omega * x); }

double toy_mu1(const ToyDgpConfig& cfg, double x) noexcept {
  return std::sin(cfg.omega * x + cfg.delta) + cfg.beta;
}

double true_cate(const ToyDgpConfig& cfg, double x) noexcept {
  return toy_mu1(cfg, x) - toy_mu0(cfg, x);
}

GeneratedData generate_toy(const ToyDgpConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(cfg.x_low, cfg.x_high);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Matrix x(cfg.n, 1);
  Vector t(cfg.n), y(cfg.n), mu0(cfg.n), mu1(cfg.n);
  for (Index i = 0; i < cfg.n; ++i) {
    x(i, 0) = ux(rng);
    t[i] = u01(rng) < cfg.treated_prob ? 1.0 : 0.0;
    mu0[i] = toy_mu0(cfg, x(i, 0));
    mu1[i] = toy_mu1(cfg, x(i, 0));
    const double eps = noise(rng);
    y[i] = (t[i] > 0.5 ? mu1[i] : mu0[i]) + cfg.noise_sd * eps;
  }
  return {ObservationalDataset::make(std::move(x), std::move(t), std::move(y)),
          GroundTruth::from_potential_outcomes(std::move(mu0), std::move(mu1))};
}

Index SemiSyntheticConfig::shared_count() const {
  return static_cast<Index>(std::lround(shared_fraction * static_cast<double>(s_size)));
}

void SemiSyntheticConfig::validate() const {
  if (s_size < 1) throw ConfigError("semi-synthetic: s_size must be >= 1");
  if (!(shared_fraction >= 0.0 && shared_fraction <= 1.0)) {
    throw ConfigError("semi-synthetic: shared_fraction must lie in [0, 1]");
  }
  if (!(alpha >= 0.0)) throw ConfigError("semi-synthetic: alpha must be >= 0");
  if (!(noise_sd >= 0.0)) throw ConfigError("semi-synthetic: noise_sd must be >= 0");
  if (!(treated_fraction > 0.0 && treated_fraction < 1.0)) {
    throw ConfigError("semi-synthetic: treated_fraction must lie in (0, 1)");
  }
  const Index dim = covariate_dim();
  if (s_size > dim) {
    throw ConfigError("semi-synthetic: s_size " + std::to_string(s_size) +
                      " exceeds covariate dimension " + std::to_string(dim));
  }
  const Index needed = 2 * s_size - shared_count();
  if (needed > dim) {
    throw ConfigError("semi-synthetic: S0 and S1 need " + std::to_string(needed) +
                      " distinct features but only " + std::to_string(dim) + " exist");
  }
  if (covariates) {
    if (covariates->rows() < 2) throw ConfigError("semi-synthetic: need at least 2 covariate rows");
    if (!covariates->allFinite()) throw ValidationError("semi-synthetic: non-finite covariate");
  } else if (n < 2) {
    throw ConfigError("semi-synthetic: n must be >= 2");
  }
}

double ResponseSurface::mu(int arm, const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  const auto& set = arm == 0 ? s0 : s1;
  double linear = 0.0, quadratic = 0.0, interaction = 0.0;
  for (std::size_t a = 0; a < set.size(); ++a) {
    const double xa = row[set[a]];
    linear += xa;
    quadratic += xa * xa;
    if (interactions == InteractionConvention::UnorderedPairs) {
      for (std::size_t b = a + 1; b < set.size(); ++b) interaction += xa * row[set[b]];
    } else {
      for (std::size_t b = 0; b < set.size(); ++b) interaction += xa * row[set[b]];
    }
  }
  return 2.0 * linear + 2.0 * quadratic + interaction;
}

Index ResponseSurface::overlap() const {
  std::vector<Index> a = s0, b = s1, out;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return static_cast<Index>(out.size());
}

double true_cate(const ResponseSurface& surface, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  return surface.mu(1, row) - surface.mu(0, row);
}

Vector assignment_score(const ResponseSurface& surface, const Matrix& x) {
  Vector score = Vector::Zero(x.rows());
  for (std::size_t k = 0; k < surface.s.size(); ++k) {
    score += surface.beta[static_cast<Index>(k)] * x.col(surface.s[k]);
  }
  return score;
}

SemiSyntheticData generate_semi_synthetic(const SemiSyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Matrix x;
  if (cfg.covariates) {
    x = *cfg.covariates;
  } else {
    x.resize(cfg.n, cfg.d);
    for (Index i = 0; i < cfg.n; ++i) {
      for (Index j = 0; j < cfg.d; ++j) x(i, j) = normal(rng);
    }
  }
  const Index n = x.rows();
  const Index dim = x.cols();

  // Random feature order: the first `shared` go to both sets, then each set
  // takes its own disjoint block.
  std::vector<Index> perm(static_cast<std::size_t>(dim));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[static_cast<std::size_t>(rng() % (i + 1))]);
  }
  const auto shared = static_cast<std::size_t>(cfg.shared_count());
  const auto own = static_cast<std::size_t>(cfg.s_size) - shared;
  ResponseSurface surface;
  surface.interactions = cfg.interactions;
  surface.s0.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(shared + own));
  surface.s1.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(shared));
  surface.s1.insert(surface.s1.end(), perm.begin() + static_cast<std::ptrdiff_t>(shared + own),
                    perm.begin() + static_cast<std::ptrdiff_t>(shared + 2 * own));
  std::sort(surface.s0.begin(), surface.s0.end());
  std::sort(surface.s1.begin(), surface.s1.end());
  std::set_union(surface.s0.begin(), surface.s0.end(), surface.s1.begin(), surface.s1.end(),
                 std::back_inserter(surface.s));
  surface.beta.resize(static_cast<Index>(surface.s.size()));
  for (Index k = 0; k < surface.beta.size(); ++k) surface.beta[k] = normal(rng);

  Vector propensity(n);
  if (cfg.alpha > 0.0) {
    const Vector score = assignment_score(surface, x);
    for (Index i = 0; i < n; ++i) propensity[i] = sigmoid(cfg.alpha * score[i]);
  } else {
    propensity.setConstant(cfg.treated_fraction);
  }

  Vector t(n), y(n), mu0(n), mu1(n);
  for (Index i = 0; i < n; ++i) {
    mu0[i] = surface.mu(0, x.row(i));
    mu1[i] = surface.mu(1, x.row(i));
    t[i] = u01(rng) < propensity[i] ? 1.0 : 0.0;
    const double eps = normal(rng);
    y[i] = (t[i] > 0.5 ? mu1[i] : mu0[i]) + cfg.noise_sd * eps;
  }

  SemiSyntheticData out;
  out.generated.data = ObservationalDataset::make(std::move(x), std::move(t), std::move(y));
  out.generated.truth = GroundTruth::from_potential_outcomes(std::move(mu0), std::move(mu1));
  out.surface = std::move(surface);
  out.propensity = std::move(propensity);
  return out;
}

}  // namespace cate

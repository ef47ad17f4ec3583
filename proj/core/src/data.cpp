#include "cate/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cate/error.hpp"
#include "cate/random.hpp"

namespace cate {

ObservationalDataset ObservationalDataset::make(Matrix x, Vector t, Vector y) {
  ObservationalDataset d{std::move(x), std::move(t), std::move(y)};
  d.validate();
  return d;
}

Index ObservationalDataset::treated_count() const {
  return static_cast<Index>((t.array() > 0.5).count());
}

void ObservationalDataset::validate() const {
  if (t.size() != x.rows() || y.size() != x.rows()) {
    throw DimensionError("dataset: x, t and y must have equal row counts (x=" +
                         std::to_string(x.rows()) + ", t=" + std::to_string(t.size()) +
                         ", y=" + std::to_string(y.size()) + ")");
  }
  for (Index i = 0; i < x.rows(); ++i) {
    if (t[i] != 0.0 && t[i] != 1.0) {
      throw ValidationError("dataset: treatment at row " + std::to_string(i) +
                            " is not 0 or 1");
    }
    if (!std::isfinite(y[i])) {
      throw ValidationError("dataset: non-finite outcome at row " + std::to_string(i));
    }
    for (Index j = 0; j < x.cols(); ++j) {
      if (!std::isfinite(x(i, j))) {
        throw ValidationError("dataset: non-finite covariate at row " + std::to_string(i) +
                              ", column " + std::to_string(j));
      }
    }
  }
}

ObservationalDataset ObservationalDataset::rows(std::span<const Index> idx) const {
  ObservationalDataset out;
  const auto n = static_cast<Index>(idx.size());
  out.x.resize(n, x.cols());
  out.t.resize(n);
  out.y.resize(n);
  for (Index r = 0; r < n; ++r) {
    const Index i = idx[static_cast<std::size_t>(r)];
    out.x.row(r) = x.row(i);
    out.t[r] = t[i];
    out.y[r] = y[i];
  }
  return out;
}

GroundTruth GroundTruth::from_potential_outcomes(Vector mu0, Vector mu1) {
  if (mu0.size() != mu1.size()) {
    throw DimensionError("ground truth: mu0 and mu1 lengths differ");
  }
  GroundTruth g;
  g.tau = mu1 - mu0;
  g.mu0 = std::move(mu0);
  g.mu1 = std::move(mu1);
  return g;
}

GroundTruth GroundTruth::rows(std::span<const Index> idx) const {
  GroundTruth out;
  const auto n = static_cast<Index>(idx.size());
  out.mu0.resize(n);
  out.mu1.resize(n);
  out.tau.resize(n);
  for (Index r = 0; r < n; ++r) {
    const Index i = idx[static_cast<std::size_t>(r)];
    out.mu0[r] = mu0[i];
    out.mu1[r] = mu1[i];
    out.tau[r] = tau[i];
  }
  return out;
}

namespace {

// Largest-remainder apportionment of n into three blocks, then every empty
// block borrows one row from the currently largest block.
std::array<Index, 3> block_sizes(Index n, const std::array<double, 3>& ratios) {
  std::array<Index, 3> sizes{};
  std::array<double, 3> remainder{};
  Index assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = ratios[k] * static_cast<double>(n);
    sizes[k] = static_cast<Index>(std::floor(exact));
    remainder[k] = exact - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];

  for (std::size_t k = 0; k < 3; ++k) {
    if (sizes[k] > 0) continue;
    const auto largest = static_cast<std::size_t>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    --sizes[largest];
    ++sizes[k];
  }
  return sizes;
}

}  // namespace

DataSplit split(Index n, const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0) {
    throw ConfigError("split: ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split: ratios must sum to 1");
  }
  if (n < 3) throw ConfigError("split: need at least 3 rows, got " + std::to_string(n));

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(perm[i], perm[j]);
  }

  const auto sizes = block_sizes(n, {ratios.train, ratios.val, ratios.test});
  DataSplit s;
  auto it = perm.begin();
  s.train.assign(it, it + sizes[0]);
  it += sizes[0];
  s.val.assign(it, it + sizes[1]);
  it += sizes[1];
  s.test.assign(it, perm.end());
  return s;
}

std::vector<Index> concat(std::span<const Index> a, std::span<const Index> b) {
  std::vector<Index> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Matrix StandardizationStats::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw DimensionError("standardize: column count mismatch");
  return (x.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

Matrix StandardizationStats::invert(const Matrix& z) const {
  if (z.cols() != mean.size()) throw DimensionError("standardize: column count mismatch");
  Matrix x = z.array().rowwise() * sd.transpose().array();
  return x.rowwise() + mean.transpose();
}

Vector StandardizationStats::apply_outcome(const Vector& y) const {
  if (!y_mean) return y;
  return (y.array() - *y_mean) / *y_sd;
}

Vector StandardizationStats::invert_outcome(const Vector& y) const {
  if (!y_mean) return y;
  return (y.array() * *y_sd + *y_mean).matrix();
}

Vector StandardizationStats::invert_effect(const Vector& tau) const {
  if (!y_sd) return tau;
  return tau * *y_sd;
}

namespace {

std::pair<double, double> mean_and_sd(const Eigen::Ref<const Vector>& v) {
  const double m = v.mean();
  const double var = (v.array() - m).square().mean();
  double sd = std::sqrt(var);
  if (!(sd > 0.0) || !std::isfinite(sd)) sd = 1.0;
  return {m, sd};
}

}  // namespace

StandardizationStats fit_standardization(const ObservationalDataset& train,
                                         bool standardize_outcome) {
  if (train.size() == 0) throw ValidationError("standardize: empty training set");
  StandardizationStats s;
  s.mean.resize(train.dim());
  s.sd.resize(train.dim());
  for (Index j = 0; j < train.dim(); ++j) {
    const auto [m, sd] = mean_and_sd(train.x.col(j));
    s.mean[j] = m;
    s.sd[j] = sd;
  }
  if (standardize_outcome) {
    const auto [m, sd] = mean_and_sd(train.y);
    s.y_mean = m;
    s.y_sd = sd;
  }
  return s;
}

ObservationalDataset apply_standardization(const ObservationalDataset& data,
                                           const StandardizationStats& stats) {
  return {stats.apply(data.x), data.t, stats.apply_outcome(data.y)};
}

StandardizedSplit standardize(const ObservationalDataset& train,
                              std::span<const ObservationalDataset> others,
                              bool standardize_outcome) {
  StandardizedSplit out;
  out.stats = fit_standardization(train, standardize_outcome);
  out.train = apply_standardization(train, out.stats);
  out.others.reserve(others.size());
  for (const auto& o : others) out.others.push_back(apply_standardization(o, out.stats));
  return out;
}

ObservationalDataset arm_subset(const ObservationalDataset& data, int arm) {
  std::vector<Index> idx;
  const double want = arm == 0 ? 0.0 : 1.0;
  for (Index i = 0; i < data.size(); ++i) {
    if (data.t[i] == want) idx.push_back(i);
  }
  return data.rows(idx);
}

std::vector<std::string> default_feature_names(Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace cate

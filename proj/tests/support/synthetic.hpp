#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "glmshap/dataset.hpp"
#include "glmshap/family.hpp"

namespace testsupport {

inline std::vector<glmshap::FamilyKind> all_families() {
  using glmshap::FamilyKind;
  return {FamilyKind::kGaussianIdentity, FamilyKind::kBernoulliLogit, FamilyKind::kPoissonLog,
          FamilyKind::kZtPoissonLog, FamilyKind::kGeometricLog};
}

inline std::string family_label(glmshap::FamilyKind kind) {
  return glmshap::Family(kind).name();
}

/// Players x0..x{p-1}, one N(0,1) column each; coefficients in [-1, 1].
inline glmshap::Dataset make_synthetic(glmshap::FamilyKind kind, std::size_t n, std::size_t p,
                                       std::uint64_t seed) {
  using glmshap::FamilyKind;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
  }
  Eigen::VectorXd beta(static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = coef(rng);

  const bool count = kind != FamilyKind::kGaussianIdentity && kind != FamilyKind::kBernoulliLogit;
  const double intercept = count ? 0.5 : 0.0;
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double eta = intercept + x.row(i).dot(beta);
    switch (kind) {
      case FamilyKind::kGaussianIdentity:
        y(i) = eta + normal(rng);
        break;
      case FamilyKind::kBernoulliLogit:
        y(i) = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 1.0 / (1.0 + std::exp(-eta))
                   ? 1.0
                   : 0.0;
        break;
      case FamilyKind::kPoissonLog:
        y(i) = std::poisson_distribution<long>(std::exp(eta))(rng);
        break;
      case FamilyKind::kZtPoissonLog: {
        long v = 0;
        while (v == 0) v = std::poisson_distribution<long>(std::exp(eta))(rng);
        y(i) = static_cast<double>(v);
        break;
      }
      case FamilyKind::kGeometricLog: {
        const double mu = std::exp(eta);
        y(i) = std::geometric_distribution<long>(1.0 / (1.0 + mu))(rng);
        break;
      }
    }
  }

  std::vector<std::string> names;
  std::vector<glmshap::Player> players;
  for (std::size_t j = 0; j < p; ++j) {
    names.push_back("x" + std::to_string(j));
    players.push_back({names.back(), {j}});
  }
  return glmshap::Dataset(y, x, names, players);
}

/// Average marginal contribution over every ordering, from any game v.
inline std::vector<double> oracle_shapley(std::size_t p,
                                          const std::function<double(std::uint64_t)>& v) {
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::vector<long double> total(p, 0.0L);
  long double count = 0.0L;
  do {
    std::uint64_t s = 0;
    for (std::size_t player : order) {
      const std::uint64_t t = s | (std::uint64_t{1} << player);
      total[player] += static_cast<long double>(v(t)) - static_cast<long double>(v(s));
      s = t;
    }
    count += 1.0L;
  } while (std::next_permutation(order.begin(), order.end()));
  std::vector<double> phi(p);
  for (std::size_t j = 0; j < p; ++j) phi[j] = static_cast<double>(total[j] / count);
  return phi;
}

/// [1, columns of `x` flagged in `bits`].
inline Eigen::MatrixXd oracle_design(const Eigen::MatrixXd& x, std::uint64_t bits) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (bits >> j & 1U) cols.push_back(j);
  }
  Eigen::MatrixXd d(x.rows(), static_cast<Eigen::Index>(cols.size()) + 1);
  d.col(0).setOnes();
  for (std::size_t k = 0; k < cols.size(); ++k) d.col(static_cast<Eigen::Index>(k) + 1) = x.col(cols[k]);
  return d;
}

/// Classical 1 - RSS/TSS by least squares.
inline double oracle_r2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t bits) {
  const Eigen::MatrixXd d = oracle_design(x, bits);
  const Eigen::VectorXd b = d.colPivHouseholderQr().solve(y);
  const double rss = (y - d * b).squaredNorm();
  const double tss = (y.array() - y.mean()).matrix().squaredNorm();
  return 1.0 - rss / tss;
}

/// Squared semi-partial correlation of column j given the columns in `bits`.
inline double oracle_semi_partial_sq(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     std::uint64_t bits, Eigen::Index j) {
  const Eigen::MatrixXd d = oracle_design(x, bits);
  const Eigen::VectorXd xj = x.col(j);
  const Eigen::VectorXd e = xj - d * d.colPivHouseholderQr().solve(xj);
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double num = e.dot(yc);
  return num * num / (e.squaredNorm() * yc.squaredNorm());
}

/// log f(y; eta) written out from the densities.
inline double oracle_log_density(glmshap::FamilyKind kind, double y, double eta,
                                 double variance = 1.0) {
  using glmshap::FamilyKind;
  switch (kind) {
    case FamilyKind::kGaussianIdentity:
      return -0.5 * std::log(2.0 * M_PI * variance) - (y - eta) * (y - eta) / (2.0 * variance);
    case FamilyKind::kBernoulliLogit: {
      const double p = 1.0 / (1.0 + std::exp(-eta));
      return y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
    case FamilyKind::kPoissonLog: {
      const double lambda = std::exp(eta);
      return y * std::log(lambda) - lambda - std::lgamma(y + 1.0);
    }
    case FamilyKind::kZtPoissonLog: {
      const double lambda = std::exp(eta);
      return y * std::log(lambda) - lambda - std::lgamma(y + 1.0) - std::log(1.0 - std::exp(-lambda));
    }
    case FamilyKind::kGeometricLog: {
      const double mu = std::exp(eta);
      return y * std::log(mu / (1.0 + mu)) - std::log(1.0 + mu);
    }
  }
  return 0.0;
}

}  // namespace testsupport

#include "glmshap/family.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "glmshap/error.hpp"

namespace glmshap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + e^x) without overflow.
double log1pexp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// log(e^x - 1) for x > 0.
double logexpm1(double x) {
  return x > 1.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

// x log y with 0 log 0 = 0.
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

bool is_count(double y) { return y >= 0.0 && std::floor(y) == y; }

}  // namespace

double zt_poisson_mean(double rate) {
  if (rate < 1e-8) return 1.0 + 0.5 * rate;
  return rate / -std::expm1(-rate);
}

double zt_poisson_rate_for_mean(double mean) {
  if (!(mean > 1.0)) {
    throw DomainError("zero-truncated Poisson mean must exceed 1, got " +
                      std::to_string(mean));
  }
  // zt_poisson_mean is increasing and convex with mean(rate) > rate, so
  // Newton from the right of the root converges monotonically.
  double rate = mean;
  for (int it = 0; it < 200; ++it) {
    const double m = zt_poisson_mean(rate);
    const double slope = m * (1.0 + rate - m) / rate;  // d mean / d rate
    const double next = rate - (m - mean) / slope;
    if (!(next > 0.0)) {
      rate *= 0.5;
      continue;
    }
    if (std::abs(next - rate) <= 1e-15 * rate) return next;
    rate = next;
  }
  return rate;
}

Family Family::parse(std::string_view name) {
  if (name == "gaussian") return Family(FamilyKind::kGaussianIdentity);
  if (name == "logit" || name == "bernoulli") return Family(FamilyKind::kBernoulliLogit);
  if (name == "poisson") return Family(FamilyKind::kPoissonLog);
  if (name == "zt-poisson") return Family(FamilyKind::kZtPoissonLog);
  if (name == "geometric") return Family(FamilyKind::kGeometricLog);
  throw ConfigError("unknown family '" + std::string(name) +
                    "' (expected gaussian, logit, poisson, zt-poisson or geometric)");
}

std::string Family::name() const {
  switch (kind_) {
    case FamilyKind::kGaussianIdentity: return "gaussian";
    case FamilyKind::kBernoulliLogit: return "logit";
    case FamilyKind::kPoissonLog: return "poisson";
    case FamilyKind::kZtPoissonLog: return "zt-poisson";
    case FamilyKind::kGeometricLog: return "geometric";
  }
  return "unknown";
}

bool Family::is_canonical() const {
  // The truncated Poisson is an exponential family in log(rate) as well.
  return kind_ != FamilyKind::kGeometricLog;
}

bool Family::is_discrete() const { return kind_ != FamilyKind::kGaussianIdentity; }

double Family::mean(double eta) const {
  switch (kind_) {
    case FamilyKind::kGaussianIdentity: return eta;
    case FamilyKind::kBernoulliLogit:
      return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta))
                        : std::exp(eta) / (1.0 + std::exp(eta));
    default: return std::exp(eta);
  }
}

double Family::link(double mu) const {
  switch (kind_) {
    case FamilyKind::kGaussianIdentity: return mu;
    case FamilyKind::kBernoulliLogit: return std::log(mu / (1.0 - mu));
    default: return std::log(mu);
  }
}

double Family::response_mean(double mu) const {
  return kind_ == FamilyKind::kZtPoissonLog ? zt_poisson_mean(mu) : mu;
}

double Family::log_density_eta(double y, double eta) const {
  switch (kind_) {
    case FamilyKind::kGaussianIdentity: {
      const double r = y - eta;
      return -0.5 * std::log(2.0 * std::numbers::pi * variance_) -
             r * r / (2.0 * variance_);
    }
    case FamilyKind::kBernoulliLogit:
      return y * eta - log1pexp(eta);
    case FamilyKind::kPoissonLog:
      return y * eta - std::exp(eta) - std::lgamma(y + 1.0);
    case FamilyKind::kZtPoissonLog:
      return y * eta - logexpm1(std::exp(eta)) - std::lgamma(y + 1.0);
    case FamilyKind::kGeometricLog:
      return y * eta - (y + 1.0) * log1pexp(eta);
  }
  return -kInf;
}

double Family::log_density(double y, double mu) const {
  switch (kind_) {
    case FamilyKind::kGaussianIdentity:
      return log_density_eta(y, mu);
    case FamilyKind::kBernoulliLogit:
      if (mu <= 0.0) return y == 0.0 ? 0.0 : -kInf;
      if (mu >= 1.0) return y == 1.0 ? 0.0 : -kInf;
      return xlogy(y, mu) + xlogy(1.0 - y, 1.0 - mu);
    case FamilyKind::kPoissonLog:
      if (mu <= 0.0) return y == 0.0 ? 0.0 : -kInf;
      return xlogy(y, mu) - mu - std::lgamma(y + 1.0);
    case FamilyKind::kZtPoissonLog:
      if (mu <= 0.0) return -kInf;
      return y * std::log(mu) - logexpm1(mu) - std::lgamma(y + 1.0);
    case FamilyKind::kGeometricLog:
      if (mu <= 0.0) return y == 0.0 ? 0.0 : -kInf;
      return xlogy(y, mu) - (y + 1.0) * std::log1p(mu);
  }
  return -kInf;
}

double Family::score_eta(double y, double eta) const {
  switch (kind_) {
    case FamilyKind::kGaussianIdentity: return (y - eta) / variance_;
    case FamilyKind::kBernoulliLogit:
    case FamilyKind::kPoissonLog: return y - mean(eta);
    case FamilyKind::kZtPoissonLog: return y - zt_poisson_mean(std::exp(eta));
    case FamilyKind::kGeometricLog: {
      const double mu = std::exp(eta);
      return (y - mu) / (1.0 + mu);
    }
  }
  return 0.0;
}

double Family::information_eta(double y, double eta) const {
  switch (kind_) {
    case FamilyKind::kGaussianIdentity: return 1.0 / variance_;
    case FamilyKind::kBernoulliLogit: {
      const double mu = mean(eta);
      return mu * (1.0 - mu);
    }
    case FamilyKind::kPoissonLog: return std::exp(eta);
    case FamilyKind::kZtPoissonLog: {
      // Variance of the truncated distribution: m (1 + rate - m).
      const double rate = std::exp(eta);
      const double m = zt_poisson_mean(rate);
      if (rate < 1e-6) return 0.5 * rate;
      return m * (1.0 + rate - m);
    }
    case FamilyKind::kGeometricLog: {
      const double mu = std::exp(eta);
      const double d = 1.0 + mu;
      return (y + 1.0) * mu / (d * d);
    }
  }
  return 0.0;
}

double Family::saturated_log_density(double y) const {
  switch (kind_) {
    case FamilyKind::kGaussianIdentity:
      return -0.5 * std::log(2.0 * std::numbers::pi * variance_);
    case FamilyKind::kBernoulliLogit:
      return 0.0;
    default:
      return log_density(y, y);
  }
}

double Family::probability(double mu, long j) const {
  if (kind_ == FamilyKind::kGaussianIdentity) {
    throw ConfigError("count probabilities are undefined for the gaussian family");
  }
  if (j < 0) return 0.0;
  if (kind_ == FamilyKind::kZtPoissonLog && j == 0) return 0.0;
  if (kind_ == FamilyKind::kBernoulliLogit) {
    return j == 0 ? 1.0 - mu : (j == 1 ? mu : 0.0);
  }
  return std::exp(log_density(static_cast<double>(j), mu));
}

void Family::validate_response(const Eigen::VectorXd& y) const {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = y(i);
    bool ok = std::isfinite(v);
    switch (kind_) {
      case FamilyKind::kGaussianIdentity: break;
      case FamilyKind::kBernoulliLogit: ok = v == 0.0 || v == 1.0; break;
      case FamilyKind::kPoissonLog:
      case FamilyKind::kGeometricLog: ok = ok && is_count(v); break;
      case FamilyKind::kZtPoissonLog: ok = ok && is_count(v) && v >= 1.0; break;
    }
    if (!ok) {
      throw DataError(DataErrorCode::kResponseDomain,
                      "response value " + std::to_string(v) + " at row " +
                          std::to_string(i + 1) + " is invalid for family " + name());
    }
  }
}

}  // namespace glmshap

#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace glmshap {

enum class FamilyKind {
  kGaussianIdentity,
  kBernoulliLogit,
  kPoissonLog,
  kZtPoissonLog,
  kGeometricLog,
};

/// An exponential-family distribution with its link.
///
/// Every model is parameterized by the linear predictor eta; `mean(eta)` is
/// the inverse link. For the zero-truncated Poisson the parameter returned
/// by `mean` is the rate of the untruncated Poisson (eta = log rate); its
/// actual expectation is `response_mean`.
///
/// The Gaussian family carries a fixed variance so that its log-likelihood
/// is affine in the residual sum of squares; see `calibrated_family`.
class Family {
 public:
  constexpr Family() = default;
  constexpr explicit Family(FamilyKind kind, double variance = 1.0)
      : kind_(kind), variance_(variance) {}

  static Family parse(std::string_view name);

  FamilyKind kind() const { return kind_; }
  double variance() const { return variance_; }
  std::string name() const;

  /// Canonical-link families: the score is X^T (y - mean).
  bool is_canonical() const;
  /// Counts are nonnegative integers (all but the Gaussian).
  bool is_discrete() const;

  double mean(double eta) const;
  double link(double mu) const;
  /// Expected response (differs from `mean` only for the truncated family).
  double response_mean(double mu) const;

  /// log f(y; eta); stable for large |eta|.
  double log_density_eta(double y, double eta) const;
  /// log f(y; mu); -infinity when mu sits on the domain boundary and y is
  /// not the degenerate value there.
  double log_density(double y, double mu) const;
  /// d log f / d eta.
  double score_eta(double y, double eta) const;
  /// -d^2 log f / d eta^2 (observed information, always > 0 here).
  double information_eta(double y, double eta) const;

  /// log f(y; mu = y) with 0 log 0 = 0. For the truncated family this is
  /// the rate-equals-y convention of the closed-form KL R^2.
  double saturated_log_density(double y) const;

  /// f(j; mu) for a count family; 0 outside the support.
  double probability(double mu, long j) const;

  /// Throws DataError unless every response is valid for this family.
  void validate_response(const Eigen::VectorXd& y) const;

  friend bool operator==(const Family&, const Family&) = default;

 private:
  FamilyKind kind_ = FamilyKind::kPoissonLog;
  double variance_ = 1.0;
};

/// Mean of a zero-truncated Poisson with rate `rate`: rate / (1 - e^-rate).
double zt_poisson_mean(double rate);
/// Inverse of zt_poisson_mean for a target mean > 1.
double zt_poisson_rate_for_mean(double mean);

}  // namespace glmshap

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glmshap/dataset.hpp"
#include "glmshap/error.hpp"
#include "glmshap/family.hpp"
#include "glmshap/subset_key.hpp"

namespace glmshap {

struct FitControl {
  int max_iter = 100;
  /// Relative change of the log-likelihood, |dl| / (|l| + 0.1).
  double tol = 1e-10;
  int step_halving = 10;

  void validate() const;
};

struct FittedGlm {
  Eigen::VectorXd beta;  // intercept first
  Eigen::VectorXd eta;
  Eigen::VectorXd mu;
  double loglik = 0.0;
  double deviance = 0.0;
  int iterations = 0;
  bool converged = false;
  SubsetKey subset;
  std::vector<std::size_t> columns;  // design columns behind beta(1..)
  std::vector<double> trace;         // log-likelihood after each iteration
};

/// The subset's design is rank deficient.
class SingularDesignError : public NumericalError {
 public:
  SingularDesignError(const std::string& message, std::vector<std::string> aliased)
      : NumericalError(message), aliased_(std::move(aliased)) {}
  const std::vector<std::string>& aliased() const { return aliased_; }

 private:
  std::vector<std::string> aliased_;
};

/// Newton iterations did not converge; carries the best iterate.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& message, FittedGlm best)
      : NumericalError(message), best_(std::move(best)) {}
  const FittedGlm& best() const { return best_; }

 private:
  FittedGlm best_;
};

/// The family as used for an analysis of `ds`: for the Gaussian the variance
/// is fixed at the null model's profiled estimate TSS / n, so that the
/// KL R^2 equals the classical R^2; other families are returned unchanged.
Family calibrated_family(FamilyKind kind, const Dataset& ds);

/// Log-likelihood, score and observed information of a design at `beta`.
struct Objective {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

Objective evaluate_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Family& family, const Eigen::VectorXd& beta);

/// Closed-form (or 1-D solved) intercept of the intercept-only ML fit.
double null_intercept(const Eigen::VectorXd& y, const Family& family);

/// Maximum-likelihood fit of the model with intercept plus the players in
/// `s`, by safeguarded Newton (Fisher scoring for canonical links) started
/// from the intercept-only solution.
FittedGlm fit(const Dataset& ds, const Family& family, SubsetKey s,
              const FitControl& ctl = {});

/// Linear predictor of a fitted model on the rows of `ds` (which must carry
/// the same players as the dataset it was fitted on).
Eigen::VectorXd predict_eta(const Dataset& ds, const FittedGlm& fitted);

double loglik(const Eigen::VectorXd& y, const Family& family,
              const Eigen::VectorXd& mu);
double saturated_loglik(const Dataset& ds, const Family& family);
/// K(y, mu) = 2 (l(y, y) - l(y, mu)). Throws DomainError when some mu lies
/// on the boundary of the mean domain and makes the divergence infinite.
double kl_divergence(const Dataset& ds, const Family& family,
                     const Eigen::VectorXd& mu);
/// f(j; mu).
double predict_prob(const Family& family, double mu, long j);

}  // namespace glmshap

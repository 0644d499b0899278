#include "glmshap/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace glmshap {

namespace {

constexpr double kSeparationEps = 1e-10;

double relative_change(double previous, double current) {
  return std::abs(current - previous) / (std::abs(current) + 0.1);
}

std::vector<std::string> aliased_columns(const Dataset& ds, const SubsetDesign& d) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x.rows(), d.x.cols());
  qr.setThreshold(1e-10);
  qr.compute(d.x);
  std::vector<std::string> aliased;
  const auto rank = qr.rank();
  if (rank == d.x.cols()) return aliased;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = rank; k < d.x.cols(); ++k) {
    const auto j = static_cast<std::size_t>(perm(k));
    aliased.push_back(j == 0 ? std::string("(Intercept)")
                             : ds.column_names()[d.columns[j - 1]]);
  }
  std::sort(aliased.begin(), aliased.end());
  return aliased;
}

Eigen::VectorXd newton_direction(const Eigen::MatrixXd& information,
                                 const Eigen::VectorXd& score) {
  Eigen::LLT<Eigen::MatrixXd> llt(information);
  if (llt.info() == Eigen::Success) return llt.solve(score);
  return information.colPivHouseholderQr().solve(score);
}

}  // namespace

void FitControl::validate() const {
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (step_halving < 0) throw ConfigError("step_halving must be nonnegative");
}

Family calibrated_family(FamilyKind kind, const Dataset& ds) {
  if (kind != FamilyKind::kGaussianIdentity) return Family(kind);
  const Eigen::VectorXd& y = ds.y();
  const double tss = (y.array() - y.mean()).square().sum();
  if (!(tss > 0.0)) {
    throw DegenerateRunError("gaussian response is constant; null deviance is zero");
  }
  return Family(kind, tss / static_cast<double>(ds.n()));
}

Objective evaluate_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Family& family, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd s(eta.size());
  Eigen::VectorXd w(eta.size());
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += family.log_density_eta(y(i), eta(i));
    s(i) = family.score_eta(y(i), eta(i));
    w(i) = family.information_eta(y(i), eta(i));
  }
  Objective out;
  out.loglik = ll;
  out.score.noalias() = x.transpose() * s;
  const Eigen::MatrixXd xw = x.array().colwise() * w.array().sqrt();
  out.information.noalias() = xw.transpose() * xw;
  return out;
}

double null_intercept(const Eigen::VectorXd& y, const Family& family) {
  const double ybar = y.mean();
  switch (family.kind()) {
    case FamilyKind::kGaussianIdentity:
      return ybar;
    case FamilyKind::kBernoulliLogit: {
      const double p = std::clamp(ybar, kSeparationEps, 1.0 - kSeparationEps);
      return std::log(p / (1.0 - p));
    }
    case FamilyKind::kPoissonLog:
    case FamilyKind::kGeometricLog:
      return std::log(std::max(ybar, kSeparationEps));
    case FamilyKind::kZtPoissonLog:
      if (ybar <= 1.0 + 1e-12) return std::log(kSeparationEps);
      return std::log(zt_poisson_rate_for_mean(ybar));
  }
  return 0.0;
}

FittedGlm fit(const Dataset& ds, const Family& family, SubsetKey s,
              const FitControl& ctl) {
  ctl.validate();
  family.validate_response(ds.y());
  if (!s.is_subset_of(SubsetKey::full(ds.p()))) {
    throw ConfigError("subset addresses players beyond the dataset");
  }
  const SubsetDesign design = select_columns(ds, s);
  if (auto aliased = aliased_columns(ds, design); !aliased.empty()) {
    std::string names;
    for (const auto& a : aliased) names += (names.empty() ? "" : ", ") + a;
    throw SingularDesignError("rank-deficient design; aliased columns: " + names,
                              std::move(aliased));
  }
  const Eigen::MatrixXd& x = design.x;
  const Eigen::VectorXd& y = ds.y();

  FittedGlm out;
  out.subset = s;
  out.columns = design.columns;
  out.beta = Eigen::VectorXd::Zero(x.cols());
  out.beta(0) = null_intercept(y, family);

  Objective obj = evaluate_objective(x, y, family, out.beta);
  for (int iter = 1; iter <= ctl.max_iter; ++iter) {
    out.iterations = iter;
    const Eigen::VectorXd step = newton_direction(obj.information, obj.score);
    double scale = 1.0;
    Eigen::VectorXd candidate = out.beta + step;
    Objective next = evaluate_objective(x, y, family, candidate);
    for (int h = 0; h < ctl.step_halving &&
                    !(std::isfinite(next.loglik) && next.loglik >= obj.loglik);
         ++h) {
      scale *= 0.5;
      candidate = out.beta + scale * step;
      next = evaluate_objective(x, y, family, candidate);
    }
    if (!(std::isfinite(next.loglik) && next.loglik >= obj.loglik)) {
      // No ascent along the Newton direction: at the optimum up to rounding,
      // or stuck.
      out.converged = std::isfinite(next.loglik) &&
                      relative_change(obj.loglik, next.loglik) < ctl.tol;
      break;
    }
    const double change = relative_change(obj.loglik, next.loglik);
    out.beta = candidate;
    obj = std::move(next);
    out.trace.push_back(obj.loglik);
    if (change < ctl.tol) {
      out.converged = true;
      break;
    }
  }

  out.eta = x * out.beta;
  out.mu = out.eta.unaryExpr([&](double e) { return family.mean(e); });
  out.loglik = obj.loglik;
  out.deviance = 2.0 * (saturated_loglik(ds, family) - out.loglik);

  const std::string where = " (subset bits " + std::to_string(s.bits) + ")";
  if (!out.converged) {
    std::ostringstream msg;
    msg << "fit did not converge within " << ctl.max_iter << " iterations" << where
        << "; log-likelihood trace:";
    const std::size_t from = out.trace.size() > 5 ? out.trace.size() - 5 : 0;
    for (std::size_t k = from; k < out.trace.size(); ++k) msg << ' ' << out.trace[k];
    throw ConvergenceError(msg.str(), std::move(out));
  }
  if (family.kind() == FamilyKind::kBernoulliLogit) {
    const bool boundary = (out.mu.array() < kSeparationEps).any() ||
                          (out.mu.array() > 1.0 - kSeparationEps).any();
    if (boundary) {
      throw ConvergenceError(
          "fitted probabilities numerically 0 or 1 (possible separation)" + where,
          std::move(out));
    }
  }
  return out;
}

Eigen::VectorXd predict_eta(const Dataset& ds, const FittedGlm& fitted) {
  const SubsetDesign design = select_columns(ds, fitted.subset);
  if (design.columns != fitted.columns) {
    throw ConfigError("prediction dataset does not match the fitted design");
  }
  return design.x * fitted.beta;
}

double loglik(const Eigen::VectorXd& y, const Family& family,
              const Eigen::VectorXd& mu) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) ll += family.log_density(y(i), mu(i));
  return ll;
}

double saturated_loglik(const Dataset& ds, const Family& family) {
  family.validate_response(ds.y());
  double ll = 0.0;
  for (Eigen::Index i = 0; i < ds.y().size(); ++i) {
    ll += family.saturated_log_density(ds.y()(i));
  }
  return ll;
}

double kl_divergence(const Dataset& ds, const Family& family,
                     const Eigen::VectorXd& mu) {
  family.validate_response(ds.y());
  if (mu.size() != ds.y().size()) {
    throw ConfigError("mean vector length does not match the response");
  }
  double k = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double y = ds.y()(i);
    const double ld = family.log_density(y, mu(i));
    if (!std::isfinite(ld)) {
      throw DomainError("divergence is infinite: mean " + std::to_string(mu(i)) +
                        " at row " + std::to_string(i + 1) +
                        " lies on the domain boundary for y = " + std::to_string(y));
    }
    k += family.saturated_log_density(y) - ld;
  }
  return 2.0 * k;
}

double predict_prob(const Family& family, double mu, long j) {
  return family.probability(mu, j);
}

}  // namespace glmshap

#include <cmath>
#include <random>

#include "doctest.h"
#include "support/synthetic.hpp"

#include "glmshap/error.hpp"
#include "glmshap/glm.hpp"

using namespace glmshap;
using testsupport::make_synthetic;

namespace {

Dataset intercept_only_data(const Eigen::VectorXd& y) {
  Eigen::MatrixXd x(y.size(), 1);
  for (Eigen::Index i = 0; i < y.size(); ++i) x(i, 0) = static_cast<double>(i % 3) - 1.0;
  return Dataset(y, x, {"z"}, {{"z", {0}}});
}

}  // namespace

TEST_CASE("count probabilities") {
  CHECK(predict_prob(Family(FamilyKind::kPoissonLog), 1.0, 0) == doctest::Approx(std::exp(-1.0)));
  CHECK(predict_prob(Family(FamilyKind::kZtPoissonLog), 2.0, 0) == 0.0);
  CHECK(predict_prob(Family(FamilyKind::kGeometricLog), 1.0, 2) == doctest::Approx(0.125));
  CHECK(predict_prob(Family(FamilyKind::kPoissonLog), 1.0, -1) == 0.0);
  CHECK_THROWS_AS(predict_prob(Family(FamilyKind::kGaussianIdentity), 1.0, 0), ConfigError);

  // zt: f(1; rate) = rate e^-rate / (1 - e^-rate)
  const double rate = 1.7;
  CHECK(predict_prob(Family(FamilyKind::kZtPoissonLog), rate, 1) ==
        doctest::Approx(rate * std::exp(-rate) / (1.0 - std::exp(-rate))).epsilon(1e-12));
}

TEST_CASE("log densities agree with written-out forms") {
  for (FamilyKind kind : testsupport::all_families()) {
    const Family family(kind, 1.3);
    for (double eta : {-1.2, 0.0, 0.7, 2.1}) {
      std::vector<double> ys;
      switch (kind) {
        case FamilyKind::kGaussianIdentity: ys = {-0.3, 1.4}; break;
        case FamilyKind::kBernoulliLogit: ys = {0.0, 1.0}; break;
        case FamilyKind::kZtPoissonLog: ys = {1.0, 4.0}; break;
        default: ys = {0.0, 3.0}; break;
      }
      for (double y : ys) {
        CHECK(family.log_density_eta(y, eta) ==
              doctest::Approx(testsupport::oracle_log_density(kind, y, eta, 1.3)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("saturated log-likelihood of a small poisson sample") {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  const Dataset ds = intercept_only_data(y);
  double expected = 0.0;
  for (double v : {1.0, 2.0, 3.0}) expected += v * std::log(v) - v - std::lgamma(v + 1.0);
  CHECK(saturated_loglik(ds, Family(FamilyKind::kPoissonLog)) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("divergence with a zero count") {
  Eigen::VectorXd y(1);
  y << 0;
  Eigen::MatrixXd x(1, 0);
  Eigen::VectorXd mu(1);
  mu << 2.0;
  // 2 (l(0;0) - l(0;2)) = 2 * 2
  const Dataset ds(y, Eigen::MatrixXd(1, 0), {}, {});
  CHECK(kl_divergence(ds, Family(FamilyKind::kPoissonLog), mu) == doctest::Approx(4.0));
}

TEST_CASE("divergence at the boundary of the mean domain is a domain error") {
  Eigen::VectorXd y(2);
  y << 1, 0;
  Eigen::VectorXd mu(2);
  mu << 0.0, 0.5;
  const Dataset ds(y, Eigen::MatrixXd(2, 0), {}, {});
  CHECK_THROWS_AS(kl_divergence(ds, Family(FamilyKind::kBernoulliLogit), mu), DomainError);
}

TEST_CASE("intercept-only fits") {
  Eigen::VectorXd y(6);
  y << 0, 1, 1, 2, 4, 7;
  const Dataset ds = intercept_only_data(y);

  const FittedGlm pois = fit(ds, Family(FamilyKind::kPoissonLog), SubsetKey{0});
  CHECK(pois.converged);
  CHECK(std::exp(pois.beta(0)) == doctest::Approx(y.mean()).epsilon(1e-10));

  // geometric ML mean is also the sample mean; confirm on a grid
  const Family geo(FamilyKind::kGeometricLog);
  const FittedGlm g = fit(ds, geo, SubsetKey{0});
  double best_mu = 0.0;
  double best_ll = -INFINITY;
  for (double mu = 0.5; mu < 5.0; mu += 1e-4) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) ll += testsupport::oracle_log_density(FamilyKind::kGeometricLog, y(i), std::log(mu));
    if (ll > best_ll) {
      best_ll = ll;
      best_mu = mu;
    }
  }
  CHECK(std::exp(g.beta(0)) == doctest::Approx(best_mu).epsilon(1e-3));
  CHECK(std::exp(g.beta(0)) == doctest::Approx(y.mean()).epsilon(1e-9));
}

TEST_CASE("zero-truncated rate for a given mean") {
  for (double m : {1.2, 4.0 / 3.0, 2.5, 10.0}) {
    CHECK(zt_poisson_mean(zt_poisson_rate_for_mean(m)) == doctest::Approx(m).epsilon(1e-12));
  }
  CHECK_THROWS_AS(zt_poisson_rate_for_mean(1.0), DomainError);
}

TEST_CASE("score equations hold at the optimum") {
  for (FamilyKind kind : testsupport::all_families()) {
    CAPTURE(testsupport::family_label(kind));
    const Dataset ds = make_synthetic(kind, 200, 4, 11);
    const Family family = calibrated_family(kind, ds);
    const FittedGlm f = fit(ds, family, SubsetKey::full(ds.p()));
    CHECK(f.converged);
    const SubsetDesign d = select_columns(ds, SubsetKey::full(ds.p()));
    const Objective obj = evaluate_objective(d.x, ds.y(), family, f.beta);
    CHECK(obj.score.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(obj.loglik == doctest::Approx(f.loglik).epsilon(1e-12));
  }
}

TEST_CASE("log-likelihood is monotone under nesting") {
  for (FamilyKind kind : testsupport::all_families()) {
    CAPTURE(testsupport::family_label(kind));
    const Dataset ds = make_synthetic(kind, 200, 3, 5);
    const Family family = calibrated_family(kind, ds);
    std::vector<double> ll(8);
    for (std::uint64_t s = 0; s < 8; ++s) ll[s] = fit(ds, family, SubsetKey{s}).loglik;
    for (std::uint64_t s = 0; s < 8; ++s) {
      for (std::uint64_t t = 0; t < 8; ++t) {
        if ((s & t) == s) CHECK(ll[t] >= ll[s] - 1e-8);
      }
    }
  }
}

TEST_CASE("pythagorean relation for canonical links") {
  for (FamilyKind kind : {FamilyKind::kGaussianIdentity, FamilyKind::kBernoulliLogit,
                          FamilyKind::kPoissonLog}) {
    CAPTURE(testsupport::family_label(kind));
    const Dataset ds = make_synthetic(kind, 200, 3, 21);
    const Family family = calibrated_family(kind, ds);
    const FittedGlm full = fit(ds, family, SubsetKey::full(3));
    const FittedGlm small = fit(ds, family, SubsetKey{1});
    // K(y, mu_S) = K(y, mu_P) + K(mu_P, mu_S)
    const double lhs = kl_divergence(ds, family, small.mu);
    double k = 0.0;
    for (Eigen::Index i = 0; i < full.mu.size(); ++i) {
      const double a = full.mu(i);
      const double b = small.mu(i);
      switch (kind) {
        case FamilyKind::kGaussianIdentity: k += (a - b) * (a - b) / family.variance(); break;
        case FamilyKind::kBernoulliLogit:
          k += 2.0 * (a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b)));
          break;
        default: k += 2.0 * (a * std::log(a / b) - (a - b)); break;
      }
    }
    const double rhs = kl_divergence(ds, family, full.mu) + k;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
  }
}

TEST_CASE("deviance is nonnegative for non-truncated families") {
  for (FamilyKind kind : {FamilyKind::kGaussianIdentity, FamilyKind::kBernoulliLogit,
                          FamilyKind::kPoissonLog, FamilyKind::kGeometricLog}) {
    const Dataset ds = make_synthetic(kind, 150, 3, 8);
    const Family family = calibrated_family(kind, ds);
    for (std::uint64_t s = 0; s < 8; ++s) CHECK(fit(ds, family, SubsetKey{s}).deviance >= -1e-8);
  }
}

TEST_CASE("rank deficiency is reported with the aliased column") {
  Eigen::MatrixXd x(6, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
  Eigen::VectorXd y(6);
  y << 1, 0, 2, 3, 1, 4;
  const Dataset ds(y, x, {"a", "b"}, {{"a", {0}}, {"b", {1}}});
  try {
    fit(ds, Family(FamilyKind::kPoissonLog), SubsetKey{3});
    FAIL("expected SingularDesignError");
  } catch (const SingularDesignError& e) {
    CHECK(e.aliased().size() == 1);
    CHECK(e.kind() == ErrorKind::kNumerical);
  }
  CHECK_NOTHROW(fit(ds, Family(FamilyKind::kPoissonLog), SubsetKey{1}));
}

TEST_CASE("perfect separation is a numerical error") {
  Eigen::MatrixXd x(8, 1);
  x << -4, -3, -2, -1, 1, 2, 3, 4;
  Eigen::VectorXd y(8);
  y << 0, 0, 0, 0, 1, 1, 1, 1;
  const Dataset ds(y, x, {"a"}, {{"a", {0}}});
  CHECK_THROWS_AS(fit(ds, Family(FamilyKind::kBernoulliLogit), SubsetKey{1}), NumericalError);
}

TEST_CASE("response domain is validated") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 0, 1, 2;
  const Dataset ds(y, x, {"a"}, {{"a", {0}}});
  CHECK_THROWS_AS(fit(ds, Family(FamilyKind::kBernoulliLogit), SubsetKey{1}), DataError);
  CHECK_THROWS_AS(fit(ds, Family(FamilyKind::kZtPoissonLog), SubsetKey{1}), DataError);
  Eigen::VectorXd frac(3);
  frac << 0.5, 1, 2;
  CHECK_THROWS_AS(fit(ds.with_response(frac), Family(FamilyKind::kPoissonLog), SubsetKey{1}),
                  DataError);
}

TEST_CASE("score matches central finite differences") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (FamilyKind kind : testsupport::all_families()) {
    CAPTURE(testsupport::family_label(kind));
    const Dataset ds = make_synthetic(kind, 60, 3, 3);
    const Family family = calibrated_family(kind, ds);
    const SubsetDesign d = select_columns(ds, SubsetKey::full(3));
    for (int point = 0; point < 5; ++point) {
      Eigen::VectorXd beta(4);
      for (Eigen::Index j = 0; j < 4; ++j) beta(j) = normal(rng);
      const Objective obj = evaluate_objective(d.x, ds.y(), family, beta);
      for (Eigen::Index j = 0; j < 4; ++j) {
        const double h = 1e-5;
        Eigen::VectorXd up = beta, dn = beta;
        up(j) += h;
        dn(j) -= h;
        const double fd = (evaluate_objective(d.x, ds.y(), family, up).loglik -
                           evaluate_objective(d.x, ds.y(), family, dn).loglik) /
                          (2.0 * h);
        CHECK(std::abs(fd - obj.score(j)) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("gaussian calibration") {
  const Dataset ds = make_synthetic(FamilyKind::kGaussianIdentity, 100, 2, 1);
  const Family g = calibrated_family(FamilyKind::kGaussianIdentity, ds);
  const double tss = (ds.y().array() - ds.y().mean()).square().sum();
  CHECK(g.variance() == doctest::Approx(tss / 100.0));
  const Dataset flat = ds.with_response(Eigen::VectorXd::Constant(100, 2.0));
  CHECK_THROWS_AS(calibrated_family(FamilyKind::kGaussianIdentity, flat), DegenerateRunError);
  CHECK(calibrated_family(FamilyKind::kPoissonLog, ds).variance() == 1.0);
}

TEST_CASE("fit control validation") {
  FitControl c;
  c.max_iter = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = FitControl{};
  c.tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("iteration limit reports non-convergence with the best iterate") {
  const Dataset ds = make_synthetic(FamilyKind::kPoissonLog, 200, 3, 2);
  FitControl c;
  c.max_iter = 1;
  try {
    fit(ds, Family(FamilyKind::kPoissonLog), SubsetKey::full(3), c);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK_FALSE(e.best().converged);
    CHECK(std::isfinite(e.best().loglik));
  }
}

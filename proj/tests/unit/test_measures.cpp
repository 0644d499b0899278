#include <cmath>

#include "doctest.h"
#include "support/synthetic.hpp"

#include "glmshap/error.hpp"
#include "glmshap/glm.hpp"
#include "glmshap/measures.hpp"
#include "glmshap/shapley.hpp"

using namespace glmshap;

namespace {

double zt_loglik_at_rate(const Eigen::VectorXd& y, double rate) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    ll += testsupport::oracle_log_density(FamilyKind::kZtPoissonLog, y(i), std::log(rate));
  }
  return ll;
}

}  // namespace

TEST_CASE("zero-truncated null conventions") {
  // y = (1, 1, 2): the plug-in rate is the mean 4/3
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 3;
  Eigen::VectorXd y(3);
  y << 1, 1, 2;
  const Dataset ds(y, x, {"a"}, {{"a", {0}}});
  const Family zt(FamilyKind::kZtPoissonLog);

  const NullModel plugin = null_fit_convention(ds, zt, NullConvention::kPluginNull);
  CHECK(plugin.rate == doctest::Approx(4.0 / 3.0));
  CHECK(plugin.loglik == doctest::Approx(zt_loglik_at_rate(y, 4.0 / 3.0)).epsilon(1e-12));

  // ML: maximize over the rate by bisection on the derivative sign
  double lo = 1e-3, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (zt_loglik_at_rate(y, mid * (1 + 1e-9)) > zt_loglik_at_rate(y, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const NullModel ml = null_fit_convention(ds, zt, NullConvention::kMlNull);
  CHECK(ml.rate == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-6));
  CHECK(ml.loglik >= plugin.loglik);
  CHECK(zt_poisson_mean(ml.rate) == doctest::Approx(4.0 / 3.0).epsilon(1e-9));

  CHECK_THROWS_AS(null_fit_convention(ds.with_response(Eigen::Vector3d(1, 2, 3)),
                                      Family(FamilyKind::kPoissonLog), NullConvention::kPluginNull),
                  ConfigError);
}

TEST_CASE("run constants and measure identities") {
  const RunConstants c = RunConstants::make(-100.0, -40.0);
  CHECK(c.null_deviance == doctest::Approx(120.0));
  CHECK(c.c == doctest::Approx(1.0 / 60.0));
  CHECK(c.zeta == doctest::Approx(0.6));
  CHECK(c.zeta_a() == doctest::Approx(100.0 / 60.0));

  const SubsetStats s{-70.0, 60.0};
  const auto kl = FitMeasure::make(MeasureKind::kKlR2, FamilyKind::kPoissonLog);
  const auto mf = FitMeasure::make(MeasureKind::kMcFaddenR2, FamilyKind::kPoissonLog);
  const auto ll = FitMeasure::make(MeasureKind::kLogLik, FamilyKind::kPoissonLog);
  const auto sh = FitMeasure::make(MeasureKind::kShiftedLogLik, FamilyKind::kPoissonLog);
  CHECK(evaluate(kl, s, c) == doctest::Approx(0.5));
  CHECK(evaluate(mf, s, c) == doctest::Approx(0.3));
  CHECK(evaluate(ll, s, c) == -70.0);
  CHECK(evaluate(sh, s, c) == doctest::Approx(30.0));
  // KL = zeta_a * McFadden = C * (l - l0)
  CHECK(evaluate(kl, s, c) == doctest::Approx(c.zeta_a() * evaluate(mf, s, c)));
  CHECK(lr_statistic(s, c) == doctest::Approx(60.0));
  CHECK(zeta(c) == doctest::Approx(0.6));

  CHECK_THROWS_AS(RunConstants::make(-10.0, -10.0), DegenerateRunError);
  CHECK_THROWS_AS(RunConstants::make(-10.0, -11.0), DegenerateRunError);
}

TEST_CASE("measure bounds metadata") {
  const auto kl = FitMeasure::make(MeasureKind::kKlR2, FamilyKind::kGeometricLog);
  CHECK(kl.has_lower_bound);
  CHECK(kl.has_upper_bound_one);
  CHECK(FitMeasure::make(MeasureKind::kMcFaddenR2, FamilyKind::kBernoulliLogit).has_upper_bound_one);
  CHECK_FALSE(FitMeasure::make(MeasureKind::kMcFaddenR2, FamilyKind::kPoissonLog).has_upper_bound_one);
  CHECK_FALSE(FitMeasure::make(MeasureKind::kLogLik, FamilyKind::kPoissonLog).has_lower_bound);
  CHECK(FitMeasure::make(MeasureKind::kShiftedLogLik, FamilyKind::kPoissonLog).has_lower_bound);
  CHECK_FALSE(FitMeasure::make(MeasureKind::kShiftedLogLik, FamilyKind::kPoissonLog).has_upper_bound_one);
}

TEST_CASE("measure parsing") {
  const auto list = parse_measure_list("kl-r2,loglik,kl-r2", FamilyKind::kPoissonLog);
  REQUIRE(list.size() == 2);
  CHECK(list[1].kind == MeasureKind::kLogLik);
  CHECK_THROWS_AS(parse_measure_list("r2", FamilyKind::kPoissonLog), ConfigError);
  CHECK_THROWS_AS(parse_measure_list("", FamilyKind::kPoissonLog), ConfigError);
  CHECK(parse_null_convention("plugin") == NullConvention::kPluginNull);
  CHECK_THROWS_AS(parse_null_convention("bogus"), ConfigError);
}

TEST_CASE("bernoulli saturated log-likelihood vanishes") {
  const Dataset ds = testsupport::make_synthetic(FamilyKind::kBernoulliLogit, 100, 2, 4);
  CHECK(saturated_loglik(ds, Family(FamilyKind::kBernoulliLogit)) == 0.0);
}

TEST_CASE("gaussian KL R2 equals the classical R2") {
  const Dataset ds = testsupport::make_synthetic(FamilyKind::kGaussianIdentity, 120, 3, 9);
  const Family g = calibrated_family(FamilyKind::kGaussianIdentity, ds);
  const RunConstants c = RunConstants::make(fit(ds, g, SubsetKey{0}).loglik, saturated_loglik(ds, g));
  const auto kl = FitMeasure::make(MeasureKind::kKlR2, FamilyKind::kGaussianIdentity);
  for (std::uint64_t s = 0; s < 8; ++s) {
    const FittedGlm f = fit(ds, g, SubsetKey{s});
    CHECK(evaluate(kl, {f.loglik, f.deviance}, c) ==
          doctest::Approx(testsupport::oracle_r2(ds.design(), ds.y(), s)).epsilon(1e-10));
  }
}

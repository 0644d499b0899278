#include "glmshap/rootogram.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace glmshap {

namespace {

// Per-observation tail mass below which summation stops.
constexpr double kTailTolerance = 1e-13;
constexpr long kMaxSupport = 1'000'000;

}  // namespace

double RootogramData::observed_total() const {
  detail::CompensatedSum s;
  for (double v : observed) s.add(v);
  return s.value();
}

double RootogramData::expected_total() const {
  detail::CompensatedSum s;
  for (double v : expected) s.add(v);
  s.add(expected_beyond_max);
  return s.value();
}

RootogramData make_rootogram(const Eigen::VectorXd& y,
                             const std::function<double(std::size_t, long)>& prob) {
  RootogramData r;
  r.n = static_cast<std::size_t>(y.size());
  const long j_max = y.size() == 0 ? 0 : static_cast<long>(y.maxCoeff());
  for (long j = 0; j <= j_max; ++j) r.counts.push_back(j);
  r.observed.assign(r.counts.size(), 0.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) r.observed[static_cast<std::size_t>(y(i))] += 1.0;

  std::vector<detail::CompensatedSum> expected(r.counts.size());
  detail::CompensatedSum beyond;
  for (std::size_t i = 0; i < r.n; ++i) {
    double cumulative = 0.0;
    for (long j = 0; j < kMaxSupport; ++j) {
      const double f = prob(i, j);
      cumulative += f;
      if (j <= j_max) {
        expected[static_cast<std::size_t>(j)].add(f);
      } else {
        beyond.add(f);
        if (1.0 - cumulative < kTailTolerance) break;
      }
    }
  }
  for (std::size_t j = 0; j < r.counts.size(); ++j) {
    const double e = expected[j].value();
    r.expected.push_back(e);
    r.sqrt_observed.push_back(std::sqrt(r.observed[j]));
    r.sqrt_expected.push_back(std::sqrt(e));
    r.hanging_bottom.push_back(std::sqrt(e) - std::sqrt(r.observed[j]));
  }
  r.expected_beyond_max = beyond.value();
  return r;
}

RootogramData rootogram_glm(const Dataset& ds, const Family& family, const FitControl& ctl) {
  if (!family.is_discrete()) {
    throw ConfigError("rootograms require a count family, not " + family.name());
  }
  const FittedGlm full = fit(ds, family, SubsetKey::full(ds.p()), ctl);
  return make_rootogram(ds.y(), [&](std::size_t i, long j) {
    return family.probability(full.mu(static_cast<Eigen::Index>(i)), j);
  });
}

RootogramData rootogram_hurdle(const Dataset& ds, const HurdleSpec& spec,
                               const FitControl& ctl) {
  const HurdleSplit parts = split(ds);
  const auto binary_players = spec.binary_players.empty() ? ds.player_names() : spec.binary_players;
  const auto count_players = spec.count_players.empty() ? ds.player_names() : spec.count_players;

  const Family logit(FamilyKind::kBernoulliLogit);
  const Family ztp(FamilyKind::kZtPoissonLog);
  const Dataset binary = parts.binary.restrict_players(binary_players);
  const Dataset count = parts.count.restrict_players(count_players);
  const FittedGlm binary_fit = fit(binary, logit, SubsetKey::full(binary.p()), ctl);
  const FittedGlm count_fit = fit(count, ztp, SubsetKey::full(count.p()), ctl);

  const Eigen::VectorXd rate_eta = predict_eta(ds.restrict_players(count_players), count_fit);
  const Eigen::VectorXd& pi = binary_fit.mu;
  return make_rootogram(ds.y(), [&](std::size_t i, long j) {
    const auto r = static_cast<Eigen::Index>(i);
    if (j == 0) return 1.0 - pi(r);
    return pi(r) * ztp.probability(std::exp(rate_eta(r)), j);
  });
}

}  // namespace glmshap

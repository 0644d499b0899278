#include "glmshap/hurdle.hpp"

namespace glmshap {

namespace {

std::vector<std::string> resolve_players(const Dataset& ds,
                                         const std::vector<std::string>& requested) {
  return requested.empty() ? ds.player_names() : requested;
}

std::vector<FitMeasure> measures_for(const std::vector<MeasureKind>& kinds, FamilyKind family) {
  std::vector<FitMeasure> out;
  for (MeasureKind k : kinds) out.push_back(FitMeasure::make(k, family));
  return out;
}

template <typename Fn>
Analysis labeled(const std::string& part, Fn&& fn) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(e.code(), part + " part: " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(part + " part: " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(part + " part: " + e.what());
  }
}

}  // namespace

HurdleSplit split(const Dataset& ds) {
  Family(FamilyKind::kPoissonLog).validate_response(ds.y());
  std::vector<std::size_t> positive;
  Eigen::VectorXd indicator(ds.y().size());
  for (Eigen::Index i = 0; i < ds.y().size(); ++i) {
    indicator(i) = ds.y()(i) > 0.0 ? 1.0 : 0.0;
    if (ds.y()(i) > 0.0) positive.push_back(static_cast<std::size_t>(i));
  }
  if (positive.empty()) {
    throw DataError(DataErrorCode::kDegenerateHurdle,
                    "degenerate hurdle: count part is empty (no positive responses)");
  }
  if (positive.size() == ds.n()) {
    throw DataError(DataErrorCode::kDegenerateHurdle,
                    "degenerate hurdle: binary part has no zeros (all responses positive)");
  }
  return {ds.with_response(std::move(indicator)), ds.rows(positive), positive.size()};
}

HurdleReport analyze_hurdle(const Dataset& ds, const HurdleSpec& spec,
                            const std::vector<MeasureKind>& measures,
                            const EngineOptions& opts, const SamplingOptions& sampling) {
  const HurdleSplit parts = split(ds);
  const auto binary_players = resolve_players(ds, spec.binary_players);
  const auto count_players = resolve_players(ds, spec.count_players);
  if (binary_players.empty() || count_players.empty()) {
    throw ConfigError("hurdle parts need at least one player each");
  }

  HurdleReport report;
  report.n = ds.n();
  report.n_plus = parts.n_plus;

  EngineOptions binary_opts = opts;
  binary_opts.null_convention = NullConvention::kMlNull;
  report.binary = labeled("binary", [&] {
    const Family family(FamilyKind::kBernoulliLogit);
    return analyze(parts.binary.restrict_players(binary_players), family,
                   measures_for(measures, family.kind()), binary_opts, sampling);
  });
  report.count = labeled("count", [&] {
    const Family family(FamilyKind::kZtPoissonLog);
    return analyze(parts.count.restrict_players(count_players), family,
                   measures_for(measures, family.kind()), opts, sampling);
  });
  report.total_loglik = report.binary.full.loglik + report.count.full.loglik;
  return report;
}

}  // namespace glmshap

#include "glmshap/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glmshap/error.hpp"

namespace glmshap {

NullConvention parse_null_convention(std::string_view name) {
  if (name == "ml") return NullConvention::kMlNull;
  if (name == "plugin") return NullConvention::kPluginNull;
  throw ConfigError("unknown null convention '" + std::string(name) +
                    "' (expected ml or plugin)");
}

std::string to_string(NullConvention convention) {
  return convention == NullConvention::kMlNull ? "ml" : "plugin";
}

RunConstants RunConstants::make(double loglik_null, double loglik_sat,
                                NullConvention convention) {
  RunConstants rc;
  rc.loglik_null = loglik_null;
  rc.loglik_sat = loglik_sat;
  rc.convention = convention;
  rc.null_deviance = 2.0 * (loglik_sat - loglik_null);
  const double floor = std::max(1e-6, 1e-10 * std::abs(loglik_null));
  if (!(rc.null_deviance > floor)) {
    throw DegenerateRunError(
        "null deviance " + std::to_string(rc.null_deviance) +
        " is not positive; the response carries no variation to explain");
  }
  rc.c = 1.0 / (loglik_sat - loglik_null);
  rc.zeta = loglik_null == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                               : 1.0 - loglik_sat / loglik_null;
  return rc;
}

FitMeasure FitMeasure::make(MeasureKind kind, FamilyKind family) {
  FitMeasure m;
  m.kind = kind;
  switch (kind) {
    case MeasureKind::kKlR2:
      m.has_lower_bound = true;
      m.has_upper_bound_one = true;
      break;
    case MeasureKind::kMcFaddenR2:
      m.has_lower_bound = true;
      m.has_upper_bound_one = family == FamilyKind::kBernoulliLogit;
      break;
    case MeasureKind::kShiftedLogLik:
      m.has_lower_bound = true;
      m.has_upper_bound_one = false;
      break;
    case MeasureKind::kLogLik:
      m.has_lower_bound = false;
      m.has_upper_bound_one = false;
      break;
  }
  return m;
}

FitMeasure FitMeasure::parse(std::string_view name, FamilyKind family) {
  if (name == "kl-r2") return make(MeasureKind::kKlR2, family);
  if (name == "mcfadden-r2") return make(MeasureKind::kMcFaddenR2, family);
  if (name == "loglik") return make(MeasureKind::kLogLik, family);
  if (name == "shifted-loglik") return make(MeasureKind::kShiftedLogLik, family);
  throw ConfigError("unknown measure '" + std::string(name) +
                    "' (expected kl-r2, mcfadden-r2, loglik or shifted-loglik)");
}

std::string FitMeasure::name() const {
  switch (kind) {
    case MeasureKind::kKlR2: return "kl-r2";
    case MeasureKind::kMcFaddenR2: return "mcfadden-r2";
    case MeasureKind::kLogLik: return "loglik";
    case MeasureKind::kShiftedLogLik: return "shifted-loglik";
  }
  return "unknown";
}

std::vector<FitMeasure> parse_measure_list(std::string_view list, FamilyKind family) {
  std::vector<FitMeasure> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    const std::string_view item = list.substr(start, end - start);
    if (!item.empty()) {
      FitMeasure m = FitMeasure::parse(item, family);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    start = end + 1;
  }
  if (out.empty()) throw ConfigError("measure list is empty");
  return out;
}

double evaluate(const FitMeasure& measure, const SubsetStats& stats,
                const RunConstants& consts) {
  switch (measure.kind) {
    case MeasureKind::kKlR2:
      return (stats.loglik - consts.loglik_null) * consts.c;
    case MeasureKind::kMcFaddenR2:
      if (consts.loglik_null == 0.0) {
        throw DegenerateRunError("McFadden R^2 is undefined when l(empty) = 0");
      }
      return 1.0 - stats.loglik / consts.loglik_null;
    case MeasureKind::kLogLik:
      return stats.loglik;
    case MeasureKind::kShiftedLogLik:
      return stats.loglik - consts.loglik_null;
  }
  return 0.0;
}

double zeta(const RunConstants& consts) {
  if (consts.loglik_null == 0.0) {
    throw DegenerateRunError("zeta is undefined when l(empty) = 0");
  }
  return 1.0 - consts.loglik_sat / consts.loglik_null;
}

double lr_statistic(const SubsetStats& stats_full, const RunConstants& consts) {
  return 2.0 * (stats_full.loglik - consts.loglik_null);
}

NullModel null_fit_convention(const Dataset& ds, const Family& family,
                              NullConvention mode, const FitControl& ctl) {
  if (mode == NullConvention::kMlNull) {
    const FittedGlm null_fit = fit(ds, family, SubsetKey::empty(), ctl);
    return {null_fit.loglik, null_fit.mu(0)};
  }
  if (family.kind() != FamilyKind::kZtPoissonLog) {
    throw ConfigError("plugin null convention is only defined for zt-poisson, not " +
                      family.name());
  }
  family.validate_response(ds.y());
  const double rate = ds.y().mean();
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(ds.y().size(), rate);
  return {loglik(ds.y(), family, mu), rate};
}

}  // namespace glmshap

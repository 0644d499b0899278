#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "glmshap/dataset.hpp"
#include "glmshap/family.hpp"
#include "glmshap/glm.hpp"

namespace glmshap {

/// Per-subset statistics; every supported measure is an affine function of
/// the log-likelihood, so this is all that needs caching.
struct SubsetStats {
  double loglik = 0.0;
  double deviance = 0.0;

  friend bool operator==(const SubsetStats&, const SubsetStats&) = default;
};

enum class NullConvention {
  kMlNull,      // intercept-only ML fit
  kPluginNull,  // zero-truncated Poisson only: rate fixed at the mean of y
};

NullConvention parse_null_convention(std::string_view name);
std::string to_string(NullConvention convention);

struct RunConstants {
  double loglik_null = 0.0;  // l(empty set) under the chosen convention
  double loglik_sat = 0.0;   // l(y, y)
  double null_deviance = 0.0;
  double zeta = 0.0;  // 1 - l(y,y) / l(empty); NaN if l(empty) == 0
  double c = 0.0;     // 1 / (l(y,y) - l(empty))
  NullConvention convention = NullConvention::kMlNull;

  /// Throws DegenerateRunError if the null deviance is not positive.
  static RunConstants make(double loglik_null, double loglik_sat,
                           NullConvention convention = NullConvention::kMlNull);

  /// -l(empty) / (l(y,y) - l(empty)): KL R^2 = zeta_a * McFadden R^2.
  double zeta_a() const { return -loglik_null * c; }
};

enum class MeasureKind { kKlR2, kMcFaddenR2, kLogLik, kShiftedLogLik };

/// A characteristic function with its boundedness metadata.
struct FitMeasure {
  MeasureKind kind = MeasureKind::kKlR2;
  bool has_lower_bound = true;
  bool has_upper_bound_one = true;

  static FitMeasure make(MeasureKind kind, FamilyKind family);
  static FitMeasure parse(std::string_view name, FamilyKind family);
  std::string name() const;

  friend bool operator==(const FitMeasure&, const FitMeasure&) = default;
};

std::vector<FitMeasure> parse_measure_list(std::string_view list, FamilyKind family);

double evaluate(const FitMeasure& measure, const SubsetStats& stats,
                const RunConstants& consts);
double zeta(const RunConstants& consts);
/// 2 (l(P) - l(empty)).
double lr_statistic(const SubsetStats& stats_full, const RunConstants& consts);

struct NullModel {
  double loglik = 0.0;
  double rate = 0.0;  // mu_0 on the family's parameter scale
};

NullModel null_fit_convention(const Dataset& ds, const Family& family,
                              NullConvention mode, const FitControl& ctl = {});

}  // namespace glmshap

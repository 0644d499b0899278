#pragma once

#include <string>
#include <vector>

#include "glmshap/dataset.hpp"
#include "glmshap/glm.hpp"
#include "glmshap/measures.hpp"
#include "glmshap/shapley.hpp"

namespace glmshap {

/// Regressors of the two hurdle parts. Empty lists mean "all players".
struct HurdleSpec {
  std::vector<std::string> binary_players;
  std::vector<std::string> count_players;
};

struct HurdleSplit {
  Dataset binary;  // y* = 1[y > 0], all n rows
  Dataset count;   // rows with y > 0
  std::size_t n_plus = 0;
};

/// Throws DataError (kDegenerateHurdle) when either part would be empty.
HurdleSplit split(const Dataset& ds);

struct HurdleReport {
  Analysis binary;  // bernoulli-logit on the positive-count indicator
  Analysis count;   // zero-truncated Poisson on the positives
  std::size_t n = 0;
  std::size_t n_plus = 0;
  double total_loglik = 0.0;  // l_binary(P) + l_zt(P)
};

/// Two independent part analyses; the null convention in `opts` applies to
/// the count part only (the binary part always uses the ML null).
HurdleReport analyze_hurdle(const Dataset& ds, const HurdleSpec& spec,
                            const std::vector<MeasureKind>& measures,
                            const EngineOptions& opts = {},
                            const SamplingOptions& sampling = {});

}  // namespace glmshap
